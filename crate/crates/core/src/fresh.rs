//! Suppliers of new rational points inside prescribed open intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rational;

/// Chooses a point strictly inside `(lo, hi)`; a missing bound means that side is unbounded.
pub trait PointSupplier {
    fn between(&mut self, lo: Option<&Rational>, hi: Option<&Rational>) -> Rational;
}

/// Arithmetic mean of the bounds; one unit beyond a lone bound; zero when unbounded.
#[derive(Debug, Clone, Copy, Default)]
pub struct Midpoint;

impl PointSupplier for Midpoint {
    fn between(&mut self, lo: Option<&Rational>, hi: Option<&Rational>) -> Rational {
        match (lo, hi) {
            (Some(a), Some(b)) => {
                debug_assert!(a < b, "empty interval ({a}, {b})");
                Rational::midpoint(a, b)
            }
            (Some(a), None) => a + &Rational::one(),
            (None, Some(b)) => b - &Rational::one(),
            (None, None) => Rational::zero(),
        }
    }
}

/// Reproducible random choice: a point at a random sixteenth of the interval.
#[derive(Debug, Clone)]
pub struct Seeded {
    rng: ChaCha8Rng,
}

impl Seeded {
    pub fn new(seed: u64) -> Self {
        Seeded { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl PointSupplier for Seeded {
    fn between(&mut self, lo: Option<&Rational>, hi: Option<&Rational>) -> Rational {
        let k: i64 = self.rng.gen_range(1..16);
        let step = Rational::new(k, 16);
        match (lo, hi) {
            (Some(a), Some(b)) => Rational::lerp(a, b, &step),
            (Some(a), None) => a + &Rational::new(k, 4),
            (None, Some(b)) => b - &Rational::new(k, 4),
            (None, None) => Rational::new(k - 8, 4),
        }
    }
}

/// A point in `(lo, hi)` that avoids every element of `avoid` (which must be sorted).
pub fn fresh_avoiding(
    fresh: &mut dyn PointSupplier,
    lo: Option<&Rational>,
    hi: Option<&Rational>,
    avoid: &[Rational],
) -> Rational {
    let above = match lo {
        Some(l) => avoid.partition_point(|x| x <= l),
        None => 0,
    };
    let next = avoid.get(above);
    let hi2 = match (next, hi) {
        (Some(n), Some(h)) => Some(if n < h { n } else { h }),
        (Some(n), None) => Some(n),
        (None, h) => h,
    };
    fresh.between(lo, hi2)
}

/// `k` strictly increasing points in `(lo, hi)`, none of them in `avoid` (sorted).
pub fn spread(
    fresh: &mut dyn PointSupplier,
    lo: Option<&Rational>,
    hi: Option<&Rational>,
    k: usize,
    avoid: &[Rational],
) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::with_capacity(k);
    for _ in 0..k {
        let cur = out.last().cloned();
        let l = cur.as_ref().or(lo);
        let x = fresh_avoiding(fresh, l, hi, avoid);
        out.push(x);
    }
    out
}
