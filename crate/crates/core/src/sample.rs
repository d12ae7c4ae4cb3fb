//! Random instances: partial isomorphisms, canonical words, and amalgamation
//! triples `p0 ⊆ p1, p0 ⊆ p2` built by extension.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bn::{bn_capify, orbits_of, sigma_member, BnDescriptor, BnPartialIso};
use crate::closure::{p_member, richify};
use crate::fresh::{PointSupplier, Seeded};
use crate::piso::{eliminate_bad_pairs, PartialIso};
use crate::rational::Rational;
use crate::sinf::{chain_family, chain_of, count_cycles, CycleSpec, PartialInjection};
use crate::words::{canonicalize, Chi, OrderDescriptor};

/// Up to `n` pairs over the integers `-m..m`, `m = max(10, n)`.
pub fn random_piso(rng: &mut impl Rng, n: usize) -> PartialIso {
    let m = n.max(10) as i64;
    let mut pool: Vec<i64> = (-m..m).collect();
    pool.shuffle(rng);
    let k = rng.gen_range(0..=n);
    let mut dom = pool[..k].to_vec();
    pool.shuffle(rng);
    let mut rng_vals = pool[..k].to_vec();
    dom.sort();
    rng_vals.sort();
    PartialIso::from_ints(&dom.into_iter().zip(rng_vals).collect::<Vec<_>>()).unwrap()
}

/// A random non-full canonical word of length `1..=max_len` (after canonicalization).
pub fn canonical_word(rng: &mut impl Rng, max_len: usize) -> OrderDescriptor {
    loop {
        let len = rng.gen_range(1..=max_len);
        let letters: Vec<Chi> = (0..len).map(|_| *Chi::ALL.choose(rng).unwrap()).collect();
        if let Ok(w) = canonicalize(&OrderDescriptor::word(letters)) {
            return w;
        }
    }
}

/// A support point of `p` or a new point in a random gap of its support.
fn random_point(rng: &mut impl Rng, p: &PartialIso, fresh: &mut dyn PointSupplier) -> Rational {
    let s = p.support();
    if !s.is_empty() && rng.gen_bool(0.35) {
        return s.choose(rng).unwrap().clone();
    }
    let gap = rng.gen_range(0..=s.len());
    let lo = if gap > 0 { s.get(gap - 1) } else { None };
    fresh.between(lo, s.get(gap))
}

/// Adds up to `extra` random pairs accepted by `keep`.
fn extend_randomly(
    rng: &mut impl Rng,
    p: &PartialIso,
    extra: usize,
    fresh: &mut dyn PointSupplier,
    keep: &dyn Fn(&PartialIso, &Rational, &Rational) -> bool,
) -> PartialIso {
    let mut out = p.clone();
    for _ in 0..extra * 3 {
        if out.len() >= p.len() + extra {
            break;
        }
        let x = random_point(rng, &out, fresh);
        let y = random_point(rng, &out, fresh);
        let mut next = out.clone();
        if next.insert(x.clone(), y.clone()).is_ok() && next.len() > out.len() && keep(&next, &x, &y) {
            out = next;
        }
    }
    out
}

/// Three maps in `P^+_gd` with `p0 ⊆ p1` and `p0 ⊆ p2`.
pub fn plus_triple(rng: &mut impl Rng, extra: usize) -> (PartialIso, PartialIso, PartialIso) {
    let mut fresh = Seeded::new(rng.gen());
    let up = |_: &PartialIso, x: &Rational, y: &Rational| x < y;
    let base = extend_randomly(rng, &PartialIso::empty(), extra, &mut fresh, &up);
    let p0 = eliminate_bad_pairs(&base, &mut fresh).unwrap();
    let mut grow = |rng: &mut _| {
        let p = extend_randomly(rng, &p0, extra, &mut fresh, &up);
        eliminate_bad_pairs(&p, &mut fresh).unwrap()
    };
    let p1 = grow(rng);
    let p2 = grow(rng);
    (p0, p1, p2)
}

/// Three rich good maps of `P_ρ` for `r` with `p0 ⊆ p1` and `p0 ⊆ p2`.
pub fn rho_triple(
    rng: &mut impl Rng,
    r: &OrderDescriptor,
    threshold: usize,
    extra: usize,
) -> (PartialIso, PartialIso, PartialIso) {
    let mut fresh = Seeded::new(rng.gen());
    let member = |p: &PartialIso, _: &Rational, _: &Rational| p_member(p, r).is_some();
    let base = extend_randomly(rng, &PartialIso::empty(), extra, &mut fresh, &member);
    let p0 = richify(&base, r, Some(threshold), &mut fresh).unwrap();
    let mut grow = |rng: &mut _| {
        let p = extend_randomly(rng, &p0, extra, &mut fresh, &member);
        richify(&p, r, Some(threshold), &mut fresh).unwrap()
    };
    let p1 = grow(rng);
    let p2 = grow(rng);
    (p0, p1, p2)
}

fn unused_point(rng: &mut impl Rng, used: &mut BTreeSet<u64>) -> u64 {
    loop {
        let x = rng.gen_range(0..64 + 4 * used.len() as u64);
        if used.insert(x) {
            return x;
        }
    }
}

/// Adds random cycles `r` still allows and, in the chain family, grows
/// or starts the single long chain; at most `budget` new points.
pub fn grow_injection(
    rng: &mut impl Rng,
    base: &PartialInjection,
    r: &CycleSpec,
    budget: usize,
) -> PartialInjection {
    let mut q = base.clone();
    let mut used: BTreeSet<u64> = q.support().into_iter().collect();
    let mut left = budget;
    let (mut have, _) = count_cycles(&q);
    let mut lengths: Vec<u64> = r.finite.keys().copied().collect();
    if let Some((m, _)) = r.tail {
        lengths.extend(m..m + 3);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let open: Vec<u64> = lengths
            .iter()
            .copied()
            .filter(|&n| n as usize <= left && r.count(n).at_least(have.get(&n).unwrap_or(&0) + 1))
            .collect();
        let Some(&n) = open.choose(rng) else { break };
        let cycle: Vec<u64> = (0..n).map(|_| unused_point(rng, &mut used)).collect();
        for k in 0..cycle.len() {
            q.insert(cycle[k], cycle[(k + 1) % cycle.len()]).unwrap();
        }
        *have.entry(n).or_insert(0) += 1;
        left -= n as usize;
    }
    if chain_family(r) {
        let bound = r.max_length().unwrap_or(0) as usize;
        match chain_of(&q) {
            Some(chain) => {
                let mut first = chain[0];
                for _ in 0..rng.gen_range(0..=2.min(left)) {
                    let z = unused_point(rng, &mut used);
                    q.insert(z, first).unwrap();
                    first = z;
                    left -= 1;
                }
                let mut last = *chain.last().unwrap();
                for _ in 0..rng.gen_range(0..=2.min(left)) {
                    let z = unused_point(rng, &mut used);
                    q.insert(last, z).unwrap();
                    last = z;
                }
            }
            None if left > bound && rng.gen_bool(0.5) => {
                let len = rng.gen_range(bound + 1..=left.min(bound + 3));
                let chain: Vec<u64> = (0..len).map(|_| unused_point(rng, &mut used)).collect();
                for w in chain.windows(2) {
                    q.insert(w[0], w[1]).unwrap();
                }
            }
            None => {}
        }
    }
    q
}

/// Three maps of the cofinal family for `r` with `q0 ⊆ q1` and `q0 ⊆ q2`.
pub fn sinf_triple(
    rng: &mut impl Rng,
    r: &CycleSpec,
    max_points: usize,
) -> (PartialInjection, PartialInjection, PartialInjection) {
    let q0 = grow_injection(rng, &PartialInjection::default(), r, max_points / 3);
    let q1 = grow_injection(rng, &q0, r, max_points / 3);
    let q2 = grow_injection(rng, &q0, r, max_points / 3);
    (q0, q1, q2)
}

/// A uniformly random permutation of `1..=n` in the `sigma[i-1] = σ(i)` convention.
pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=n).collect();
    v.shuffle(rng);
    v
}

/// A random canonical descriptor; each orbit word is FULL with probability 1/8.
pub fn bn_descriptor(rng: &mut impl Rng, n: usize, max_len: usize) -> BnDescriptor {
    let sigma = random_permutation(rng, n);
    let words = orbits_of(&sigma)
        .into_iter()
        .map(|o| {
            let w = if rng.gen_ratio(1, 8) { OrderDescriptor::full() } else { canonical_word(rng, max_len) };
            (o[0], w)
        })
        .collect();
    BnDescriptor::new(sigma, words).unwrap()
}

fn random_bn_pair(
    rng: &mut impl Rng,
    p: &BnPartialIso,
    sigma: &[usize],
    fresh: &mut dyn PointSupplier,
) -> Option<BnPartialIso> {
    let a = rng.gen_range(1..=sigma.len());
    let b = sigma[a - 1];
    let mut point = |rng: &mut dyn rand::RngCore, c: usize| {
        let s = p.support_on(c);
        if !s.is_empty() && rng.gen_bool(0.35) {
            return s.choose(rng).unwrap().clone();
        }
        let gap = rng.gen_range(0..=s.len());
        let lo = if gap > 0 { s.get(gap - 1) } else { None };
        fresh.between(lo, s.get(gap))
    };
    let x = point(rng, a);
    let y = point(rng, b);
    let mut next = p.clone();
    (next.insert((a, x), (b, y)).is_ok() && next.len() > p.len()).then_some(next)
}

/// Up to `k` random pairs, each moving chain `a` to chain `σ(a)`.
pub fn random_bn_piso(rng: &mut impl Rng, sigma: &[usize], k: usize) -> BnPartialIso {
    let mut fresh = Seeded::new(rng.gen());
    let mut p = BnPartialIso::default();
    for _ in 0..k {
        if let Some(next) = random_bn_pair(rng, &p, sigma, &mut fresh) {
            p = next;
        }
    }
    p
}

/// Three maps of the cofinal family for `d` with `p0 ⊆ p1` and `p0 ⊆ p2`.
pub fn bn_triple(
    rng: &mut impl Rng,
    d: &BnDescriptor,
    threshold: usize,
    extra: usize,
) -> (BnPartialIso, BnPartialIso, BnPartialIso) {
    let mut fresh = Seeded::new(rng.gen());
    let mut grow = |rng: &mut _, base: &BnPartialIso| {
        let mut p = base.clone();
        for _ in 0..extra * 3 {
            if p.len() >= base.len() + extra {
                break;
            }
            if let Some(next) = random_bn_pair(rng, &p, &d.sigma, &mut fresh) {
                if sigma_member(&next, d) {
                    p = next;
                }
            }
        }
        bn_capify(d, &p, Some(threshold), &mut fresh).unwrap()
    };
    let p0 = grow(rng, &BnPartialIso::default());
    let p1 = grow(rng, &p0);
    let p2 = grow(rng, &p0);
    (p0, p1, p2)
}
