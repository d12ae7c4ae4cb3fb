//! Finite partial order-isomorphisms of (Q,<), their orbitals, and the two
//! normalizations (single-orbital merging and gluing).

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::fresh::PointSupplier;
use crate::rational::Rational;
use crate::words::Color;

/// A finite strictly increasing partial injection of Q, stored as pairs sorted by argument.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PartialIso {
    pairs: Vec<(Rational, Rational)>,
}

impl PartialIso {
    pub fn empty() -> Self {
        PartialIso { pairs: Vec::new() }
    }

    pub fn new(mut pairs: Vec<(Rational, Rational)>) -> Result<Self> {
        pairs.sort();
        for w in pairs.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if x0 == x1 {
                return Err(Error::InvalidMap(format!("{x0} has two images")));
            }
            if y0 >= y1 {
                return Err(Error::InvalidMap(format!(
                    "{x0} -> {y0} and {x1} -> {y1} are not order preserving"
                )));
            }
        }
        Ok(PartialIso { pairs })
    }

    pub fn from_ints(pairs: &[(i64, i64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(x, y)| (Rational::from_int(x), Rational::from_int(y))).collect())
    }

    pub fn pairs(&self) -> &[(Rational, Rational)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn apply(&self, x: &Rational) -> Option<&Rational> {
        self.pairs.binary_search_by(|(a, _)| a.cmp(x)).ok().map(|i| &self.pairs[i].1)
    }

    /// Images are increasing along the sorted pairs, so the inverse is a binary search too.
    pub fn preimage(&self, y: &Rational) -> Option<&Rational> {
        self.pairs.binary_search_by(|(_, b)| b.cmp(y)).ok().map(|i| &self.pairs[i].0)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Rational> {
        self.pairs.iter().map(|(x, _)| x)
    }

    pub fn range(&self) -> impl Iterator<Item = &Rational> {
        self.pairs.iter().map(|(_, y)| y)
    }

    /// Dom ∪ Rng, sorted.
    pub fn support(&self) -> Vec<Rational> {
        let set: BTreeSet<&Rational> = self.domain().chain(self.range()).collect();
        set.into_iter().cloned().collect()
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        self.apply(x).is_some() || self.preimage(x).is_some()
    }

    /// Adds `x -> y`, failing if the result is no longer a partial isomorphism.
    /// Re-inserting an existing pair is a no-op.
    pub fn insert(&mut self, x: Rational, y: Rational) -> Result<()> {
        match self.pairs.binary_search_by(|(a, _)| a.cmp(&x)) {
            Ok(i) => {
                if self.pairs[i].1 == y {
                    Ok(())
                } else {
                    Err(Error::InvalidMap(format!("{x} already maps to {}", self.pairs[i].1)))
                }
            }
            Err(i) => {
                let below_ok = i == 0 || self.pairs[i - 1].1 < y;
                let above_ok = i == self.pairs.len() || y < self.pairs[i].1;
                if !(below_ok && above_ok) {
                    return Err(Error::InvalidMap(format!("{x} -> {y} breaks monotonicity")));
                }
                self.pairs.insert(i, (x, y));
                Ok(())
            }
        }
    }

    /// Graph inclusion: `self ⊇ other`.
    pub fn extends(&self, other: &PartialIso) -> bool {
        other.pairs.iter().all(|(x, y)| self.apply(x) == Some(y))
    }

    pub fn union(&self, other: &PartialIso) -> Result<PartialIso> {
        let mut out = self.clone();
        for (x, y) in &other.pairs {
            out.insert(x.clone(), y.clone())?;
        }
        Ok(out)
    }

    pub fn inverse(&self) -> PartialIso {
        PartialIso { pairs: self.pairs.iter().map(|(x, y)| (y.clone(), x.clone())).collect() }
    }

    /// Conjugate by the order reversal x ↦ −x; swaps parities + and −.
    pub fn negate(&self) -> PartialIso {
        PartialIso { pairs: self.pairs.iter().rev().map(|(x, y)| (-x, -y)).collect() }
    }

    /// Pairs whose argument satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&Rational) -> bool) -> PartialIso {
        PartialIso { pairs: self.pairs.iter().filter(|(x, _)| keep(x)).cloned().collect() }
    }

    /// Conjugate by a strictly increasing relabelling `f` of the support.
    pub fn relabel(&self, mut f: impl FnMut(&Rational) -> Rational) -> Result<PartialIso> {
        PartialIso::new(self.pairs.iter().map(|(x, y)| (f(x), f(y))).collect())
    }
}

impl fmt::Debug for PartialIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, y)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}->{y}")?;
        }
        f.write_str("}")
    }
}

/// `sign(p(a) − a)` on the domain, `sign(a − p⁻¹(a))` on the range.
pub fn parity(p: &PartialIso, a: &Rational) -> Result<Color> {
    let c = if let Some(y) = p.apply(a) {
        y.cmp(a)
    } else if let Some(x) = p.preimage(a) {
        a.cmp(x)
    } else {
        return Err(Error::OutsideSupport(a.to_string()));
    };
    Ok(Color::from_ordering(c))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbital {
    pub color: Color,
    pub members: Vec<Rational>,
}

impl Orbital {
    pub fn min(&self) -> &Rational {
        &self.members[0]
    }

    pub fn max(&self) -> &Rational {
        self.members.last().unwrap()
    }
}

/// Colored orbitals of a partial isomorphism, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrbitalQuotient {
    pub classes: Vec<Orbital>,
}

impl OrbitalQuotient {
    pub fn class_of(&self, x: &Rational) -> Option<usize> {
        let i = self.classes.partition_point(|c| c.max() < x);
        match self.classes.get(i) {
            Some(c) if c.members.binary_search(x).is_ok() => Some(i),
            _ => None,
        }
    }

    pub fn colors(&self) -> Vec<Color> {
        self.classes.iter().map(|c| c.color).collect()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Every pair relates all support points inside its hull, so classes are
/// unions of overlapping hulls: a single sweep over the support suffices.
pub fn orbital_quotient(p: &PartialIso) -> OrbitalQuotient {
    let support = p.support();
    if support.is_empty() {
        return OrbitalQuotient::default();
    }
    // reach[i] = largest support index joined to i by a hull starting at or before i
    let idx = |x: &Rational| support.binary_search(x).unwrap();
    let mut reach: Vec<usize> = (0..support.len()).collect();
    for (x, y) in p.pairs() {
        let (lo, hi) = if x <= y { (idx(x), idx(y)) } else { (idx(y), idx(x)) };
        reach[lo] = reach[lo].max(hi);
    }
    let mut classes = Vec::new();
    let mut start = 0;
    let mut end = reach[0];
    for i in 1..=support.len() {
        if i == support.len() || i > end {
            let members = support[start..i].to_vec();
            let color = parity(p, &members[0]).expect("support point");
            classes.push(Orbital { color, members });
            if i < support.len() {
                start = i;
                end = reach[i];
            }
        } else {
            end = end.max(reach[i]);
        }
    }
    OrbitalQuotient { classes }
}

/// All pairs `(a, a')`, `a < a'`, such that every orbital from a's to a''s has
/// one parity ε ∈ {+,−} and the connecting values are undefined
/// (`p(a)`, `p⁻¹(a')` for +; `p(a')`, `p⁻¹(a)` for −).
pub fn find_bad_pairs(p: &PartialIso) -> Vec<(Rational, Rational)> {
    let oq = orbital_quotient(p);
    let support = p.support();
    let class: Vec<usize> = support.iter().map(|x| oq.class_of(x).unwrap()).collect();
    let mut out = Vec::new();
    for i in 0..support.len() {
        for j in i + 1..support.len() {
            let (a, b) = (&support[i], &support[j]);
            let colors = &oq.classes[class[i]..=class[j]];
            let bad = if colors.iter().all(|c| c.color == Color::Plus) {
                p.apply(a).is_none() && p.preimage(b).is_none()
            } else if colors.iter().all(|c| c.color == Color::Minus) {
                p.apply(b).is_none() && p.preimage(a).is_none()
            } else {
                false
            };
            if bad {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

fn single_parity(p: &PartialIso) -> Result<Option<Color>> {
    let oq = orbital_quotient(p);
    let mut colors = oq.classes.iter().map(|c| c.color);
    let Some(first) = colors.next() else { return Ok(None) };
    if first == Color::Zero || colors.any(|c| c != first) {
        return Err(Error::Precondition("all orbitals must share one parity + or −".into()));
    }
    Ok(Some(first))
}

/// Open interval `(lo, hi)` under x ↦ −x.
pub(crate) fn negate_bounds(
    lo: Option<&Rational>,
    hi: Option<&Rational>,
) -> (Option<Rational>, Option<Rational>) {
    (hi.map(|h| -h), lo.map(|l| -l))
}

pub(crate) struct Negated<'a>(pub(crate) &'a mut dyn PointSupplier);

impl PointSupplier for Negated<'_> {
    fn between(&mut self, lo: Option<&Rational>, hi: Option<&Rational>) -> Rational {
        let (l, h) = negate_bounds(lo, hi);
        -self.0.between(l.as_ref(), h.as_ref())
    }
}

/// Links consecutive + orbitals `A_i < A_{i+1}` through a new point `a_i`:
/// `max A_i -> a_i -> min A_{i+1}`. The − case runs under order reversal.
pub fn merge_to_single_orbital(p: &PartialIso, fresh: &mut dyn PointSupplier) -> Result<PartialIso> {
    match single_parity(p)? {
        None => Ok(p.clone()),
        Some(Color::Plus) => merge_plus(p, fresh),
        Some(_) => Ok(merge_plus(&p.negate(), &mut Negated(fresh))?.negate()),
    }
}

fn merge_plus(p: &PartialIso, fresh: &mut dyn PointSupplier) -> Result<PartialIso> {
    let oq = orbital_quotient(p);
    let mut out = p.clone();
    for w in oq.classes.windows(2) {
        let (hi_end, lo_start) = (w[0].max(), w[1].min());
        let a = fresh.between(Some(hi_end), Some(lo_start));
        out.insert(hi_end.clone(), a.clone())?;
        out.insert(a, lo_start.clone())?;
    }
    Ok(out)
}

/// Extends `p` (single parity) to a single orbital with no bad pairs.
pub fn eliminate_bad_pairs(p: &PartialIso, fresh: &mut dyn PointSupplier) -> Result<PartialIso> {
    eliminate_within(p, None, None, fresh)
}

/// As [`eliminate_bad_pairs`], keeping new points inside `(lo, hi)`.
pub fn eliminate_within(
    p: &PartialIso,
    lo: Option<&Rational>,
    hi: Option<&Rational>,
    fresh: &mut dyn PointSupplier,
) -> Result<PartialIso> {
    match single_parity(p)? {
        None => Ok(p.clone()),
        Some(Color::Plus) => eliminate_plus(p, lo, fresh),
        Some(_) => {
            let (l, _) = negate_bounds(lo, hi);
            Ok(eliminate_plus(&p.negate(), l.as_ref(), &mut Negated(fresh))?.negate())
        }
    }
}

/// For a single + orbital, bad pairs are exactly (end, start) with an end below
/// a start. Repeatedly pick the lowest end `a` and the highest start `a'` and
/// grow a backward chain `b_k < … < b_1`, `p(b_1) = a'`, until `b_k < a`.
fn eliminate_plus(p: &PartialIso, lo: Option<&Rational>, fresh: &mut dyn PointSupplier) -> Result<PartialIso> {
    let mut p = merge_plus(p, fresh)?;
    let limit = 4 * (p.len() + 2) * (p.len() + 2);
    let mut steps = 0;
    loop {
        let ends: Vec<Rational> = p.range().filter(|y| p.apply(y).is_none()).cloned().collect();
        let starts: Vec<Rational> = p.domain().filter(|x| p.preimage(x).is_none()).cloned().collect();
        let (Some(a), Some(a2)) = (ends.iter().min(), starts.iter().max()) else { return Ok(p) };
        if a >= a2 {
            return Ok(p);
        }
        let a = a.clone();
        let mut target = a2.clone();
        while target > a {
            steps += 1;
            if steps > limit {
                return Err(Error::Internal("bad-pair elimination did not terminate".into()));
            }
            let c_star = p
                .pairs()
                .iter()
                .find(|(_, y)| *y > target)
                .map(|(x, _)| x.clone())
                .ok_or_else(|| Error::Internal(format!("no orbital covers {target}")))?;
            let support = p.support();
            let k = support.partition_point(|s| *s < c_star);
            let below = if k > 0 { Some(&support[k - 1]) } else { lo };
            let b = fresh.between(below, Some(&c_star));
            p.insert(b.clone(), target)?;
            target = b;
        }
    }
}

/// The P_gd predicate: no bad pairs and no two adjacent ± orbitals of the same parity.
pub fn is_good(p: &PartialIso) -> bool {
    let oq = orbital_quotient(p);
    let adjacent_clash =
        oq.classes.windows(2).any(|w| w[0].color == w[1].color && w[0].color != Color::Zero);
    !adjacent_clash && find_bad_pairs(p).is_empty()
}

/// Merges each maximal run of same-parity orbitals into one orbital without
/// bad pairs, inside the gap left by its neighbours.
pub fn glue_orbitals(p: &PartialIso, fresh: &mut dyn PointSupplier) -> Result<PartialIso> {
    let oq = orbital_quotient(p);
    let cls = &oq.classes;
    let mut out = p.clone();
    let mut i = 0;
    while i < cls.len() {
        let color = cls[i].color;
        let mut j = i;
        while j + 1 < cls.len() && cls[j + 1].color == color {
            j += 1;
        }
        if color != Color::Zero {
            let lo = if i > 0 { Some(cls[i - 1].max().clone()) } else { None };
            let hi = cls.get(j + 1).map(|c| c.min().clone());
            let (min, max) = (cls[i].min().clone(), cls[j].max().clone());
            let run = p.restrict(|x| *x >= min && *x <= max);
            let glued = eliminate_within(&run, lo.as_ref(), hi.as_ref(), fresh)?;
            for (x, y) in glued.pairs() {
                out.insert(x.clone(), y.clone())?;
            }
        }
        i = j + 1;
    }
    Ok(out)
}
