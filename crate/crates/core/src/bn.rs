//! The posets B_n: `n` pairwise incomparable copies of (Q,<), written
//! `(chain, point)` with chains numbered from 1. A partial automorphism moves
//! each chain onto a single chain, so its chain projection is a partial
//! injection of `{1..n}`. The conjugacy class of an automorphism ρ is given by
//! the permutation σ of the chains together with, for each σ-orbit
//! `a_1 → … → a_k`, the word of ρ^k acting on chain `a_1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Bound::{Excluded, Unbounded};
use std::str::FromStr;

use crate::amalgam::amalgamate_rho;
use crate::closure::{is_rich, p_member, richify};
use crate::error::{Error, ParseError, Result};
use crate::fresh::{fresh_avoiding, spread, PointSupplier};
use crate::piso::{is_good, PartialIso};
use crate::rational::Rational;
use crate::text::{arrow_lines, parse_chain_point};
use crate::words::{is_canonical, OrderDescriptor};

pub type Point = (usize, Rational);

/// A finite partial isomorphism of B_n.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BnPartialIso {
    map: BTreeMap<Point, Point>,
    inv: BTreeMap<Point, Point>,
}

fn chain_neighbors<'a>(
    m: &'a BTreeMap<Point, Point>,
    x: &Point,
) -> (Option<(&'a Point, &'a Point)>, Option<(&'a Point, &'a Point)>) {
    let below = m.range(..x.clone()).next_back().filter(|(k, _)| k.0 == x.0);
    let above = m.range((Excluded(x.clone()), Unbounded)).next().filter(|(k, _)| k.0 == x.0);
    (below, above)
}

impl BnPartialIso {
    pub fn new(pairs: Vec<(Point, Point)>) -> Result<Self> {
        let mut p = BnPartialIso::default();
        for (x, y) in pairs {
            p.insert(x, y)?;
        }
        Ok(p)
    }

    /// Adds `x -> y`; re-inserting an existing pair is a no-op.
    pub fn insert(&mut self, x: Point, y: Point) -> Result<()> {
        let show = |p: &Point| format!("{}:{}", p.0, p.1);
        if x.0 == 0 || y.0 == 0 {
            return Err(Error::InvalidMap("chains are numbered from 1".into()));
        }
        if let Some(old) = self.map.get(&x) {
            return if *old == y {
                Ok(())
            } else {
                Err(Error::InvalidMap(format!("{} already maps to {}", show(&x), show(old))))
            };
        }
        if let Some(pre) = self.inv.get(&y) {
            return Err(Error::InvalidMap(format!("{} is already the image of {}", show(&y), show(pre))));
        }
        if let Some((a, b)) = self.map.iter().find(|(a, _)| a.0 == x.0) {
            if b.0 != y.0 {
                return Err(Error::InvalidMap(format!(
                    "chain {} already goes to chain {} ({} -> {})",
                    x.0,
                    b.0,
                    show(a),
                    show(b)
                )));
            }
        }
        if let Some((_, a)) = self.inv.iter().find(|(b, _)| b.0 == y.0) {
            if a.0 != x.0 {
                return Err(Error::InvalidMap(format!("chain {} is already the image of chain {}", y.0, a.0)));
            }
        }
        let (below, above) = chain_neighbors(&self.map, &x);
        if below.is_some_and(|(_, b)| b.1 >= y.1) || above.is_some_and(|(_, b)| b.1 <= y.1) {
            return Err(Error::InvalidMap(format!("{} -> {} breaks monotonicity", show(&x), show(&y))));
        }
        self.map.insert(x.clone(), y.clone());
        self.inv.insert(y, x);
        Ok(())
    }

    pub fn apply(&self, x: &Point) -> Option<&Point> {
        self.map.get(x)
    }

    pub fn preimage(&self, y: &Point) -> Option<&Point> {
        self.inv.get(y)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Point, &Point)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn extends(&self, other: &BnPartialIso) -> bool {
        other.map.iter().all(|(x, y)| self.map.get(x) == Some(y))
    }

    pub fn support(&self) -> BTreeSet<Point> {
        self.map.keys().chain(self.inv.keys()).cloned().collect()
    }

    /// Sorted support points lying on `chain`.
    pub fn support_on(&self, chain: usize) -> Vec<Rational> {
        let mut out: Vec<Rational> = self
            .map
            .keys()
            .chain(self.inv.keys())
            .filter(|p| p.0 == chain)
            .map(|p| p.1.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// The induced partial injection on chain numbers.
    pub fn chain_map(&self) -> BTreeMap<usize, usize> {
        self.map.iter().map(|(a, b)| (a.0, b.0)).collect()
    }

    pub fn max_chain(&self) -> usize {
        self.support().iter().map(|p| p.0).max().unwrap_or(0)
    }
}

impl fmt::Debug for BnPartialIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, y)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}→{}:{}", x.0, x.1, y.0, y.1)?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for BnPartialIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, y) in &self.map {
            writeln!(f, "{}:{} -> {}:{}", x.0, x.1, y.0, y.1)?;
        }
        Ok(())
    }
}

impl FromStr for BnPartialIso {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = BnPartialIso::default();
        for (n, l, r) in arrow_lines(s)? {
            let x = parse_chain_point(n, l)?;
            let y = parse_chain_point(n, r)?;
            p.insert(x, y).map_err(|e| match e {
                Error::InvalidMap(m) => Error::Parse(ParseError::new(n, l, &m)),
                other => other,
            })?;
        }
        Ok(p)
    }
}

/// Checks that `sigma` (1-based, `sigma[i-1] = σ(i)`) is a permutation.
pub fn validate_sigma(sigma: &[usize]) -> Result<()> {
    let mut seen = vec![false; sigma.len()];
    for &s in sigma {
        if s == 0 || s > sigma.len() || seen[s - 1] {
            return Err(Error::Precondition(format!("{sigma:?} is not a permutation of 1..={}", sigma.len())));
        }
        seen[s - 1] = true;
    }
    Ok(())
}

/// The cycles of `sigma`, each starting at its least element.
pub fn orbits_of(sigma: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; sigma.len()];
    let mut out = Vec::new();
    for start in 1..=sigma.len() {
        if seen[start - 1] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut a = start;
        while !seen[a - 1] {
            seen[a - 1] = true;
            orbit.push(a);
            a = sigma[a - 1];
        }
        out.push(orbit);
    }
    out
}

/// Conjugacy class of an automorphism of B_n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnDescriptor {
    pub sigma: Vec<usize>,
    /// Keyed by the least chain of each orbit.
    pub orbit_words: BTreeMap<usize, OrderDescriptor>,
}

impl BnDescriptor {
    pub fn new(sigma: Vec<usize>, words: Vec<(usize, OrderDescriptor)>) -> Result<Self> {
        validate_sigma(&sigma)?;
        let keys: BTreeSet<usize> = orbits_of(&sigma).iter().map(|o| o[0]).collect();
        let mut orbit_words = BTreeMap::new();
        for (k, w) in words {
            if !keys.contains(&k) {
                return Err(Error::Precondition(format!("{k} is not the least chain of an orbit")));
            }
            if !is_canonical(&w) {
                return Err(Error::NotCanonical(w.to_string()));
            }
            if orbit_words.insert(k, w).is_some() {
                return Err(Error::Precondition(format!("orbit {k} has two words")));
            }
        }
        if let Some(k) = keys.iter().find(|k| !orbit_words.contains_key(k)) {
            return Err(Error::Precondition(format!("orbit {k} has no word")));
        }
        Ok(BnDescriptor { sigma, orbit_words })
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbits_of(&self.sigma)
    }

    pub fn word(&self, orbit: &[usize]) -> &OrderDescriptor {
        &self.orbit_words[orbit.iter().min().unwrap()]
    }
}

fn check_consistent(p: &BnPartialIso, sigma: &[usize]) -> Result<()> {
    for (a, b) in p.chain_map() {
        if a > sigma.len() || sigma[a - 1] != b {
            return Err(Error::Precondition(format!("chain {a} goes to chain {b}, not along σ")));
        }
    }
    if p.max_chain() > sigma.len() {
        return Err(Error::Precondition(format!("chain {} does not exist for n = {}", p.max_chain(), sigma.len())));
    }
    Ok(())
}

/// Images of `x` on chain `orbit[0]` under p^0, p^1, …, p^{k-1}, as far as defined.
fn transport(p: &BnPartialIso, orbit: &[usize], x: &Rational) -> Vec<Rational> {
    let mut out = vec![x.clone()];
    let mut cur = (orbit[0], x.clone());
    for &c in &orbit[1..] {
        match p.apply(&cur) {
            Some(next) if next.0 == c => {
                cur = next.clone();
                out.push(cur.1.clone());
            }
            _ => break,
        }
    }
    out
}

/// Every support point of the first chain is carried by p, p², …, p^{k-1}
/// bijectively onto the support of the later chains of its orbit. In
/// particular `Rng ∩ a_1 ⊆ Dom ∩ a_1`, `Dom ∩ a_k ⊆ Rng ∩ a_k`, and
/// `Dom ∩ a_i = Rng ∩ a_i` on the middle chains; these are checked as well.
pub fn is_symmetric(p: &BnPartialIso, sigma: &[usize]) -> bool {
    if validate_sigma(sigma).is_err() || check_consistent(p, sigma).is_err() {
        return false;
    }
    let on = |m: &BTreeMap<Point, Point>, c: usize| -> BTreeSet<Rational> {
        m.keys().filter(|x| x.0 == c).map(|x| x.1.clone()).collect()
    };
    orbits_of(sigma).iter().filter(|o| o.len() > 1).all(|orbit| {
        let k = orbit.len();
        let (dom1, rng1) = (on(&p.map, orbit[0]), on(&p.inv, orbit[0]));
        let (domk, rngk) = (on(&p.map, orbit[k - 1]), on(&p.inv, orbit[k - 1]));
        let middle = orbit[1..k - 1].iter().all(|&c| on(&p.map, c) == on(&p.inv, c));
        let s1 = p.support_on(orbit[0]);
        let paths: Vec<Vec<Rational>> = s1.iter().map(|x| transport(p, orbit, x)).collect();
        rng1.is_subset(&dom1)
            && domk.is_subset(&rngk)
            && middle
            && paths.iter().all(|t| t.len() == k)
            && (1..k).all(|i| {
                let img: Vec<Rational> = paths.iter().map(|t| t[i].clone()).collect();
                img == p.support_on(orbit[i])
            })
    })
}

/// A point in `(lo, hi)` on the target chain: one of the `2m+1` options
/// given by the gaps among, and the positions of, the `m` free points.
fn choose_point(
    lo: Option<&Rational>,
    hi: Option<&Rational>,
    free: &[Rational],
    pick: &mut dyn FnMut(usize) -> usize,
    fresh: &mut dyn PointSupplier,
) -> Rational {
    let m = free.len();
    let c = pick(2 * m + 1);
    if c > m {
        return free[c - m - 1].clone();
    }
    let l = if c == 0 { lo } else { Some(&free[c - 1]) };
    let h = if c == m { hi } else { Some(&free[c]) };
    fresh.between(l, h)
}

fn inside(x: &Rational, lo: Option<&Rational>, hi: Option<&Rational>) -> bool {
    lo.is_none_or(|l| l < x) && hi.is_none_or(|h| x < h)
}

/// Closes one orbit: backwards so every later-chain point has a preimage,
/// then forwards so every point before the last chain has an image. New
/// preimages are chosen by `pick` (option 0 is the lowest gap).
fn complete_orbit(
    p: &mut BnPartialIso,
    orbit: &[usize],
    pick: &mut dyn FnMut(usize) -> usize,
    fresh: &mut dyn PointSupplier,
) -> Result<()> {
    let k = orbit.len();
    for i in (1..k).rev() {
        let (src, dst) = (orbit[i - 1], orbit[i]);
        while let Some(y) = p.support_on(dst).into_iter().find(|y| p.preimage(&(dst, y.clone())).is_none()) {
            let (below, above) = chain_neighbors(&p.inv, &(dst, y.clone()));
            let lo = below.map(|(_, pre)| pre.1.clone());
            let hi = above.map(|(_, pre)| pre.1.clone());
            let free: Vec<Rational> =
                p.support_on(src).into_iter().filter(|z| inside(z, lo.as_ref(), hi.as_ref())).collect();
            let z = choose_point(lo.as_ref(), hi.as_ref(), &free, pick, fresh);
            p.insert((src, z), (dst, y))?;
        }
    }
    for i in 0..k - 1 {
        let (src, dst) = (orbit[i], orbit[i + 1]);
        while let Some(x) = p.support_on(src).into_iter().find(|x| p.apply(&(src, x.clone())).is_none()) {
            let (below, above) = chain_neighbors(&p.map, &(src, x.clone()));
            let lo = below.map(|(_, img)| img.1.clone());
            let hi = above.map(|(_, img)| img.1.clone());
            let z = fresh_avoiding(fresh, lo.as_ref(), hi.as_ref(), &p.support_on(dst));
            p.insert((src, x), (dst, z))?;
        }
    }
    Ok(())
}

/// On a symmetric orbit, gives every first-chain point left untouched by
/// p^k an image under the closing step `a_k → a_1`, then re-closes.
fn activate_orbit(
    p: &mut BnPartialIso,
    orbit: &[usize],
    pick: &mut dyn FnMut(usize) -> usize,
    fresh: &mut dyn PointSupplier,
) -> Result<()> {
    let (a1, ak) = (orbit[0], orbit[orbit.len() - 1]);
    loop {
        let active = first_chain_map(p, orbit)?.support();
        let Some(x) = p.support_on(a1).into_iter().find(|x| active.binary_search(x).is_err()) else {
            return Ok(());
        };
        let y = (ak, transport(p, orbit, &x).pop().unwrap());
        let (below, above) = chain_neighbors(&p.map, &y);
        let lo = below.map(|(_, img)| img.1.clone());
        let hi = above.map(|(_, img)| img.1.clone());
        let free: Vec<Rational> = p
            .support_on(a1)
            .into_iter()
            .filter(|z| inside(z, lo.as_ref(), hi.as_ref()) && p.preimage(&(a1, z.clone())).is_none())
            .collect();
        let z = choose_point(lo.as_ref(), hi.as_ref(), &free, pick, fresh);
        p.insert(y, (a1, z))?;
        complete_orbit(p, orbit, pick, fresh)?;
    }
}

/// The least symmetric extension of `p` for σ, placing new points at the
/// lowest available gap.
pub fn symmetrize(p: &BnPartialIso, sigma: &[usize], fresh: &mut dyn PointSupplier) -> Result<BnPartialIso> {
    validate_sigma(sigma)?;
    check_consistent(p, sigma)?;
    let mut out = p.clone();
    for orbit in orbits_of(sigma) {
        complete_orbit(&mut out, &orbit, &mut |_| 0, fresh)?;
    }
    Ok(out)
}

/// The action of p^k on the first chain of a k-orbit.
pub fn first_chain_map(p: &BnPartialIso, orbit: &[usize]) -> Result<PartialIso> {
    let a1 = orbit[0];
    let mut pairs = Vec::new();
    for x in p.support_on(a1) {
        let t = transport(p, orbit, &x);
        if t.len() < orbit.len() {
            continue;
        }
        if let Some(y) = p.apply(&(orbit[orbit.len() - 1], t.last().unwrap().clone())) {
            if y.0 == a1 {
                pairs.push((x, y.1.clone()));
            }
        }
    }
    PartialIso::new(pairs)
}

/// Searches the placements of `complete_orbit` (and, with `activate`, of
/// `activate_orbit`) for one whose first-chain map lies in P_ρ for `word`.
fn orbit_member(
    p: &BnPartialIso,
    orbit: &[usize],
    word: &OrderDescriptor,
    activate: bool,
    fresh: &mut dyn PointSupplier,
) -> Option<BnPartialIso> {
    if orbit.iter().all(|&c| p.support_on(c).is_empty()) {
        return Some(p.clone());
    }
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        let mut chosen: Vec<usize> = Vec::new();
        let mut arity: Vec<usize> = Vec::new();
        let mut q = p.clone();
        let mut pick = |m: usize| {
            let c = prefix.get(chosen.len()).copied().unwrap_or(0);
            chosen.push(c);
            arity.push(m);
            c
        };
        complete_orbit(&mut q, orbit, &mut pick, fresh).ok()?;
        if activate && orbit.len() > 1 {
            activate_orbit(&mut q, orbit, &mut pick, fresh).ok()?;
        }
        if p_member(&first_chain_map(&q, orbit).ok()?, word).is_some() {
            return Some(q);
        }
        let j = (0..chosen.len()).rev().find(|&j| chosen[j] + 1 < arity[j])?;
        prefix = chosen[..j].to_vec();
        prefix.push(chosen[j] + 1);
    }
}

/// A symmetric extension of `p` for σ itself whose first-chain maps are all
/// in P_ρ and act on every first-chain point.
fn symmetrize_member(p: &BnPartialIso, d: &BnDescriptor, fresh: &mut dyn PointSupplier) -> Option<BnPartialIso> {
    check_consistent(p, &d.sigma).ok()?;
    let mut q = p.clone();
    for orbit in d.orbits() {
        q = orbit_member(&q, &orbit, d.word(&orbit), true, fresh)?;
    }
    Some(q)
}

pub(crate) fn sigma_member(p: &BnPartialIso, d: &BnDescriptor) -> bool {
    symmetrize_member(p, d, &mut crate::fresh::Midpoint).is_some()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut v = rest.clone();
            v.insert(pos, n);
            out.push(v);
        }
    }
    out
}

/// Whether `p` lies in the closure P_ρ: some relabelling τ of the chains makes
/// its chain projection follow τστ⁻¹, and every orbit then closes up inside
/// the conjugacy class of ρ^k.
pub fn bn_p_member(p: &BnPartialIso, d: &BnDescriptor) -> bool {
    let n = d.n();
    if p.max_chain() > n {
        return false;
    }
    let pi = p.chain_map();
    let orbits = d.orbits();
    let mut cache: HashMap<(Vec<usize>, String), bool> = HashMap::new();
    permutations(n).into_iter().any(|tau| {
        let moved: Vec<Vec<usize>> = orbits.iter().map(|o| o.iter().map(|&a| tau[a - 1]).collect()).collect();
        let follows = pi.iter().all(|(&a, &b)| {
            moved.iter().any(|o| o.iter().position(|&c| c == a).is_some_and(|i| o[(i + 1) % o.len()] == b))
        });
        follows
            && orbits.iter().zip(&moved).all(|(o, m)| {
                let word = d.word(o);
                let key = (m.clone(), word.to_string());
                *cache
                    .entry(key)
                    .or_insert_with(|| orbit_member(p, m, word, false, &mut crate::fresh::Midpoint).is_some())
            })
    })
}

/// The cofinal family P^cap: symmetric maps whose first-chain maps act on
/// the whole first-chain support and are good, in P_ρ and, unless the word
/// is FULL, rich.
pub fn in_cap_family(d: &BnDescriptor, p: &BnPartialIso, threshold: Option<usize>) -> bool {
    is_symmetric(p, &d.sigma)
        && d.orbits().iter().all(|orbit| {
            let word = d.word(orbit);
            let Ok(f) = first_chain_map(p, orbit) else { return false };
            f.support() == p.support_on(orbit[0])
                && is_good(&f)
                && p_member(&f, word).is_some()
                && (word.full || matches!(is_rich(&f, word, threshold), Ok(Some(_))))
        })
}

/// Extends a symmetric `p` on one orbit so that its first-chain map becomes
/// `target ⊇ first_chain_map(p)`. Returns, for each chain `a_i`, the transport of the new
/// first-chain support onto it.
fn lift(
    p: &mut BnPartialIso,
    orbit: &[usize],
    target: &PartialIso,
    fresh: &mut dyn PointSupplier,
) -> Result<Vec<BTreeMap<Rational, Rational>>> {
    let k = orbit.len();
    let s1 = p.support_on(orbit[0]);
    let mut hats = vec![BTreeMap::new(); k];
    for x in &s1 {
        let t = transport(p, orbit, x);
        if t.len() < k {
            return Err(Error::Internal(format!("{:?} is not symmetric", p)));
        }
        for (i, y) in t.into_iter().enumerate() {
            hats[i].insert(x.clone(), y);
        }
    }
    let new: Vec<Rational> = target
        .support()
        .into_iter()
        .filter(|v| !hats[0].contains_key(v))
        .collect();
    for v in &new {
        hats[0].insert(v.clone(), v.clone());
    }
    for i in 1..k {
        let mut start = 0;
        while start < new.len() {
            let gap = s1.partition_point(|s| s < &new[start]);
            let end = start + new[start..].iter().take_while(|v| s1.partition_point(|s| s < *v) == gap).count();
            let lo = gap.checked_sub(1).map(|g| hats[i][&s1[g]].clone());
            let hi = s1.get(gap).map(|s| hats[i][s].clone());
            let pts = spread(fresh, lo.as_ref(), hi.as_ref(), end - start, &[]);
            for (v, z) in new[start..end].iter().zip(pts) {
                hats[i].insert(v.clone(), z);
            }
            start = end;
        }
    }
    for v in &new {
        for i in 0..k - 1 {
            p.insert((orbit[i], hats[i][v].clone()), (orbit[i + 1], hats[i + 1][v].clone()))?;
        }
    }
    for (v, w) in target.pairs() {
        p.insert((orbit[k - 1], hats[k - 1][v].clone()), (orbit[0], w.clone()))?;
    }
    Ok(hats)
}

/// Extends `p` into the cofinal family: symmetrize for σ with every
/// first-chain point active, richify each first-chain map, and carry the new
/// points along the orbit.
pub fn bn_capify(
    d: &BnDescriptor,
    p: &BnPartialIso,
    threshold: Option<usize>,
    fresh: &mut dyn PointSupplier,
) -> Result<BnPartialIso> {
    check_consistent(p, &d.sigma)?;
    let mut q = symmetrize_member(p, d, fresh).ok_or(Error::NotInClass)?;
    for orbit in d.orbits() {
        let f = first_chain_map(&q, &orbit)?;
        let target = richify(&f, d.word(&orbit), threshold, fresh)?;
        lift(&mut q, &orbit, &target, fresh)?;
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnAmalgam {
    pub p3: BnPartialIso,
    pub psi: BnPartialIso,
}

/// Checks `p3 ⊇ p1`, `psi` defined exactly on supp(p2) and fixing supp(p0),
/// and `psi ∘ p2 = p3 ∘ psi` on the domain of `p2`.
pub fn check_bn_amalgam(
    p0: &BnPartialIso,
    p1: &BnPartialIso,
    p2: &BnPartialIso,
    res: &BnAmalgam,
) -> std::result::Result<(), String> {
    if !res.p3.extends(p1) {
        return Err("p3 does not extend p1".into());
    }
    let dom: BTreeSet<Point> = res.psi.map.keys().cloned().collect();
    if dom != p2.support() {
        return Err("psi is not defined exactly on supp(p2)".into());
    }
    if let Some(x) = p0.support().into_iter().find(|x| res.psi.apply(x) != Some(x)) {
        return Err(format!("psi moves {}:{} of supp(p0)", x.0, x.1));
    }
    for (x, y) in p2.pairs() {
        let (u, v) = (res.psi.apply(x).unwrap(), res.psi.apply(y).unwrap());
        if res.p3.apply(u) != Some(v) {
            return Err(format!("p3 does not send psi({}:{}) to psi({}:{})", x.0, x.1, y.0, y.1));
        }
    }
    Ok(())
}

/// Amalgamation in the cofinal family: amalgamate the first-chain maps of
/// each orbit, then carry the result along the orbit.
pub fn bn_amalgamate(
    d: &BnDescriptor,
    p0: &BnPartialIso,
    p1: &BnPartialIso,
    p2: &BnPartialIso,
    threshold: Option<usize>,
    fresh: &mut dyn PointSupplier,
) -> Result<BnAmalgam> {
    for (p, name) in [(p0, "p0"), (p1, "p1"), (p2, "p2")] {
        if !in_cap_family(d, p, threshold) {
            return Err(Error::Precondition(format!("{name} is not in the cofinal family")));
        }
    }
    if !p1.extends(p0) || !p2.extends(p0) {
        return Err(Error::Precondition("p0 must be contained in p1 and p2".into()));
    }
    let mut p3 = p1.clone();
    let mut psi = BnPartialIso::default();
    for orbit in d.orbits() {
        let [f0, f1, f2] = [p0, p1, p2].map(|p| first_chain_map(p, &orbit));
        let (f0, f1, f2) = (f0?, f1?, f2?);
        let res = amalgamate_rho(d.word(&orbit), &f0, &f1, &f2, threshold, fresh)?;
        let hats = lift(&mut p3, &orbit, &res.p3, fresh)?;
        for (x, image) in res.psi.pairs() {
            for (i, y) in transport(p2, &orbit, x).into_iter().enumerate() {
                psi.insert((orbit[i], y), (orbit[i], hats[i][image].clone()))?;
            }
        }
    }
    let res = BnAmalgam { p3, psi };
    check_bn_amalgam(p0, p1, p2, &res).map_err(Error::Internal)?;
    if !in_cap_family(d, &res.p3, threshold) {
        return Err(Error::Internal(format!("amalgam {:?} left the cofinal family", res.p3)));
    }
    Ok(res)
}

/// Where the fixed point of a betweenness-preserving map sits: on a
/// rational, or in the open interval between the bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cut {
    Fixed(Rational),
    Between(Option<Rational>, Option<Rational>),
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |b: &Option<Rational>, inf: &str| b.as_ref().map_or(inf.to_string(), |x| x.to_string());
        match self {
            Cut::Fixed(x) => write!(f, "{x}"),
            Cut::Between(lo, hi) => write!(f, "({}, {})", show(lo, "-inf"), show(hi, "inf")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct B2Image {
    pub p: BnPartialIso,
    pub cut: Cut,
}

impl Cut {
    /// The B_2 point of `x`: above the cut on chain 1, below it on chain 2
    /// with the order reversed. `None` for the fixed point itself.
    pub fn embed(&self, x: &Rational) -> Option<Point> {
        let above = match self {
            Cut::Fixed(c) if x == c => return None,
            Cut::Fixed(c) => x > c,
            Cut::Between(_, Some(h)) if x >= h => true,
            Cut::Between(Some(l), _) if x <= l => false,
            Cut::Between(..) => return None,
        };
        Some(if above { (1, x.clone()) } else { (2, -x) })
    }
}

/// Encodes a strictly decreasing partial map of Q as a partial isomorphism of
/// B_2 that swaps the two chains.
pub fn betweenness_to_b2(q: &[(Rational, Rational)]) -> Result<B2Image> {
    let mut pairs = q.to_vec();
    pairs.sort();
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidMap(format!("{} has two images", w[0].0)));
        }
        if w[0].1 <= w[1].1 {
            return Err(Error::InvalidMap(format!("{} -> {} and {} -> {} are not strictly decreasing", w[0].0, w[0].1, w[1].0, w[1].1)));
        }
    }
    let mut low: BTreeSet<&Rational> = BTreeSet::new();
    let mut high: BTreeSet<&Rational> = BTreeSet::new();
    let mut fixed = None;
    for (x, y) in &pairs {
        match x.cmp(y) {
            std::cmp::Ordering::Less => {
                low.insert(x);
                high.insert(y);
            }
            std::cmp::Ordering::Greater => {
                high.insert(x);
                low.insert(y);
            }
            std::cmp::Ordering::Equal => fixed = Some(x.clone()),
        }
    }
    let cut = match fixed {
        Some(c) => Cut::Fixed(c),
        None => Cut::Between(low.last().map(|x| (*x).clone()), high.first().map(|x| (*x).clone())),
    };
    let mut p = BnPartialIso::default();
    for (x, y) in &pairs {
        if let (Some(u), Some(v)) = (cut.embed(x), cut.embed(y)) {
            p.insert(u, v)?;
        }
    }
    if low.iter().any(|x| cut.embed(x).map(|e| e.0) != Some(2)) || high.iter().any(|x| cut.embed(x).map(|e| e.0) != Some(1)) {
        return Err(Error::Internal("no cut separates the moved points".into()));
    }
    Ok(B2Image { p, cut })
}

/// The image sends every moved point where `q` does, and its square agrees
/// with `q²` wherever that is defined.
pub fn square_consistent(q: &[(Rational, Rational)], img: &B2Image) -> bool {
    let m: BTreeMap<&Rational, &Rational> = q.iter().map(|(x, y)| (x, y)).collect();
    m.iter().all(|(x, y)| {
        let Some(ex) = img.cut.embed(x) else { return true };
        if img.p.apply(&ex) != img.cut.embed(y).as_ref() {
            return false;
        }
        match m.get(y) {
            Some(z) => img.p.apply(&ex).and_then(|e| img.p.apply(e)) == img.cut.embed(z).as_ref(),
            None => true,
        }
    })
}
