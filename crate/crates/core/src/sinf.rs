//! Permutations of ω through their finite pieces: cycle functions, closure
//! membership, and amalgamation in the cofinal families.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};

/// A finite injective map on ℕ.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct PartialInjection {
    map: BTreeMap<u64, u64>,
    inv: BTreeMap<u64, u64>,
}

impl PartialInjection {
    pub fn new(pairs: Vec<(u64, u64)>) -> Result<Self> {
        let mut out = PartialInjection::default();
        for (x, y) in pairs {
            out.insert(x, y)?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, x: u64, y: u64) -> Result<()> {
        match (self.map.get(&x), self.inv.get(&y)) {
            (Some(&y2), _) if y2 == y => Ok(()),
            (Some(_), _) | (_, Some(_)) => {
                Err(Error::InvalidMap(format!("{x} -> {y} breaks injectivity")))
            }
            _ => {
                self.map.insert(x, y);
                self.inv.insert(y, x);
                Ok(())
            }
        }
    }

    pub fn apply(&self, x: u64) -> Option<u64> {
        self.map.get(&x).copied()
    }

    pub fn preimage(&self, y: u64) -> Option<u64> {
        self.inv.get(&y).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.map.iter().map(|(&x, &y)| (x, y))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn support(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.map.keys().chain(self.inv.keys()).copied().collect();
        set.into_iter().collect()
    }

    pub fn extends(&self, other: &PartialInjection) -> bool {
        other.pairs().all(|(x, y)| self.apply(x) == Some(y))
    }
}

impl fmt::Debug for PartialInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs().map(|(x, y)| format!("{x}->{y}"))).finish()
    }
}

/// A multiplicity in ℕ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Count {
    Finite(u64),
    Inf,
}

impl Count {
    pub fn is_zero(self) -> bool {
        self == Count::Finite(0)
    }

    /// `self − k`, saturating at zero; ∞ stays ∞.
    pub fn minus(self, k: u64) -> Count {
        match self {
            Count::Finite(n) => Count::Finite(n.saturating_sub(k)),
            Count::Inf => Count::Inf,
        }
    }

    pub fn at_least(self, k: u64) -> bool {
        self >= Count::Finite(k)
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for Count {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        match s {
            "inf" | "∞" => Ok(Count::Inf),
            _ => s
                .parse()
                .map(Count::Finite)
                .map_err(|_| ParseError::new(1, s, "expected a count or inf")),
        }
    }
}

/// The cycle function of a permutation: counts of `n`-cycles for each finite
/// `n`, an optional tail giving the same count to every length `≥ m`, and
/// the number of infinite cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleSpec {
    pub finite: BTreeMap<u64, Count>,
    pub tail: Option<(u64, Count)>,
    pub infinite: Count,
}

impl CycleSpec {
    /// Zero entries are dropped; a tail must have a positive count.
    pub fn new(
        finite: impl IntoIterator<Item = (u64, Count)>,
        tail: Option<(u64, Count)>,
        infinite: Count,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in finite {
            if n == 0 {
                return Err(Error::InvalidMap("cycle lengths start at 1".into()));
            }
            if !c.is_zero() {
                map.insert(n, c);
            }
        }
        if let Some((m, c)) = tail {
            if m == 0 || c.is_zero() {
                return Err(Error::InvalidMap("a tail needs a positive start and count".into()));
            }
            map.retain(|&n, _| n < m);
        }
        if map.is_empty() && tail.is_none() && infinite.is_zero() {
            return Err(Error::InvalidMap("a cycle function needs a nonzero entry".into()));
        }
        Ok(CycleSpec { finite: map, tail, infinite })
    }

    pub fn count(&self, n: u64) -> Count {
        match self.tail {
            Some((m, c)) if n >= m => c,
            _ => self.finite.get(&n).copied().unwrap_or(Count::Finite(0)),
        }
    }

    /// Finite cycle lengths are bounded.
    pub fn lengths_bounded(&self) -> bool {
        self.tail.is_none()
    }

    /// Every cycle, infinite ones included, is bounded by one length.
    pub fn is_bounded(&self) -> bool {
        self.lengths_bounded() && self.infinite.is_zero()
    }

    pub fn max_length(&self) -> Option<u64> {
        if self.lengths_bounded() {
            self.finite.keys().next_back().copied()
        } else {
            None
        }
    }

    /// Chains of any length fit somewhere: in an infinite cycle or in
    /// arbitrarily long finite ones.
    pub fn absorbs_chains(&self) -> bool {
        !self.lengths_bounded() || !self.infinite.is_zero()
    }
}

impl fmt::Display for CycleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.finite.iter().map(|(n, c)| format!("{n}:{c}")).collect();
        if let Some((m, c)) = self.tail {
            parts.push(format!("{m}+:{c}"));
        }
        if !self.infinite.is_zero() {
            parts.push(format!("inf:{}", self.infinite));
        }
        f.write_str(&parts.join(","))
    }
}

impl FromStr for CycleSpec {
    type Err = ParseError;

    /// Comma-separated `n:count`, `n+:count` (every length ≥ n) and `inf:count`.
    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let mut finite = BTreeMap::new();
        let mut tail = None;
        let mut infinite = None;
        for entry in s.trim().split(',') {
            let entry = entry.trim();
            let err = |msg: &str| ParseError::new(1, entry, msg);
            let (key, count) = entry.split_once(':').ok_or_else(|| err("expected length:count"))?;
            let count: Count = count.trim().parse().map_err(|_| err("bad count"))?;
            if count.is_zero() {
                return Err(err("counts must be positive"));
            }
            let key = key.trim();
            let dup = if key == "inf" {
                infinite.replace(count).is_some()
            } else if let Some(m) = key.strip_suffix('+') {
                let m: u64 = m.parse().map_err(|_| err("bad length"))?;
                tail.replace((m, count)).is_some()
            } else {
                let n: u64 = key.parse().map_err(|_| err("bad length"))?;
                finite.insert(n, count).is_some()
            };
            if dup {
                return Err(err("repeated entry"));
            }
        }
        CycleSpec::new(finite, tail, infinite.unwrap_or(Count::Finite(0)))
            .map_err(|e| ParseError::new(1, s, &e.to_string()))
    }
}

/// Vertex counts of the cycles and maximal chains, each sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub cycles: Vec<usize>,
    pub chains: Vec<usize>,
}

/// Components as vertex sequences in map order, with a flag for cycles.
fn components(q: &PartialInjection) -> Vec<(Vec<u64>, bool)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for x in q.support() {
        if q.preimage(x).is_none() {
            let mut chain = vec![x];
            let mut y = x;
            while let Some(z) = q.apply(y) {
                chain.push(z);
                y = z;
            }
            seen.extend(chain.iter().copied());
            out.push((chain, false));
        }
    }
    for x in q.support() {
        if !seen.contains(&x) {
            let mut cycle = vec![x];
            let mut y = q.apply(x).unwrap();
            while y != x {
                cycle.push(y);
                y = q.apply(y).unwrap();
            }
            seen.extend(cycle.iter().copied());
            out.push((cycle, true));
        }
    }
    out
}

pub fn cycle_chain_decompose(q: &PartialInjection) -> Decomposition {
    let mut cycles = Vec::new();
    let mut chains = Vec::new();
    for (vs, cyc) in components(q) {
        if cyc { cycles.push(vs.len()) } else { chains.push(vs.len()) }
    }
    cycles.sort();
    chains.sort();
    Decomposition { cycles, chains }
}

pub fn sinf_in_closure(g: &CycleSpec, r: &CycleSpec) -> bool {
    let horizon = [g.finite.keys().next_back(), r.finite.keys().next_back()]
        .into_iter()
        .flatten()
        .copied()
        .chain([g.tail.map_or(0, |t| t.0), r.tail.map_or(0, |t| t.0)])
        .max()
        .unwrap_or(0);
    // beyond the horizon both counts are constant
    let finite_ok = (1..=horizon + 1).all(|n| g.count(n) <= r.count(n));
    finite_ok && (!r.is_bounded() || g.infinite <= r.infinite)
}

pub(crate) fn count_cycles(q: &PartialInjection) -> (BTreeMap<u64, u64>, Vec<u64>) {
    let d = cycle_chain_decompose(q);
    let mut cycles = BTreeMap::new();
    for c in d.cycles {
        *cycles.entry(c as u64).or_insert(0) += 1;
    }
    (cycles, d.chains.into_iter().map(|c| c as u64).collect())
}

/// Whether `q` extends to a permutation with cycle function `r`: its cycles
/// must be available, and its chains must fit into infinite or long cycles,
/// or be packed by vertex count into the finite cycles left over.
pub fn sinf_p_member(q: &PartialInjection, r: &CycleSpec) -> bool {
    let (cycles, mut chains) = count_cycles(q);
    if cycles.iter().any(|(&n, &k)| !r.count(n).at_least(k)) {
        return false;
    }
    if chains.is_empty() || r.absorbs_chains() {
        return true;
    }
    let bins: Vec<(u64, Count)> = r
        .finite
        .iter()
        .map(|(&n, &c)| (n, c.minus(cycles.get(&n).copied().unwrap_or(0))))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    chains.sort_by(|a, b| b.cmp(a));
    pack(&chains, &bins, &mut Vec::new(), &mut vec![0; bins.len()])
}

fn pack(chains: &[u64], bins: &[(u64, Count)], open: &mut Vec<u64>, used: &mut Vec<u64>) -> bool {
    let Some((&s, rest)) = chains.split_first() else { return true };
    let mut tried = BTreeSet::new();
    for i in 0..open.len() {
        if open[i] >= s && tried.insert(open[i]) {
            open[i] -= s;
            let ok = pack(rest, bins, open, used);
            open[i] += s;
            if ok {
                return true;
            }
        }
    }
    for (b, &(len, count)) in bins.iter().enumerate() {
        if len >= s && count.at_least(used[b] + 1) {
            used[b] += 1;
            open.push(len - s);
            let ok = pack(rest, bins, open, used);
            open.pop();
            used[b] -= 1;
            if ok {
                return true;
            }
        }
    }
    false
}

/// The cofinal family used for amalgamation: finite permutations in `P_ρ`,
/// plus, when finite lengths are bounded and `ρ` has infinite cycles, at most
/// one chain, which must be longer than every finite cycle of `ρ`.
pub fn in_cofinal_family(q: &PartialInjection, r: &CycleSpec) -> bool {
    if !sinf_p_member(q, r) {
        return false;
    }
    let chains = cycle_chain_decompose(q).chains;
    if chain_family(r) {
        let bound = r.max_length().unwrap_or(0) as usize;
        chains.len() <= 1 && chains.iter().all(|&c| c > bound)
    } else {
        chains.is_empty()
    }
}

pub(crate) fn chain_family(r: &CycleSpec) -> bool {
    r.lengths_bounded() && !r.infinite.is_zero()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinfAmalgam {
    pub q3: PartialInjection,
    pub psi: PartialInjection,
}

pub fn check_sinf_amalgam(
    q0: &PartialInjection,
    q1: &PartialInjection,
    q2: &PartialInjection,
    res: &SinfAmalgam,
) -> std::result::Result<(), String> {
    if !res.q3.extends(q1) {
        return Err("q3 does not extend q1".into());
    }
    let dom: Vec<u64> = res.psi.pairs().map(|(x, _)| x).collect();
    if dom != q2.support() {
        return Err("psi is not defined exactly on the support of q2".into());
    }
    for x in q0.support() {
        if res.psi.apply(x) != Some(x) {
            return Err(format!("psi moves the base point {x}"));
        }
    }
    for (x, y) in q2.pairs() {
        let (px, py) = (res.psi.apply(x).unwrap(), res.psi.apply(y).unwrap());
        if res.q3.apply(px) != Some(py) {
            return Err(format!("q3 does not send psi({x}) = {px} to psi({y}) = {py}"));
        }
    }
    Ok(())
}

/// Cycles of `q` not contained in `base`, grouped by length.
fn private_cycles(q: &PartialInjection, base: &PartialInjection) -> BTreeMap<usize, Vec<Vec<u64>>> {
    let mut out: BTreeMap<usize, Vec<Vec<u64>>> = BTreeMap::new();
    for (vs, cyc) in components(q) {
        if cyc && base.apply(vs[0]).is_none() {
            out.entry(vs.len()).or_default().push(vs);
        }
    }
    out
}

pub(crate) fn chain_of(q: &PartialInjection) -> Option<Vec<u64>> {
    components(q).into_iter().find(|(_, cyc)| !cyc).map(|(vs, _)| vs)
}

/// Each cycle type occurs as often as in the richer of the two sides; chains
/// are merged around the shared chain, or concatenated when there is none.
pub fn sinf_amalgamate(
    q0: &PartialInjection,
    q1: &PartialInjection,
    q2: &PartialInjection,
    r: &CycleSpec,
) -> Result<SinfAmalgam> {
    for (q, name) in [(q0, "q0"), (q1, "q1"), (q2, "q2")] {
        if !in_cofinal_family(q, r) {
            return Err(Error::Precondition(format!("{name} is not in the cofinal family for {r}")));
        }
    }
    for (q, name) in [(q1, "q1"), (q2, "q2")] {
        if !q.extends(q0) {
            return Err(Error::Precondition(format!("{name} does not extend q0")));
        }
    }
    let mut next = q1.support().into_iter().chain(q2.support()).max().map_or(0, |m| m + 1);
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut q3 = q1.clone();
    let mut psi: BTreeMap<u64, u64> = q0.support().into_iter().map(|x| (x, x)).collect();

    let mine = private_cycles(q1, q0);
    for (len, theirs) in private_cycles(q2, q0) {
        let hosts = mine.get(&len).map_or(&[][..], |v| v.as_slice());
        for (j, cycle) in theirs.iter().enumerate() {
            let image: Vec<u64> = match hosts.get(j) {
                Some(h) => h.clone(),
                None => (0..len).map(|_| fresh()).collect(),
            };
            for k in 0..len {
                psi.insert(cycle[k], image[k]);
                q3.insert(image[k], image[(k + 1) % len])?;
            }
        }
    }

    if let Some(c2) = chain_of(q2) {
        match chain_of(q0) {
            Some(c0) => {
                let c1 = chain_of(q1).expect("q1 keeps the shared chain open");
                let at1 = c1.iter().position(|&x| x == c0[0]).unwrap();
                let at2 = c2.iter().position(|&x| x == c0[0]).unwrap();
                // walk outwards from the shared chain in both directions
                let mut tip = c1[0];
                for i in 1..=at2 {
                    let img = if i <= at1 { c1[at1 - i] } else {
                        let z = fresh();
                        q3.insert(z, tip)?;
                        z
                    };
                    tip = img;
                    psi.insert(c2[at2 - i], img);
                }
                let (end1, end2) = (at1 + c0.len() - 1, at2 + c0.len() - 1);
                let mut tip = *c1.last().unwrap();
                for i in 1..c2.len() - end2 {
                    let img = if end1 + i < c1.len() { c1[end1 + i] } else {
                        let z = fresh();
                        q3.insert(tip, z)?;
                        z
                    };
                    tip = img;
                    psi.insert(c2[end2 + i], img);
                }
            }
            None => {
                let mut tip = chain_of(q1).map(|c| *c.last().unwrap());
                for &x in &c2 {
                    let z = fresh();
                    if let Some(t) = tip {
                        q3.insert(t, z)?;
                    }
                    psi.insert(x, z);
                    tip = Some(z);
                }
            }
        }
    }
    let psi = PartialInjection::new(psi.into_iter().collect())?;
    for (x, y) in q2.pairs() {
        q3.insert(psi.apply(x).unwrap(), psi.apply(y).unwrap())?;
    }
    let res = SinfAmalgam { q3, psi };
    check_sinf_amalgam(q0, q1, q2, &res).map_err(Error::Internal)?;
    if !in_cofinal_family(&res.q3, r) {
        return Err(Error::Internal(format!("amalgam {:?} left the family", res.q3)));
    }
    Ok(res)
}

/// Cycle function of the generic permutation of `C_ρ`.
pub fn sinf_generic_spec(r: &CycleSpec) -> CycleSpec {
    let infinite = if r.lengths_bounded() && !r.infinite.is_zero() {
        Count::Finite(1)
    } else {
        Count::Finite(0)
    };
    CycleSpec { finite: r.finite.clone(), tail: r.tail, infinite }
}
