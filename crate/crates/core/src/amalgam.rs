//! Amalgamation of good partial isomorphisms: one parity at a time, at the
//! level of colored orders, and for the rich good maps of a closure `C_ρ`.

use crate::closure::{
    default_threshold, is_rich, p_member, place_grouped, rich_block_assignments,
};
use crate::error::{Error, Result};
use crate::fresh::{spread, PointSupplier};
use crate::piso::{
    eliminate_within, find_bad_pairs, glue_orbitals, is_good, negate_bounds, orbital_quotient,
    Negated, PartialIso,
};
use crate::rational::Rational;
use crate::words::{Color, OrderDescriptor};

/// `p3 ⊇ p1` together with an increasing map `psi` fixing `supp(p0)` and
/// conjugating `p2` into `p3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmalgamResult {
    pub p3: PartialIso,
    pub psi: PartialIso,
}

/// Checks the four amalgam conditions, naming the first that fails.
pub fn check_amalgam(
    p0: &PartialIso,
    p1: &PartialIso,
    p2: &PartialIso,
    res: &AmalgamResult,
) -> std::result::Result<(), String> {
    if !res.p3.extends(p1) {
        return Err("p3 does not extend p1".into());
    }
    let dom: Vec<Rational> = res.psi.domain().cloned().collect();
    if dom != p2.support() {
        return Err("psi is not defined exactly on the support of p2".into());
    }
    if res.psi.pairs().windows(2).any(|w| w[0].1 >= w[1].1) {
        return Err("psi is not strictly increasing".into());
    }
    for x in p0.support() {
        if res.psi.apply(&x) != Some(&x) {
            return Err(format!("psi moves the base point {x}"));
        }
    }
    for (x, y) in p2.pairs() {
        let (px, py) = (res.psi.apply(x).unwrap(), res.psi.apply(y).unwrap());
        if res.p3.apply(px) != Some(py) {
            return Err(format!("p3 does not send psi({x}) = {px} to psi({y}) = {py}"));
        }
    }
    Ok(())
}

fn require_extension(p0: &PartialIso, p: &PartialIso, name: &str) -> Result<()> {
    if p.extends(p0) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} does not extend p0")))
    }
}

/// Parity of a map with at most one orbital, which must be ± and free of bad pairs.
fn single_good_orbital(p: &PartialIso, name: &str) -> Result<Option<Color>> {
    let oq = orbital_quotient(p);
    match oq.classes.as_slice() {
        [] => Ok(None),
        [o] if o.color != Color::Zero && find_bad_pairs(p).is_empty() => Ok(Some(o.color)),
        _ => Err(Error::Precondition(format!(
            "{name} must be a single ± orbital without bad pairs"
        ))),
    }
}

pub fn amalgamate_plus(
    p0: &PartialIso,
    p1: &PartialIso,
    p2: &PartialIso,
    fresh: &mut dyn PointSupplier,
) -> Result<AmalgamResult> {
    require_extension(p0, p1, "p1")?;
    require_extension(p0, p2, "p2")?;
    let mut sign = None;
    for (p, name) in [(p0, "p0"), (p1, "p1"), (p2, "p2")] {
        match (sign, single_good_orbital(p, name)?) {
            (_, None) => {}
            (None, s) => sign = s,
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Precondition("inputs have different parities".into()))
            }
            _ => {}
        }
    }
    match sign {
        None => Ok(AmalgamResult { p3: p1.clone(), psi: PartialIso::empty() }),
        Some(c) => amalgamate_signed(c, p0, p1, p2, None, None, fresh),
    }
}

/// Amalgamates maps whose pairs all move in direction `sign`, then makes the
/// result a single orbital without bad pairs inside `(lo, hi)`.
fn amalgamate_signed(
    sign: Color,
    p0: &PartialIso,
    p1: &PartialIso,
    p2: &PartialIso,
    lo: Option<&Rational>,
    hi: Option<&Rational>,
    fresh: &mut dyn PointSupplier,
) -> Result<AmalgamResult> {
    if sign == Color::Minus {
        let (l, h) = negate_bounds(lo, hi);
        let res = amalgamate_signed(
            Color::Plus,
            &p0.negate(),
            &p1.negate(),
            &p2.negate(),
            l.as_ref(),
            h.as_ref(),
            &mut Negated(fresh),
        )?;
        return Ok(AmalgamResult { p3: res.p3.negate(), psi: res.psi.negate() });
    }
    let mut res = translation_amalgam(p0, p1, p2, lo, hi, fresh)?;
    res.p3 = eliminate_within(&res.p3, lo, hi, fresh)?;
    Ok(res)
}

type Lex = (i64, i64);

/// Longest paths from a virtual source joined to every node by a 0 edge;
/// `None` when some cycle has positive weight.
fn longest_paths(n: usize, edges: &[(usize, usize, Lex)]) -> Option<Vec<Lex>> {
    let mut dist = vec![(0, 0); n];
    for round in 0..=n {
        let mut changed = false;
        for &(u, v, (a, b)) in edges {
            let cand = (dist[u].0 + a, dist[u].1 + b);
            if cand > dist[v] {
                dist[v] = cand;
                changed = true;
            }
        }
        if !changed {
            return Some(dist);
        }
        if round == n {
            break;
        }
    }
    None
}

/// Amalgam of all-increasing maps through translation coordinates: every
/// point gets a value `e` with `e(p(x)) = e(x) + 1`, where `ε` stands for an
/// infinitesimal gap between order-adjacent points. Private points of `p2`
/// are forced onto points of `p1` wherever `p1` already fixes their position.
fn translation_amalgam(
    p0: &PartialIso,
    p1: &PartialIso,
    p2: &PartialIso,
    lo: Option<&Rational>,
    hi: Option<&Rational>,
    fresh: &mut dyn PointSupplier,
) -> Result<AmalgamResult> {
    let a1 = p1.support();
    let a0 = p0.support();
    let s2 = p2.support();
    let n1 = a1.len();
    let idx1 = |x: &Rational| a1.binary_search(x).ok();
    let in_base = |x: &Rational| a0.binary_search(x).is_ok();
    let conflict = || Error::Precondition("p1 and p2 admit no common extension over p0".into());

    // node of each support point of p2: an index into a1, or n1 + private index
    let mut node: Vec<Option<usize>> =
        s2.iter().map(|x| if in_base(x) { idx1(x) } else { None }).collect();
    let pos2 = |x: &Rational| s2.binary_search(x).unwrap();
    let mut changed = true;
    while changed {
        changed = false;
        for (x, y) in p2.pairs() {
            let (ix, iy) = (pos2(x), pos2(y));
            match (node[ix], node[iy]) {
                (Some(u), None) => {
                    if let Some(z) = p1.apply(&a1[u]) {
                        node[iy] = idx1(z);
                        changed = true;
                    }
                }
                (None, Some(v)) => {
                    if let Some(z) = p1.preimage(&a1[v]) {
                        node[ix] = idx1(z);
                        changed = true;
                    }
                }
                (Some(u), Some(v)) => {
                    let fwd = p1.apply(&a1[u]).is_none_or(|z| *z == a1[v]);
                    let back = p1.preimage(&a1[v]).is_none_or(|z| *z == a1[u]);
                    if !fwd || !back {
                        return Err(conflict());
                    }
                }
                (None, None) => {}
            }
        }
    }
    let mut next = n1;
    let nodes: Vec<usize> = node
        .iter()
        .map(|n| {
            n.unwrap_or_else(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    let total = next;
    // psi must be injective, and a forced point may not collide with a base point
    for w in nodes.windows(2) {
        if w[0] == w[1] {
            return Err(conflict());
        }
    }
    for (i, x) in s2.iter().enumerate() {
        if !in_base(x) && nodes[i] < n1 && in_base(&a1[nodes[i]]) {
            return Err(conflict());
        }
    }

    let mut edges: Vec<(usize, usize, Lex)> = Vec::new();
    let link = |edges: &mut Vec<_>, u: usize, v: usize| {
        edges.push((u, v, (1, 0)));
        edges.push((v, u, (-1, 0)));
    };
    for (x, y) in p1.pairs() {
        link(&mut edges, idx1(x).unwrap(), idx1(y).unwrap());
    }
    for (x, y) in p2.pairs() {
        link(&mut edges, nodes[pos2(x)], nodes[pos2(y)]);
    }
    for i in 1..n1 {
        edges.push((i - 1, i, (0, 1)));
    }
    for w in nodes.windows(2) {
        edges.push((w[0], w[1], (0, 1)));
    }
    let mut dist = longest_paths(total, &edges).ok_or_else(conflict)?;

    // separate a1 points from private points that landed on the same value
    loop {
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by_key(|&v| (dist[v], v));
        let Some(w) = order.windows(2).find(|w| dist[w[0]] == dist[w[1]]) else { break };
        let (u, v) = (w[0], w[1]);
        edges.push((u, v, (0, 1)));
        dist = match longest_paths(total, &edges) {
            Some(d) => d,
            None => {
                edges.pop();
                edges.push((v, u, (0, 1)));
                longest_paths(total, &edges)
                    .ok_or_else(|| Error::Internal("no strict order for tied points".into()))?
            }
        };
    }

    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by_key(|&v| dist[v]);
    let mut point: Vec<Option<Rational>> = (0..total)
        .map(|v| if v < n1 { Some(a1[v].clone()) } else { None })
        .collect();
    let mut k = 0;
    while k < order.len() {
        if order[k] < n1 {
            k += 1;
            continue;
        }
        let start = k;
        while k < order.len() && order[k] >= n1 {
            k += 1;
        }
        let below = if start > 0 { Some(&a1[order[start - 1]]) } else { lo };
        let above = if k < order.len() { Some(&a1[order[k]]) } else { hi };
        let pts = spread(fresh, below, above, k - start, &[]);
        for (v, pt) in order[start..k].iter().zip(pts) {
            point[*v] = Some(pt);
        }
    }
    let psi = PartialIso::new(
        s2.iter()
            .zip(&nodes)
            .map(|(x, &v)| (x.clone(), point[v].clone().unwrap()))
            .collect(),
    )?;
    let mut p3 = p1.clone();
    for (x, y) in p2.pairs() {
        p3.insert(psi.apply(x).unwrap().clone(), psi.apply(y).unwrap().clone())?;
    }
    Ok(AmalgamResult { p3, psi })
}

/// Amalgam of colored orders together with its two position embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RchAmalgam {
    pub d: Vec<Color>,
    pub psi1: Vec<usize>,
    pub psi2: Vec<usize>,
}

fn check_hom(a: &[Color], b: &[Color], phi: &[usize], name: &str) -> Result<()> {
    let ok = phi.len() == a.len()
        && phi.iter().all(|&j| j < b.len())
        && phi.windows(2).all(|w| w[0] < w[1])
        && phi.iter().zip(a).all(|(&j, &c)| b[j] == c);
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} is not an injective color-preserving monotone map")))
    }
}

/// Between consecutive images of `a`, the private points of `b` come first
/// and those of `c` after them.
fn interleave(b: &[Color], c: &[Color], phi1: &[usize], phi2: &[usize]) -> RchAmalgam {
    let mut d = Vec::with_capacity(b.len() + c.len() - phi1.len());
    let mut psi1 = vec![0; b.len()];
    let mut psi2 = vec![0; c.len()];
    let (mut jb, mut jc) = (0, 0);
    for i in 0..=phi1.len() {
        let (eb, ec) = match (phi1.get(i), phi2.get(i)) {
            (Some(&x), Some(&y)) => (x, y),
            _ => (b.len(), c.len()),
        };
        for x in jb..eb {
            psi1[x] = d.len();
            d.push(b[x]);
        }
        for y in jc..ec {
            psi2[y] = d.len();
            d.push(c[y]);
        }
        if i < phi1.len() {
            psi1[eb] = d.len();
            psi2[ec] = d.len();
            d.push(b[eb]);
        }
        jb = eb + 1;
        jc = ec + 1;
    }
    RchAmalgam { d, psi1, psi2 }
}

fn rich_order(colors: &[Color], r: &OrderDescriptor, t: usize) -> bool {
    r.full || !rich_block_assignments(colors, &r.word, t, &vec![None; colors.len()], false, 1).is_empty()
}

pub fn amalgamate_rch(
    r: &OrderDescriptor,
    threshold: usize,
    a: &[Color],
    b: &[Color],
    c: &[Color],
    phi1: &[usize],
    phi2: &[usize],
) -> Result<RchAmalgam> {
    check_hom(a, b, phi1, "phi1")?;
    check_hom(a, c, phi2, "phi2")?;
    for (x, name) in [(a, "a"), (b, "b"), (c, "c")] {
        if !rich_order(x, r, threshold) {
            return Err(Error::Precondition(format!("{name} is not rich for {r}")));
        }
    }
    let res = interleave(b, c, phi1, phi2);
    if !rich_order(&res.d, r, threshold) {
        return Err(Error::Internal(format!("amalgam {:?} is not rich", res.d)));
    }
    Ok(res)
}

/// The class of `p1`'s quotient containing each class of `p0`'s.
pub fn induced_hom(p0: &PartialIso, p1: &PartialIso) -> Result<Vec<usize>> {
    require_extension(p0, p1, "the larger map")?;
    let q1 = orbital_quotient(p1);
    Ok(orbital_quotient(p0)
        .classes
        .iter()
        .map(|o| q1.class_of(o.min()).unwrap())
        .collect())
}

/// Amalgamation inside `P^rch_ρ ∩ P_gd`; for the full descriptor, inside `P_gd`.
pub fn amalgamate_rho(
    r: &OrderDescriptor,
    p0: &PartialIso,
    p1: &PartialIso,
    p2: &PartialIso,
    threshold: Option<usize>,
    fresh: &mut dyn PointSupplier,
) -> Result<AmalgamResult> {
    let t = threshold.unwrap_or_else(|| default_threshold(r.len()));
    for (p, name) in [(p0, "p0"), (p1, "p1"), (p2, "p2")] {
        if !is_good(p) {
            return Err(Error::Precondition(format!("{name} is not good")));
        }
        if !r.full {
            if p_member(p, r).is_none() {
                return Err(Error::Precondition(format!("{name} is not in P_ρ for {r}")));
            }
            if is_rich(p, r, Some(t))?.is_none() {
                return Err(Error::Precondition(format!("{name} is not rich for {r}")));
            }
        }
    }
    let phi1 = induced_hom(p0, p1)?;
    let phi2 = induced_hom(p0, p2)?;
    let (q0, q1, q2) = (orbital_quotient(p0), orbital_quotient(p1), orbital_quotient(p2));
    let l = amalgamate_rch(r, t, &q0.colors(), &q1.colors(), &q2.colors(), &phi1, &phi2)?;

    let m = l.d.len();
    let mut from1 = vec![None; m];
    let mut from2 = vec![None; m];
    for (x, &k) in l.psi1.iter().enumerate() {
        from1[k] = Some(x);
    }
    for (y, &k) in l.psi2.iter().enumerate() {
        from2[k] = Some(y);
    }
    let bounds: Vec<(Option<Rational>, Option<Rational>)> = (0..m.saturating_sub(1))
        .map(|k| {
            let below = (0..=k).rev().find_map(|j| from1[j]).map(|x| q1.classes[x].max().clone());
            let above = (k + 1..m).find_map(|j| from1[j]).map(|x| q1.classes[x].min().clone());
            (below, above)
        })
        .collect();
    let cuts = place_grouped(&bounds, fresh);

    let mut p3 = p1.clone();
    let mut psi_pairs: Vec<(Rational, Rational)> = Vec::new();
    for k in 0..m {
        let lo = if k > 0 { Some(&cuts[k - 1]) } else { None };
        let hi = cuts.get(k);
        match (from1[k], from2[k]) {
            (Some(x), Some(y)) => {
                let i = phi1.iter().position(|&v| v == x).unwrap();
                let in_class = |cls: &[Rational]| {
                    let cls = cls.to_vec();
                    move |z: &Rational| cls.binary_search(z).is_ok()
                };
                let c0 = p0.restrict(in_class(&q0.classes[i].members));
                let c1 = p1.restrict(in_class(&q1.classes[x].members));
                let c2 = p2.restrict(in_class(&q2.classes[y].members));
                if l.d[k] == Color::Zero {
                    psi_pairs.extend(q2.classes[y].members.iter().map(|z| (z.clone(), z.clone())));
                    continue;
                }
                let piece = amalgamate_signed(l.d[k], &c0, &c1, &c2, lo, hi, fresh)?;
                for (u, v) in piece.p3.pairs() {
                    p3.insert(u.clone(), v.clone())?;
                }
                psi_pairs.extend(piece.psi.pairs().iter().cloned());
            }
            (None, Some(y)) => {
                let members = &q2.classes[y].members;
                let pts = spread(fresh, lo, hi, members.len(), &[]);
                psi_pairs.extend(members.iter().cloned().zip(pts));
            }
            _ => {}
        }
    }
    let psi = PartialIso::new(psi_pairs)?;
    for (x, y) in p2.pairs() {
        p3.insert(psi.apply(x).unwrap().clone(), psi.apply(y).unwrap().clone())?;
    }
    let p3 = glue_orbitals(&p3, fresh)?;
    let res = AmalgamResult { p3, psi };
    check_amalgam(p0, p1, p2, &res).map_err(Error::Internal)?;
    let member = r.full || p_member(&res.p3, r).is_some();
    let rich = r.full || is_rich(&res.p3, r, Some(t))?.is_some();
    if !is_good(&res.p3) || !member || !rich {
        return Err(Error::Internal(format!("amalgam {:?} left the family", res.p3)));
    }
    Ok(res)
}
