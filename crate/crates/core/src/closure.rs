//! Membership in conjugacy-class closures, richness, and the cofinal normal
//! form of rich good isomorphisms.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::fresh::{spread, PointSupplier};
use crate::piso::{glue_orbitals, is_good, orbital_quotient, OrbitalQuotient, PartialIso};
use crate::rational::Rational;
use crate::words::{
    chi_hom_exists, embed_into_word, embed_into_word_constrained, is_canonical, Chi, Color,
    OrderDescriptor,
};

/// Consecutive runs of quotient classes, one per letter of the governing word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RichWitness {
    pub blocks: Vec<Range<usize>>,
    pub threshold: usize,
}

impl RichWitness {
    /// Letter index of each class.
    pub fn letters(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, b) in self.blocks.iter().enumerate() {
            out.extend(std::iter::repeat_n(k, b.len()));
        }
        out
    }
}

/// `n^n` for a word of length `n`, saturating.
pub fn default_threshold(n: usize) -> usize {
    let mut t: usize = 1;
    for _ in 0..n {
        t = t.saturating_mul(n);
    }
    t
}

pub fn in_closure(g: &OrderDescriptor, r: &OrderDescriptor) -> Result<bool> {
    for d in [g, r] {
        if !is_canonical(d) {
            return Err(Error::Precondition(format!("{d} is not canonical")));
        }
    }
    if r.full {
        return Ok(true);
    }
    if g.full {
        return Ok(false);
    }
    Ok(chi_hom_exists(g, r).is_some())
}

/// A letter for each orbital of `p`, if the colored quotient embeds into `r`.
pub fn p_member(p: &PartialIso, r: &OrderDescriptor) -> Option<Vec<usize>> {
    embed_into_word(&orbital_quotient(p).colors(), r)
}

/// Number of disjoint increasing `(e1, e2)` pairs, taken greedily.
pub fn pair_count(colors: &[Color], e1: Color, e2: Color) -> usize {
    let mut count = 0;
    let mut open = false;
    for &c in colors {
        if !open && c == e1 {
            open = true;
        } else if open && c == e2 {
            open = false;
            count += 1;
        }
    }
    count
}

/// The color a rich block of `word[k]` starts with. `∞_{−0}` right after
/// `∞_{+−}` starts with 0 so the two − orbitals at the junction stay apart.
pub fn start_color(word: &[Chi], k: usize) -> Option<Color> {
    let (e1, _) = word[k].pair()?;
    if word[k] == Chi::IMZ && k > 0 && word[k - 1] == Chi::IPM {
        Some(Color::Zero)
    } else {
        Some(e1)
    }
}

fn block_ok(word: &[Chi], k: usize, block: &[Color], t: usize, strict: bool) -> bool {
    let letter = word[k];
    if block.is_empty() || !block.iter().all(|&c| letter.accepts(c)) {
        return false;
    }
    match letter {
        Chi::P | Chi::M | Chi::Z => block.len() == 1,
        Chi::I0 => block.len() >= t,
        _ => {
            let (e1, e2) = letter.pair().unwrap();
            pair_count(block, e1, e2) >= t
                && (!strict
                    || (Some(block[0]) == start_color(word, k) && *block.last().unwrap() == e2))
        }
    }
}

/// Block partitions of `colors` satisfying the richness quotas, at most `cap`
/// of them. `strict` also asks ∞-pair blocks to start and end as richify leaves them.
pub fn rich_block_assignments(
    colors: &[Color],
    word: &[Chi],
    t: usize,
    forced: &[Option<usize>],
    strict: bool,
    cap: usize,
) -> Vec<Vec<Range<usize>>> {
    let n = colors.len();
    let m = word.len();
    let ok_block = |k: usize, i: usize, j: usize| {
        (i..j).all(|x| forced[x].is_none_or(|f| f == k))
            && block_ok(word, k, &colors[i..j], t, strict)
    };
    // feasible[k][i]: letters k.. can take classes i..
    let mut feasible = vec![vec![false; n + 1]; m + 1];
    feasible[m][n] = true;
    for k in (0..m).rev() {
        for i in 0..n {
            feasible[k][i] = (i + 1..=n).any(|j| feasible[k + 1][j] && ok_block(k, i, j));
        }
    }
    let mut out = Vec::new();
    if !feasible[0][0] {
        return out;
    }
    let mut stack: Vec<Range<usize>> = Vec::new();
    fn walk(
        k: usize,
        i: usize,
        m: usize,
        n: usize,
        feasible: &[Vec<bool>],
        ok_block: &dyn Fn(usize, usize, usize) -> bool,
        stack: &mut Vec<Range<usize>>,
        out: &mut Vec<Vec<Range<usize>>>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        if k == m {
            out.push(stack.clone());
            return;
        }
        for j in i + 1..=n {
            if feasible[k + 1][j] && ok_block(k, i, j) {
                stack.push(i..j);
                walk(k + 1, j, m, n, feasible, ok_block, stack, out, cap);
                stack.pop();
            }
        }
    }
    walk(0, 0, m, n, &feasible, &ok_block, &mut stack, &mut out, cap);
    out
}

pub fn is_rich(
    p: &PartialIso,
    r: &OrderDescriptor,
    threshold: Option<usize>,
) -> Result<Option<RichWitness>> {
    if r.full {
        return Err(Error::FullDescriptor);
    }
    let t = threshold.unwrap_or_else(|| default_threshold(r.len()));
    let colors = orbital_quotient(p).colors();
    let forced = vec![None; colors.len()];
    Ok(rich_block_assignments(&colors, &r.word, t, &forced, false, 1)
        .pop()
        .map(|blocks| RichWitness { blocks, threshold: t }))
}

/// Extends `p ∈ P_ρ` to a rich good isomorphism.
pub fn richify(
    p: &PartialIso,
    r: &OrderDescriptor,
    threshold: Option<usize>,
    fresh: &mut dyn PointSupplier,
) -> Result<PartialIso> {
    richify_constrained(p, r, threshold, &[], fresh)
}

/// As [`richify`], keeping each listed support point in the given letter.
pub fn richify_constrained(
    p: &PartialIso,
    r: &OrderDescriptor,
    threshold: Option<usize>,
    pins: &[(Rational, usize)],
    fresh: &mut dyn PointSupplier,
) -> Result<PartialIso> {
    if r.full {
        return glue_orbitals(p, fresh);
    }
    if !is_canonical(r) {
        return Err(Error::NotCanonical(r.to_string()));
    }
    let t = threshold.unwrap_or_else(|| default_threshold(r.len()));
    let oq = orbital_quotient(p);
    let colors = oq.colors();
    let forced = class_pins(&oq, pins)?;
    let strict = rich_block_assignments(&colors, &r.word, t, &forced, true, 1).pop();
    if strict.is_some() && is_good(p) {
        return Ok(p.clone());
    }
    let letters = match strict {
        Some(blocks) => RichWitness { blocks, threshold: t }.letters(),
        None => embed_into_word_constrained(&colors, r, &forced).ok_or(Error::NotInClass)?,
    };
    let filled = fill_quotas(p, &oq, &letters, &r.word, t, fresh)?;
    let out = glue_orbitals(&filled, fresh)?;
    let fq = orbital_quotient(&out);
    let forced = class_pins(&fq, pins)?;
    if !is_good(&out)
        || rich_block_assignments(&fq.colors(), &r.word, t, &forced, false, 1).is_empty()
    {
        return Err(Error::Internal(format!("richify produced {out:?}")));
    }
    Ok(out)
}

fn class_pins(oq: &OrbitalQuotient, pins: &[(Rational, usize)]) -> Result<Vec<Option<usize>>> {
    let mut forced = vec![None; oq.len()];
    for (x, k) in pins {
        let c = oq
            .class_of(x)
            .ok_or_else(|| Error::OutsideSupport(x.to_string()))?;
        match forced[c] {
            Some(k2) if k2 != *k => {
                return Err(Error::Precondition(format!("class of {x} pinned to two letters")))
            }
            _ => forced[c] = Some(*k),
        }
    }
    Ok(forced)
}

/// Cut points `c_0 < … < c_{m−2}`: letter `k` owns `(c_{k−1}, c_k)`.
pub(crate) fn letter_cuts(
    oq: &OrbitalQuotient,
    letters: &[usize],
    m: usize,
    fresh: &mut dyn PointSupplier,
) -> Vec<Rational> {
    let bounds: Vec<(Option<Rational>, Option<Rational>)> = (0..m.saturating_sub(1))
        .map(|b| {
            let below = (0..oq.len()).rfind(|&c| letters[c] <= b);
            let above = (0..oq.len()).find(|&c| letters[c] > b);
            (below.map(|c| oq.classes[c].max().clone()), above.map(|c| oq.classes[c].min().clone()))
        })
        .collect();
    place_grouped(&bounds, fresh)
}

/// One point per bound pair; equal consecutive pairs share their interval in order.
pub(crate) fn place_grouped(
    bounds: &[(Option<Rational>, Option<Rational>)],
    fresh: &mut dyn PointSupplier,
) -> Vec<Rational> {
    let mut cuts = Vec::with_capacity(bounds.len());
    let mut b = 0;
    while b < bounds.len() {
        let mut e = b;
        while e + 1 < bounds.len() && bounds[e + 1] == bounds[b] {
            e += 1;
        }
        let (lo, hi) = &bounds[b];
        cuts.extend(spread(fresh, lo.as_ref(), hi.as_ref(), e - b + 1, &[]));
        b = e + 1;
    }
    cuts
}

/// Adds one new orbital per color inside the open interval `(lo, hi)`, in order.
pub(crate) fn add_orbitals(
    p: &mut PartialIso,
    colors: &[Color],
    lo: Option<&Rational>,
    hi: Option<&Rational>,
    fresh: &mut dyn PointSupplier,
) -> Result<()> {
    let needed: usize = colors.iter().map(|&c| if c == Color::Zero { 1 } else { 2 }).sum();
    let pts = spread(fresh, lo, hi, needed, &[]);
    let mut it = pts.into_iter();
    for &c in colors {
        match c {
            Color::Zero => {
                let z = it.next().unwrap();
                p.insert(z.clone(), z)?;
            }
            Color::Plus => {
                let (x, y) = (it.next().unwrap(), it.next().unwrap());
                p.insert(x, y)?;
            }
            Color::Minus => {
                let (x, y) = (it.next().unwrap(), it.next().unwrap());
                p.insert(y, x)?;
            }
        }
    }
    Ok(())
}

/// Colors to prepend and append to a letter's existing classes so that the
/// block meets its quota (and, for ∞-pair letters, the start/end convention).
fn quota_plan(word: &[Chi], k: usize, existing: &[Color], t: usize) -> (Vec<Color>, Vec<Color>) {
    let letter = word[k];
    let mut pre = Vec::new();
    let mut post = Vec::new();
    match letter {
        Chi::P | Chi::M | Chi::Z => {
            if existing.is_empty() {
                post.push(letter.colors()[0]);
            }
        }
        Chi::I0 => post.extend(std::iter::repeat_n(Color::Zero, t.saturating_sub(existing.len()))),
        _ => {
            let (e1, e2) = letter.pair().unwrap();
            let sc = start_color(word, k).unwrap();
            if existing.first() != Some(&sc) {
                pre.push(sc);
            }
            let mut seq: Vec<Color> = pre.iter().chain(existing).copied().collect();
            while pair_count(&seq, e1, e2) < t || seq.last() != Some(&e2) {
                let next = if seq.last() == Some(&e1) { e2 } else { e1 };
                seq.push(next);
                post.push(next);
            }
        }
    }
    (pre, post)
}

fn fill_quotas(
    p: &PartialIso,
    oq: &OrbitalQuotient,
    letters: &[usize],
    word: &[Chi],
    t: usize,
    fresh: &mut dyn PointSupplier,
) -> Result<PartialIso> {
    let m = word.len();
    let cuts = letter_cuts(oq, letters, m, fresh);
    let mut out = p.clone();
    for k in 0..m {
        let classes: Vec<usize> = (0..oq.len()).filter(|&c| letters[c] == k).collect();
        let existing: Vec<Color> = classes.iter().map(|&c| oq.classes[c].color).collect();
        let (pre, post) = quota_plan(word, k, &existing, t);
        let lo = if k > 0 { Some(&cuts[k - 1]) } else { None };
        let hi = cuts.get(k);
        let first = classes.first().map(|&c| oq.classes[c].min());
        let last = classes.last().map(|&c| oq.classes[c].max());
        if classes.is_empty() {
            let all: Vec<Color> = pre.into_iter().chain(post).collect();
            add_orbitals(&mut out, &all, lo, hi, fresh)?;
        } else {
            add_orbitals(&mut out, &pre, lo, first, fresh)?;
            add_orbitals(&mut out, &post, last, hi, fresh)?;
        }
    }
    Ok(out)
}

/// Richifies, then interposes new orbitals of the block's colors between
/// consecutive anchors that share a long ∞-block but not an orbital.
pub fn generic_extend(
    p: &PartialIso,
    anchors: &[Rational],
    r: &OrderDescriptor,
    threshold: Option<usize>,
    fresh: &mut dyn PointSupplier,
) -> Result<PartialIso> {
    for a in anchors {
        if !p.contains_point(a) {
            return Err(Error::OutsideSupport(a.to_string()));
        }
    }
    let base = richify(p, r, threshold, fresh)?;
    if r.full {
        return Ok(base);
    }
    let t = threshold.unwrap_or_else(|| default_threshold(r.len()));
    let oq = orbital_quotient(&base);
    let colors = oq.colors();
    let blocks = rich_block_assignments(&colors, &r.word, t, &vec![None; colors.len()], true, 1)
        .pop()
        .ok_or_else(|| Error::Internal("richified map lost its witness".into()))?;
    let letters = RichWitness { blocks, threshold: t }.letters();
    let mut anchor_classes: Vec<usize> =
        anchors.iter().map(|a| oq.class_of(a).unwrap()).collect();
    anchor_classes.sort();
    anchor_classes.dedup();
    let mut out = base.clone();
    for w in anchor_classes.windows(2) {
        let (c1, c2) = (w[0], w[1]);
        let k = letters[c1];
        if letters[c2] != k || !r.word[k].is_infinite() {
            continue;
        }
        let seq = separator(r.word[k], colors[c1], colors[c1 + 1]);
        let lo = oq.classes[c1].max();
        let hi = oq.classes[c1 + 1].min();
        add_orbitals(&mut out, &seq, Some(lo), Some(hi), fresh)?;
    }
    if out == base {
        return Ok(out);
    }
    let out = glue_orbitals(&out, fresh)?;
    let fq = orbital_quotient(&out);
    if !is_good(&out) || rich_block_assignments(&fq.colors(), &r.word, t, &vec![None; fq.len()], false, 1).is_empty() {
        return Err(Error::Internal(format!("generic extension produced {out:?}")));
    }
    Ok(out)
}

/// Shortest alternating run of the letter's colors that contains an
/// `(ε1, ε2)` pair and never repeats a ± color against its neighbours.
fn separator(letter: Chi, before: Color, after: Color) -> Vec<Color> {
    let Some((e1, e2)) = letter.pair() else { return vec![Color::Zero] };
    let clash = |a: Color, b: Color| a == b && a != Color::Zero;
    let mut seq = vec![if clash(before, e1) { e2 } else { e1 }];
    loop {
        let last = *seq.last().unwrap();
        if pair_count(&seq, e1, e2) >= 1 && !clash(last, after) {
            return seq;
        }
        seq.push(if last == e1 { e2 } else { e1 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert_eq!(default_threshold(0), 1);
        assert_eq!(default_threshold(1), 1);
        assert_eq!(default_threshold(3), 27);
    }

    #[test]
    fn greedy_pairs() {
        use Color::*;
        assert_eq!(pair_count(&[Plus, Minus, Plus, Minus], Plus, Minus), 2);
        assert_eq!(pair_count(&[Minus, Plus, Plus, Minus], Plus, Minus), 1);
        assert_eq!(pair_count(&[Zero, Minus, Zero], Minus, Zero), 1);
    }

    #[test]
    fn junction_convention() {
        let w = [Chi::IPM, Chi::IMZ];
        assert_eq!(start_color(&w, 1), Some(Color::Zero));
        assert_eq!(start_color(&[Chi::IMZ], 0), Some(Color::Minus));
        let (pre, post) = quota_plan(&w, 1, &[], 2);
        assert_eq!(pre, vec![Color::Zero]);
        assert_eq!(post, vec![Color::Minus, Color::Zero, Color::Minus, Color::Zero]);
    }

    #[test]
    fn separators_avoid_clashes() {
        use Color::*;
        assert_eq!(separator(Chi::IPM, Minus, Plus), vec![Plus, Minus]);
        assert_eq!(separator(Chi::IPM, Plus, Plus), vec![Minus, Plus, Minus]);
        assert_eq!(separator(Chi::IPM, Plus, Minus), vec![Minus, Plus, Minus, Plus]);
        assert_eq!(separator(Chi::I0, Zero, Zero), vec![Zero]);
    }
}
