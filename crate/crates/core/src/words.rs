//! Colored linear orders, the seven-letter χ alphabet, canonical words and
//! homomorphism tests between them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};

/// A parity: the map moves a point up, down, or fixes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Plus,
    Minus,
    Zero,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Plus, Color::Minus, Color::Zero];

    /// The color of a move from `x` to `y` when given `y.cmp(x)`.
    pub fn from_ordering(o: Ordering) -> Color {
        match o {
            Ordering::Greater => Color::Plus,
            Ordering::Less => Color::Minus,
            Ordering::Equal => Color::Zero,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Color::Plus => '+',
            Color::Minus => '-',
            Color::Zero => '0',
        }
    }

    /// The color seen through x ↦ −x.
    pub fn flip(self) -> Color {
        match self {
            Color::Plus => Color::Minus,
            Color::Minus => Color::Plus,
            Color::Zero => Color::Zero,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A finite colored linear order: position `i` is the `i`-th point.
pub type ColoredOrder = Vec<Color>;

pub fn parse_colors(s: &str) -> std::result::Result<ColoredOrder, ParseError> {
    s.trim()
        .chars()
        .map(|ch| match ch {
            '+' => Ok(Color::Plus),
            '-' => Ok(Color::Minus),
            '0' => Ok(Color::Zero),
            _ => Err(ParseError::new(0, &ch.to_string(), "expected one of + - 0")),
        })
        .collect()
}

pub fn colors_to_string(c: &[Color]) -> String {
    c.iter().map(|x| x.symbol()).collect()
}

/// Interval types: `{+}`, `{−}`, `{0}`, `∞_0`, `∞_{+−}`, `∞_{+0}`, `∞_{−0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chi {
    P,
    M,
    Z,
    I0,
    IPM,
    IPZ,
    IMZ,
}

impl Chi {
    pub const ALL: [Chi; 7] = [Chi::P, Chi::M, Chi::Z, Chi::I0, Chi::IPM, Chi::IPZ, Chi::IMZ];

    pub fn colors(self) -> &'static [Color] {
        use Color::*;
        match self {
            Chi::P => &[Plus],
            Chi::M => &[Minus],
            Chi::Z | Chi::I0 => &[Zero],
            Chi::IPM => &[Plus, Minus],
            Chi::IPZ => &[Plus, Zero],
            Chi::IMZ => &[Minus, Zero],
        }
    }

    pub fn accepts(self, c: Color) -> bool {
        self.colors().contains(&c)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Chi::I0 | Chi::IPM | Chi::IPZ | Chi::IMZ)
    }

    /// The two colors of an `∞_{ε1ε2}` letter, in the order `ε1, ε2`.
    pub fn pair(self) -> Option<(Color, Color)> {
        match self {
            Chi::IPM => Some((Color::Plus, Color::Minus)),
            Chi::IPZ => Some((Color::Plus, Color::Zero)),
            Chi::IMZ => Some((Color::Minus, Color::Zero)),
            _ => None,
        }
    }

    pub fn singleton(c: Color) -> Chi {
        match c {
            Color::Plus => Chi::P,
            Color::Minus => Chi::M,
            Color::Zero => Chi::Z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Chi::P => "P",
            Chi::M => "M",
            Chi::Z => "Z",
            Chi::I0 => "I0",
            Chi::IPM => "IPM",
            Chi::IPZ => "IPZ",
            Chi::IMZ => "IMZ",
        }
    }
}

impl fmt::Display for Chi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Chi {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        Chi::ALL
            .into_iter()
            .find(|c| c.name() == t)
            .ok_or_else(|| ParseError::new(0, t, "expected one of P M Z I0 IPM IPZ IMZ"))
    }
}

/// The containment order on χ: equality, or proper containment of color sets
/// into an infinite letter (`{0} ⊂ ∞_0` included).
pub fn chi_leq(a: Chi, b: Chi) -> bool {
    a == b || (b.is_infinite() && a.colors().iter().all(|c| b.accepts(*c)))
}

fn comparable(a: Chi, b: Chi) -> bool {
    chi_leq(a, b) || chi_leq(b, a)
}

/// A χ-word, or the type `∞_{+,−,0}` (which no finite word describes).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderDescriptor {
    pub full: bool,
    pub word: Vec<Chi>,
}

impl OrderDescriptor {
    pub fn full() -> Self {
        OrderDescriptor { full: true, word: Vec::new() }
    }

    pub fn word(word: Vec<Chi>) -> Self {
        OrderDescriptor { full: false, word }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

impl fmt::Display for OrderDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.full {
            return f.write_str("FULL");
        }
        let names: Vec<&str> = self.word.iter().map(|c| c.name()).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for OrderDescriptor {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        if t == "FULL" {
            return Ok(OrderDescriptor::full());
        }
        if t.is_empty() {
            return Ok(OrderDescriptor::word(Vec::new()));
        }
        let word = t.split(',').map(str::parse).collect::<std::result::Result<_, _>>()?;
        Ok(OrderDescriptor::word(word))
    }
}

/// Maximal monochromatic runs of a sequence over at most two colors.
pub fn decompose_bichromatic(seq: &[Color]) -> Result<Vec<ColoredOrder>> {
    let mut seen: Vec<Color> = seq.to_vec();
    seen.sort();
    seen.dedup();
    if seen.len() > 2 {
        return Err(Error::Precondition("sequence uses all three colors".into()));
    }
    Ok(seq.chunk_by(|a, b| a == b).map(<[Color]>::to_vec).collect())
}

/// Consecutive blocks with at most two colors each; every block is the
/// longest prefix of the remainder with that property.
pub fn decompose_trichromatic(seq: &[Color]) -> Vec<ColoredOrder> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        let mut used: Vec<Color> = Vec::with_capacity(2);
        let mut j = i;
        while j < seq.len() {
            if !used.contains(&seq[j]) {
                if used.len() == 2 {
                    break;
                }
                used.push(seq[j]);
            }
            j += 1;
        }
        out.push(seq[i..j].to_vec());
        i = j;
    }
    out
}

/// Both clauses of the canonicity definition, checked literally over positions.
pub fn is_canonical(d: &OrderDescriptor) -> bool {
    if d.full {
        return true;
    }
    let w = &d.word;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if j == i + 1 && comparable(w[i], w[j]) {
                return false;
            }
            if j > i + 1 && w[i] != w[j] && w[i].pair().is_some() && w[j].pair().is_some()
                && !separated(w[i], w[j], &w[i + 1..j]) {
                    return false;
                }
        }
    }
    true
}

/// Separation of two distinct `∞`-pair letters by the letters strictly between them.
fn separated(x: Chi, y: Chi, between: &[Chi]) -> bool {
    let allowed = |c: Chi| matches!(c, Chi::P | Chi::M | Chi::Z | Chi::I0) || c == x || c == y;
    let mut kinds: Vec<Chi> = between.iter().copied().filter(|&c| allowed(c)).collect();
    kinds.sort();
    kinds.dedup();
    if kinds.len() >= 2 {
        return true;
    }
    between.iter().any(|z| match z.pair() {
        Some((e1, e2)) => {
            (!x.accepts(e1) && !y.accepts(e2)) || (!x.accepts(e2) && !y.accepts(e1))
        }
        None => false,
    })
}

/// Merges adjacent comparable letters into the larger one until none remain.
pub fn canonicalize(d: &OrderDescriptor) -> Result<OrderDescriptor> {
    if d.full {
        return Ok(d.clone());
    }
    if let Some(i) = d.word.windows(2).position(|p| p[0] == Chi::Z && p[1] == Chi::Z) {
        return Err(Error::InvalidWord(format!(
            "adjacent singleton 0 intervals at positions {i} and {}",
            i + 1
        )));
    }
    let mut stack: Vec<Chi> = Vec::with_capacity(d.word.len());
    for &c in &d.word {
        let mut cur = c;
        while let Some(&top) = stack.last() {
            if !comparable(top, cur) {
                break;
            }
            stack.pop();
            if chi_leq(cur, top) {
                cur = top;
            }
        }
        stack.push(cur);
    }
    let out = OrderDescriptor::word(stack);
    if !is_canonical(&out) {
        return Err(Error::InvalidWord(format!("{d} has no canonical form")));
    }
    Ok(out)
}

/// A color-preserving monotone map `a → b`, injective on color 0, built greedily.
pub fn kappa_hom_exists(a: &[Color], b: &[Color]) -> Option<Vec<usize>> {
    let mut phi = Vec::with_capacity(a.len());
    let mut last: Option<usize> = None;
    for &c in a {
        let target = match last {
            Some(j) if c != Color::Zero && b[j] == c => j,
            _ => {
                let from = last.map_or(0, |j| j + 1);
                from + b[from..].iter().position(|&x| x == c)?
            }
        };
        phi.push(target);
        last = Some(target);
    }
    Some(phi)
}

/// Assigns each position of `a` to a letter of `d` monotonically, each letter
/// absorbing a subword of its language. Letter `Z` takes at most one point.
pub fn embed_into_word(a: &[Color], d: &OrderDescriptor) -> Option<Vec<usize>> {
    embed_into_word_constrained(a, d, &vec![None; a.len()])
}

/// As [`embed_into_word`], with some positions pinned to a given letter.
pub fn embed_into_word_constrained(
    a: &[Color],
    d: &OrderDescriptor,
    forced: &[Option<usize>],
) -> Option<Vec<usize>> {
    if d.full {
        return Some(vec![0; a.len()]);
    }
    let word = &d.word;
    let n = a.len();
    let m = word.len();
    // ok[i][k][z]: positions i.. fit, position i-1 sits in letter k holding z zeros
    let idx = |i: usize, k: usize, z: bool| (i * (m + 1) + k) * 2 + z as usize;
    let allowed = |i: usize, k: usize| forced[i].is_none_or(|f| f == k);
    let fits = |k: usize, z: bool, c: Color| word[k].accepts(c) && !(word[k] == Chi::Z && z);
    // letter index m stands for "before the first letter"
    let mut ok = vec![false; (n + 1) * (m + 1) * 2];
    for k in 0..=m {
        ok[idx(n, k, false)] = true;
        ok[idx(n, k, true)] = true;
    }
    for i in (0..n).rev() {
        let c = a[i];
        for k in 0..=m {
            for z in [false, true] {
                let stay = k < m && allowed(i, k) && fits(k, z, c)
                    && ok[idx(i + 1, k, z || c == Color::Zero)];
                let from = if k == m { 0 } else { k + 1 };
                let advance = (from..m).any(|k2| {
                    allowed(i, k2) && fits(k2, false, c) && ok[idx(i + 1, k2, c == Color::Zero)]
                });
                ok[idx(i, k, z)] = stay || advance;
            }
        }
    }
    if !ok[idx(0, m, false)] {
        return None;
    }
    let mut out = Vec::with_capacity(n);
    let (mut k, mut z) = (m, false);
    for (i, &c) in a.iter().enumerate() {
        let zero = c == Color::Zero;
        if k < m && allowed(i, k) && fits(k, z, c) && ok[idx(i + 1, k, z || zero)] {
            z = z || zero;
        } else {
            let from = if k == m { 0 } else { k + 1 };
            k = (from..m)
                .find(|&k2| allowed(i, k2) && fits(k2, false, c) && ok[idx(i + 1, k2, zero)])
                .expect("feasible by construction");
            z = zero;
        }
        out.push(k);
    }
    Some(out)
}

/// A monotone map between words with `g[i] ⊆ r[φ(i)]`; earliest targets first.
pub fn chi_hom_exists(g: &OrderDescriptor, r: &OrderDescriptor) -> Option<Vec<usize>> {
    let mut phi = Vec::with_capacity(g.word.len());
    let mut from = 0;
    for &x in &g.word {
        let j = from + r.word[from..].iter().position(|&y| chi_leq(x, y))?;
        phi.push(j);
        from = j;
    }
    Some(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_is_involutive() {
        for c in Color::ALL {
            assert_eq!(c.flip().flip(), c);
        }
    }

    #[test]
    fn separators_for_pair_letters() {
        assert!(separated(Chi::IPM, Chi::IPZ, &[Chi::IMZ]));
        assert!(!separated(Chi::IPM, Chi::IPZ, &[Chi::IPM]));
        assert!(separated(Chi::IPM, Chi::IPZ, &[Chi::P, Chi::Z]));
    }
}
