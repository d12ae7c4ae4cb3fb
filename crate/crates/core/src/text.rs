//! Line-oriented text formats, one pair per line:
//!
//! ```text
//! # comments and blank lines are ignored
//! -1/2 -> 3          partial isomorphisms of Q
//! 1:0 -> 2:5/3       partial isomorphisms of B_n (chain:point)
//! 4 -> 7             partial injections of ω
//! ```

use std::fmt::Write;
use std::str::FromStr;

use crate::error::ParseError;
use crate::piso::PartialIso;
use crate::rational::Rational;
use crate::sinf::PartialInjection;
use crate::Error;

/// Splits every significant line at `->`, yielding `(line_number, left, right)`.
pub fn arrow_lines(s: &str) -> Result<Vec<(usize, &str, &str)>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in s.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (l, r) = line
            .split_once("->")
            .ok_or_else(|| ParseError::new(i + 1, line, "expected `x -> y`"))?;
        out.push((i + 1, l.trim(), r.trim()));
    }
    Ok(out)
}

fn token<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| ParseError::new(line, tok, &format!("expected {what}")))
}

/// Rational pairs without any order condition.
pub fn parse_pairs(s: &str) -> Result<Vec<(Rational, Rational)>, ParseError> {
    arrow_lines(s)?
        .into_iter()
        .map(|(n, l, r)| Ok((token(n, l, "a rational")?, token(n, r, "a rational")?)))
        .collect()
}

pub fn parse_piso(s: &str) -> crate::Result<PartialIso> {
    PartialIso::new(parse_pairs(s)?)
}

pub fn format_pairs<'a>(pairs: impl IntoIterator<Item = (&'a Rational, &'a Rational)>) -> String {
    let mut out = String::new();
    for (x, y) in pairs {
        writeln!(out, "{x} -> {y}").unwrap();
    }
    out
}

pub fn format_piso(p: &PartialIso) -> String {
    format_pairs(p.pairs().iter().map(|(x, y)| (x, y)))
}

/// `chain:point`, chains numbered from 1.
pub fn parse_chain_point(line: usize, tok: &str) -> Result<(usize, Rational), ParseError> {
    let (c, x) = tok
        .split_once(':')
        .ok_or_else(|| ParseError::new(line, tok, "expected `chain:point`"))?;
    let chain: usize = token(line, c.trim(), "a chain number")?;
    if chain == 0 {
        return Err(ParseError::new(line, tok, "chains are numbered from 1"));
    }
    Ok((chain, token(line, x.trim(), "a rational")?))
}

pub fn parse_injection(s: &str) -> crate::Result<PartialInjection> {
    let mut q = PartialInjection::default();
    for (n, l, r) in arrow_lines(s)? {
        let x: u64 = token(n, l, "a natural number")?;
        let y: u64 = token(n, r, "a natural number")?;
        q.insert(x, y).map_err(|e| match e {
            Error::InvalidMap(m) => Error::Parse(ParseError::new(n, l, &m)),
            other => other,
        })?;
    }
    Ok(q)
}

pub fn format_injection(q: &PartialInjection) -> String {
    let mut out = String::new();
    for (x, y) in q.pairs() {
        writeln!(out, "{x} -> {y}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piso_round_trip() {
        let p = parse_piso("# demo\n-1/2 -> 3\n\n2 -> 10/3 # trailing\n").unwrap();
        assert_eq!(p, PartialIso::new(vec![(Rational::new(-1, 2), 3.into()), (2.into(), Rational::new(10, 3))]).unwrap());
        assert_eq!(parse_piso(&format_piso(&p)).unwrap(), p);
    }

    #[test]
    fn parse_errors_carry_lines() {
        match parse_pairs("0 -> 1\n1 => 2\n") {
            Err(e) => assert_eq!(e.line, 2),
            Ok(_) => panic!("accepted a malformed line"),
        }
        match parse_pairs("0 -> x\n") {
            Err(e) => assert_eq!(e.token, "x"),
            Ok(_) => panic!("accepted a malformed point"),
        }
        assert!(parse_chain_point(1, "0:1").is_err());
        assert!(parse_piso("0 -> 1\n1 -> 0\n").is_err());
    }

    #[test]
    fn injection_round_trip() {
        let q = parse_injection("1 -> 2\n2 -> 1\n5 -> 9\n").unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(parse_injection(&format_injection(&q)).unwrap(), q);
        assert!(parse_injection("1 -> 2\n3 -> 2\n").is_err());
    }
}
