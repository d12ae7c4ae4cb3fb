use std::io::Read;
use std::path::Path;

use qorbit::bn::{BnDescriptor, BnPartialIso};
use qorbit::piso::PartialIso;
use qorbit::rational::Rational;
use qorbit::sinf::{CycleSpec, PartialInjection};
use qorbit::text::{parse_injection, parse_pairs, parse_piso};
use qorbit::OrderDescriptor;
use serde_json::{json, Value};

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Malformed invocation or input document (exit 2).
    Usage(String),
    /// A library precondition or domain error (exit 3).
    Domain(String),
}

impl From<qorbit::Error> for Failure {
    fn from(e: qorbit::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

pub fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// A map given as a file path, `-` for stdin, or inline text with `;` between pairs.
pub fn read_source(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(usage)?;
        return Ok(s);
    }
    if arg.contains("->") && !Path::new(arg).exists() {
        return Ok(arg.replace(';', "\n"));
    }
    std::fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
}

pub fn piso(arg: &str) -> Result<PartialIso, Failure> {
    parse_piso(&read_source(arg)?).map_err(usage)
}

pub fn pairs(arg: &str) -> Result<Vec<(Rational, Rational)>, Failure> {
    parse_pairs(&read_source(arg)?).map_err(usage)
}

pub fn injection(arg: &str) -> Result<PartialInjection, Failure> {
    parse_injection(&read_source(arg)?).map_err(usage)
}

pub fn bn_piso(arg: &str) -> Result<BnPartialIso, Failure> {
    read_source(arg)?.parse().map_err(usage)
}

pub fn word(s: &str) -> Result<OrderDescriptor, Failure> {
    s.parse().map_err(usage)
}

pub fn spec(s: &str) -> Result<CycleSpec, Failure> {
    s.parse().map_err(usage)
}

/// A chain permutation `σ(1),…,σ(n)`, as in `2,3,1`.
pub fn sigma(s: &str) -> Result<Vec<usize>, Failure> {
    let sigma: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Failure::Usage(format!("bad chain number `{t}` in --sigma"))))
        .collect::<Result<_, _>>()?;
    qorbit::bn::validate_sigma(&sigma).map_err(usage)?;
    Ok(sigma)
}

/// `--sigma 2,3,1` and `--word k=W` per orbit; a bare `W` is accepted when σ has one orbit.
pub fn descriptor(sigma: &str, words: &[String]) -> Result<BnDescriptor, Failure> {
    let sigma = self::sigma(sigma)?;
    let orbits = qorbit::bn::orbits_of(&sigma);
    let mut entries = Vec::new();
    for w in words {
        match w.split_once('=') {
            Some((k, v)) => {
                let k: usize = k.trim().parse().map_err(|_| Failure::Usage(format!("bad orbit key in `{w}`")))?;
                entries.push((k, word(v.trim())?));
            }
            None if orbits.len() == 1 => entries.push((orbits[0][0], word(w)?)),
            None => return Err(Failure::Usage(format!("`{w}` needs an orbit key, as in 1={w}"))),
        }
    }
    BnDescriptor::new(sigma, entries).map_err(usage)
}

pub fn piso_json(p: &PartialIso) -> Value {
    Value::Array(p.pairs().iter().map(|(x, y)| json!([x.to_string(), y.to_string()])).collect())
}

pub fn bn_json(p: &BnPartialIso) -> Value {
    Value::Array(
        p.pairs()
            .map(|(x, y)| json!([format!("{}:{}", x.0, x.1), format!("{}:{}", y.0, y.1)]))
            .collect(),
    )
}

pub fn injection_json(q: &PartialInjection) -> Value {
    Value::Array(q.pairs().map(|(x, y)| json!([x, y])).collect())
}
