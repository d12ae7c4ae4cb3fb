mod io;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qorbit::amalgam::{amalgamate_plus, amalgamate_rho, check_amalgam, AmalgamResult};
use qorbit::bn::{self, BnAmalgam, Cut};
use qorbit::closure::{generic_extend, in_closure, is_rich, p_member, richify};
use qorbit::piso::{find_bad_pairs, glue_orbitals, is_good, orbital_quotient};
use qorbit::sinf::{check_sinf_amalgam, in_cofinal_family, sinf_amalgamate, sinf_generic_spec, sinf_p_member};
use qorbit::words::{canonicalize, chi_hom_exists, is_canonical};
use qorbit::{Midpoint, PointSupplier, Rational, Seeded};
use serde_json::{json, Value};

use io::Failure;

#[derive(Parser)]
#[command(name = "qorbit", version, about = "Orbital calculus for partial isomorphisms of (Q,<), S∞ and B_n")]
struct Cli {
    /// Seed for the fresh-point supplier (midpoints when absent).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Richness threshold override (n^n for a word of length n by default).
    #[arg(long, global = true)]
    threshold: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical form of a descriptor.
    Canonicalize { word: String },
    /// Whether a descriptor is already canonical.
    CheckCanonical { word: String },
    /// Whether C_gamma ⊆ C_rho.
    Member {
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        rho: String,
    },
    /// Whether a partial isomorphism lies in P_rho.
    Pmember {
        #[arg(long)]
        rho: String,
        #[arg(long)]
        map: String,
    },
    /// Colored orbital quotient of a map.
    Orbitals {
        #[arg(long)]
        map: String,
    },
    /// Bad pairs of a map.
    Badpairs {
        #[arg(long)]
        map: String,
    },
    /// Glues all orbitals into one.
    Glue {
        #[arg(long)]
        map: String,
    },
    /// Extends a member of P_rho to a rich good map.
    Richify {
        #[arg(long)]
        rho: String,
        #[arg(long)]
        map: String,
    },
    /// Amalgamates p1 and p2 over p0.
    Amalgamate {
        #[arg(long)]
        p0: String,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        #[arg(long, required_unless_present = "plus")]
        rho: Option<String>,
        /// Single-orbital maps without bad pairs, no descriptor.
        #[arg(long)]
        plus: bool,
    },
    /// Richifies and interposes orbitals between anchors.
    GenericExtend {
        #[arg(long)]
        rho: String,
        #[arg(long)]
        map: String,
        #[arg(long = "anchor")]
        anchors: Vec<String>,
    },
    /// Whether a partial injection of ω extends to a permutation of the given cycle type.
    SinfMember {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        map: String,
    },
    /// Amalgamates partial injections in the cofinal family.
    SinfAmalgamate {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        q0: String,
        #[arg(long)]
        q1: String,
        #[arg(long)]
        q2: String,
    },
    /// Cycle type of the generic permutation.
    SinfGeneric {
        #[arg(long)]
        spec: String,
    },
    /// Whether a map of B_n lies in the class of a descriptor.
    BnMember {
        #[arg(long)]
        sigma: String,
        #[arg(long = "word")]
        words: Vec<String>,
        #[arg(long)]
        map: String,
    },
    /// Amalgamates maps of B_n in the cofinal family.
    BnAmalgamate {
        #[arg(long)]
        sigma: String,
        #[arg(long = "word")]
        words: Vec<String>,
        #[arg(long)]
        p0: String,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
    },
    /// Completes a map of B_n to a symmetric one.
    BnSymmetrize {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        map: String,
    },
    /// Image in B_2 of a finite decreasing map.
    BetweennessToB2 {
        #[arg(long)]
        map: String,
    },
}

/// A finished command: the decision (if any) and the output document.
struct Outcome {
    positive: bool,
    doc: Value,
}

fn answer(result: Value, witness: Option<Value>, diagnostics: Vec<String>) -> Outcome {
    let positive = result != Value::Bool(false);
    let mut doc = json!({ "result": result, "diagnostics": diagnostics });
    if let Some(w) = witness {
        doc["witness"] = w;
    }
    Outcome { positive, doc }
}

fn canonical_word(s: &str) -> Result<qorbit::OrderDescriptor, Failure> {
    let d = io::word(s)?;
    if !is_canonical(&d) {
        return Err(Failure::Usage(format!("{d} is not canonical (canonical form {})", canonicalize(&d)?)));
    }
    Ok(d)
}

fn amalgam_json(res: &AmalgamResult) -> Value {
    json!({ "p3": io::piso_json(&res.p3), "psi": io::piso_json(&res.psi) })
}

fn run(cmd: Command, threshold: Option<usize>, fresh: &mut dyn PointSupplier) -> Result<Outcome, Failure> {
    Ok(match cmd {
        Command::Canonicalize { word } => {
            let d = io::word(&word)?;
            answer(json!(canonicalize(&d)?.to_string()), None, vec![])
        }
        Command::CheckCanonical { word } => {
            let d = io::word(&word)?;
            let ok = is_canonical(&d);
            let diag = if ok { vec![] } else { vec![format!("canonical form is {}", canonicalize(&d)?)] };
            answer(json!(ok), None, diag)
        }
        Command::Member { gamma, rho } => {
            let (g, r) = (canonical_word(&gamma)?, canonical_word(&rho)?);
            let ok = in_closure(&g, &r)?;
            let witness = if ok && !g.full && !r.full { chi_hom_exists(&g, &r).map(|phi| json!(phi)) } else { None };
            answer(json!(ok), witness, vec![])
        }
        Command::Pmember { rho, map } => {
            let (r, p) = (io::word(&rho)?, io::piso(&map)?);
            match p_member(&p, &r) {
                Some(letters) => answer(json!(true), Some(json!(letters)), vec![]),
                None => answer(json!(false), None, vec![format!("colors {} do not embed", quotient_colors(&p))]),
            }
        }
        Command::Orbitals { map } => {
            let q = orbital_quotient(&io::piso(&map)?);
            let classes: Vec<Value> = q
                .classes
                .iter()
                .map(|c| json!({ "color": c.color.to_string(), "members": c.members.iter().map(|x| x.to_string()).collect::<Vec<_>>() }))
                .collect();
            answer(json!(classes), None, vec![])
        }
        Command::Badpairs { map } => {
            let bad: Vec<Value> = find_bad_pairs(&io::piso(&map)?)
                .iter()
                .map(|(a, b)| json!([a.to_string(), b.to_string()]))
                .collect();
            answer(json!(bad), None, vec![])
        }
        Command::Glue { map } => {
            let p = io::piso(&map)?;
            let g = glue_orbitals(&p, fresh)?;
            if !g.extends(&p) || orbital_quotient(&g).len() > 1 {
                return Err(Failure::Domain("glued map failed re-validation".into()));
            }
            answer(io::piso_json(&g), None, vec![])
        }
        Command::Richify { rho, map } => {
            let (r, p) = (canonical_word(&rho)?, io::piso(&map)?);
            let q = richify(&p, &r, threshold, fresh)?;
            let mut diag = vec![];
            if !r.full && (!is_good(&q) || is_rich(&q, &r, threshold)?.is_none()) {
                return Err(Failure::Domain("richified map failed re-validation".into()));
            }
            if r.full {
                diag.push("full descriptor: orbitals glued".into());
            }
            answer(io::piso_json(&q), None, diag)
        }
        Command::Amalgamate { p0, p1, p2, rho, plus } => {
            let (p0, p1, p2) = (io::piso(&p0)?, io::piso(&p1)?, io::piso(&p2)?);
            let res = match (plus, rho) {
                (true, _) => amalgamate_plus(&p0, &p1, &p2, fresh)?,
                (false, Some(rho)) => amalgamate_rho(&canonical_word(&rho)?, &p0, &p1, &p2, threshold, fresh)?,
                (false, None) => return Err(Failure::Usage("--rho or --plus is required".into())),
            };
            check_amalgam(&p0, &p1, &p2, &res).map_err(Failure::Domain)?;
            answer(amalgam_json(&res), None, vec![])
        }
        Command::GenericExtend { rho, map, anchors } => {
            let (r, p) = (canonical_word(&rho)?, io::piso(&map)?);
            let anchors: Vec<Rational> = anchors.iter().map(|a| a.parse().map_err(io::usage)).collect::<Result<_, _>>()?;
            let q = generic_extend(&p, &anchors, &r, threshold, fresh)?;
            if !q.extends(&p) {
                return Err(Failure::Domain("extension does not contain the input".into()));
            }
            answer(io::piso_json(&q), None, vec![])
        }
        Command::SinfMember { spec, map } => {
            let (r, q) = (io::spec(&spec)?, io::injection(&map)?);
            let cofinal = in_cofinal_family(&q, &r);
            answer(json!(sinf_p_member(&q, &r)), None, vec![format!("cofinal: {cofinal}")])
        }
        Command::SinfAmalgamate { spec, q0, q1, q2 } => {
            let r = io::spec(&spec)?;
            let (q0, q1, q2) = (io::injection(&q0)?, io::injection(&q1)?, io::injection(&q2)?);
            let res = sinf_amalgamate(&q0, &q1, &q2, &r)?;
            check_sinf_amalgam(&q0, &q1, &q2, &res).map_err(Failure::Domain)?;
            answer(json!({ "q3": io::injection_json(&res.q3), "psi": io::injection_json(&res.psi) }), None, vec![])
        }
        Command::SinfGeneric { spec } => answer(json!(sinf_generic_spec(&io::spec(&spec)?).to_string()), None, vec![]),
        Command::BnMember { sigma, words, map } => {
            let (d, p) = (io::descriptor(&sigma, &words)?, io::bn_piso(&map)?);
            let symmetric = bn::is_symmetric(&p, &d.sigma);
            answer(json!(bn::bn_p_member(&p, &d)), None, vec![format!("symmetric: {symmetric}")])
        }
        Command::BnAmalgamate { sigma, words, p0, p1, p2 } => {
            let d = io::descriptor(&sigma, &words)?;
            let (p0, p1, p2) = (io::bn_piso(&p0)?, io::bn_piso(&p1)?, io::bn_piso(&p2)?);
            let res: BnAmalgam = bn::bn_amalgamate(&d, &p0, &p1, &p2, threshold, fresh)?;
            bn::check_bn_amalgam(&p0, &p1, &p2, &res).map_err(Failure::Domain)?;
            answer(json!({ "p3": io::bn_json(&res.p3), "psi": io::bn_json(&res.psi) }), None, vec![])
        }
        Command::BnSymmetrize { sigma, map } => {
            let (sigma, p) = (io::sigma(&sigma)?, io::bn_piso(&map)?);
            let q = bn::symmetrize(&p, &sigma, fresh)?;
            if !q.extends(&p) || !bn::is_symmetric(&q, &sigma) {
                return Err(Failure::Domain("symmetrization failed re-validation".into()));
            }
            answer(io::bn_json(&q), None, vec![])
        }
        Command::BetweennessToB2 { map } => {
            let pairs = io::pairs(&map)?;
            let img = bn::betweenness_to_b2(&pairs)?;
            let cut = match &img.cut {
                Cut::Fixed(x) => json!({ "fixed": x.to_string() }),
                Cut::Between(lo, hi) => json!({
                    "between": [lo.as_ref().map_or("-inf".into(), |x| x.to_string()), hi.as_ref().map_or("inf".into(), |x| x.to_string())]
                }),
            };
            let consistent = bn::square_consistent(&pairs, &img);
            answer(io::bn_json(&img.p), Some(json!({ "cut": cut })), vec![format!("square consistent: {consistent}")])
        }
    })
}

fn quotient_colors(p: &qorbit::PartialIso) -> String {
    qorbit::words::colors_to_string(&orbital_quotient(p).colors())
}

fn emit(doc: &Value) {
    let mut out = std::io::stdout().lock();
    // a closed pipe downstream is not an error of ours
    if serde_json::to_writer_pretty(&mut out, doc).is_ok() {
        let _ = writeln!(out);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut fresh: Box<dyn PointSupplier> = match cli.seed {
        Some(s) => Box::new(Seeded::new(s)),
        None => Box::new(Midpoint),
    };
    match run(cli.cmd, cli.threshold, fresh.as_mut()) {
        Ok(out) => {
            emit(&out.doc);
            if out.positive {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (2, m),
                Failure::Domain(m) => (3, m),
            };
            emit(&json!({ "result": null, "diagnostics": [msg] }));
            ExitCode::from(code)
        }
    }
}
