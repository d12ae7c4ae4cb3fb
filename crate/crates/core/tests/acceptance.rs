//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use qorbit::amalgam::{amalgamate_plus, amalgamate_rch, amalgamate_rho, check_amalgam, induced_hom};
use qorbit::bn::{
    betweenness_to_b2, bn_amalgamate, check_bn_amalgam, in_cap_family, is_symmetric, square_consistent,
    symmetrize,
};
use qorbit::closure::{in_closure, is_rich, p_member, rich_block_assignments};
use qorbit::fresh::Seeded;
use qorbit::piso::{eliminate_bad_pairs, find_bad_pairs, glue_orbitals, is_good, orbital_quotient, PartialIso};
use qorbit::rational::Rational;
use qorbit::sample;
use qorbit::sinf::{
    check_sinf_amalgam, in_cofinal_family, sinf_amalgamate, sinf_generic_spec, sinf_p_member, Count,
    CycleSpec, PartialInjection,
};
use qorbit::words::{canonicalize, embed_into_word, is_canonical, Chi, Color, OrderDescriptor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn subsets<T: Clone>(pool: &[T], k: usize) -> Vec<Vec<T>> {
    if k == 0 {
        return vec![vec![]];
    }
    if pool.len() < k {
        return vec![];
    }
    let mut out = subsets(&pool[1..], k - 1);
    for s in &mut out {
        s.insert(0, pool[0].clone());
    }
    out.extend(subsets(&pool[1..], k));
    out
}

/// Every monotone partial map between subsets of `pool` whose support has at most `max` points.
fn all_pisos(pool: &[Rational], max: usize) -> Vec<PartialIso> {
    let mut out = Vec::new();
    for k in 0..=max {
        let subs = subsets(pool, k);
        for d in &subs {
            for r in &subs {
                let support: BTreeSet<&Rational> = d.iter().chain(r).collect();
                if support.len() <= max {
                    out.push(PartialIso::new(d.iter().cloned().zip(r.iter().cloned()).collect()).unwrap());
                }
            }
        }
    }
    out
}

fn pool() -> Vec<Rational> {
    [(-7, 2), (-2, 1), (-1, 1), (-1, 3), (0, 1), (1, 4), (1, 1), (3, 2), (5, 1), (8, 1)]
        .iter()
        .map(|&(n, d)| Rational::new(n, d))
        .collect()
}

fn brute_parity(p: &PartialIso, a: &Rational) -> Color {
    match (p.apply(a), p.preimage(a)) {
        (Some(b), _) => Color::from_ordering(b.cmp(a)),
        (None, Some(b)) => Color::from_ordering(a.cmp(b)),
        (None, None) => unreachable!(),
    }
}

/// The two relatedness bullets, with undefined applications counting as false.
fn related(p: &PartialIso, a: &Rational, b: &Rational) -> bool {
    let le = |x: Option<&Rational>, y: &Rational| x.is_some_and(|x| x <= y);
    let ge = |x: Option<&Rational>, y: &Rational| x.is_some_and(|x| x >= y);
    let (pa, pb, ia, ib) = (p.apply(a), p.apply(b), p.preimage(a), p.preimage(b));
    let plus = (a <= b && ge(pa, b)) || (b <= a && ge(pb, a)) || (le(ia, b) && b <= a) || (le(ib, a) && a <= b);
    let minus = (a <= b && ge(ia, b)) || (b <= a && ge(ib, a)) || (le(pa, b) && b <= a) || (le(pb, a) && a <= b);
    let (ca, cb) = (brute_parity(p, a), brute_parity(p, b));
    a == b
        || (plus && (ca == Color::Plus || cb == Color::Plus))
        || (minus && (ca == Color::Minus || cb == Color::Minus))
}

fn brute_quotient(p: &PartialIso) -> Vec<(Vec<Rational>, Color)> {
    let s = p.support();
    let mut parent: Vec<usize> = (0..s.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if related(p, &s[i], &s[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
    for i in 0..s.len() {
        let root = find(&mut parent, i);
        classes.entry(root).or_default().push(s[i].clone());
    }
    let mut out: Vec<(Vec<Rational>, Color)> =
        classes.into_values().map(|m| (m.clone(), brute_parity(p, &m[0]))).collect();
    out.sort();
    out
}

fn c1_quotient_oracle() -> Outcome {
    let maps = all_pisos(&pool(), 6);
    for p in &maps {
        let got: Vec<(Vec<Rational>, Color)> =
            orbital_quotient(p).classes.into_iter().map(|o| (o.members, o.color)).collect();
        if got != brute_quotient(p) {
            return Err(format!("quotient of {p:?} disagrees with the closure oracle"));
        }
    }
    Ok(format!("{} maps", maps.len()))
}

fn all_words(max: usize) -> Vec<Vec<Chi>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<Chi>| {
                Chi::ALL.iter().map(move |&c| {
                    let mut v = w.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn all_colored(max: usize) -> Vec<Vec<Color>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|a: &Vec<Color>| {
                Color::ALL.iter().map(move |&c| {
                    let mut v = a.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn acceptance_set(word: &OrderDescriptor, orders: &[Vec<Color>]) -> Vec<bool> {
    orders.iter().map(|a| embed_into_word(a, word).is_some()).collect()
}

fn c2_canonicalization() -> Outcome {
    let orders = all_colored(4);
    let (mut checked, mut skipped) = (0, 0);
    for letters in all_words(5).into_iter().skip(1) {
        let w = OrderDescriptor::word(letters);
        let c = match canonicalize(&w) {
            Ok(c) => c,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        if !is_canonical(&c) {
            return Err(format!("{w} → {c} is not canonical"));
        }
        if canonicalize(&c).as_ref() != Ok(&c) {
            return Err(format!("canonicalize is not idempotent on {w}"));
        }
        if acceptance_set(&w, &orders) != acceptance_set(&c, &orders) {
            return Err(format!("{w} and its canonical form {c} accept different colored orders"));
        }
        checked += 1;
    }
    Ok(format!("{checked} words, {skipped} rejected as unrealizable"))
}

fn canonical_words(max: usize) -> Vec<OrderDescriptor> {
    let set: BTreeSet<String> = all_words(max)
        .into_iter()
        .skip(1)
        .filter_map(|l| canonicalize(&OrderDescriptor::word(l)).ok())
        .filter(|c| c.len() <= max)
        .map(|c| c.to_string())
        .collect();
    set.iter().map(|s| s.parse().unwrap()).collect()
}

fn c3_closure_cross_check() -> Outcome {
    let words = canonical_words(4);
    let orders = all_colored(5);
    let sets: Vec<Vec<bool>> = words.iter().map(|w| acceptance_set(w, &orders)).collect();
    let mut pairs = 0;
    for (g, sg) in words.iter().zip(&sets) {
        for (r, sr) in words.iter().zip(&sets) {
            let quantified = sg.iter().zip(sr).all(|(&a, &b)| !a || b);
            let decided = in_closure(g, r).map_err(|e| e.to_string())?;
            if decided != quantified {
                return Err(format!("in_closure({g}, {r}) = {decided}, quantified criterion = {quantified}"));
            }
            pairs += 1;
        }
    }
    Ok(format!("{} canonical words, {pairs} pairs, 0 disagreements", words.len()))
}

fn c4_amalgamation() -> Outcome {
    let plus = OrderDescriptor::word(vec![Chi::P]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 10_000;
    for i in 0..n {
        let (p0, p1, p2) = sample::plus_triple(&mut rng, 3);
        let res = amalgamate_plus(&p0, &p1, &p2, &mut Seeded::new(i)).map_err(|e| format!("plus #{i}: {e}"))?;
        check_amalgam(&p0, &p1, &p2, &res).map_err(|e| format!("plus #{i}: {e}"))?;
        if !is_good(&res.p3) || p_member(&res.p3, &plus).is_none() {
            return Err(format!("plus #{i}: {:?} is not a good map of positive orbitals", res.p3));
        }
    }
    for i in 0..n {
        let word = sample::canonical_word(&mut rng, 4);
        let (p0, p1, p2) = sample::rho_triple(&mut rng, &word, 2, 3);
        let res = amalgamate_rho(&word, &p0, &p1, &p2, Some(2), &mut Seeded::new(i))
            .map_err(|e| format!("rho #{i} ({word}): {e}"))?;
        check_amalgam(&p0, &p1, &p2, &res).map_err(|e| format!("rho #{i} ({word}): {e}"))?;
        let rich = matches!(is_rich(&res.p3, &word, Some(2)), Ok(Some(_)));
        if !is_good(&res.p3) || p_member(&res.p3, &word).is_none() || !rich {
            return Err(format!("rho #{i} ({word}): {:?} left the family", res.p3));
        }
    }
    Ok(format!("{n} triples each for + and ρ"))
}

fn c5_gluing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1000;
    for i in 0..n {
        let p = sample::random_piso(&mut rng, 6);
        let g = glue_orbitals(&p, &mut Seeded::new(i)).map_err(|e| format!("glue {p:?}: {e}"))?;
        if !g.extends(&p) || !is_good(&g) {
            return Err(format!("glue {p:?} gave {g:?}"));
        }
        let up = p.restrict(|x| p.apply(x).is_some_and(|y| x < y));
        let e = eliminate_bad_pairs(&up, &mut Seeded::new(i)).map_err(|e| format!("eliminate {up:?}: {e}"))?;
        if !e.extends(&up) || !find_bad_pairs(&e).is_empty() {
            return Err(format!("eliminate {up:?} gave {e:?}"));
        }
    }
    Ok(format!("{n} random maps"))
}

/// Component shapes `(length, is_cycle)` on at most `budget` vertices, up to isomorphism.
fn shapes(budget: usize, min: (usize, bool)) -> Vec<Vec<(usize, bool)>> {
    let mut out = vec![vec![]];
    for len in 1..=budget {
        for cyc in [false, true] {
            if (!cyc && len < 2) || (len, cyc) < min {
                continue;
            }
            for mut rest in shapes(budget - len, (len, cyc)) {
                rest.insert(0, (len, cyc));
                out.push(rest);
            }
        }
    }
    out
}

fn realize(shape: &[(usize, bool)]) -> PartialInjection {
    let mut pairs = Vec::new();
    let mut next = 0u64;
    for &(len, cyc) in shape {
        for i in 0..len as u64 {
            if i + 1 < len as u64 {
                pairs.push((next + i, next + i + 1));
            } else if cyc {
                pairs.push((next + i, next));
            }
        }
        next += len as u64;
    }
    PartialInjection::new(pairs).unwrap()
}

fn cap(c: Count, k: usize) -> usize {
    match c {
        Count::Finite(n) => (n as usize).min(k),
        Count::Inf => k,
    }
}

/// A finite piece of a permutation with cycle data `r`, large enough for `k` components on `v` vertices.
fn truncation(r: &CycleSpec, k: usize, v: usize) -> BTreeMap<u64, u64> {
    let mut t = BTreeMap::new();
    let mut next = 0u64;
    let mut add = |len: usize, cyc: bool, t: &mut BTreeMap<u64, u64>| {
        for i in 0..len as u64 {
            if i + 1 < len as u64 {
                t.insert(next + i, next + i + 1);
            } else if cyc {
                t.insert(next + i, next);
            }
        }
        next += len as u64;
    };
    let max_len = r.finite.keys().copied().max().unwrap_or(0).max(r.tail.map_or(0, |t| t.0)).max(v as u64);
    for n in 1..=max_len {
        for _ in 0..cap(r.count(n), k) {
            add(n as usize, true, &mut t);
        }
    }
    for _ in 0..cap(r.infinite, k) {
        add(v + 1, false, &mut t);
    }
    t
}

/// Injective placement of every component of `q` along the arrows of `t`.
fn embeds(q: &PartialInjection, t: &BTreeMap<u64, u64>) -> bool {
    let mut seen = BTreeSet::new();
    let mut starts = Vec::new();
    for x in q.support() {
        if q.preimage(x).is_none() {
            starts.push(x);
        }
    }
    for x in q.support() {
        if seen.contains(&x) || q.preimage(x).is_none() {
            continue;
        }
        let mut y = x;
        loop {
            seen.insert(y);
            match q.apply(y) {
                Some(z) if z == x => {
                    starts.push(x);
                    break;
                }
                Some(z) => y = z,
                None => break,
            }
        }
    }
    let hosts: Vec<u64> = t.keys().chain(t.values()).copied().collect::<BTreeSet<_>>().into_iter().collect();
    fn go(q: &PartialInjection, t: &BTreeMap<u64, u64>, starts: &[u64], hosts: &[u64], used: &mut Vec<u64>) -> bool {
        let Some((&s, rest)) = starts.split_first() else { return true };
        for &h in hosts {
            if used.contains(&h) {
                continue;
            }
            let mark = used.len();
            let (mut x, mut y) = (s, h);
            used.push(y);
            let mut ok = true;
            while let Some(nx) = q.apply(x) {
                if nx == s {
                    ok = t.get(&y) == Some(&h);
                    break;
                }
                match t.get(&y) {
                    Some(&ny) if !used.contains(&ny) => {
                        used.push(ny);
                        x = nx;
                        y = ny;
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && go(q, t, rest, hosts, used) {
                return true;
            }
            used.truncate(mark);
        }
        false
    }
    go(q, t, &starts, &hosts, &mut Vec::new())
}

fn spec_corpus() -> Vec<CycleSpec> {
    [
        "1:1", "1:inf", "2:1", "2:inf", "3:2", "5:1", "1:2,2:1", "2:2,3:1", "1:inf,4:1", "2:inf,inf:1",
        "inf:1", "inf:inf", "3:1,inf:2", "1:1,2:1,3:1", "4:2,6:1", "2:3,inf:5", "1:1,3+:1", "2:1,4+:inf",
        "1+:1", "3+:2,inf:1", "1:1,5:inf", "7:1", "2:1,3:1,inf:inf", "1:inf,2:inf,3:inf",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

fn c6_sinf() -> Outcome {
    let corpus = spec_corpus();
    let all = shapes(8, (0, false));
    for r in &corpus {
        for shape in &all {
            let q = realize(shape);
            let t = truncation(r, shape.len(), q.support().len());
            if sinf_p_member(&q, r) != embeds(&q, &t) {
                return Err(format!("membership of {shape:?} in {r} disagrees with the oracle"));
            }
        }
    }
    for r in &corpus {
        let g = sinf_generic_spec(r);
        let same_finite = (1..16).all(|n| g.count(n) == r.count(n)) && g.tail == r.tail;
        let expected = if !r.lengths_bounded() {
            Count::Finite(0)
        } else if !r.infinite.is_zero() {
            Count::Finite(1)
        } else {
            Count::Finite(0)
        };
        if !same_finite || g.infinite != expected {
            return Err(format!("generic spec of {r} is {g}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 1000;
    for i in 0..n {
        let r = &corpus[i % corpus.len()];
        let (q0, q1, q2) = sample::sinf_triple(&mut rng, r, 12);
        let res = sinf_amalgamate(&q0, &q1, &q2, r).map_err(|e| format!("#{i} ({r}): {e}"))?;
        check_sinf_amalgam(&q0, &q1, &q2, &res).map_err(|e| format!("#{i} ({r}): {e}"))?;
        if !sinf_p_member(&res.q3, r) || !in_cofinal_family(&res.q3, r) {
            return Err(format!("#{i} ({r}): amalgam left the family"));
        }
    }
    Ok(format!(
        "{} shapes × {} specs, {} generic specs, {n} amalgams",
        all.len(),
        corpus.len(),
        corpus.len()
    ))
}

fn c7_bn() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 1000;
    for i in 0..n {
        let k = rng.gen_range(1..=4);
        let sigma = sample::random_permutation(&mut rng, k);
        let p = sample::random_bn_piso(&mut rng, &sigma, 6);
        let s = symmetrize(&p, &sigma, &mut Seeded::new(i)).map_err(|e| format!("symmetrize #{i}: {e}"))?;
        if !s.extends(&p) || !is_symmetric(&s, &sigma) {
            return Err(format!("symmetrize #{i}: {s:?} from {p:?}"));
        }
    }
    let m = 300;
    for i in 0..m {
        let k = rng.gen_range(1..=3);
        let d = sample::bn_descriptor(&mut rng, k, 3);
        let (p0, p1, p2) = sample::bn_triple(&mut rng, &d, 2, 2);
        let res = bn_amalgamate(&d, &p0, &p1, &p2, Some(2), &mut Seeded::new(i))
            .map_err(|e| format!("amalgamate #{i}: {e}"))?;
        check_bn_amalgam(&p0, &p1, &p2, &res).map_err(|e| format!("amalgamate #{i}: {e}"))?;
        if !in_cap_family(&d, &res.p3, Some(2)) {
            return Err(format!("amalgamate #{i}: result left the cofinal family"));
        }
    }
    let pts: Vec<Rational> = pool().into_iter().take(6).collect();
    let mut maps = 0;
    for k in 0..=5 {
        for dom in subsets(&pts, k) {
            for mut rng_pts in subsets(&pts, k) {
                let support: BTreeSet<&Rational> = dom.iter().chain(&rng_pts).collect();
                if support.len() > 5 {
                    continue;
                }
                rng_pts.reverse();
                let q: Vec<(Rational, Rational)> = dom.iter().cloned().zip(rng_pts).collect();
                let img = betweenness_to_b2(&q).map_err(|e| format!("betweenness {q:?}: {e}"))?;
                if !square_consistent(&q, &img) {
                    return Err(format!("betweenness {q:?}: square disagrees"));
                }
                maps += 1;
            }
        }
    }
    Ok(format!("{n} symmetrizations, {m} amalgams, {maps} decreasing maps"))
}

fn c8_anchors() -> Outcome {
    let plus = OrderDescriptor::word(vec![Chi::P]);
    let full = OrderDescriptor::full();
    let maps = all_pisos(&pool()[..7], 5);
    for p in &maps {
        let all_plus = orbital_quotient(p).colors().iter().all(|&c| c == Color::Plus);
        if p_member(p, &plus).is_some() != all_plus {
            return Err(format!("[P] membership of {p:?} is not 'all orbitals positive'"));
        }
        if p_member(p, &full).is_none() {
            return Err(format!("FULL rejects {p:?}"));
        }
    }
    for g in canonical_words(4) {
        if !in_closure(&g, &full).map_err(|e| e.to_string())? {
            return Err(format!("{g} is not below FULL"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 500;
    for i in 0..n {
        let word = sample::canonical_word(&mut rng, 4);
        let (p0, p1, p2) = sample::rho_triple(&mut rng, &word, 2, 3);
        let colors = |p: &PartialIso| orbital_quotient(p).colors();
        let (a, b, c) = (colors(&p0), colors(&p1), colors(&p2));
        let phi1 = induced_hom(&p0, &p1).map_err(|e| e.to_string())?;
        let phi2 = induced_hom(&p0, &p2).map_err(|e| e.to_string())?;
        let res = amalgamate_rch(&word, 2, &a, &b, &c, &phi1, &phi2).map_err(|e| format!("rch #{i}: {e}"))?;
        let types_kept = res.psi1.iter().enumerate().all(|(k, &x)| res.d[x] == b[k])
            && res.psi2.iter().enumerate().all(|(k, &x)| res.d[x] == c[k]);
        let anchors_agree = phi1.iter().zip(&phi2).all(|(&x, &y)| res.psi1[x] == res.psi2[y]);
        let none = vec![None; res.d.len()];
        let rich = word.full || !rich_block_assignments(&res.d, &word.word, 2, &none, false, 1).is_empty();
        if !types_kept || !anchors_agree || !rich {
            return Err(format!("rch #{i} ({word}): interleaving broke block types"));
        }
    }
    Ok(format!("{} maps against [P] and FULL, {n} interleavings", maps.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 8] = [
        ("C1", "orbital quotient vs closure oracle", c1_quotient_oracle),
        ("C2", "canonicalization", c2_canonicalization),
        ("C3", "in_closure vs quantified embedding", c3_closure_cross_check),
        ("C4", "amalgamation contracts", c4_amalgamation),
        ("C5", "gluing and bad-pair elimination", c5_gluing),
        ("C6", "S∞ membership, generic spec, amalgamation", c6_sinf),
        ("C7", "B_n symmetrize, amalgamate, betweenness", c7_bn),
        ("C8", "anchor facts", c8_anchors),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {name}: {why} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
