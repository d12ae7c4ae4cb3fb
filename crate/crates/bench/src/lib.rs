//! Deterministic inputs for the benchmarks, sized by a single knob.

use qorbit::bn::BnDescriptor;
use qorbit::sample;
use qorbit::sinf::{CycleSpec, PartialInjection};
use qorbit::{BnPartialIso, OrderDescriptor, PartialIso};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` random partial isomorphisms with `n` pairs each.
pub fn pisos(seed: u64, count: usize, n: usize) -> Vec<PartialIso> {
    let mut rng = rng(seed);
    (0..count).map(|_| sample::random_piso(&mut rng, n)).collect()
}

/// Pairs of canonical words of length at most `max_len`.
pub fn word_pairs(seed: u64, count: usize, max_len: usize) -> Vec<(OrderDescriptor, OrderDescriptor)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| (sample::canonical_word(&mut rng, max_len), sample::canonical_word(&mut rng, max_len)))
        .collect()
}

pub type Triple = (PartialIso, PartialIso, PartialIso);

pub fn plus_triples(seed: u64, count: usize, extra: usize) -> Vec<Triple> {
    let mut rng = rng(seed);
    (0..count).map(|_| sample::plus_triple(&mut rng, extra)).collect()
}

pub fn rho_triples(seed: u64, count: usize, r: &OrderDescriptor, threshold: usize) -> Vec<Triple> {
    let mut rng = rng(seed);
    (0..count).map(|_| sample::rho_triple(&mut rng, r, threshold, 3)).collect()
}

pub fn sinf_triples(
    seed: u64,
    count: usize,
    r: &CycleSpec,
) -> Vec<(PartialInjection, PartialInjection, PartialInjection)> {
    let mut rng = rng(seed);
    (0..count).map(|_| sample::sinf_triple(&mut rng, r, 12)).collect()
}

pub fn bn_triples(
    seed: u64,
    count: usize,
    d: &BnDescriptor,
    threshold: usize,
) -> Vec<(BnPartialIso, BnPartialIso, BnPartialIso)> {
    let mut rng = rng(seed);
    (0..count).map(|_| sample::bn_triple(&mut rng, d, threshold, 2)).collect()
}
