//! Randomness for key generation and nonces.
//!
//! Perfect secrecy assumes truly uniform keys. [`RandomSource::os`] reads the
//! operating system's entropy pool and is what deployments use.
//! [`RandomSource::seeded`] is a ChaCha20 keystream expanded from a 64-bit
//! seed; it only exists so that tests and worked examples are reproducible
//! and gives no information-theoretic guarantee whatsoever.

use std::collections::HashSet;

use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::modular::Residue;
use super::uint::U256;
use super::NumError;

/// A single-owner stream of uniform bits. Movable between threads, never
/// shared.
pub struct RandomSource {
    inner: Inner,
}

enum Inner {
    Os(OsRng),
    Seeded(Box<ChaCha20Rng>),
}

impl RandomSource {
    pub fn os() -> Self {
        Self { inner: Inner::Os(OsRng) }
    }

    pub fn seeded(seed: u64) -> Self {
        Self { inner: Inner::Seeded(Box::new(ChaCha20Rng::seed_from_u64(seed))) }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.inner, Inner::Seeded(_))
    }

    /// A uniformly random 256-bit word.
    pub fn next_u256(&mut self) -> U256 {
        U256::from_limbs([self.next_u64(), self.next_u64(), self.next_u64(), self.next_u64()])
    }
}

impl std::fmt::Debug for RandomSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mode = if self.is_deterministic() { "seeded" } else { "os" };
        f.debug_struct("RandomSource").field("mode", &mode).finish()
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        match &mut self.inner {
            Inner::Os(r) => r.next_u32(),
            Inner::Seeded(r) => r.next_u32(),
        }
    }

    fn next_u64(&mut self) -> u64 {
        match &mut self.inner {
            Inner::Os(r) => r.next_u64(),
            Inner::Seeded(r) => r.next_u64(),
        }
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        match &mut self.inner {
            Inner::Os(r) => r.fill_bytes(dest),
            Inner::Seeded(r) => r.fill_bytes(dest),
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        match &mut self.inner {
            Inner::Os(r) => r.try_fill_bytes(dest),
            Inner::Seeded(r) => r.try_fill_bytes(dest),
        }
    }
}

/// Uniform on `0..upper`, or on `1..upper` when `exclude_zero` is set.
///
/// Rejection sampling over the smallest enclosing power of two, so the
/// expected number of draws is below two and there is no modulo bias.
pub fn sample_uniform(upper: U256, exclude_zero: bool, rng: &mut RandomSource) -> Result<Residue, NumError> {
    if upper.is_zero() {
        return Err(NumError::InvalidModulus);
    }
    if exclude_zero && upper < U256::from_u64(2) {
        return Err(NumError::EmptyRange);
    }
    let (span, offset) = if exclude_zero { (upper.wrapping_sub(U256::ONE), U256::ONE) } else { (upper, U256::ZERO) };
    let v = uniform_below(span, rng).wrapping_add(offset);
    Residue::new(v, upper)
}

fn uniform_below(span: U256, rng: &mut RandomSource) -> U256 {
    let bits = span.wrapping_sub(U256::ONE).bits();
    if bits == 0 {
        return U256::ZERO;
    }
    loop {
        let candidate = rng.next_u256().shr(256 - bits);
        if candidate < span {
            return candidate;
        }
    }
}

/// `count` distinct values from `1..upper`, uniformly random as an ordered
/// tuple.
///
/// Floyd's subset sampling followed by a Fisher–Yates shuffle: `O(count)`
/// draws and guaranteed termination even when `count == upper - 1`.
pub fn sample_distinct_nonzero(upper: U256, count: usize, rng: &mut RandomSource) -> Result<Vec<U256>, NumError> {
    if upper < U256::from_u64(2) {
        return Err(NumError::EmptyRange);
    }
    let population = upper.wrapping_sub(U256::ONE);
    if U256::from(count) > population {
        return Err(NumError::SampleTooLarge { requested: count, population });
    }
    let mut chosen: HashSet<U256> = HashSet::with_capacity(count);
    let mut order = Vec::with_capacity(count);
    // Floyd over 0..population, shifted into 1..upper on output.
    let start = population.wrapping_sub(U256::from(count));
    let mut j = start;
    while j < population {
        let t = uniform_below(j.wrapping_add(U256::ONE), rng);
        let pick = if chosen.contains(&t) { j } else { t };
        chosen.insert(pick);
        order.push(pick.wrapping_add(U256::ONE));
        j = j.wrapping_add(U256::ONE);
    }
    for i in (1..order.len()).rev() {
        let k = uniform_below(U256::from(i + 1), rng).low_u64() as usize;
        order.swap(i, k);
    }
    Ok(order)
}
