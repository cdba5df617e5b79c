//! Exact verification of the secrecy properties by exhaustive counting.
//!
//! Every verifier enumerates all hidden randomness (keys, nonces, pads and
//! Alice's choice) for a small modulus, tallies integer counts, and compares
//! conditional probabilities as reduced fractions. Nothing is sampled and no
//! floating point is involved.
//!
//! # Why uniform priors suffice
//!
//! Each property says that some conditional distribution does not depend on
//! a secret value. Write the joint probability of a secret `s`, hidden
//! randomness `r` and observation `o` as `Pr[s] * Pr[r] * [o = f(s, r)]`,
//! where `r` is drawn independently of `s` and `f` is the scheme. Then
//!
//! ```text
//! Pr[O = o | S = s] = #{r : f(s, r) = o} / #R        (uniform r)
//! ```
//!
//! does not involve the prior of `S` at all. The property holds for every
//! prior iff these per-`s` counts agree for all `s`: if they agree, the
//! posterior `Pr[S = s | O = o]` is proportional to `Pr[s]` times a constant,
//! i.e. equals the prior; if they differ for some `s1, s2, o`, any prior
//! putting mass on both `s1` and `s2` moves. So counting each `(s, r)` cell
//! once, which is what enumeration under a uniform prior does, decides the
//! statement for all priors. The encryptor check conditions on the batch
//! messages as well, so the same argument applies per batch.
//!
//! # Enumeration sizes
//!
//! | check | bound | cells at the bound |
//! |---|---|---|
//! | ordinary secrecy | `n <= 10^4` | `n^2 = 10^8` |
//! | leak-freeness against Alice | `p <= 7` | `p^2 * p^2 * (p-1)(p-2) = 100 842` |
//! | blindness | `p <= 7` | `p^2 * p * (p-1) = 2 058` |
//! | leak-freeness against the encryptor | `p = 5, L <= 4` | `5^L * 25 * 4!/(4-L)! * L * 25 = 37.5 * 10^6` at `L = 4` |
//!
//! Each check also runs against deliberately broken variants of the scheme;
//! a failing report carries a [`Counterexample`] that
//! [`VerificationReport::recheck`] recomputes with an independent closed form.

mod blindness;
mod leak_alice;
mod leak_encryptor;
mod oracle;
mod shannon;
mod table;

use std::fmt;

use thiserror::Error;

pub use table::{DistributionTable, Probability};

use crate::exec::Execution;
use crate::num::PrimeModulus;

pub const MAX_SHANNON_MODULUS: u64 = 10_000;
pub const MAX_EXHAUSTIVE_PRIME: u64 = 7;
pub const ENCRYPTOR_PRIME: u64 = 5;
pub const MAX_ENCRYPTOR_BATCH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifierError {
    #[error("modulus {n} outside the enumeration bound {bound}")]
    TooLarge { n: u64, bound: &'static str },
    #[error("batch length {0} outside 1..={MAX_ENCRYPTOR_BATCH}")]
    BatchLength(usize),
    #[error("variant {variant} does not apply to {definition}")]
    VariantNotApplicable { variant: Variant, definition: Definition },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Definition {
    OrdinarySecrecy,
    LeakFreeAlice,
    BlindnessDecryptor,
    LeakFreeEncryptor,
}

impl Definition {
    pub const ALL: [Definition; 4] =
        [Self::OrdinarySecrecy, Self::LeakFreeAlice, Self::BlindnessDecryptor, Self::LeakFreeEncryptor];

    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Self::OrdinarySecrecy => "shannon",
            Self::LeakFreeAlice => "alice",
            Self::BlindnessDecryptor => "blind",
            Self::LeakFreeEncryptor => "encryptor",
        }
    }

    pub fn from_cli_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.cli_name() == name)
    }
}

impl fmt::Display for Definition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::OrdinarySecrecy => "ordinary perfect secrecy of the outer pad",
            Self::LeakFreeAlice => "leak-freeness against Alice",
            Self::BlindnessDecryptor => "ciphertext blindness against the Decryptor",
            Self::LeakFreeEncryptor => "leak-freeness against the Encryptor",
        })
    }
}

/// The shipped scheme or one of the deliberately weakened ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    Shipped,
    /// Outer pad keys restricted to even residues.
    EvenOuterKeys,
    /// Inner key with `y_k = 0`, leaving only `p` keys.
    ZeroSecondKeyComponent,
    /// Nonces drawn from `{1, 2}` only.
    RestrictedNonces,
    /// Nonce `(m mod (p-1)) + 1` never drawn for message `m`.
    MessageDependentNonces,
    /// Blind request and response sent without their pads.
    NoOuterLayer,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Self::Shipped,
        Self::EvenOuterKeys,
        Self::ZeroSecondKeyComponent,
        Self::RestrictedNonces,
        Self::MessageDependentNonces,
        Self::NoOuterLayer,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            Self::Shipped => "shipped",
            Self::EvenOuterKeys => "even-keys",
            Self::ZeroSecondKeyComponent => "zero-y",
            Self::RestrictedNonces => "restricted-nonce",
            Self::MessageDependentNonces => "message-nonce",
            Self::NoOuterLayer => "no-outer",
        }
    }

    pub fn from_cli_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.cli_name() == name)
    }

    pub fn applies_to(self, definition: Definition) -> bool {
        use Definition::*;
        match self {
            Self::Shipped => true,
            Self::EvenOuterKeys => definition == OrdinarySecrecy,
            Self::ZeroSecondKeyComponent => definition == LeakFreeAlice,
            Self::RestrictedNonces | Self::MessageDependentNonces => definition == BlindnessDecryptor,
            Self::NoOuterLayer => definition == LeakFreeEncryptor,
        }
    }

    fn check(self, definition: Definition) -> Result<(), VerifierError> {
        if !self.applies_to(definition) {
            return Err(VerifierError::VariantNotApplicable { variant: self, definition });
        }
        Ok(())
    }

    /// Inner keys `(x, y)` available under this variant.
    fn inner_keys(self, p: u64) -> Vec<(u64, u64)> {
        match self {
            Self::ZeroSecondKeyComponent => (0..p).map(|x| (x, 0)).collect(),
            _ => (0..p).flat_map(|x| (0..p).map(move |y| (x, y))).collect(),
        }
    }

    /// Nonces the Encryptor may draw for message `m`.
    fn nonces(self, p: u64, m: u64) -> Vec<u64> {
        match self {
            Self::RestrictedNonces => vec![1, 2],
            Self::MessageDependentNonces => {
                let banned = m % (p - 1) + 1;
                (1..p).filter(|z| *z != banned).collect()
            }
            _ => (1..p).collect(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

/// Which equality a counterexample breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clause {
    /// `Pr[C = c | M = m1]` against `Pr[C = c | M = m2]`.
    CiphertextGivenMessage,
    /// `Pr[C1, C2 | M1 = m1, M2 = m2a]` against the same under `m2b`.
    PairGivenMessages,
    /// `Pr[C1, C2 | M1, M2]` against `1/p^2`.
    PairAbsolute,
    /// `Pr[C' = c' | key, M = m]` against `1/(p-1)`.
    ResidueUniform,
    /// Decryptor's posterior `Pr[M = m | key, c', m']` against the prior.
    DecryptorPosterior,
    /// Encryptor's posterior `Pr[M = m | m_j, c_j, key, w, w']` against the
    /// prior given the batch messages alone.
    EncryptorPosterior,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CiphertextGivenMessage => "Pr[C = c | M = m1] = Pr[C = c | M = m2]",
            Self::PairGivenMessages => "Pr[C1 = c1, C2 = c2 | M1 = m1, M2 = m2a] = Pr[C1 = c1, C2 = c2 | M1 = m1, M2 = m2b]",
            Self::PairAbsolute => "Pr[C1 = c1, C2 = c2 | M1 = m1, M2 = m2, nonces] = 1/p^2",
            Self::ResidueUniform => "Pr[C' = c' | key, M = m] = 1/(p-1)",
            Self::DecryptorPosterior => "Pr[M = m | key, c', m'] = Pr[M = m]",
            Self::EncryptorPosterior => "Pr[M = m | m_j, c_j, key, w, w'] = Pr[M = m | m_j]",
        })
    }
}

/// A conditioning assignment under which two probabilities that should be
/// equal are not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub clause: Clause,
    pub assignment: Vec<(String, u64)>,
    pub left: Probability,
    pub right: Probability,
}

impl Counterexample {
    fn new(clause: Clause, assignment: Vec<(String, u64)>, left: Probability, right: Probability) -> Self {
        debug_assert_ne!(left, right);
        Self { clause, assignment, left, right }
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.assignment.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{} fails at {}: {} != {}", self.clause, cells.join(" "), self.left, self.right)
    }
}

pub(crate) fn assign(pairs: &[(&str, u64)]) -> Vec<(String, u64)> {
    pairs.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    definition: Definition,
    modulus: u64,
    batch_len: Option<usize>,
    variant: Variant,
    cells_checked: u64,
    tables: Vec<DistributionTable>,
    counterexample: Option<Counterexample>,
}

impl VerificationReport {
    pub fn definition(&self) -> Definition {
        self.definition
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn batch_len(&self) -> Option<usize> {
        self.batch_len
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Number of conditioning cells whose probabilities were compared.
    pub fn cells_checked(&self) -> u64 {
        self.cells_checked
    }

    /// Representative conditional distributions, each summing to 1.
    pub fn tables(&self) -> &[DistributionTable] {
        &self.tables
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        self.counterexample.as_ref()
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    /// Recomputes the counterexample's two probabilities from the closed form
    /// of the scheme, independently of the enumeration that found it.
    /// `None` for passing reports; otherwise whether the inequality holds
    /// with exactly the recorded values.
    pub fn recheck(&self) -> Option<bool> {
        let cx = self.counterexample.as_ref()?;
        let recomputed = match self.definition {
            Definition::OrdinarySecrecy => shannon::recheck(self.modulus, self.variant, cx),
            Definition::LeakFreeAlice => leak_alice::recheck(self.modulus, self.variant, cx),
            Definition::BlindnessDecryptor => blindness::recheck(self.modulus, self.variant, cx),
            Definition::LeakFreeEncryptor => leak_encryptor::recheck(self.modulus, self.variant, cx),
        };
        Some(matches!(recomputed, Some((l, r)) if l == cx.left && r == cx.right && l != r))
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (variant {}), n = {}", self.definition, self.variant, self.modulus)?;
        if let Some(l) = self.batch_len {
            write!(f, ", L = {l}")?;
        }
        writeln!(f)?;
        writeln!(f, "cells checked: {}", self.cells_checked)?;
        match &self.counterexample {
            None => writeln!(f, "result: PASS")?,
            Some(cx) => writeln!(f, "result: FAIL\ncounterexample: {cx}")?,
        }
        for t in &self.tables {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Runs the checks with a chosen schedule and scheme variant.
#[derive(Debug, Clone, Copy, Default)]
pub struct Verifier {
    pub execution: Execution,
    pub variant: Variant,
}

impl Verifier {
    pub fn new(execution: Execution, variant: Variant) -> Self {
        Self { execution, variant }
    }

    pub fn ordinary_secrecy(&self, n: u64) -> Result<VerificationReport, VerifierError> {
        self.variant.check(Definition::OrdinarySecrecy)?;
        if !(2..=MAX_SHANNON_MODULUS).contains(&n) {
            return Err(VerifierError::TooLarge { n, bound: "2..=10000" });
        }
        Ok(shannon::run(n, self.variant, self.execution))
    }

    pub fn leakfree_alice(&self, p: &PrimeModulus) -> Result<VerificationReport, VerifierError> {
        self.variant.check(Definition::LeakFreeAlice)?;
        Ok(leak_alice::run(small_prime(p, MAX_EXHAUSTIVE_PRIME, "p <= 7")?, self.variant, self.execution))
    }

    pub fn blindness_decryptor(&self, p: &PrimeModulus) -> Result<VerificationReport, VerifierError> {
        self.variant.check(Definition::BlindnessDecryptor)?;
        Ok(blindness::run(small_prime(p, MAX_EXHAUSTIVE_PRIME, "p <= 7")?, self.variant, self.execution))
    }

    pub fn leakfree_encryptor(&self, p: &PrimeModulus, batch_len: usize) -> Result<VerificationReport, VerifierError> {
        self.variant.check(Definition::LeakFreeEncryptor)?;
        let p = small_prime(p, ENCRYPTOR_PRIME, "p = 5")?;
        if !(1..=MAX_ENCRYPTOR_BATCH).contains(&batch_len) {
            return Err(VerifierError::BatchLength(batch_len));
        }
        Ok(leak_encryptor::run(p, batch_len, self.variant, self.execution))
    }
}

fn small_prime(p: &PrimeModulus, bound: u64, label: &'static str) -> Result<u64, VerifierError> {
    match p.small() {
        Some(v) if v <= bound => Ok(v),
        Some(v) => Err(VerifierError::TooLarge { n: v, bound: label }),
        None => Err(VerifierError::TooLarge { n: u64::MAX, bound: label }),
    }
}

/// Outer pad over `Z_n`, shipped scheme.
pub fn verify_ordinary_secrecy(n: u64) -> Result<VerificationReport, VerifierError> {
    Verifier::default().ordinary_secrecy(n)
}

pub fn verify_leakfree_alice(p: &PrimeModulus) -> Result<VerificationReport, VerifierError> {
    Verifier::default().leakfree_alice(p)
}

pub fn verify_blindness_decryptor(p: &PrimeModulus) -> Result<VerificationReport, VerifierError> {
    Verifier::default().blindness_decryptor(p)
}

pub fn verify_leakfree_encryptor(p: &PrimeModulus, batch_len: usize) -> Result<VerificationReport, VerifierError> {
    Verifier::default().leakfree_encryptor(p, batch_len)
}
