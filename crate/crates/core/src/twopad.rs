//! The inner cipher over `Z_{p^2}`.
//!
//! A key is a pair `(x, y)` of residues mod `p`. A message `m` in `Z_p` is
//! encrypted with a fresh nonce `z` in `Z_p \ {0}`:
//!
//! ```text
//! b = p*m + z                 (mod p^2)
//! c = p*x*b^2 + p*y*b + b     (mod p^2)  =  p*(x*z^2 + y*z + m) + z
//! ```
//!
//! so `c ≡ z (mod p)`: the nonce is in the clear. Two ciphertexts sharing a
//! residue are related by [`map_ciphertext`], which is what makes blind
//! decryption possible. Two plaintext/ciphertext pairs with *different*
//! residues pin down the key completely ([`recover_key`]), which is why a key
//! serves exactly one decryption.

use std::fmt;

use thiserror::Error;

use crate::num::{
    add_mod, inv_mod, mul_mod, neg_mod, sample_distinct_nonzero, sample_uniform, sub_mod, NumError, PrimeModulus,
    RandomSource, Residue, U256,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwoPadError {
    #[error("{what} {value} is out of range for p = {p}")]
    OutOfRange { what: &'static str, value: U256, p: U256 },
    #[error("nonce must be a non-zero residue mod p")]
    ZeroNonce,
    #[error("ciphertexts are not congruent mod p; no transformation exists")]
    CongruenceMismatch,
    #[error("ciphertexts share a residue mod p; the key system is singular")]
    DegenerateSystem,
    #[error("ciphertext has residue 0 mod p and cannot be honestly generated")]
    InvalidCiphertext,
    #[error("cannot encrypt an empty batch")]
    EmptyBatch,
    #[error("batch of {len} exceeds the per-key capacity p - 1 = {capacity}")]
    CapacityExceeded { len: usize, capacity: U256 },
    #[error(transparent)]
    Num(#[from] NumError),
}

fn check_below(what: &'static str, value: U256, bound: U256, p: &PrimeModulus) -> Result<(), TwoPadError> {
    if value >= bound {
        return Err(TwoPadError::OutOfRange { what, value, p: p.p() });
    }
    Ok(())
}

/// Inner key `(x_k, y_k)`, both in `Z_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoPadKey {
    x: U256,
    y: U256,
}

impl TwoPadKey {
    pub fn new(x: U256, y: U256, p: &PrimeModulus) -> Result<Self, TwoPadError> {
        check_below("key component x", x, p.p(), p)?;
        check_below("key component y", y, p.p(), p)?;
        Ok(Self { x, y })
    }

    pub fn x(&self) -> U256 {
        self.x
    }

    pub fn y(&self) -> U256 {
        self.y
    }

    /// Every key for a word-sized `p`, in lexicographic order. Each of the
    /// `p^2` keys appears exactly once.
    pub fn enumerate(p: &PrimeModulus) -> impl Iterator<Item = TwoPadKey> {
        let n = p.small().expect("enumeration needs a word-sized p");
        (0..n).flat_map(move |x| {
            (0..n).map(move |y| TwoPadKey { x: U256::from_u64(x), y: U256::from_u64(y) })
        })
    }
}

impl fmt::Debug for TwoPadKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwoPadKey({}, {})", self.x, self.y)
    }
}

/// A message in `Z_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InnerPlaintext(U256);

impl InnerPlaintext {
    pub fn new(m: U256, p: &PrimeModulus) -> Result<Self, TwoPadError> {
        check_below("plaintext", m, p.p(), p)?;
        Ok(Self(m))
    }

    pub fn value(&self) -> U256 {
        self.0
    }
}

impl fmt::Debug for InnerPlaintext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={}", self.0)
    }
}

impl fmt::Display for InnerPlaintext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// An element of `Z_{p^2}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InnerCiphertext(U256);

impl InnerCiphertext {
    pub fn new(c: U256, p: &PrimeModulus) -> Result<Self, TwoPadError> {
        check_below("ciphertext", c, p.p_squared(), p)?;
        Ok(Self(c))
    }

    pub fn value(&self) -> U256 {
        self.0
    }

    /// `c mod p`, which is the encryption nonce.
    pub fn residue(&self, p: &PrimeModulus) -> U256 {
        p.residue_of(self.0)
    }
}

impl fmt::Debug for InnerCiphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c={}", self.0)
    }
}

impl fmt::Display for InnerCiphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Draws `x_k` and `y_k` independently and uniformly from `Z_p`.
pub fn gen(p: &PrimeModulus, rng: &mut RandomSource) -> TwoPadKey {
    let x = sample_uniform(p.p(), false, rng).expect("p >= 5").value();
    let y = sample_uniform(p.p(), false, rng).expect("p >= 5").value();
    TwoPadKey { x, y }
}

pub fn encrypt(key: &TwoPadKey, p: &PrimeModulus, m: InnerPlaintext, rng: &mut RandomSource) -> InnerCiphertext {
    let z = sample_uniform(p.p(), true, rng).expect("p >= 5").value();
    encrypt_raw(key, p, m, z)
}

/// Encryption under a caller-chosen nonce. Reusing `z` across two messages
/// lets anyone holding one plaintext decrypt the other, so this is only
/// available to tests.
#[cfg(feature = "test-support")]
pub fn encrypt_with_nonce(
    key: &TwoPadKey,
    p: &PrimeModulus,
    m: InnerPlaintext,
    z: U256,
) -> Result<InnerCiphertext, TwoPadError> {
    check_below("nonce", z, p.p(), p)?;
    if z.is_zero() {
        return Err(TwoPadError::ZeroNonce);
    }
    Ok(encrypt_raw(key, p, m, z))
}

/// `z` must lie in `1..p`; callers guarantee it.
pub(crate) fn encrypt_raw(key: &TwoPadKey, p: &PrimeModulus, m: InnerPlaintext, z: U256) -> InnerCiphertext {
    let n = p.p_squared();
    let b = add_mod(mul_mod(p.p(), m.0, n), z, n);
    let b_sq = mul_mod(b, b, n);
    let px = mul_mod(p.p(), key.x, n);
    let py = mul_mod(p.p(), key.y, n);
    let c = add_mod(add_mod(mul_mod(px, b_sq, n), mul_mod(py, b, n), n), b, n);
    InnerCiphertext(c)
}

/// Total on `Z_{p^2}`: residue-0 ciphertexts decrypt too, and rejecting them
/// is left to the protocol layer.
pub fn decrypt(key: &TwoPadKey, p: &PrimeModulus, c: InnerCiphertext) -> InnerPlaintext {
    let n = p.p_squared();
    let z = c.residue(p);
    let z_sq = mul_mod(z, z, n);
    let neg_px = neg_mod(mul_mod(p.p(), key.x, n), n);
    let neg_py = neg_mod(mul_mod(p.p(), key.y, n), n);
    let t = add_mod(add_mod(mul_mod(neg_px, z_sq, n), mul_mod(neg_py, z, n), n), c.0, n);
    let (m, rem) = t.wrapping_sub(z).div_rem(p.p()).expect("p is non-zero");
    debug_assert!(rem.is_zero() && t >= z, "t - z is a multiple of p by construction");
    InnerPlaintext(m)
}

/// Given a known decryption `m1` of `c1`, returns the decryption of any
/// `c2 ≡ c1 (mod p)` without the key.
pub fn map_ciphertext(
    c1: InnerCiphertext,
    m1: InnerPlaintext,
    c2: InnerCiphertext,
    p: &PrimeModulus,
) -> Result<InnerPlaintext, TwoPadError> {
    if c1.residue(p) != c2.residue(p) {
        return Err(TwoPadError::CongruenceMismatch);
    }
    let n = p.p_squared();
    let v = add_mod(sub_mod(c2.0, c1.0, n), mul_mod(p.p(), m1.0, n), n);
    let (m2, rem) = v.div_rem(p.p()).expect("p is non-zero");
    debug_assert!(rem.is_zero());
    Ok(InnerPlaintext(m2))
}

/// Encrypts up to `p - 1` messages with pairwise-distinct residues mod `p`.
///
/// Since `c ≡ z (mod p)`, distinct residues are the same thing as distinct
/// nonces, so the nonces are drawn as a sample without replacement.
pub fn encrypt_batch(
    key: &TwoPadKey,
    p: &PrimeModulus,
    msgs: &[InnerPlaintext],
    rng: &mut RandomSource,
) -> Result<Vec<InnerCiphertext>, TwoPadError> {
    check_batch_len(msgs.len(), p)?;
    let nonces = sample_distinct_nonzero(p.p(), msgs.len(), rng)?;
    Ok(msgs.iter().zip(nonces).map(|(m, z)| encrypt_raw(key, p, *m, z)).collect())
}

pub(crate) fn check_batch_len(len: usize, p: &PrimeModulus) -> Result<(), TwoPadError> {
    if len == 0 {
        return Err(TwoPadError::EmptyBatch);
    }
    if U256::from(len) > p.max_batch() {
        return Err(TwoPadError::CapacityExceeded { len, capacity: p.max_batch() });
    }
    Ok(())
}

/// Solves for the unique key consistent with two plaintext/ciphertext pairs
/// whose ciphertexts lie in different non-zero residue classes.
///
/// With `z_i = c_i mod p` and `v_i = (c_i - p*m_i - z_i) / p`, the key
/// satisfies `v_i = x*z_i^2 + y*z_i (mod p)`, a 2x2 system with determinant
/// `z1^2*z2 - z1*z2^2 = z1*z2*(z1 - z2) != 0`.
///
/// This is the attack that forbids a second decryption under one key.
pub fn recover_key(
    pair1: (InnerPlaintext, InnerCiphertext),
    pair2: (InnerPlaintext, InnerCiphertext),
    p: &PrimeModulus,
) -> Result<TwoPadKey, TwoPadError> {
    let (m1, c1) = pair1;
    let (m2, c2) = pair2;
    let (z1, z2) = (c1.residue(p), c2.residue(p));
    if z1.is_zero() || z2.is_zero() {
        return Err(TwoPadError::InvalidCiphertext);
    }
    if z1 == z2 {
        return Err(TwoPadError::DegenerateSystem);
    }
    let q = p.p();
    let v = |m: InnerPlaintext, c: InnerCiphertext, z: U256| {
        let n = p.p_squared();
        let t = sub_mod(sub_mod(c.0, mul_mod(q, m.0, n), n), z, n);
        t.div_rem(q).expect("p is non-zero").0
    };
    let (v1, v2) = (v(m1, c1, z1), v(m2, c2, z2));
    let (z1_sq, z2_sq) = (mul_mod(z1, z1, q), mul_mod(z2, z2, q));
    let det = sub_mod(mul_mod(z1_sq, z2, q), mul_mod(z1, z2_sq, q), q);
    let det_inv = inv_mod(&Residue::new(det, q)?, p)?.value();
    let x = mul_mod(sub_mod(mul_mod(v1, z2, q), mul_mod(v2, z1, q), q), det_inv, q);
    let y = mul_mod(sub_mod(mul_mod(z1_sq, v2, q), mul_mod(z2_sq, v1, q), q), det_inv, q);
    Ok(TwoPadKey { x, y })
}
