//! Additive one-time pad over `Z_n`.
//!
//! Used mod `p^2` to protect the ciphertext batch and mod `p` for the blinded
//! request and response. With `k` uniform on `Z_n`, `m + k` is uniform on
//! `Z_n` for every `m`, which is Shannon's perfect secrecy with key length
//! equal to message length.
//!
//! Keys remember their modulus, so a `p^2` key cannot pad a mod-`p` value.

use thiserror::Error;

use crate::num::{add_mod, sample_uniform, sub_mod, NumError, RandomSource, Residue, U256};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OuterPadError {
    #[error("key is bound to modulus {key_modulus} but the value lives mod {value_modulus}")]
    ModulusMismatch { key_modulus: U256, value_modulus: U256 },
    #[error("outer pad modulus must be at least 2, got {0}")]
    InvalidModulus(U256),
    #[error(transparent)]
    Num(#[from] NumError),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct OuterKey {
    key: Residue,
}

impl OuterKey {
    pub fn new(key: Residue) -> Result<Self, OuterPadError> {
        if key.modulus() < U256::from_u64(2) {
            return Err(OuterPadError::InvalidModulus(key.modulus()));
        }
        Ok(Self { key })
    }

    pub fn from_value(k: U256, n: U256) -> Result<Self, OuterPadError> {
        Self::new(Residue::new(k, n)?)
    }

    pub fn value(&self) -> U256 {
        self.key.value()
    }

    pub fn modulus(&self) -> U256 {
        self.key.modulus()
    }

    /// All `n` keys for a word-sized modulus.
    pub fn enumerate(n: u64) -> impl Iterator<Item = OuterKey> {
        let modulus = U256::from_u64(n);
        (0..n).map(move |k| OuterKey { key: Residue::new(U256::from_u64(k), modulus).expect("k < n") })
    }

    fn check(&self, value: &Residue) -> Result<(), OuterPadError> {
        if value.modulus() != self.modulus() {
            return Err(OuterPadError::ModulusMismatch {
                key_modulus: self.modulus(),
                value_modulus: value.modulus(),
            });
        }
        Ok(())
    }
}

pub fn otp_gen(n: U256, rng: &mut RandomSource) -> Result<OuterKey, OuterPadError> {
    if n < U256::from_u64(2) {
        return Err(OuterPadError::InvalidModulus(n));
    }
    OuterKey::new(sample_uniform(n, false, rng)?)
}

pub fn otp_encrypt(key: &OuterKey, m: &Residue) -> Result<Residue, OuterPadError> {
    key.check(m)?;
    let n = key.modulus();
    Ok(Residue::new(add_mod(m.value(), key.value(), n), n)?)
}

pub fn otp_decrypt(key: &OuterKey, c: &Residue) -> Result<Residue, OuterPadError> {
    key.check(c)?;
    let n = key.modulus();
    Ok(Residue::new(sub_mod(c.value(), key.value(), n), n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: u64, n: u64) -> Residue {
        Residue::new(U256::from_u64(v), U256::from_u64(n)).unwrap()
    }

    fn k(v: u64, n: u64) -> OuterKey {
        OuterKey::new(r(v, n)).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(otp_encrypt(&k(0, 25), &r(21, 25)).unwrap(), r(21, 25));
        assert_eq!(otp_encrypt(&k(3, 5), &r(4, 5)).unwrap(), r(2, 5));
        assert_eq!(otp_decrypt(&k(0, 25), &r(21, 25)).unwrap(), r(21, 25));
        assert_eq!(otp_decrypt(&k(3, 5), &r(2, 5)).unwrap(), r(4, 5));
    }

    #[test]
    fn modulus_binding() {
        assert!(matches!(otp_encrypt(&k(3, 25), &r(4, 5)), Err(OuterPadError::ModulusMismatch { .. })));
        assert!(matches!(otp_decrypt(&k(3, 5), &r(4, 25)), Err(OuterPadError::ModulusMismatch { .. })));
    }

    #[test]
    fn generation() {
        assert!(matches!(otp_gen(U256::ONE, &mut RandomSource::seeded(0)), Err(OuterPadError::InvalidModulus(_))));
        let a = otp_gen(U256::from_u64(25), &mut RandomSource::seeded(9)).unwrap();
        let b = otp_gen(U256::from_u64(25), &mut RandomSource::seeded(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.value() < U256::from_u64(25));
        let all: Vec<_> = OuterKey::enumerate(5).map(|k| k.value().low_u64()).collect();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn round_trip_and_bijectivity_exhaustive() {
        for n in [5u64, 25] {
            for m in 0..n {
                let mut seen = vec![false; n as usize];
                for key in OuterKey::enumerate(n) {
                    let c = otp_encrypt(&key, &r(m, n)).unwrap();
                    assert_eq!(otp_decrypt(&key, &c).unwrap(), r(m, n));
                    let slot = &mut seen[c.value().low_u64() as usize];
                    assert!(!*slot, "two keys map m={m} to the same ciphertext");
                    *slot = true;
                }
                assert!(seen.iter().all(|s| *s));
            }
        }
    }
}
