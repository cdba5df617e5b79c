//! Word-sized views of the scheme.
//!
//! [`Shipped`] drives the real implementation; the free functions are the
//! closed forms used to recheck counterexamples. They share no code.

use crate::num::{PrimeModulus, Residue, U256};
use crate::outer_pad::{otp_encrypt, OuterKey};
use crate::twopad::{self, InnerCiphertext, InnerPlaintext, TwoPadKey};

/// The shipped cipher and pad at a small prime.
pub(crate) struct Shipped {
    p: PrimeModulus,
}

impl Shipped {
    pub(crate) fn new(p: u64) -> Self {
        Self { p: PrimeModulus::from_u64(p).expect("enumeration primes are valid") }
    }

    fn key(&self, x: u64, y: u64) -> TwoPadKey {
        TwoPadKey::new(U256::from_u64(x), U256::from_u64(y), &self.p).expect("key in range")
    }

    pub(crate) fn encrypt(&self, (x, y): (u64, u64), m: u64, z: u64) -> u64 {
        let m = InnerPlaintext::new(U256::from_u64(m), &self.p).expect("m < p");
        twopad::encrypt_raw(&self.key(x, y), &self.p, m, U256::from_u64(z)).value().low_u64()
    }

    /// What the Decryptor computes on a blinded residue.
    pub(crate) fn decrypt_residue(&self, (x, y): (u64, u64), c_prime: u64) -> u64 {
        let c = InnerCiphertext::new(U256::from_u64(c_prime), &self.p).expect("c' < p");
        twopad::decrypt(&self.key(x, y), &self.p, c).value().low_u64()
    }

    pub(crate) fn residue(&self, c: u64) -> u64 {
        self.p.residue_of(U256::from_u64(c)).low_u64()
    }
}

/// The outer pad at a small modulus.
pub(crate) fn pad(k: u64, m: u64, n: u64) -> u64 {
    let n = U256::from_u64(n);
    let key = OuterKey::from_value(U256::from_u64(k), n).expect("k < n");
    otp_encrypt(&key, &Residue::new(U256::from_u64(m), n).expect("m < n")).expect("same modulus").value().low_u64()
}

/// `p * ((x z^2 + y z + m) mod p) + z`.
pub(crate) fn closed_encrypt(p: u64, (x, y): (u64, u64), m: u64, z: u64) -> u64 {
    p * ((x * z * z + y * z + m) % p) + z
}

/// `(-x c^2 - y c) mod p`.
pub(crate) fn closed_decrypt_residue(p: u64, (x, y): (u64, u64), c: u64) -> u64 {
    (p * p - (x * c * c + y * c) % p) % p
}
