//! Named parameter presets and key-material accounting.

use std::fmt;

use crate::num::{NumError, PrimeModulus, U256};

/// A recommended prime with its label, e.g. `"2^61-1"` or `"1009"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    p: PresetValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PresetValue {
    Small(u64),
    Mersenne(u32),
}

pub const PRESETS: [Preset; 11] = [
    Preset { name: "5", p: PresetValue::Small(5) },
    Preset { name: "7", p: PresetValue::Small(7) },
    Preset { name: "11", p: PresetValue::Small(11) },
    Preset { name: "23", p: PresetValue::Small(23) },
    Preset { name: "101", p: PresetValue::Small(101) },
    Preset { name: "1009", p: PresetValue::Small(1009) },
    Preset { name: "5003", p: PresetValue::Small(5003) },
    Preset { name: "20011", p: PresetValue::Small(20011) },
    Preset { name: "2^31-1", p: PresetValue::Mersenne(31) },
    Preset { name: "2^61-1", p: PresetValue::Mersenne(61) },
    Preset { name: "2^127-1", p: PresetValue::Mersenne(127) },
];

impl Preset {
    pub fn by_name(name: &str) -> Option<Self> {
        PRESETS.iter().copied().find(|p| p.name == name)
    }

    pub fn value(&self) -> U256 {
        match self.p {
            PresetValue::Small(v) => U256::from_u64(v),
            PresetValue::Mersenne(k) => U256::mersenne(k),
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        PrimeModulus::new(self.value()).expect("presets are valid primes")
    }

    pub fn sizes(&self) -> KeySizes {
        KeySizes::for_modulus(&self.modulus())
    }
}

/// Bit accounting for one single-use session under a given `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySizes {
    /// `x_k, y_k, k_C, k_P`: four residues mod p, `ceil(log2 p)` bits each.
    pub decryptor_key_bits: u32,
    pub plaintext_bits: u32,
    pub ciphertext_bits: u32,
}

impl KeySizes {
    pub fn for_modulus(p: &PrimeModulus) -> Self {
        let bits = p.bit_len();
        Self {
            decryptor_key_bits: 4 * bits,
            plaintext_bits: bits,
            ciphertext_bits: p.p_squared().bits(),
        }
    }
}

impl fmt::Display for KeySizes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "decryptor key {} bits, plaintext {} bits, ciphertext {} bits",
            self.decryptor_key_bits, self.plaintext_bits, self.ciphertext_bits
        )
    }
}

/// Parses either a decimal prime or `preset:<name>`.
pub fn parse_modulus(text: &str) -> Result<PrimeModulus, ParamError> {
    if let Some(name) = text.strip_prefix("preset:") {
        return Preset::by_name(name).map(|p| p.modulus()).ok_or_else(|| ParamError::UnknownPreset(name.to_owned()));
    }
    let p: U256 = text.parse().map_err(|_| ParamError::NotAnInteger(text.to_owned()))?;
    Ok(PrimeModulus::new(p)?)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("{0:?} is neither a decimal integer nor preset:<name>")]
    NotAnInteger(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_prime_and_named() {
        for preset in PRESETS {
            let m = preset.modulus();
            assert_eq!(parse_modulus(&format!("preset:{}", preset.name)).unwrap(), m);
        }
        assert_eq!(Preset::by_name("2^61-1").unwrap().value(), U256::mersenne(61));
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_modulus("7").unwrap().p(), U256::from_u64(7));
        assert!(matches!(parse_modulus("25"), Err(ParamError::Num(NumError::NotPrime(_)))));
        assert!(matches!(parse_modulus("preset:13"), Err(ParamError::UnknownPreset(_))));
        assert!(matches!(parse_modulus("seven"), Err(ParamError::NotAnInteger(_))));
    }

    #[test]
    fn smallest_row() {
        let s = Preset::by_name("5").unwrap().sizes();
        assert_eq!((s.decryptor_key_bits, s.plaintext_bits, s.ciphertext_bits), (12, 3, 5));
    }
}
