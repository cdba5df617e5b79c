use std::fmt;

use super::prime::is_prime;
use super::uint::{rem_wide, U256};
use super::NumError;

/// Largest supported prime bit length; keeps `p^2` inside 254 bits.
pub const MAX_PRIME_BITS: u32 = 127;

/// A canonical residue `0 <= value < modulus`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: U256,
    modulus: U256,
}

impl Residue {
    pub fn new(value: U256, modulus: U256) -> Result<Self, NumError> {
        if modulus.is_zero() {
            return Err(NumError::InvalidModulus);
        }
        if value >= modulus {
            return Err(NumError::OutOfRange { value, modulus });
        }
        Ok(Self { value, modulus })
    }

    /// Reduces an arbitrary unsigned value into range.
    pub fn reduce(value: U256, modulus: U256) -> Result<Self, NumError> {
        let (_, r) = value.div_rem(modulus).ok_or(NumError::InvalidModulus)?;
        Ok(Self { value: r, modulus })
    }

    pub fn value(&self) -> U256 {
        self.value
    }

    pub fn modulus(&self) -> U256 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

impl fmt::Debug for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.value, f)
    }
}

/// The public prime `p` together with its cached square.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus {
    p: U256,
    p_squared: U256,
}

impl PrimeModulus {
    /// Validates `p >= 5`, `bits(p) <= 127` and primality.
    pub fn new(p: U256) -> Result<Self, NumError> {
        if p < U256::from_u64(5) {
            return Err(NumError::PrimeTooSmall(p));
        }
        if p.bits() > MAX_PRIME_BITS {
            return Err(NumError::PrimeTooLarge(p));
        }
        if !is_prime(p)? {
            return Err(NumError::NotPrime(p));
        }
        let p_squared = p.checked_mul(p).expect("127-bit prime squares into 254 bits");
        Ok(Self { p, p_squared })
    }

    pub fn from_u64(p: u64) -> Result<Self, NumError> {
        Self::new(U256::from_u64(p))
    }

    pub fn p(&self) -> U256 {
        self.p
    }

    pub fn p_squared(&self) -> U256 {
        self.p_squared
    }

    /// `ceil(log2 p)`, which equals the bit length of `p` since an odd prime is
    /// never a power of two.
    pub fn bit_len(&self) -> u32 {
        self.p.bits()
    }

    /// `p` as a machine word when it fits; used by the enumeration code.
    pub fn small(&self) -> Option<u64> {
        self.p.to_u64()
    }

    /// Largest batch a single key may encrypt: `p - 1`.
    pub fn max_batch(&self) -> U256 {
        self.p.wrapping_sub(U256::ONE)
    }

    /// Residue of `value` modulo `p` (not `p^2`).
    pub fn residue_of(&self, value: U256) -> U256 {
        value.div_rem(self.p).expect("p is non-zero").1
    }
}

impl fmt::Debug for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeModulus({})", self.p)
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.p, f)
    }
}

/// `x mod n` in `0..n`, using the least non-negative representative for
/// negative `x`.
pub fn reduce_mod(x: i128, n: U256) -> Result<Residue, NumError> {
    if n.is_zero() {
        return Err(NumError::InvalidModulus);
    }
    let magnitude = Residue::reduce(U256::from_u128(x.unsigned_abs()), n)?;
    if x >= 0 || magnitude.is_zero() {
        return Ok(magnitude);
    }
    Ok(Residue { value: n.wrapping_sub(magnitude.value), modulus: n })
}

/// Multiplicative inverse modulo the prime `p`.
pub fn inv_mod(a: &Residue, p: &PrimeModulus) -> Result<Residue, NumError> {
    let a = Residue::reduce(a.value(), p.p())?;
    if a.is_zero() {
        return Err(NumError::NoInverse);
    }
    let exp = p.p().wrapping_sub(U256::from_u64(2));
    Ok(Residue { value: pow_mod(a.value, exp, p.p()), modulus: p.p() })
}

// Raw helpers below assume operands already lie in 0..n.

pub fn add_mod(a: U256, b: U256, n: U256) -> U256 {
    let (s, carry) = a.overflowing_add(b);
    if carry || s >= n {
        s.wrapping_sub(n)
    } else {
        s
    }
}

pub fn sub_mod(a: U256, b: U256, n: U256) -> U256 {
    if a >= b {
        a.wrapping_sub(b)
    } else {
        n.wrapping_sub(b.wrapping_sub(a))
    }
}

pub fn neg_mod(a: U256, n: U256) -> U256 {
    if a.is_zero() {
        a
    } else {
        n.wrapping_sub(a)
    }
}

pub fn mul_mod(a: U256, b: U256, n: U256) -> U256 {
    if let (Some(a), Some(b), Some(m)) = (a.to_u64(), b.to_u64(), n.to_u64()) {
        return U256::from_u64((a as u128 * b as u128 % m as u128) as u64);
    }
    rem_wide(&a.widening_mul(b), n)
}

pub fn pow_mod(base: U256, exp: U256, n: U256) -> U256 {
    if n == U256::ONE {
        return U256::ZERO;
    }
    let mut result = U256::ONE;
    let base = Residue::reduce(base, n).expect("non-zero modulus").value;
    for i in (0..exp.bits()).rev() {
        result = mul_mod(result, result, n);
        if exp.bit(i) {
            result = mul_mod(result, base, n);
        }
    }
    result
}
