//! Fixed-width 256-bit unsigned integers.
//!
//! Four little-endian `u64` limbs. Only the operations the scheme needs are
//! provided: comparison, add/sub with carry reporting, a widening multiply into
//! 512 bits, and division. Everything is `Copy` and allocation free.

// Limb loops index several arrays in lockstep.
#![allow(clippy::needless_range_loop)]

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A 256-bit unsigned integer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct U256([u64; 4]);

/// Product of two [`U256`] values, little-endian limbs.
pub type Wide = [u64; 8];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseU256Error {
    #[error("empty integer literal")]
    Empty,
    #[error("invalid digit {0:?} in integer literal")]
    InvalidDigit(char),
    #[error("integer literal does not fit in 256 bits")]
    Overflow,
}

impl U256 {
    pub const ZERO: Self = Self([0; 4]);
    pub const ONE: Self = Self([1, 0, 0, 0]);
    pub const MAX: Self = Self([u64::MAX; 4]);
    pub const BITS: u32 = 256;

    pub const fn from_limbs(limbs: [u64; 4]) -> Self {
        Self(limbs)
    }

    pub const fn limbs(&self) -> [u64; 4] {
        self.0
    }

    pub const fn from_u64(v: u64) -> Self {
        Self([v, 0, 0, 0])
    }

    pub const fn from_u128(v: u128) -> Self {
        Self([v as u64, (v >> 64) as u64, 0, 0])
    }

    /// `2^k - 1` for `k <= 256`.
    pub fn mersenne(k: u32) -> Self {
        assert!(k <= 256, "mersenne exponent out of range");
        if k == 256 {
            return Self::MAX;
        }
        Self::ONE.shl(k).wrapping_sub(Self::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    /// Number of significant bits; zero has bit length 0.
    pub fn bits(&self) -> u32 {
        for i in (0..4).rev() {
            if self.0[i] != 0 {
                return 64 * i as u32 + (64 - self.0[i].leading_zeros());
            }
        }
        0
    }

    pub fn bit(&self, i: u32) -> bool {
        i < 256 && (self.0[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    pub fn is_odd(&self) -> bool {
        self.0[0] & 1 == 1
    }

    pub fn low_u64(&self) -> u64 {
        self.0[0]
    }

    pub fn to_u64(&self) -> Option<u64> {
        (self.0[1] == 0 && self.0[2] == 0 && self.0[3] == 0).then_some(self.0[0])
    }

    pub fn to_u128(&self) -> Option<u128> {
        (self.0[2] == 0 && self.0[3] == 0).then_some(self.0[0] as u128 | (self.0[1] as u128) << 64)
    }

    pub fn overflowing_add(self, rhs: Self) -> (Self, bool) {
        let mut out = [0u64; 4];
        let mut carry = false;
        for i in 0..4 {
            let (s1, c1) = self.0[i].overflowing_add(rhs.0[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            out[i] = s2;
            carry = c1 | c2;
        }
        (Self(out), carry)
    }

    pub fn overflowing_sub(self, rhs: Self) -> (Self, bool) {
        let mut out = [0u64; 4];
        let mut borrow = false;
        for i in 0..4 {
            let (d1, b1) = self.0[i].overflowing_sub(rhs.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            out[i] = d2;
            borrow = b1 | b2;
        }
        (Self(out), borrow)
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        match self.overflowing_add(rhs) {
            (v, false) => Some(v),
            _ => None,
        }
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        match self.overflowing_sub(rhs) {
            (v, false) => Some(v),
            _ => None,
        }
    }

    pub fn wrapping_add(self, rhs: Self) -> Self {
        self.overflowing_add(rhs).0
    }

    pub fn wrapping_sub(self, rhs: Self) -> Self {
        self.overflowing_sub(rhs).0
    }

    /// Full 512-bit product.
    pub fn widening_mul(self, rhs: Self) -> Wide {
        let mut out = [0u64; 8];
        for i in 0..4 {
            if self.0[i] == 0 {
                continue;
            }
            let mut carry: u128 = 0;
            for j in 0..4 {
                let t = self.0[i] as u128 * rhs.0[j] as u128 + out[i + j] as u128 + carry;
                out[i + j] = t as u64;
                carry = t >> 64;
            }
            out[i + 4] = carry as u64;
        }
        out
    }

    pub fn checked_mul(self, rhs: Self) -> Option<Self> {
        let w = self.widening_mul(rhs);
        (w[4..] == [0; 4]).then(|| Self([w[0], w[1], w[2], w[3]]))
    }

    /// Left shift; bits shifted past 256 are dropped.
    #[allow(clippy::should_implement_trait)]
    pub fn shl(self, k: u32) -> Self {
        if k >= 256 {
            return Self::ZERO;
        }
        let (limb, bit) = ((k / 64) as usize, k % 64);
        let mut out = [0u64; 4];
        for i in (limb..4).rev() {
            let src = i - limb;
            out[i] = self.0[src] << bit;
            if bit != 0 && src > 0 {
                out[i] |= self.0[src - 1] >> (64 - bit);
            }
        }
        Self(out)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn shr(self, k: u32) -> Self {
        if k >= 256 {
            return Self::ZERO;
        }
        let (limb, bit) = ((k / 64) as usize, k % 64);
        let mut out = [0u64; 4];
        for i in 0..4 - limb {
            let src = i + limb;
            out[i] = self.0[src] >> bit;
            if bit != 0 && src + 1 < 4 {
                out[i] |= self.0[src + 1] << (64 - bit);
            }
        }
        Self(out)
    }

    /// Quotient and remainder; `None` when dividing by zero.
    pub fn div_rem(self, divisor: Self) -> Option<(Self, Self)> {
        if divisor.is_zero() {
            return None;
        }
        if let (Some(a), Some(b)) = (self.to_u128(), divisor.to_u128()) {
            return Some((Self::from_u128(a / b), Self::from_u128(a % b)));
        }
        if self < divisor {
            return Some((Self::ZERO, self));
        }
        let mut quotient = Self::ZERO;
        let mut rem = Self::ZERO;
        for i in (0..self.bits()).rev() {
            let carry = rem.bit(255);
            rem = rem.shl(1);
            rem.0[0] |= self.bit(i) as u64;
            if carry || rem >= divisor {
                rem = rem.wrapping_sub(divisor);
                quotient.0[(i / 64) as usize] |= 1 << (i % 64);
            }
        }
        Some((quotient, rem))
    }

    /// Division by a single limb; panics on a zero divisor.
    pub fn div_rem_u64(self, divisor: u64) -> (Self, u64) {
        assert!(divisor != 0, "division by zero");
        let mut out = [0u64; 4];
        let mut rem: u128 = 0;
        for i in (0..4).rev() {
            let cur = (rem << 64) | self.0[i] as u128;
            out[i] = (cur / divisor as u128) as u64;
            rem = cur % divisor as u128;
        }
        (Self(out), rem as u64)
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for i in 0..4 {
            out[(3 - i) * 8..(4 - i) * 8].copy_from_slice(&self.0[i].to_be_bytes());
        }
        out
    }

    /// Parses a big-endian byte string of at most 32 bytes.
    pub fn from_be_slice(bytes: &[u8]) -> Option<Self> {
        if bytes.len() > 32 {
            return None;
        }
        let mut buf = [0u8; 32];
        buf[32 - bytes.len()..].copy_from_slice(bytes);
        let mut limbs = [0u64; 4];
        for (i, limb) in limbs.iter_mut().enumerate() {
            let start = (3 - i) * 8;
            *limb = u64::from_be_bytes(buf[start..start + 8].try_into().expect("8-byte chunk"));
        }
        Some(Self(limbs))
    }
}

/// Remainder of a 512-bit value modulo a non-zero 256-bit modulus.
pub fn rem_wide(x: &Wide, modulus: U256) -> U256 {
    assert!(!modulus.is_zero(), "zero modulus");
    if x[4..] == [0; 4] {
        let low = U256([x[0], x[1], x[2], x[3]]);
        return low.div_rem(modulus).expect("non-zero modulus").1;
    }
    let top = (0..8).rev().find(|&i| x[i] != 0).expect("high limbs are non-zero");
    let bits = 64 * top as u32 + (64 - x[top].leading_zeros());
    let mut rem = U256::ZERO;
    for i in (0..bits).rev() {
        let carry = rem.bit(255);
        rem = rem.shl(1);
        rem.0[0] |= (x[(i / 64) as usize] >> (i % 64)) & 1;
        // rem < modulus before the shift, so one subtraction restores the range.
        if carry || rem >= modulus {
            rem = rem.wrapping_sub(modulus);
        }
    }
    rem
}

impl Ord for U256 {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..4).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for U256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u8> for U256 {
    fn from(v: u8) -> Self {
        Self::from_u64(v as u64)
    }
}

impl From<u32> for U256 {
    fn from(v: u32) -> Self {
        Self::from_u64(v as u64)
    }
}

impl From<u64> for U256 {
    fn from(v: u64) -> Self {
        Self::from_u64(v)
    }
}

impl From<u128> for U256 {
    fn from(v: u128) -> Self {
        Self::from_u128(v)
    }
}

impl From<usize> for U256 {
    fn from(v: usize) -> Self {
        Self::from_u64(v as u64)
    }
}

impl fmt::Display for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.pad_integral(true, "", "0");
        }
        // Peel off 19 decimal digits at a time.
        const CHUNK: u64 = 10_000_000_000_000_000_000;
        let mut chunks = Vec::new();
        let mut cur = *self;
        while !cur.is_zero() {
            let (q, r) = cur.div_rem_u64(CHUNK);
            chunks.push(r);
            cur = q;
        }
        let mut s = chunks.pop().expect("non-zero value").to_string();
        for c in chunks.iter().rev() {
            s.push_str(&format!("{c:019}"));
        }
        f.pad_integral(true, "", &s)
    }
}

impl fmt::Debug for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::LowerHex for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let mut started = false;
        for limb in self.0.iter().rev() {
            if started {
                s.push_str(&format!("{limb:016x}"));
            } else if *limb != 0 {
                s.push_str(&format!("{limb:x}"));
                started = true;
            }
        }
        if !started {
            s.push('0');
        }
        f.pad_integral(true, "0x", &s)
    }
}

/// Decimal only.
impl FromStr for U256 {
    type Err = ParseU256Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ParseU256Error::Empty);
        }
        let ten = U256::from_u64(10);
        let mut acc = U256::ZERO;
        for ch in s.chars() {
            let digit = ch.to_digit(10).ok_or(ParseU256Error::InvalidDigit(ch))?;
            acc = acc
                .checked_mul(ten)
                .and_then(|v| v.checked_add(U256::from_u64(digit as u64)))
                .ok_or(ParseU256Error::Overflow)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_lengths() {
        assert_eq!(U256::ZERO.bits(), 0);
        assert_eq!(U256::from_u64(5).bits(), 3);
        assert_eq!(U256::mersenne(127).bits(), 127);
        assert_eq!(U256::MAX.bits(), 256);
    }

    #[test]
    fn decimal_round_trip() {
        let p: U256 = "170141183460469231731687303715884105727".parse().unwrap();
        assert_eq!(p, U256::mersenne(127));
        assert_eq!(p.to_string(), "170141183460469231731687303715884105727");
        assert_eq!(U256::ZERO.to_string(), "0");
        assert_eq!(U256::MAX.to_string().parse::<U256>().unwrap(), U256::MAX);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert_eq!("".parse::<U256>(), Err(ParseU256Error::Empty));
        assert_eq!("12a".parse::<U256>(), Err(ParseU256Error::InvalidDigit('a')));
        assert_eq!("-1".parse::<U256>(), Err(ParseU256Error::InvalidDigit('-')));
        let too_big = format!("{}0", U256::MAX);
        assert_eq!(too_big.parse::<U256>(), Err(ParseU256Error::Overflow));
    }

    #[test]
    fn carries_and_borrows() {
        let (v, c) = U256::MAX.overflowing_add(U256::ONE);
        assert!(c);
        assert!(v.is_zero());
        let (v, b) = U256::ZERO.overflowing_sub(U256::ONE);
        assert!(b);
        assert_eq!(v, U256::MAX);
        assert_eq!(U256::from_u128(u128::MAX).wrapping_add(U256::ONE), U256::ONE.shl(128));
    }

    #[test]
    fn shifts() {
        let x = U256::from_u64(0b1011);
        assert_eq!(x.shl(130).shr(130), x);
        assert_eq!(x.shl(64).limbs(), [0, 0b1011, 0, 0]);
        assert_eq!(U256::MAX.shr(255), U256::ONE);
        assert_eq!(U256::ONE.shl(256), U256::ZERO);
    }

    #[test]
    fn bytes_round_trip() {
        let x = U256::mersenne(200).wrapping_sub(U256::from_u64(12345));
        assert_eq!(U256::from_be_slice(&x.to_be_bytes()), Some(x));
        assert_eq!(U256::from_be_slice(&[0x15]), Some(U256::from_u64(21)));
        assert_eq!(U256::from_be_slice(&[0u8; 33]), None);
    }

    #[test]
    fn division() {
        let a = U256::mersenne(254);
        let d = U256::mersenne(127);
        let (q, r) = a.div_rem(d).unwrap();
        // (2^254 - 1) = (2^127 - 1)(2^127 + 1)
        assert_eq!(q, U256::ONE.shl(127).wrapping_add(U256::ONE));
        assert!(r.is_zero());
        assert_eq!(a.div_rem(U256::ZERO), None);
    }

    #[test]
    fn wide_remainder_matches_square() {
        let p = U256::mersenne(61);
        let w = p.widening_mul(p);
        assert!(rem_wide(&w, p).is_zero());
        let m = U256::mersenne(200);
        let w = m.widening_mul(m);
        // (2^200-1)^2 mod 2^200 = 1
        assert_eq!(rem_wide(&w, U256::ONE.shl(200)), U256::ONE);
    }
}
