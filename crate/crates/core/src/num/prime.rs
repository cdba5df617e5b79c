//! Miller–Rabin primality testing.
//!
//! Below 2^64 the first twelve primes form a deterministic witness set. Above
//! that, 64 rounds with random bases bound the error by 4^-64 = 2^-128.

use super::modular::{mul_mod, pow_mod};
use super::rng::{sample_uniform, RandomSource};
use super::uint::U256;
use super::NumError;

const DETERMINISTIC_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const PROBABILISTIC_ROUNDS: usize = 64;

pub fn is_prime(n: U256) -> Result<bool, NumError> {
    if n < U256::from_u64(2) {
        return Err(NumError::PrimalityInput(n));
    }
    if let Some(small) = n.to_u64() {
        return Ok(is_prime_u64(small));
    }
    for w in DETERMINISTIC_WITNESSES {
        if n.div_rem_u64(w).1 == 0 {
            return Ok(false);
        }
    }
    let n_minus_one = n.wrapping_sub(U256::ONE);
    let (d, s) = split_power_of_two(n_minus_one);
    let mut rng = RandomSource::os();
    // Bases drawn from [2, n-2].
    let span = n.wrapping_sub(U256::from_u64(3));
    for _ in 0..PROBABILISTIC_ROUNDS {
        let a = sample_uniform(span, false, &mut rng)
            .expect("span is non-zero for n >= 2^64")
            .value()
            .wrapping_add(U256::from_u64(2));
        if !passes_round(n, n_minus_one, d, s, a) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn split_power_of_two(mut d: U256) -> (U256, u32) {
    let mut s = 0;
    while !d.is_odd() {
        d = d.shr(1);
        s += 1;
    }
    (d, s)
}

fn passes_round(n: U256, n_minus_one: U256, d: U256, s: u32, a: U256) -> bool {
    let mut x = pow_mod(a, d, n);
    if x == U256::ONE || x == n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n_minus_one {
            return true;
        }
    }
    false
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for w in DETERMINISTIC_WITNESSES {
        if n == w {
            return true;
        }
        if n.is_multiple_of(w) {
            return false;
        }
    }
    let mul = |a: u64, b: u64| (a as u128 * b as u128 % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in DETERMINISTIC_WITNESSES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
