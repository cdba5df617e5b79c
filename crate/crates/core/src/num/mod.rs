//! Exact modular arithmetic, primality testing and sampling.

mod modular;
mod prime;
mod rng;
mod uint;

use thiserror::Error;

pub use modular::{
    add_mod, inv_mod, mul_mod, neg_mod, pow_mod, reduce_mod, sub_mod, PrimeModulus, Residue, MAX_PRIME_BITS,
};
pub use prime::is_prime;
pub use rng::{sample_distinct_nonzero, sample_uniform, RandomSource};
pub use uint::{rem_wide, ParseU256Error, Wide, U256};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("modulus must be non-zero")]
    InvalidModulus,
    #[error("value {value} is not below modulus {modulus}")]
    OutOfRange { value: U256, modulus: U256 },
    #[error("zero has no multiplicative inverse")]
    NoInverse,
    #[error("primality is only defined for n >= 2, got {0}")]
    PrimalityInput(U256),
    #[error("p must be at least 5, got {0}")]
    PrimeTooSmall(U256),
    #[error("p = {0} exceeds the supported {MAX_PRIME_BITS}-bit limit")]
    PrimeTooLarge(U256),
    #[error("{0} is not prime")]
    NotPrime(U256),
    #[error("cannot sample a non-zero value below 2")]
    EmptyRange,
    #[error("cannot draw {requested} distinct values from a population of {population}")]
    SampleTooLarge { requested: usize, population: U256 },
}
