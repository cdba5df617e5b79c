//! Information-theoretic blind decryption.
//!
//! A trusted dealer hands out single-use keys; an Encryptor publishes a batch
//! of inner ciphertexts under an additive pad; Alice asks a Decryptor to
//! decrypt one of them blindly and recovers the plaintext with [`twopad::map_ciphertext`].
//! Neither the Encryptor nor the Decryptor learns which message, and Alice
//! learns nothing about the others.
//!
//! Start at [`protocol`] for the roles, [`twopad`] and [`outer_pad`] for the
//! two ciphers, and [`verifier`] for the exact secrecy checks.

pub mod exec;
pub mod keystore;
pub mod num;
pub mod outer_pad;
pub mod params;
pub mod protocol;
pub mod twopad;
pub mod verifier;
pub mod wire;

pub use exec::Execution;
