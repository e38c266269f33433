//! Core of a proof-of-useful-work chain run by a Root Authority: canonical
//! encoding, hashing and signatures, the data model, Merkle proofs, the
//! persistent store, the mock workload and the round logic.

pub mod codec;
pub mod consensus;
pub mod crypto;
pub mod goldens;
pub mod hash;
pub mod merkle;
pub mod model;
pub mod rng;
pub mod state;
pub mod store;
pub mod worker;

pub use crypto::{Address, KeyPair, PublicKey, Signature};
pub use hash::{keccak256, Digest};
pub use rng::Rng64;
