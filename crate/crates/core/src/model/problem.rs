use crate::codec::{canonical_bytes, CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::{KeyPair, PublicKey, Signature};
use crate::hash::{keccak256, Digest};

/// Parameters of one independently solvable piece of the block problem.
/// `param_tag` stands in for a bundle of simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubProblemSpec {
    pub index: u64,
    pub event_count: u64,
    pub param_tag: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDefinition {
    pub prev_block_hash: Digest,
    pub published_at: u64,
    pub expires_at: u64,
    pub master_seed: u64,
    pub sub_problems: Vec<SubProblemSpec>,
    /// keccak256 of the encoded RA round secret, revealed after the round.
    pub ra_secret_commitment: Digest,
}

/// Seed for the problem that follows the block with hash `prev_block_hash`.
pub fn derive_seed(prev_block_hash: &Digest) -> u64 {
    prev_block_hash.prefix_u64()
}

pub fn problem_id(p: &ProblemDefinition) -> Digest {
    keccak256(&canonical_bytes(p))
}

impl ProblemDefinition {
    /// The all-zero problem embedded in the genesis block.
    pub fn genesis() -> Self {
        Self {
            prev_block_hash: Digest::ZERO,
            published_at: 0,
            expires_at: 0,
            master_seed: 0,
            sub_problems: Vec::new(),
            ra_secret_commitment: Digest::ZERO,
        }
    }

    pub fn id(&self) -> Digest {
        problem_id(self)
    }

    /// Structural invariants of an issued (non-genesis) problem.
    pub fn is_well_formed(&self) -> bool {
        self.expires_at > self.published_at
            && self.master_seed == derive_seed(&self.prev_block_hash)
            && !self.sub_problems.is_empty()
            && self.sub_problems.iter().enumerate().all(|(i, s)| s.index == i as u64)
    }
}

/// A problem definition with the RA signature over its id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedProblem {
    pub problem: ProblemDefinition,
    pub signature: Signature,
}

impl SignedProblem {
    pub fn sign(ra: &KeyPair, problem: ProblemDefinition) -> Self {
        let signature = ra.sign(problem.id().as_bytes());
        Self { problem, signature }
    }

    pub fn verify(&self, ra: &PublicKey) -> bool {
        ra.verify(self.problem.id().as_bytes(), &self.signature)
    }
}

impl Encode for SubProblemSpec {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_u64(self.index);
        enc.put_u64(self.event_count);
        enc.put_u64(self.param_tag);
    }
}

impl Decode for SubProblemSpec {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            index: dec.get_u64()?,
            event_count: dec.get_u64()?,
            param_tag: dec.get_u64()?,
        })
    }
}

impl Encode for ProblemDefinition {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.prev_block_hash);
        enc.put_u64(self.published_at);
        enc.put_u64(self.expires_at);
        enc.put_u64(self.master_seed);
        enc.put_list(&self.sub_problems);
        enc.put(&self.ra_secret_commitment);
    }
}

impl Decode for ProblemDefinition {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            prev_block_hash: dec.get()?,
            published_at: dec.get_u64()?,
            expires_at: dec.get_u64()?,
            master_seed: dec.get_u64()?,
            sub_problems: dec.get_list()?,
            ra_secret_commitment: dec.get()?,
        })
    }
}

impl Encode for SignedProblem {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.problem);
        enc.put(&self.signature);
    }
}

impl Decode for SignedProblem {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            problem: dec.get()?,
            signature: dec.get()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_from_digest_prefix() {
        assert_eq!(derive_seed(&Digest::ZERO), 0);
        let mut b = [0xffu8; 32];
        b[..8].copy_from_slice(&[0, 0, 0, 0, 0, 0, 0, 0x2a]);
        assert_eq!(derive_seed(&Digest(b)), 42);
        assert_eq!(derive_seed(&Digest(b)), derive_seed(&Digest(b)));
    }

    #[test]
    fn well_formedness() {
        let prev = keccak256(b"tip");
        let mut p = ProblemDefinition {
            prev_block_hash: prev,
            published_at: 10,
            expires_at: 20,
            master_seed: derive_seed(&prev),
            sub_problems: vec![SubProblemSpec { index: 0, event_count: 1, param_tag: 0 }],
            ra_secret_commitment: Digest::ZERO,
        };
        assert!(p.is_well_formed());
        p.master_seed ^= 1;
        assert!(!p.is_well_formed());
        p.master_seed ^= 1;
        p.sub_problems[0].index = 1;
        assert!(!p.is_well_formed());
        p.sub_problems[0].index = 0;
        p.expires_at = 10;
        assert!(!p.is_well_formed());
        assert!(!ProblemDefinition::genesis().is_well_formed());
    }

    #[test]
    fn signed_problem_checks_ra_key() {
        let ra = KeyPair::from_seed([1; 32]);
        let other = KeyPair::from_seed([2; 32]);
        let sp = SignedProblem::sign(&ra, ProblemDefinition::genesis());
        assert!(sp.verify(&ra.public()));
        assert!(!sp.verify(&other.public()));
        let mut tampered = sp.clone();
        tampered.problem.expires_at = 99;
        assert!(!tampered.verify(&ra.public()));
    }
}
