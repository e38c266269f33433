//! Miner solutions and the commitments that precede them.

use crate::codec::{CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::Address;
use crate::hash::{keccak256_concat, Digest};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub miner: Address,
    pub problem_id: Digest,
    pub sub_digests: Vec<Digest>,
    pub combined_digest: Digest,
    pub reveal_nonce: u64,
}

impl Solution {
    pub fn new(miner: Address, problem_id: Digest, sub_digests: Vec<Digest>, reveal_nonce: u64) -> Self {
        let combined_digest = Self::combine(&sub_digests);
        Self {
            miner,
            problem_id,
            sub_digests,
            combined_digest,
            reveal_nonce,
        }
    }

    /// keccak256 over the sub-digests concatenated in index order.
    pub fn combine(sub_digests: &[Digest]) -> Digest {
        let parts: Vec<&[u8]> = sub_digests.iter().map(|d| d.as_ref()).collect();
        keccak256_concat(&parts)
    }

    pub fn is_consistent(&self) -> bool {
        self.combined_digest == Self::combine(&self.sub_digests)
    }

    pub fn commitment(&self) -> Commitment {
        Commitment {
            miner: self.miner,
            problem_id: self.problem_id,
            commit: Commitment::digest_for(&self.miner, &self.combined_digest, self.reveal_nonce),
        }
    }
}

/// Binding of a miner to a solution it has not revealed yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commitment {
    pub miner: Address,
    pub problem_id: Digest,
    pub commit: Digest,
}

impl Commitment {
    /// keccak256(miner ‖ combined_digest ‖ reveal_nonce as 8 bytes big-endian).
    pub fn digest_for(miner: &Address, combined_digest: &Digest, reveal_nonce: u64) -> Digest {
        keccak256_concat(&[&miner.0, &combined_digest.0, &reveal_nonce.to_be_bytes()])
    }

    pub fn opens_to(&self, combined_digest: &Digest, reveal_nonce: u64) -> bool {
        self.commit == Self::digest_for(&self.miner, combined_digest, reveal_nonce)
    }
}

impl Encode for Solution {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.miner);
        enc.put(&self.problem_id);
        enc.put_list(&self.sub_digests);
        enc.put(&self.combined_digest);
        enc.put_u64(self.reveal_nonce);
    }
}

impl Decode for Solution {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            miner: dec.get()?,
            problem_id: dec.get()?,
            sub_digests: dec.get_list()?,
            combined_digest: dec.get()?,
            reveal_nonce: dec.get_u64()?,
        })
    }
}

impl Encode for Commitment {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.miner);
        enc.put(&self.problem_id);
        enc.put(&self.commit);
    }
}

impl Decode for Commitment {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            miner: dec.get()?,
            problem_id: dec.get()?,
            commit: dec.get()?,
        })
    }
}
