use crate::codec::{canonical_bytes, CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::{Address, KeyPair, PublicKey, Signature};
use crate::hash::{keccak256, Digest};
use crate::merkle::merkle_root_or_zero;
use crate::state::WorldState;

use super::problem::ProblemDefinition;
use super::transaction::Transaction;

/// The hashed part of a block. Light nodes store only this.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockHeader {
    pub block_time: u64,
    pub block_id: u64,
    pub prev_block_hash: Digest,
    pub transactions_merkle_root: Digest,
    pub state_merkle_root: Digest,
    pub problem_id: Digest,
    pub block_winner: Address,
}

impl BlockHeader {
    pub fn hash(&self) -> Digest {
        keccak256(&canonical_bytes(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<Transaction>,
    pub problem: ProblemDefinition,
}

impl Block {
    pub fn hash(&self) -> Digest {
        self.header.hash()
    }

    pub fn transactions_root(txs: &[Transaction]) -> Digest {
        let ids: Vec<Digest> = txs.iter().map(Transaction::id).collect();
        merkle_root_or_zero(&ids)
    }
}

/// Genesis: id 0, zero parent, no transactions, the all-zero problem, the
/// RA as winner and no reward.
pub fn genesis_block(ra: Address, genesis_time: u64) -> Block {
    let problem = ProblemDefinition::genesis();
    let mut state = WorldState::new();
    state.touch(ra);
    Block {
        header: BlockHeader {
            block_time: genesis_time,
            block_id: 0,
            prev_block_hash: Digest::ZERO,
            transactions_merkle_root: Digest::ZERO,
            state_merkle_root: state.merkle_root(),
            problem_id: problem.id(),
            block_winner: ra,
        },
        transactions: Vec::new(),
        problem,
    }
}

/// A block with the RA signature over its hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedBlock {
    pub block: Block,
    pub signature: Signature,
}

impl SignedBlock {
    pub fn sign(ra: &KeyPair, block: Block) -> Self {
        let signature = ra.sign(block.hash().as_bytes());
        Self { block, signature }
    }

    pub fn verify(&self, ra: &PublicKey) -> bool {
        ra.verify(self.block.hash().as_bytes(), &self.signature)
    }
}

impl Encode for BlockHeader {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_u64(self.block_time);
        enc.put_u64(self.block_id);
        enc.put(&self.prev_block_hash);
        enc.put(&self.transactions_merkle_root);
        enc.put(&self.state_merkle_root);
        enc.put(&self.problem_id);
        enc.put(&self.block_winner);
    }
}

impl Decode for BlockHeader {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            block_time: dec.get_u64()?,
            block_id: dec.get_u64()?,
            prev_block_hash: dec.get()?,
            transactions_merkle_root: dec.get()?,
            state_merkle_root: dec.get()?,
            problem_id: dec.get()?,
            block_winner: dec.get()?,
        })
    }
}

impl Encode for Block {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.header);
        enc.put_list(&self.transactions);
        enc.put(&self.problem);
    }
}

impl Decode for Block {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            header: dec.get()?,
            transactions: dec.get_list()?,
            problem: dec.get()?,
        })
    }
}

impl Encode for SignedBlock {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.block);
        enc.put(&self.signature);
    }
}

impl Decode for SignedBlock {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            block: dec.get()?,
            signature: dec.get()?,
        })
    }
}
