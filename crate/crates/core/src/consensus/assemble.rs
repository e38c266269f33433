use thiserror::Error;

use crate::crypto::{Address, KeyPair};
use crate::hash::Digest;
use crate::model::{block_reward, Block, BlockHeader, ProblemDefinition, SignedBlock, Transaction};
use crate::state::{StateError, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssembleError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("problem does not build on the tip")]
    ProblemNotOnTip,
}

/// Build and sign the block that extends `tip` with `txs` and pays `winner`.
/// `state` is the world at `tip` and is left untouched.
pub fn assemble_block(
    ra: &KeyPair,
    tip: &BlockHeader,
    state: &WorldState,
    problem: &ProblemDefinition,
    winner: Address,
    txs: Vec<Transaction>,
    now: u64,
) -> Result<SignedBlock, AssembleError> {
    if problem.prev_block_hash != tip.hash() {
        return Err(AssembleError::ProblemNotOnTip);
    }
    let block_id = tip.block_id + 1;
    debug_assert!(block_reward(block_id).is_ok());
    let mut block = Block {
        header: BlockHeader {
            block_time: now.max(tip.block_time + 1),
            block_id,
            prev_block_hash: tip.hash(),
            transactions_merkle_root: Block::transactions_root(&txs),
            state_merkle_root: Digest::ZERO,
            problem_id: problem.id(),
            block_winner: winner,
        },
        transactions: txs,
        problem: problem.clone(),
    };
    let mut next = state.clone();
    next.apply_block(&block)?;
    block.header.state_merkle_root = next.merkle_root();
    Ok(SignedBlock::sign(ra, block))
}
