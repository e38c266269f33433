//! Transition rules: when a transaction may be applied and when a block may
//! follow its parent.

use thiserror::Error;

use crate::hash::Digest;
use crate::state::WorldState;

use super::block::{Block, BlockHeader};
use super::problem::derive_seed;
use super::transaction::{Transaction, Wallet};

/// Seconds a block timestamp may run ahead of the validator's clock.
pub const DEFAULT_MAX_CLOCK_SKEW: u64 = 300;
/// Transactions allowed per block.
pub const DEFAULT_TX_CAP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TxViolation {
    #[error("signature does not verify over the transaction id")]
    BadSignature,
    #[error("nonce {got} but sender expects {expected}")]
    BadNonce { expected: u64, got: u64 },
    #[error("balance {balance:?} below amount + fee")]
    InsufficientBalance { balance: crate::model::TokenUnits },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockViolation {
    #[error("prev hash {got} does not match parent {expected}")]
    PrevHashMismatch { expected: Digest, got: Digest },
    #[error("block id {got} does not follow parent id {parent}")]
    BlockIdNotSequential { parent: u64, got: u64 },
    #[error("block time {got} not after parent time {parent}")]
    TimeNotIncreasing { parent: u64, got: u64 },
    #[error("block time {got} beyond local time {now} + skew {skew}")]
    TimeInFuture { now: u64, skew: u64, got: u64 },
    #[error("header problem id does not match embedded problem")]
    ProblemIdMismatch,
    #[error("embedded problem is malformed or does not extend the parent")]
    ProblemMismatch,
    #[error("{count} transactions exceed the cap of {cap}")]
    TooManyTransactions { count: usize, cap: usize },
    #[error("transactions merkle root mismatch")]
    TransactionsRootMismatch,
    #[error("transaction {index} invalid: {violation}")]
    InvalidTransaction { index: usize, violation: TxViolation },
}

/// Local parameters used when checking a block link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkRules {
    /// Validator's current time in seconds.
    pub now: u64,
    pub max_clock_skew: u64,
    pub tx_cap: usize,
}

impl LinkRules {
    pub fn at(now: u64) -> Self {
        Self {
            now,
            max_clock_skew: DEFAULT_MAX_CLOCK_SKEW,
            tx_cap: DEFAULT_TX_CAP,
        }
    }

    /// Rules for auditing history offline, where the future-time check does
    /// not apply.
    pub fn offline(tx_cap: usize) -> Self {
        Self {
            now: u64::MAX,
            max_clock_skew: 0,
            tx_cap,
        }
    }
}

/// A transaction is valid iff its signature verifies over its id, its nonce
/// is exactly one above the sender's, and the sender can cover amount + fee.
pub fn validate_transaction(tx: &Transaction, sender: &Wallet) -> Result<(), TxViolation> {
    if !tx.signature_valid() {
        return Err(TxViolation::BadSignature);
    }
    let expected = sender.nonce + 1;
    if tx.nonce != expected {
        return Err(TxViolation::BadNonce { expected, got: tx.nonce });
    }
    match tx.total_debit() {
        Some(total) if sender.balance >= total => Ok(()),
        _ => Err(TxViolation::InsufficientBalance { balance: sender.balance }),
    }
}

/// Checks that `child` may follow `parent`, given the state after `parent`.
/// Returns the first rule that fails.
pub fn validate_block_link(
    parent: &BlockHeader,
    child: &Block,
    parent_state: &WorldState,
    rules: &LinkRules,
) -> Result<(), BlockViolation> {
    let h = &child.header;
    let parent_hash = parent.hash();
    if h.prev_block_hash != parent_hash {
        return Err(BlockViolation::PrevHashMismatch {
            expected: parent_hash,
            got: h.prev_block_hash,
        });
    }
    if parent.block_id.checked_add(1) != Some(h.block_id) {
        return Err(BlockViolation::BlockIdNotSequential {
            parent: parent.block_id,
            got: h.block_id,
        });
    }
    if h.block_time <= parent.block_time {
        return Err(BlockViolation::TimeNotIncreasing {
            parent: parent.block_time,
            got: h.block_time,
        });
    }
    if h.block_time > rules.now.saturating_add(rules.max_clock_skew) {
        return Err(BlockViolation::TimeInFuture {
            now: rules.now,
            skew: rules.max_clock_skew,
            got: h.block_time,
        });
    }
    if h.problem_id != child.problem.id() {
        return Err(BlockViolation::ProblemIdMismatch);
    }
    let p = &child.problem;
    if !p.is_well_formed() || p.prev_block_hash != parent_hash || p.master_seed != derive_seed(&parent_hash) {
        return Err(BlockViolation::ProblemMismatch);
    }
    if child.transactions.len() > rules.tx_cap {
        return Err(BlockViolation::TooManyTransactions {
            count: child.transactions.len(),
            cap: rules.tx_cap,
        });
    }
    if Block::transactions_root(&child.transactions) != h.transactions_merkle_root {
        return Err(BlockViolation::TransactionsRootMismatch);
    }
    let mut state = parent_state.clone();
    for (index, tx) in child.transactions.iter().enumerate() {
        state
            .apply_transaction(tx)
            .map_err(|violation| BlockViolation::InvalidTransaction { index, violation })?;
    }
    Ok(())
}
