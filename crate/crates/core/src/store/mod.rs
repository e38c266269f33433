//! Chain and state persistence.
//!
//! The chain store maps block hashes to encoded blocks (headers only for
//! light nodes) and keeps a `latest` pointer in its `meta` bucket. The state
//! store maps addresses to wallets and records which block it reflects.
//! State is never synced between nodes; it is rebuilt from the chain.

mod chain;
mod kv;
mod state_store;

pub use chain::{ChainStore, StoreMode, StoredBlock};
pub use kv::{FileKv, KvStore, MemoryKv, WriteBatch};
pub use state_store::StateStore;

use thiserror::Error;

use crate::hash::Digest;
use crate::model::Block;
use crate::state::{StateError, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("corrupt store: {0}")]
    Corrupt(String),
    #[error("chain broken: block {missing} (parent of block {child_block_id}) is missing")]
    BrokenLink { missing: Digest, child_block_id: u64 },
    #[error("declared state root {declared} but replay gives {computed}")]
    StateRootMismatch { declared: Digest, computed: Digest },
    #[error("block invalid against current state: {0}")]
    InvalidBlock(#[from] StateError),
    #[error("block parent {parent} is not the current tip")]
    NotExtendingTip { parent: Digest },
    #[error("store already has a genesis block")]
    GenesisExists,
    #[error("operation needs a full (non-light) chain store")]
    NotFullStore,
    #[error("state store reflects {state:?} but chain tip is {chain:?}")]
    StateOutOfSync { state: Option<Digest>, chain: Option<Digest> },
    #[error("store mode mismatch")]
    ModeMismatch,
    #[error("unknown block {0}")]
    UnknownBlock(Digest),
}

/// Append a validated block: store it under its hash, advance both latest
/// pointers and apply transactions plus reward to the state. On any error
/// neither store changes.
pub fn append_block(chain: &mut ChainStore, state: &mut StateStore, block: &Block) -> Result<(), StoreError> {
    if chain.mode() != StoreMode::Full {
        return Err(StoreError::NotFullStore);
    }
    let tip = chain.latest()?;
    if state.latest() != tip {
        return Err(StoreError::StateOutOfSync {
            state: state.latest(),
            chain: tip,
        });
    }
    match tip {
        None if block.header.block_id != 0 => {
            return Err(StoreError::NotExtendingTip {
                parent: block.header.prev_block_hash,
            })
        }
        None => {}
        Some(_) if block.header.block_id == 0 => return Err(StoreError::GenesisExists),
        Some(tip) if tip != block.header.prev_block_hash => {
            return Err(StoreError::NotExtendingTip {
                parent: block.header.prev_block_hash,
            })
        }
        Some(_) => {}
    }
    let mut next = state.world().clone();
    next.apply_block(block)?;
    let computed = next.merkle_root();
    if computed != block.header.state_merkle_root {
        return Err(StoreError::StateRootMismatch {
            declared: block.header.state_merkle_root,
            computed,
        });
    }
    let hash = block.hash();
    chain.put_block(block, true)?;
    state.commit(next, hash)
}

/// Replay the chain from genesis into a fresh in-memory state store.
pub fn rebuild_state(chain: &ChainStore) -> Result<StateStore, StoreError> {
    let Some(tip) = chain.latest()? else {
        return Ok(StateStore::open_memory());
    };
    let world = state_at(chain, &tip)?;
    Ok(StateStore::from_world(world, tip))
}

/// State after applying every block from genesis up to and including `hash`.
pub fn state_at(chain: &ChainStore, hash: &Digest) -> Result<WorldState, StoreError> {
    let headers = chain.traverse_from(hash)?;
    let mut world = WorldState::new();
    for header in headers.iter().rev() {
        let h = header.hash();
        let block = chain.full_block(&h)?.ok_or(StoreError::NotFullStore)?;
        world.apply_block(&block)?;
    }
    Ok(world)
}

pub fn state_merkle_root(state: &StateStore) -> Digest {
    state.world().merkle_root()
}

#[cfg(test)]
mod tests;
