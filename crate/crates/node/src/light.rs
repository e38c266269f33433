//! Checks a light node runs on data served by full nodes. Only headers are
//! held locally; everything else must fold to a header root.

use serde::Serialize;
use thiserror::Error;

use pouw_core::merkle::{merkle_prove, merkle_verify, MerkleProof};
use pouw_core::model::{Block, BlockHeader, Transaction, Wallet};
use pouw_core::state::{state_leaf, WorldState};
use pouw_core::store::ChainStore;
use pouw_core::{Digest, PublicKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LightError {
    #[error("no header for block {0}")]
    UnknownBlock(Digest),
    #[error("transaction signature invalid")]
    BadSignature,
    #[error("proof does not fold to the header root")]
    BadProof,
}

fn header(chain: &ChainStore, block_hash: &Digest) -> Result<BlockHeader, LightError> {
    chain
        .header(block_hash)
        .ok()
        .flatten()
        .ok_or(LightError::UnknownBlock(*block_hash))
}

/// `tx` is included in `block_hash` iff its id folds through `proof` to the
/// header's transactions root. The transaction's own signature must hold too.
pub fn light_verify_tx(
    chain: &ChainStore,
    tx: &Transaction,
    proof: &MerkleProof,
    block_hash: &Digest,
) -> Result<(), LightError> {
    let h = header(chain, block_hash)?;
    if !tx.signature_valid() {
        return Err(LightError::BadSignature);
    }
    if merkle_verify(&h.transactions_merkle_root, &tx.id(), proof) {
        Ok(())
    } else {
        Err(LightError::BadProof)
    }
}

/// `address` held `wallet` after `block_hash` iff the state leaf folds to the
/// header's state root.
pub fn light_verify_balance(
    chain: &ChainStore,
    address: &PublicKey,
    wallet: &Wallet,
    proof: &MerkleProof,
    block_hash: &Digest,
) -> Result<(), LightError> {
    let h = header(chain, block_hash)?;
    if merkle_verify(&h.state_merkle_root, &state_leaf(address, wallet), proof) {
        Ok(())
    } else {
        Err(LightError::BadProof)
    }
}

/// Full-node side: inclusion proof for `tx_id` in `block`.
pub fn prove_transaction(block: &Block, tx_id: &Digest) -> Option<(Transaction, MerkleProof)> {
    let ids: Vec<Digest> = block.transactions.iter().map(Transaction::id).collect();
    let index = ids.iter().position(|i| i == tx_id)?;
    let proof = merkle_prove(&ids, index).ok()?;
    Some((block.transactions[index].clone(), proof))
}

/// Full-node side: balance proof against a given world state.
pub fn prove_balance(world: &WorldState, address: &PublicKey) -> Option<(Wallet, MerkleProof)> {
    world.prove_account(address)
}

/// What a light node learned from proof responses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LightLog {
    pub tx_requests: u64,
    pub balance_requests: u64,
    pub tx_rejected: u64,
    pub balance_rejected: u64,
    pub not_found: u64,
    /// (block hash, transaction id) pairs whose inclusion proof verified.
    pub verified_txs: Vec<(Digest, Digest)>,
    pub verified_balances: Vec<VerifiedBalance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifiedBalance {
    pub block_hash: Digest,
    pub address: PublicKey,
    pub balance: u64,
    pub nonce: u64,
}

impl LightLog {
    pub fn record_tx(&mut self, ok: bool, block_hash: Digest, tx_id: Digest) {
        if ok {
            self.verified_txs.push((block_hash, tx_id));
        } else {
            self.tx_rejected += 1;
        }
    }

    pub fn record_balance(&mut self, ok: bool, block_hash: Digest, address: PublicKey, wallet: Wallet) {
        if ok {
            self.verified_balances.push(VerifiedBalance {
                block_hash,
                address,
                balance: wallet.balance.0,
                nonce: wallet.nonce,
            });
        } else {
            self.balance_rejected += 1;
        }
    }
}
