use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::crypto::Address;
use crate::hash::Digest;
use crate::model::{validate_transaction, Transaction, TxViolation, Wallet};
use crate::state::WorldState;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoolRejection {
    #[error("invalid transaction: {0}")]
    Invalid(TxViolation),
    #[error("transaction already pending")]
    Duplicate,
    #[error("another pending transaction uses this sender nonce")]
    NonceTaken,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingTx {
    pub tx: Transaction,
    pub id: Digest,
    /// Arrival time in milliseconds.
    pub arrival: u64,
}

/// Transactions waiting for block inclusion, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct TxPool {
    entries: BTreeMap<Digest, PendingTx>,
    by_sender_nonce: BTreeMap<(Address, u64), Digest>,
}

impl TxPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Admit `tx` if it could become valid once the sender's earlier pending
    /// transactions land: signature verifies, nonce is above the sender's
    /// current nonce, and the sender covers amount + fee. A nonce at or below
    /// the current one is a replay and is rejected.
    pub fn admit(&mut self, tx: Transaction, sender: &Wallet, arrival: u64) -> Result<Digest, PoolRejection> {
        let id = tx.id();
        if self.entries.contains_key(&id) {
            return Err(PoolRejection::Duplicate);
        }
        if tx.nonce > sender.nonce {
            // judge the transaction as if its predecessors had been applied
            let ahead = Wallet {
                balance: sender.balance,
                nonce: tx.nonce - 1,
            };
            validate_transaction(&tx, &ahead).map_err(PoolRejection::Invalid)?;
        } else {
            validate_transaction(&tx, sender).map_err(PoolRejection::Invalid)?;
        }
        if self.by_sender_nonce.contains_key(&(tx.sender, tx.nonce)) {
            return Err(PoolRejection::NonceTaken);
        }
        self.by_sender_nonce.insert((tx.sender, tx.nonce), id);
        self.entries.insert(id, PendingTx { tx, id, arrival });
        Ok(id)
    }

    pub fn contains(&self, id: &Digest) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PendingTx> {
        self.entries.values()
    }

    pub fn remove(&mut self, id: &Digest) -> Option<PendingTx> {
        let p = self.entries.remove(id)?;
        self.by_sender_nonce.remove(&(p.tx.sender, p.tx.nonce));
        Some(p)
    }

    pub fn remove_included(&mut self, txs: &[Transaction]) {
        for tx in txs {
            self.remove(&tx.id());
        }
    }

    /// Drop entries whose nonce the chain has already consumed.
    pub fn prune(&mut self, state: &WorldState) {
        let stale: Vec<Digest> = self
            .entries
            .values()
            .filter(|p| p.tx.nonce <= state.wallet(&p.tx.sender).nonce)
            .map(|p| p.id)
            .collect();
        for id in stale {
            self.remove(&id);
        }
    }

    /// Pending entries by priority: fee descending, then arrival, then id.
    pub fn by_priority(&self) -> Vec<&PendingTx> {
        let mut v: Vec<&PendingTx> = self.entries.values().collect();
        v.sort_by(|a, b| {
            b.tx.fee
                .cmp(&a.tx.fee)
                .then(a.arrival.cmp(&b.arrival))
                .then(a.id.cmp(&b.id))
        });
        v
    }
}

/// Up to `cap` transactions in priority order that are jointly valid when
/// applied in sequence to `state`. Passes repeat so a transaction skipped for
/// a nonce gap is picked up once its predecessor is in.
pub fn pick_transactions(pool: &TxPool, state: &WorldState, cap: usize) -> Vec<Transaction> {
    let ordered = pool.by_priority();
    let mut taken = vec![false; ordered.len()];
    let mut scratch = state.clone();
    let mut out = Vec::new();
    loop {
        let mut progressed = false;
        for (i, p) in ordered.iter().enumerate() {
            if out.len() >= cap {
                return out;
            }
            if !taken[i] && scratch.apply_transaction(&p.tx).is_ok() {
                taken[i] = true;
                out.push(p.tx.clone());
                progressed = true;
            }
        }
        if !progressed {
            return out;
        }
    }
}

/// Ids an observer would have expected in a block but which are missing while
/// the block had spare room or included a lower fee. Observers see different
/// pools, so this is an audit signal rather than a validity rule.
pub fn fee_priority_violations(
    observed: &TxPool,
    state: &WorldState,
    cap: usize,
    included: &[Transaction],
) -> Vec<Digest> {
    let included_ids: BTreeSet<Digest> = included.iter().map(Transaction::id).collect();
    let min_fee = included.iter().map(|t| t.fee).min();
    pick_transactions(observed, state, cap)
        .into_iter()
        .filter(|t| !included_ids.contains(&t.id()))
        .filter(|t| included.len() < cap || min_fee.is_some_and(|m| t.fee > m))
        .map(|t| t.id())
        .collect()
}
