//! `pouw inspect`, `pouw verify` and `pouw goldens`, as library calls.

use std::path::Path;

use serde_json::{json, Value};

use pouw_core::goldens;
use pouw_core::model::{validate_block_link, BlockHeader, LinkRules};
use pouw_core::state::WorldState;
use pouw_core::store::{rebuild_state, ChainStore, StateStore, StoreError};
use pouw_core::{Digest, PublicKey};

pub fn open_store(dir: &Path) -> Result<(ChainStore, StateStore), StoreError> {
    let chain = ChainStore::open_existing(dir.join("chain.db"))?;
    let state = StateStore::open_file(dir.join("state.db"))?;
    Ok((chain, state))
}

fn header_json(h: &BlockHeader) -> Value {
    json!({
        "hash": h.hash(),
        "block_id": h.block_id,
        "block_time": h.block_time,
        "prev_block_hash": h.prev_block_hash,
        "transactions_merkle_root": h.transactions_merkle_root,
        "state_merkle_root": h.state_merkle_root,
        "problem_id": h.problem_id,
        "block_winner": h.block_winner,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InspectTarget {
    Tip,
    Block(Digest),
    Account(PublicKey),
}

pub fn inspect(dir: &Path, target: &InspectTarget) -> Result<Value, StoreError> {
    let (chain, state) = open_store(dir)?;
    match target {
        InspectTarget::Tip => {
            let tip = chain.tip()?.ok_or(StoreError::Corrupt("empty chain".into()))?;
            Ok(json!({ "tip": header_json(&tip), "accounts": state.world().len() }))
        }
        InspectTarget::Block(hash) => {
            let stored = chain.get(hash)?.ok_or(StoreError::UnknownBlock(*hash))?;
            let txs: Vec<Value> = stored
                .clone()
                .into_full()
                .map(|b| {
                    b.transactions
                        .iter()
                        .map(|t| {
                            json!({
                                "id": t.id(),
                                "sender": t.sender,
                                "receiver": t.receiver,
                                "amount": t.amount.0,
                                "fee": t.fee.0,
                                "nonce": t.nonce,
                            })
                        })
                        .collect()
                })
                .unwrap_or_default();
            Ok(json!({ "header": header_json(stored.header()), "transactions": txs }))
        }
        InspectTarget::Account(addr) => {
            let w = state.wallet(addr);
            Ok(json!({ "address": addr, "balance": w.balance.0, "nonce": w.nonce }))
        }
    }
}

/// Outcome of replaying a stored chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub blocks: u64,
    pub problems: Vec<String>,
}

impl VerifyOutcome {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Traverse from the tip, replay every link rule from genesis and compare
/// the rebuilt state with the stored one.
pub fn verify(dir: &Path, tx_cap: usize) -> Result<VerifyOutcome, StoreError> {
    let (chain, state) = open_store(dir)?;
    let headers = chain.traverse()?;
    let mut problems = Vec::new();
    let mut world = WorldState::new();
    let mut parent: Option<BlockHeader> = None;
    for h in headers.iter().rev() {
        let hash = h.hash();
        let Some(block) = chain.full_block(&hash)? else {
            problems.push(format!("block {} has no body", h.block_id));
            break;
        };
        if let Some(p) = &parent {
            if let Err(v) = validate_block_link(p, &block, &world, &LinkRules::offline(tx_cap)) {
                problems.push(format!("block {}: {v}", h.block_id));
            }
        }
        if let Err(e) = world.apply_block(&block) {
            problems.push(format!("block {}: {e}", h.block_id));
            break;
        }
        parent = Some(h.clone());
    }
    match rebuild_state(&chain) {
        Ok(rebuilt) if rebuilt.world() == state.world() => {}
        Ok(_) => problems.push("stored state differs from replay".into()),
        Err(e) => problems.push(format!("rebuild failed: {e}")),
    }
    Ok(VerifyOutcome {
        blocks: headers.len() as u64,
        problems,
    })
}

/// Re-derive the golden vectors; returns lines to print and whether all passed.
pub fn goldens_report() -> (Vec<String>, bool) {
    let checks = goldens::check();
    let all = checks.iter().all(goldens::GoldenCheck::passed);
    let lines = checks
        .iter()
        .map(|c| {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            format!("{status} {} {}", c.name, c.expected)
        })
        .collect();
    (lines, all)
}
