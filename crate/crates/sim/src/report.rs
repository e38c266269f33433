use std::collections::BTreeMap;

use serde::Serialize;

use pouw_core::{Digest, PublicKey};
use pouw_node::NodeMetrics;

use crate::bus::TopicStats;
use crate::config::ScenarioConfig;

/// Node population classes; also the report's grouping key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Authority,
    Honest,
    CorruptSub,
    WrongSeed,
    Replay,
    Light,
    Sybil,
}

impl Class {
    pub fn label(self) -> &'static str {
        match self {
            Class::Authority => "ra",
            Class::Honest => "honest",
            Class::CorruptSub => "corrupt",
            Class::WrongSeed => "wrongseed",
            Class::Replay => "replay",
            Class::Light => "light",
            Class::Sybil => "sybil",
        }
    }

    pub fn is_miner(self) -> bool {
        matches!(self, Class::Honest | Class::CorruptSub | Class::WrongSeed | Class::Sybil)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub virtual_end_ms: u64,
    pub blocks: u64,
    pub authority_tip: Digest,
    pub minted_base_units: u64,
    /// Sum of block rewards for blocks 1..=blocks.
    pub expected_minted_base_units: u64,
    pub minted_tokens: f64,
    pub nodes: Vec<NodeReport>,
    pub winners: BTreeMap<String, u64>,
    pub rounds: Vec<RoundSummary>,
    /// Rounds that closed without a block.
    pub rounds_without_block: Vec<u64>,
    pub eliminations: BTreeMap<Class, ClassTally>,
    pub rejections: BTreeMap<String, u64>,
    pub messages: BTreeMap<String, TopicStats>,
    pub bytes_transferred: u64,
    pub sybil: SybilOutcome,
    pub transactions_included: u64,
    /// Transaction ids found in more than one block.
    pub replayed_transactions_included: u64,
    pub replays_sent: u64,
    pub light: Vec<LightReport>,
    pub convergence: Convergence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeReport {
    pub name: String,
    pub class: Class,
    pub address: PublicKey,
    pub tip_block_id: u64,
    pub tip_hash: Digest,
    /// None for light nodes.
    pub state_root: Option<Digest>,
    pub metrics: NodeMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundSummary {
    pub round: u64,
    pub block_id: Option<u64>,
    pub winner: Option<String>,
    pub commitments: u64,
    pub solutions: u64,
    pub stage1_eliminated: u64,
    pub outvoted: u64,
    pub uncommitted: u64,
    pub eligible: u64,
    pub transactions: u64,
    /// Eliminations plus eligibles account for every accepted solution.
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassTally {
    pub stage1_eliminated: u64,
    pub outvoted: u64,
    pub uncommitted: u64,
    pub eligible: u64,
    pub wins: u64,
    /// Refused commitments or uploads, counted once per round, address and reason.
    pub refusals: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SybilOutcome {
    pub attempts: u64,
    pub accepted: u64,
    pub rejected: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LightReport {
    pub name: String,
    pub tip_block_id: u64,
    /// The light header chain is a prefix of the RA's chain.
    pub headers_consistent: bool,
    pub tx_verified: u64,
    pub tx_rejected: u64,
    pub balance_verified: u64,
    pub balance_rejected: u64,
    /// Every verified balance equals the full state at that block.
    pub balances_match_chain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Convergence {
    /// RA and every honest miner share one tip.
    pub honest_same_tip: bool,
    pub honest_same_state: bool,
    pub light_headers_consistent: bool,
    pub light_at_tip: bool,
    pub rounds_consistent: bool,
    pub supply_matches_schedule: bool,
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
