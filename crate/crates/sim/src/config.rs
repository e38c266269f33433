use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("drop_rate must lie in [0, 1), got {0}")]
    DropRate(f64),
    #[error("latency range inverted: {0} > {1}")]
    Latency(u64, u64),
    #[error("reference_count {reference} outside 1..={subs}")]
    References { reference: usize, subs: usize },
    #[error("{0} must be positive")]
    Zero(&'static str),
    #[error("no miner is registered")]
    NoMiners,
    #[error("cannot read config: {0}")]
    Read(String),
}

/// Everything a run depends on. Equal configs give byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub master_seed: u64,
    pub honest_miners: usize,
    pub corrupt_sub_miners: usize,
    pub wrong_seed_miners: usize,
    pub replay_attackers: usize,
    pub light_nodes: usize,
    /// Miner nodes that all try to register under one shared identity.
    pub sybil_attempts: usize,
    pub sub_problem_count: usize,
    pub event_count: u64,
    pub reference_count: usize,
    /// Virtual seconds a problem stays open.
    pub round_duration: u64,
    pub rounds: u64,
    pub tx_cap: usize,
    /// Transfers injected per round.
    pub tx_injection_rate: u64,
    /// Per-delivery latency bounds in virtual milliseconds.
    pub latency: (u64, u64),
    pub drop_rate: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            honest_miners: 4,
            corrupt_sub_miners: 0,
            wrong_seed_miners: 0,
            replay_attackers: 0,
            light_nodes: 0,
            sybil_attempts: 0,
            sub_problem_count: 10,
            event_count: 64,
            reference_count: 3,
            round_duration: 10,
            rounds: 5,
            tx_cap: 100,
            tx_injection_rate: 5,
            latency: (5, 50),
            drop_rate: 0.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..1.0).contains(&self.drop_rate) {
            return Err(ConfigError::DropRate(self.drop_rate));
        }
        if self.latency.0 > self.latency.1 {
            return Err(ConfigError::Latency(self.latency.0, self.latency.1));
        }
        if self.sub_problem_count == 0 {
            return Err(ConfigError::Zero("sub_problem_count"));
        }
        if self.round_duration == 0 {
            return Err(ConfigError::Zero("round_duration"));
        }
        if self.tx_cap == 0 {
            return Err(ConfigError::Zero("tx_cap"));
        }
        if self.reference_count == 0 || self.reference_count > self.sub_problem_count {
            return Err(ConfigError::References {
                reference: self.reference_count,
                subs: self.sub_problem_count,
            });
        }
        if self.honest_miners + self.corrupt_sub_miners + self.wrong_seed_miners + self.sybil_attempts == 0 {
            return Err(ConfigError::NoMiners);
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Read(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The adversarial convergence scenario used by acceptance.
    pub fn adversarial() -> Self {
        Self {
            honest_miners: 4,
            corrupt_sub_miners: 1,
            wrong_seed_miners: 1,
            replay_attackers: 1,
            light_nodes: 2,
            sybil_attempts: 2,
            rounds: 20,
            drop_rate: 0.1,
            ..Self::default()
        }
    }
}
