use thiserror::Error;

use super::token::{TokenUnits, BASE_UNITS_PER_TOKEN};

/// Blocks per halving epoch.
pub const HALVING_INTERVAL: u64 = 1460;
pub const INITIAL_REWARD_TOKENS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RewardError {
    #[error("the genesis block carries no reward")]
    Genesis,
}

/// Reward for block `n`: 64 tokens halved once per completed epoch of 1460
/// blocks, truncated to whole base units.
pub fn block_reward(n: u64) -> Result<TokenUnits, RewardError> {
    if n == 0 {
        return Err(RewardError::Genesis);
    }
    let epoch = n.div_ceil(HALVING_INTERVAL);
    let initial = INITIAL_REWARD_TOKENS * BASE_UNITS_PER_TOKEN;
    let shift = epoch - 1;
    Ok(TokenUnits(if shift >= 64 { 0 } else { initial >> shift }))
}

/// Sum of rewards for blocks `1..=n`, in closed form per epoch.
pub fn cumulative_reward(n: u64) -> TokenUnits {
    let mut total = 0u64;
    let mut start = 1u64;
    while start <= n {
        let per_block = block_reward(start).expect("start >= 1").0;
        if per_block == 0 {
            break;
        }
        let epoch_end = start.div_ceil(HALVING_INTERVAL) * HALVING_INTERVAL;
        let last = epoch_end.min(n);
        total += per_block * (last - start + 1);
        start = epoch_end + 1;
    }
    TokenUnits(total)
}

/// Everything that will ever be minted.
pub fn total_supply_limit() -> TokenUnits {
    cumulative_reward(u64::MAX)
}
