//! Chain domain types and the pure functions over them.

mod block;
mod problem;
mod reward;
mod token;
mod transaction;
mod validation;

pub use block::{genesis_block, Block, BlockHeader, SignedBlock};
pub use problem::{derive_seed, problem_id, ProblemDefinition, SignedProblem, SubProblemSpec};
pub use reward::{block_reward, cumulative_reward, total_supply_limit, RewardError, HALVING_INTERVAL, INITIAL_REWARD_TOKENS};
pub use token::{TokenUnits, BASE_UNITS_PER_TOKEN};
pub use transaction::{Transaction, Wallet};
pub use validation::{
    validate_block_link, validate_transaction, BlockViolation, LinkRules, TxViolation, DEFAULT_MAX_CLOCK_SKEW,
    DEFAULT_TX_CAP,
};

pub mod solution;
pub use solution::{Commitment, Solution};
