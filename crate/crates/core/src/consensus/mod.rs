//! Root Authority logic: registration, transaction selection, problem
//! issuance, solution filtering, winner selection and block assembly.

mod assemble;
mod filter;
mod pool;
mod registry;
mod round;
mod winner;

pub use assemble::{assemble_block, AssembleError};
pub use filter::{filter_stage1, filter_stage2, Stage1Outcome, Stage2Outcome};
pub use pool::{fee_priority_violations, pick_transactions, PendingTx, PoolRejection, TxPool};
pub use registry::{IdentityRegistry, RegistrationAnnouncement, RegistrationError};
pub use round::{
    issue_problem, ra_secret_commitment, CommitmentRejection, RoundError, RoundParams, RoundState, RoundVerdict,
    SolutionRejection,
};
pub use winner::{select_winner, verify_winner, winner_index, Reveal, WinnerError, WinnerProof};
