//! Mock useful-work engine.
//!
//! Each sub-problem is "solved" by drawing `event_count` mock events of four
//! 64-bit values (particle id, px, py, pz) from SplitMix64 and hashing the
//! big-endian stream. The output depends only on the master seed and the
//! sub-problem parameters, so every honest miner and the RA agree bit for bit.
//! A real workload plugs in through [`SubProblemSolver`].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::crypto::Address;
use crate::hash::{keccak256, Digest};
use crate::model::{ProblemDefinition, Solution, SubProblemSpec};
use crate::rng::{first_output, Rng64};

/// Values per mock event.
pub const VALUES_PER_EVENT: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum WorkerError {
    #[error("reference count {count} outside 1..={available}")]
    ReferenceCount { count: usize, available: usize },
}

pub trait SubProblemSolver {
    fn solve(&self, master_seed: u64, spec: &SubProblemSpec) -> Digest;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MockSolver;

impl SubProblemSolver for MockSolver {
    fn solve(&self, master_seed: u64, spec: &SubProblemSpec) -> Digest {
        solve_sub(master_seed, spec)
    }
}

pub fn solve_sub(master_seed: u64, spec: &SubProblemSpec) -> Digest {
    let sub_seed = first_output(master_seed ^ spec.index ^ spec.param_tag);
    let mut rng = Rng64::new(sub_seed);
    let n = spec.event_count.saturating_mul(VALUES_PER_EVENT) as usize;
    let mut buf = Vec::with_capacity(n * 8);
    for _ in 0..n {
        buf.extend_from_slice(&rng.next_u64().to_be_bytes());
    }
    keccak256(&buf)
}

/// How a miner departs from the honest computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Deviation {
    Honest,
    /// Solve every sub-problem with this seed instead of the problem's.
    WrongSeed(u64),
    /// Replace the listed sub-digests with random bytes.
    CorruptSub(Vec<usize>),
}

pub fn solve_problem(p: &ProblemDefinition, miner: Address, deviation: &Deviation, miner_rng: &mut Rng64) -> Solution {
    solve_problem_with(&MockSolver, p, miner, deviation, miner_rng)
}

pub fn solve_problem_with(
    solver: &dyn SubProblemSolver,
    p: &ProblemDefinition,
    miner: Address,
    deviation: &Deviation,
    miner_rng: &mut Rng64,
) -> Solution {
    let seed = match deviation {
        Deviation::WrongSeed(s) => *s,
        _ => p.master_seed,
    };
    let mut subs: Vec<Digest> = p.sub_problems.iter().map(|s| solver.solve(seed, s)).collect();
    if let Deviation::CorruptSub(indices) = deviation {
        for &i in indices {
            if let Some(d) = subs.get_mut(i) {
                let mut garbage = [0u8; 32];
                miner_rng.fill_bytes(&mut garbage);
                *d = Digest(garbage);
            }
        }
    }
    let reveal_nonce = miner_rng.next_u64();
    Solution::new(miner, p.id(), subs, reveal_nonce)
}

/// Sample `count` distinct sub-problem indices with the RA's private RNG
/// (partial Fisher-Yates) and solve them.
pub fn precalc_reference(
    p: &ProblemDefinition,
    count: usize,
    ra_rng: &mut Rng64,
) -> Result<BTreeMap<usize, Digest>, WorkerError> {
    let available = p.sub_problems.len();
    if count == 0 || count > available {
        return Err(WorkerError::ReferenceCount { count, available });
    }
    Ok(sample_indices(available, count, ra_rng)
        .into_iter()
        .map(|i| (i, solve_sub(p.master_seed, &p.sub_problems[i])))
        .collect())
}

/// `count` distinct indices from `0..n`, in draw order.
pub fn sample_indices(n: usize, count: usize, rng: &mut Rng64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for k in 0..count.min(n) {
        let j = k + rng.below((n - k) as u64) as usize;
        pool.swap(k, j);
    }
    pool.truncate(count.min(n));
    pool
}
