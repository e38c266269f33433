use std::collections::BTreeMap;

use thiserror::Error;

use crate::codec::canonical_bytes;
use crate::crypto::{Address, KeyPair};
use crate::hash::{keccak256, Digest};
use crate::model::{derive_seed, BlockHeader, Commitment, ProblemDefinition, SignedProblem, Solution, SubProblemSpec};
use crate::rng::Rng64;
use crate::worker::{precalc_reference, WorkerError};

use super::filter::{filter_stage1, filter_stage2};
use super::registry::IdentityRegistry;
use super::winner::{select_winner, Reveal, WinnerError, WinnerProof};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundParams {
    pub sub_problem_count: usize,
    pub event_count: u64,
    pub reference_count: usize,
    /// Seconds between publication and expiry.
    pub duration: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoundError {
    #[error("round duration must be positive")]
    ZeroDuration,
    #[error("a problem needs at least one sub-problem")]
    NoSubProblems,
    #[error(transparent)]
    References(#[from] WorkerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CommitmentRejection {
    #[error("sender is not a registered miner")]
    Unregistered,
    #[error("commitment is for a different problem")]
    WrongProblem,
    #[error("problem has expired")]
    Expired,
    #[error("miner already committed")]
    Duplicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SolutionRejection {
    #[error("sender is not a registered miner")]
    Unregistered,
    #[error("solution is for a different problem")]
    WrongProblem,
    #[error("problem has expired")]
    Expired,
    #[error("miner already uploaded a solution")]
    Duplicate,
    #[error("solution shape or combined digest is inconsistent")]
    Malformed,
}

/// keccak256 of the encoded round secret.
pub fn ra_secret_commitment(secret: u64) -> Digest {
    keccak256(&canonical_bytes(&secret))
}

/// Everything the RA knows about the round in progress.
#[derive(Debug, Clone)]
pub struct RoundState {
    pub problem: ProblemDefinition,
    pub ra_secret: u64,
    /// Privately pre-computed sub-solutions, by sub-problem index.
    pub references: BTreeMap<usize, Digest>,
    pub commitments: BTreeMap<Address, Commitment>,
    pub solutions: BTreeMap<Address, Solution>,
}

/// Outcome of closing a round.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundVerdict {
    pub stage1_eliminated: Vec<Address>,
    /// Survived stage 1 but submitted a digest other than the accepted one.
    pub outvoted: Vec<Address>,
    /// Submitted the accepted digest without a matching commitment.
    pub uncommitted: Vec<Address>,
    pub accepted_digest: Option<Digest>,
    pub eligible: Vec<Address>,
    pub winner: Option<Address>,
    pub proof: Option<WinnerProof>,
}

/// Build the next problem on top of `tip`. The master seed comes from the tip
/// hash; parameter tags, the round secret and the reference indices come
/// from `ra_rng`, in that order.
pub fn issue_problem(
    ra: &KeyPair,
    tip: &BlockHeader,
    params: &RoundParams,
    now: u64,
    ra_rng: &mut Rng64,
) -> Result<(RoundState, SignedProblem), RoundError> {
    if params.duration == 0 {
        return Err(RoundError::ZeroDuration);
    }
    if params.sub_problem_count == 0 {
        return Err(RoundError::NoSubProblems);
    }
    let prev = tip.hash();
    let published_at = now.max(tip.block_time);
    let sub_problems = (0..params.sub_problem_count as u64)
        .map(|index| SubProblemSpec {
            index,
            event_count: params.event_count,
            param_tag: ra_rng.next_u64(),
        })
        .collect();
    let ra_secret = ra_rng.next_u64();
    let problem = ProblemDefinition {
        prev_block_hash: prev,
        published_at,
        expires_at: published_at + params.duration,
        master_seed: derive_seed(&prev),
        sub_problems,
        ra_secret_commitment: ra_secret_commitment(ra_secret),
    };
    debug_assert!(problem.published_at >= tip.block_time);
    let references = precalc_reference(&problem, params.reference_count, ra_rng)?;
    let signed = SignedProblem::sign(ra, problem.clone());
    Ok((
        RoundState {
            problem,
            ra_secret,
            references,
            commitments: BTreeMap::new(),
            solutions: BTreeMap::new(),
        },
        signed,
    ))
}

impl RoundState {
    pub fn problem_id(&self) -> Digest {
        self.problem.id()
    }

    pub fn is_expired(&self, now: u64) -> bool {
        now >= self.problem.expires_at
    }

    pub fn accept_commitment(
        &mut self,
        registry: &IdentityRegistry,
        c: Commitment,
        now: u64,
    ) -> Result<(), CommitmentRejection> {
        if !registry.is_registered(&c.miner) {
            return Err(CommitmentRejection::Unregistered);
        }
        if c.problem_id != self.problem_id() {
            return Err(CommitmentRejection::WrongProblem);
        }
        if self.is_expired(now) {
            return Err(CommitmentRejection::Expired);
        }
        if self.commitments.contains_key(&c.miner) {
            return Err(CommitmentRejection::Duplicate);
        }
        self.commitments.insert(c.miner, c);
        Ok(())
    }

    pub fn accept_solution(
        &mut self,
        registry: &IdentityRegistry,
        s: Solution,
        now: u64,
    ) -> Result<(), SolutionRejection> {
        if !registry.is_registered(&s.miner) {
            return Err(SolutionRejection::Unregistered);
        }
        if s.problem_id != self.problem_id() {
            return Err(SolutionRejection::WrongProblem);
        }
        if self.is_expired(now) {
            return Err(SolutionRejection::Expired);
        }
        if self.solutions.contains_key(&s.miner) {
            return Err(SolutionRejection::Duplicate);
        }
        if s.sub_digests.len() != self.problem.sub_problems.len() || !s.is_consistent() {
            return Err(SolutionRejection::Malformed);
        }
        self.solutions.insert(s.miner, s);
        Ok(())
    }

    /// Run both filtering stages and pick the winner.
    pub fn conclude(&self) -> Result<RoundVerdict, WinnerError> {
        let stage1 = filter_stage1(self);
        let mut verdict = RoundVerdict {
            stage1_eliminated: stage1.eliminated.clone(),
            ..RoundVerdict::default()
        };
        let Some(stage2) = filter_stage2(&self.commitments, &stage1.survivors) else {
            return Ok(verdict);
        };
        verdict.outvoted = stage2.outvoted;
        verdict.uncommitted = stage2.uncommitted;
        verdict.accepted_digest = Some(stage2.accepted_digest);
        verdict.eligible = stage2.eligible.clone();
        if stage2.eligible.is_empty() {
            return Ok(verdict);
        }
        let eligible_commitments: Vec<Commitment> = stage2.eligible.iter().map(|a| self.commitments[a]).collect();
        let winner = select_winner(
            self.ra_secret,
            &self.problem.ra_secret_commitment,
            &stage2.accepted_digest,
            &eligible_commitments,
        )?;
        verdict.winner = Some(winner);
        verdict.proof = Some(WinnerProof {
            ra_secret: self.ra_secret,
            accepted_digest: stage2.accepted_digest,
            reveals: stage2
                .eligible
                .iter()
                .map(|a| Reveal {
                    miner: *a,
                    reveal_nonce: self.solutions[a].reveal_nonce,
                })
                .collect(),
        });
        Ok(verdict)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::PublicKey;
    use crate::model::genesis_block;
    use crate::worker::{solve_problem, Deviation};

    fn setup(params: RoundParams, seed: u64) -> (KeyPair, BlockHeader, RoundState, SignedProblem) {
        let ra = KeyPair::from_seed([1; 32]);
        let tip = genesis_block(ra.public(), 100).header;
        let (rs, sp) = issue_problem(&ra, &tip, &params, 150, &mut Rng64::new(seed)).unwrap();
        (ra, tip, rs, sp)
    }

    const PARAMS: RoundParams = RoundParams {
        sub_problem_count: 10,
        event_count: 4,
        reference_count: 3,
        duration: 60,
    };

    #[test]
    fn issuance_is_deterministic() {
        let (_, _, a, sa) = setup(PARAMS, 9);
        let (_, _, b, sb) = setup(PARAMS, 9);
        assert_eq!(canonical_bytes(&sa), canonical_bytes(&sb));
        assert_eq!(a.references, b.references);
        let (_, _, _, sc) = setup(PARAMS, 10);
        assert_ne!(sa.problem.id(), sc.problem.id());
    }

    #[test]
    fn seed_comes_from_tip_not_rng() {
        for seed in 0..5 {
            let (ra, tip, rs, sp) = setup(PARAMS, seed);
            assert_eq!(rs.problem.master_seed, derive_seed(&tip.hash()));
            assert!(sp.verify(&ra.public()));
            assert!(rs.problem.published_at >= tip.block_time);
            assert_eq!(rs.problem.ra_secret_commitment, ra_secret_commitment(rs.ra_secret));
            assert_eq!(rs.references.len(), 3);
        }
    }

    #[test]
    fn publication_never_precedes_tip() {
        let ra = KeyPair::from_seed([1; 32]);
        let tip = genesis_block(ra.public(), 1_000).header;
        let (rs, _) = issue_problem(&ra, &tip, &PARAMS, 10, &mut Rng64::new(0)).unwrap();
        assert_eq!(rs.problem.published_at, 1_000);
    }

    #[test]
    fn bad_params_rejected() {
        let ra = KeyPair::from_seed([1; 32]);
        let tip = genesis_block(ra.public(), 0).header;
        let mut r = Rng64::new(0);
        let p = RoundParams { duration: 0, ..PARAMS };
        assert_eq!(issue_problem(&ra, &tip, &p, 0, &mut r).unwrap_err(), RoundError::ZeroDuration);
        let p = RoundParams { reference_count: 11, ..PARAMS };
        assert!(matches!(issue_problem(&ra, &tip, &p, 0, &mut r), Err(RoundError::References(_))));
    }

    #[test]
    fn commitment_rules() {
        let (ra, _, mut rs, _) = setup(PARAMS, 1);
        let mut reg = IdentityRegistry::new();
        let miner = KeyPair::from_seed([2; 32]).public();
        reg.register(&ra, b"m", miner).unwrap();
        let sol = solve_problem(&rs.problem, miner, &Deviation::Honest, &mut Rng64::new(3));
        let c = sol.commitment();
        let expiry = rs.problem.expires_at;

        let stranger = Commitment { miner: PublicKey([9; 32]), ..c };
        assert_eq!(rs.accept_commitment(&reg, stranger, 151), Err(CommitmentRejection::Unregistered));
        let wrong = Commitment { problem_id: Digest::ZERO, ..c };
        assert_eq!(rs.accept_commitment(&reg, wrong, 151), Err(CommitmentRejection::WrongProblem));
        assert_eq!(rs.accept_commitment(&reg, c, expiry), Err(CommitmentRejection::Expired));
        assert_eq!(rs.accept_commitment(&reg, c, expiry - 1), Ok(()));
        assert_eq!(rs.accept_commitment(&reg, c, expiry - 1), Err(CommitmentRejection::Duplicate));
    }

    #[test]
    fn solution_rules() {
        let (ra, _, mut rs, _) = setup(PARAMS, 1);
        let mut reg = IdentityRegistry::new();
        let miner = KeyPair::from_seed([2; 32]).public();
        reg.register(&ra, b"m", miner).unwrap();
        let sol = solve_problem(&rs.problem, miner, &Deviation::Honest, &mut Rng64::new(3));
        let mut short = sol.clone();
        short.sub_digests.pop();
        assert_eq!(rs.accept_solution(&reg, short, 151), Err(SolutionRejection::Malformed));
        let mut inconsistent = sol.clone();
        inconsistent.combined_digest = Digest::ZERO;
        assert_eq!(rs.accept_solution(&reg, inconsistent, 151), Err(SolutionRejection::Malformed));
        assert_eq!(rs.accept_solution(&reg, sol.clone(), 151), Ok(()));
        assert_eq!(rs.accept_solution(&reg, sol, 151), Err(SolutionRejection::Duplicate));
    }
}
