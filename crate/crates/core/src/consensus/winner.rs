//! Winner selection among eligible miners, and the public proof that lets
//! any node recompute it.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::codec::{canonical_bytes, CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::Address;
use crate::hash::{keccak256_concat, Digest};
use crate::model::{Commitment, ProblemDefinition};

use super::round::ra_secret_commitment;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WinnerError {
    #[error("no eligible miners")]
    NoEligible,
    #[error("round secret does not match its published commitment")]
    SecretMismatch,
    #[error("reveal for {0:?} does not match its observed commitment")]
    CommitmentMismatch(Address),
    #[error("duplicate or unsorted reveal for {0:?}")]
    DuplicateReveal(Address),
    #[error("winner should be {expected:?}, block names {claimed:?}")]
    WrongWinner { expected: Address, claimed: Address },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reveal {
    pub miner: Address,
    pub reveal_nonce: u64,
}

/// Published with each block so that the winner can be recomputed: the round
/// secret, the accepted digest, and the reveal nonce of every eligible miner
/// in ascending address order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerProof {
    pub ra_secret: u64,
    pub accepted_digest: Digest,
    pub reveals: Vec<Reveal>,
}

/// Big-endian u64 of the first eight bytes of
/// keccak256(encode(secret) ‖ accepted ‖ commits...), reduced mod `n`.
pub fn winner_index(ra_secret: u64, accepted_digest: &Digest, sorted_commits: &[Digest]) -> usize {
    assert!(!sorted_commits.is_empty(), "no eligible commitments");
    let secret = canonical_bytes(&ra_secret);
    let mut parts: Vec<&[u8]> = vec![&secret, &accepted_digest.0];
    parts.extend(sorted_commits.iter().map(|d| d.as_ref()));
    let h = keccak256_concat(&parts);
    (h.prefix_u64() % sorted_commits.len() as u64) as usize
}

/// Pick the winner among `eligible`. Order of the input does not matter;
/// commitments are ranked by miner address.
pub fn select_winner(
    ra_secret: u64,
    secret_commitment: &Digest,
    accepted_digest: &Digest,
    eligible: &[Commitment],
) -> Result<Address, WinnerError> {
    if eligible.is_empty() {
        return Err(WinnerError::NoEligible);
    }
    if ra_secret_commitment(ra_secret) != *secret_commitment {
        return Err(WinnerError::SecretMismatch);
    }
    let mut sorted: Vec<&Commitment> = eligible.iter().collect();
    sorted.sort_by_key(|c| c.miner);
    let commits: Vec<Digest> = sorted.iter().map(|c| c.commit).collect();
    Ok(sorted[winner_index(ra_secret, accepted_digest, &commits)].miner)
}

/// Recompute the winner from `proof` and check it equals `claimed`. When
/// `observed` holds commitments seen on the network, each reveal must open
/// the one recorded for its miner.
pub fn verify_winner(
    problem: &ProblemDefinition,
    proof: &WinnerProof,
    claimed: &Address,
    observed: Option<&BTreeMap<Address, Commitment>>,
) -> Result<(), WinnerError> {
    let problem_id = problem.id();
    let mut commitments = Vec::with_capacity(proof.reveals.len());
    let mut prev: Option<Address> = None;
    for r in &proof.reveals {
        if prev.is_some_and(|p| p >= r.miner) {
            return Err(WinnerError::DuplicateReveal(r.miner));
        }
        prev = Some(r.miner);
        let c = Commitment {
            miner: r.miner,
            problem_id,
            commit: Commitment::digest_for(&r.miner, &proof.accepted_digest, r.reveal_nonce),
        };
        if let Some(seen) = observed.and_then(|o| o.get(&r.miner)) {
            if seen.problem_id == problem_id && seen.commit != c.commit {
                return Err(WinnerError::CommitmentMismatch(r.miner));
            }
        }
        commitments.push(c);
    }
    let expected = select_winner(
        proof.ra_secret,
        &problem.ra_secret_commitment,
        &proof.accepted_digest,
        &commitments,
    )?;
    if expected != *claimed {
        return Err(WinnerError::WrongWinner {
            expected,
            claimed: *claimed,
        });
    }
    Ok(())
}

impl Encode for Reveal {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.miner);
        enc.put_u64(self.reveal_nonce);
    }
}

impl Decode for Reveal {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            miner: dec.get()?,
            reveal_nonce: dec.get_u64()?,
        })
    }
}

impl Encode for WinnerProof {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_u64(self.ra_secret);
        enc.put(&self.accepted_digest);
        enc.put_list(&self.reveals);
    }
}

impl Decode for WinnerProof {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            ra_secret: dec.get_u64()?,
            accepted_digest: dec.get()?,
            reveals: dec.get_list()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::PublicKey;
    use crate::hash::keccak256;

    fn commitments(n: u8, accepted: &Digest) -> Vec<Commitment> {
        (1..=n)
            .map(|i| {
                let miner = PublicKey([i; 32]);
                Commitment {
                    miner,
                    problem_id: Digest::ZERO,
                    commit: Commitment::digest_for(&miner, accepted, u64::from(i) * 11),
                }
            })
            .collect()
    }

    #[test]
    fn index_matches_hand_computation() {
        let acc = keccak256(b"accepted");
        let cs = commitments(3, &acc);
        let mut pre = 42u64.to_be_bytes().to_vec();
        pre.extend_from_slice(&acc.0);
        for c in &cs {
            pre.extend_from_slice(&c.commit.0);
        }
        let h = keccak256(&pre);
        let expected = u64::from_be_bytes(h.0[..8].try_into().unwrap()) % 3;
        let commits: Vec<Digest> = cs.iter().map(|c| c.commit).collect();
        assert_eq!(winner_index(42, &acc, &commits) as u64, expected);
    }

    #[test]
    fn input_order_irrelevant() {
        let acc = keccak256(b"a");
        let cs = commitments(5, &acc);
        let mut rev = cs.clone();
        rev.reverse();
        let sc = ra_secret_commitment(7);
        assert_eq!(
            select_winner(7, &sc, &acc, &cs).unwrap(),
            select_winner(7, &sc, &acc, &rev).unwrap()
        );
    }

    #[test]
    fn errors() {
        let acc = keccak256(b"a");
        let sc = ra_secret_commitment(7);
        assert_eq!(select_winner(7, &sc, &acc, &[]), Err(WinnerError::NoEligible));
        assert_eq!(
            select_winner(8, &sc, &acc, &commitments(2, &acc)),
            Err(WinnerError::SecretMismatch)
        );
    }
}
