//! Two-stage solution verification: sub-problem matching against the RA's
//! references, then the most common combined digest.

use std::collections::BTreeMap;

use crate::crypto::Address;
use crate::hash::Digest;
use crate::model::{Commitment, Solution};

use super::round::RoundState;

#[derive(Debug, Clone)]
pub struct Stage1Outcome<'a> {
    pub survivors: Vec<&'a Solution>,
    pub eliminated: Vec<Address>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage2Outcome {
    pub accepted_digest: Digest,
    pub eligible: Vec<Address>,
    pub outvoted: Vec<Address>,
    pub uncommitted: Vec<Address>,
}

/// A solution survives iff it matches every reference sub-digest. One
/// mismatch condemns the whole solution.
pub fn filter_stage1(rs: &RoundState) -> Stage1Outcome<'_> {
    let mut out = Stage1Outcome {
        survivors: Vec::new(),
        eliminated: Vec::new(),
    };
    let n = rs.problem.sub_problems.len();
    for s in rs.solutions.values() {
        let matches = s.sub_digests.len() == n
            && rs.references.iter().all(|(&i, d)| s.sub_digests.get(i) == Some(d));
        if matches {
            out.survivors.push(s);
        } else {
            out.eliminated.push(s.miner);
        }
    }
    out
}

/// The most frequent combined digest among survivors is accepted; ties go to
/// the lexicographically smallest digest. Miners with the accepted digest
/// whose commitment opens to it are eligible. `None` when nothing survived.
pub fn filter_stage2(commitments: &BTreeMap<Address, Commitment>, survivors: &[&Solution]) -> Option<Stage2Outcome> {
    let mut counts: BTreeMap<Digest, usize> = BTreeMap::new();
    for s in survivors {
        *counts.entry(s.combined_digest).or_default() += 1;
    }
    let mut best: Option<(Digest, usize)> = None;
    for (d, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((d, c));
        }
    }
    let (accepted_digest, _) = best?;
    let mut out = Stage2Outcome {
        accepted_digest,
        eligible: Vec::new(),
        outvoted: Vec::new(),
        uncommitted: Vec::new(),
    };
    for s in survivors {
        if s.combined_digest != accepted_digest {
            out.outvoted.push(s.miner);
            continue;
        }
        let committed = commitments
            .get(&s.miner)
            .is_some_and(|c| c.problem_id == s.problem_id && c.opens_to(&accepted_digest, s.reveal_nonce));
        if committed {
            out.eligible.push(s.miner);
        } else {
            out.uncommitted.push(s.miner);
        }
    }
    out.eligible.sort();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::PublicKey;
    use crate::hash::keccak256;

    fn sol(miner: u8, combined: Digest, nonce: u64) -> Solution {
        Solution {
            miner: PublicKey([miner; 32]),
            problem_id: Digest::ZERO,
            sub_digests: vec![],
            combined_digest: combined,
            reveal_nonce: nonce,
        }
    }

    fn committed(sols: &[&Solution]) -> BTreeMap<Address, Commitment> {
        sols.iter().map(|s| (s.miner, s.commitment())).collect()
    }

    #[test]
    fn majority_digest_wins() {
        let x = keccak256(b"x");
        let y = keccak256(b"y");
        let (a, b, c) = (sol(1, x, 1), sol(2, x, 2), sol(3, y, 3));
        let all = [&a, &b, &c];
        let out = filter_stage2(&committed(&all), &all).unwrap();
        assert_eq!(out.accepted_digest, x);
        assert_eq!(out.eligible, vec![a.miner, b.miner]);
        assert_eq!(out.outvoted, vec![c.miner]);
    }

    #[test]
    fn no_commitment_no_eligibility() {
        let x = keccak256(b"x");
        let (a, b) = (sol(1, x, 1), sol(2, x, 2));
        let mut cs = committed(&[&a]);
        // commitment to a different nonce does not open
        let mut bad = b.commitment();
        bad.commit = keccak256(b"other");
        cs.insert(b.miner, bad);
        let out = filter_stage2(&cs, &[&a, &b]).unwrap();
        assert_eq!(out.eligible, vec![a.miner]);
        assert_eq!(out.uncommitted, vec![b.miner]);
    }

    #[test]
    fn tie_goes_to_smallest_digest() {
        let mut lo = [0u8; 32];
        lo[0] = 0x01;
        let mut hi = [0u8; 32];
        hi[0] = 0x02;
        let (a, b) = (sol(1, Digest(hi), 1), sol(2, Digest(lo), 2));
        let out = filter_stage2(&committed(&[&a, &b]), &[&a, &b]).unwrap();
        assert_eq!(out.accepted_digest, Digest(lo));
    }

    #[test]
    fn nothing_survived() {
        assert!(filter_stage2(&BTreeMap::new(), &[]).is_none());
    }
}
