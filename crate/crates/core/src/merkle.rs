//! Bottom-up binary Merkle tree over digests.
//!
//! Parents are `keccak256(left ‖ right)`. A level with an odd number of nodes
//! pairs its last node with itself. A single leaf is its own root.

use thiserror::Error;

use crate::codec::{CodecError, Decode, Decoder, Encode, Encoder};
use crate::hash::{keccak256_concat, Digest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MerkleError {
    #[error("merkle tree needs at least one leaf")]
    Empty,
    #[error("leaf index {index} out of range for {len} leaves")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Which side of the running hash a sibling sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleProof {
    pub leaf_index: u64,
    pub siblings: Vec<(Digest, Side)>,
}

fn parent(left: &Digest, right: &Digest) -> Digest {
    keccak256_concat(&[&left.0, &right.0])
}

fn next_level(level: &[Digest]) -> Vec<Digest> {
    level
        .chunks(2)
        .map(|pair| match pair {
            [l, r] => parent(l, r),
            [last] => parent(last, last),
            _ => unreachable!(),
        })
        .collect()
}

/// All levels of a tree, leaves first, for repeated proofs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    levels: Vec<Vec<Digest>>,
}

impl MerkleTree {
    pub fn new(leaves: &[Digest]) -> Result<Self, MerkleError> {
        if leaves.is_empty() {
            return Err(MerkleError::Empty);
        }
        let mut levels = vec![leaves.to_vec()];
        while levels.last().expect("non-empty").len() > 1 {
            let next = next_level(levels.last().expect("non-empty"));
            levels.push(next);
        }
        Ok(Self { levels })
    }

    pub fn root(&self) -> Digest {
        self.levels.last().expect("non-empty")[0]
    }

    pub fn len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn prove(&self, index: usize) -> Result<MerkleProof, MerkleError> {
        if index >= self.len() {
            return Err(MerkleError::IndexOutOfRange { index, len: self.len() });
        }
        let mut pos = index;
        let siblings = self.levels[..self.levels.len() - 1]
            .iter()
            .map(|level| {
                let sibling = if pos.is_multiple_of(2) {
                    // duplicated last node is its own right sibling
                    (*level.get(pos + 1).unwrap_or(&level[pos]), Side::Right)
                } else {
                    (level[pos - 1], Side::Left)
                };
                pos /= 2;
                sibling
            })
            .collect();
        Ok(MerkleProof {
            leaf_index: index as u64,
            siblings,
        })
    }
}

pub fn merkle_root(leaves: &[Digest]) -> Result<Digest, MerkleError> {
    if leaves.is_empty() {
        return Err(MerkleError::Empty);
    }
    let mut level = leaves.to_vec();
    while level.len() > 1 {
        level = next_level(&level);
    }
    Ok(level[0])
}

/// Root of `leaves`, or the all-zero sentinel for an empty list.
pub fn merkle_root_or_zero(leaves: &[Digest]) -> Digest {
    merkle_root(leaves).unwrap_or(Digest::ZERO)
}

pub fn merkle_prove(leaves: &[Digest], index: usize) -> Result<MerkleProof, MerkleError> {
    if index >= leaves.len() {
        return Err(MerkleError::IndexOutOfRange { index, len: leaves.len() });
    }
    MerkleTree::new(leaves)?.prove(index)
}

/// True iff folding `leaf` through the proof reproduces `root`. The side
/// flags must agree with the bits of `leaf_index`.
pub fn merkle_verify(root: &Digest, leaf: &Digest, proof: &MerkleProof) -> bool {
    if proof.siblings.len() < 64 && proof.leaf_index >> proof.siblings.len() != 0 {
        return false;
    }
    let mut acc = *leaf;
    for (level, (sibling, side)) in proof.siblings.iter().enumerate() {
        let bit_set = level < 64 && (proof.leaf_index >> level) & 1 == 1;
        acc = match (side, bit_set) {
            (Side::Right, false) => parent(&acc, sibling),
            (Side::Left, true) => parent(sibling, &acc),
            _ => return false,
        };
    }
    acc == *root
}

impl Encode for MerkleProof {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_u64(self.leaf_index);
        enc.put_list(&self.siblings);
    }
}

impl Decode for MerkleProof {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            leaf_index: dec.get_u64()?,
            siblings: dec.get_list()?,
        })
    }
}

impl Encode for Side {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_u8(match self {
            Side::Left => 0,
            Side::Right => 1,
        });
    }
}

impl Decode for Side {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        match dec.get_u8()? {
            0 => Ok(Side::Left),
            1 => Ok(Side::Right),
            tag => Err(CodecError::InvalidTag { what: "merkle side", tag }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::keccak256;

    fn leaves(n: usize) -> Vec<Digest> {
        (0..n).map(|i| keccak256(&(i as u64).to_be_bytes())).collect()
    }

    #[test]
    fn empty_is_error_zero_sentinel_otherwise() {
        assert_eq!(merkle_root(&[]), Err(MerkleError::Empty));
        assert_eq!(merkle_root_or_zero(&[]), Digest::ZERO);
    }

    #[test]
    fn single_leaf_is_root() {
        let l = leaves(1);
        assert_eq!(merkle_root(&l).unwrap(), l[0]);
        let p = merkle_prove(&l, 0).unwrap();
        assert!(p.siblings.is_empty());
        assert!(merkle_verify(&l[0], &l[0], &p));
    }

    #[test]
    fn two_leaves() {
        let l = leaves(2);
        let (a, b) = (l[0], l[1]);
        assert_eq!(merkle_root(&l).unwrap(), keccak256_concat(&[&a.0, &b.0]));
        assert_eq!(merkle_prove(&l, 0).unwrap().siblings, vec![(b, Side::Right)]);
    }

    #[test]
    fn three_leaves_duplicate_last() {
        let l = leaves(3);
        let (a, b, c) = (l[0], l[1], l[2]);
        let ab = keccak256_concat(&[&a.0, &b.0]);
        let cc = keccak256_concat(&[&c.0, &c.0]);
        assert_eq!(merkle_root(&l).unwrap(), keccak256_concat(&[&ab.0, &cc.0]));
        let p = merkle_prove(&l, 2).unwrap();
        assert_eq!(p.siblings, vec![(c, Side::Right), (ab, Side::Left)]);
    }

    #[test]
    fn tree_matches_one_shot_functions() {
        for n in 1..40 {
            let l = leaves(n);
            let t = MerkleTree::new(&l).unwrap();
            assert_eq!(t.root(), merkle_root(&l).unwrap());
            for (i, leaf) in l.iter().enumerate() {
                let p = t.prove(i).unwrap();
                assert!(merkle_verify(&t.root(), leaf, &p));
            }
        }
        assert_eq!(MerkleTree::new(&[]), Err(MerkleError::Empty));
    }

    #[test]
    fn out_of_range_index() {
        assert_eq!(
            merkle_prove(&leaves(3), 3),
            Err(MerkleError::IndexOutOfRange { index: 3, len: 3 })
        );
    }

    #[test]
    fn wrong_leaf_or_corrupted_sibling_fails() {
        let l = leaves(5);
        let root = merkle_root(&l).unwrap();
        let p = merkle_prove(&l, 1).unwrap();
        assert!(merkle_verify(&root, &l[1], &p));
        assert!(!merkle_verify(&root, &l[2], &p));
        let mut bad = p.clone();
        bad.siblings[1].0 .0[0] ^= 0x80;
        assert!(!merkle_verify(&root, &l[1], &bad));
    }

    #[test]
    fn side_flags_must_match_index() {
        let l = leaves(4);
        let root = merkle_root(&l).unwrap();
        let mut p = merkle_prove(&l, 0).unwrap();
        p.leaf_index = 1;
        assert!(!merkle_verify(&root, &l[0], &p));
        let mut p = merkle_prove(&l, 0).unwrap();
        p.leaf_index = 4;
        assert!(!merkle_verify(&root, &l[0], &p));
    }
}
