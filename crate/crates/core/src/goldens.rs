//! Frozen test vectors. `vectors.txt` holds one `name hex` pair per line; the
//! fixtures below rebuild each value from the library so drift is caught.

use crate::codec::canonical_bytes;
use crate::consensus::winner_index;
use crate::crypto::{KeyPair, PublicKey};
use crate::hash::{keccak256, Digest};
use crate::merkle::merkle_root_or_zero;
use crate::model::{
    genesis_block, Block, BlockHeader, Commitment, ProblemDefinition, SubProblemSpec, TokenUnits, Transaction,
};
use crate::rng::Rng64;
use crate::worker::solve_sub;

pub const VECTORS: &str = include_str!("../goldens/vectors.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: String,
    pub actual: Option<String>,
}

impl GoldenCheck {
    pub fn passed(&self) -> bool {
        self.actual.as_deref() == Some(self.expected.as_str())
    }
}

pub const FIXTURE_RA_SEED: [u8; 32] = [1; 32];
pub const FIXTURE_SENDER_SEED: [u8; 32] = [2; 32];
pub const FIXTURE_GENESIS_TIME: u64 = 1_700_000_000;

pub fn fixture_transaction() -> Transaction {
    let sender = KeyPair::from_seed(FIXTURE_SENDER_SEED);
    Transaction::new_signed(&sender, PublicKey([3; 32]), TokenUnits::from_tokens(5), TokenUnits(1), 1)
}

pub fn fixture_problem() -> ProblemDefinition {
    let prev = genesis_block(KeyPair::from_seed(FIXTURE_RA_SEED).public(), FIXTURE_GENESIS_TIME).hash();
    ProblemDefinition {
        prev_block_hash: prev,
        published_at: FIXTURE_GENESIS_TIME + 1,
        expires_at: FIXTURE_GENESIS_TIME + 11,
        master_seed: prev.prefix_u64(),
        sub_problems: vec![
            SubProblemSpec { index: 0, event_count: 2, param_tag: 7 },
            SubProblemSpec { index: 1, event_count: 2, param_tag: 8 },
        ],
        ra_secret_commitment: keccak256(&7u64.to_be_bytes()),
    }
}

/// Block 1 with one transaction. Header roots are taken as given, not
/// recomputed, so the vector pins the encoding alone.
pub fn fixture_block() -> Block {
    let tx = fixture_transaction();
    let problem = fixture_problem();
    Block {
        header: BlockHeader {
            block_time: FIXTURE_GENESIS_TIME + 12,
            block_id: 1,
            prev_block_hash: problem.prev_block_hash,
            transactions_merkle_root: tx.id(),
            state_merkle_root: keccak256(b"state"),
            problem_id: problem.id(),
            block_winner: PublicKey([0x11; 32]),
        },
        transactions: vec![tx],
        problem,
    }
}

pub const FIXTURE_WINNER_MINERS: [[u8; 32]; 2] = [[0x11; 32], [0x22; 32]];
pub const FIXTURE_WINNER_NONCES: [u64; 2] = [1, 2];
pub const FIXTURE_WINNER_SECRET: u64 = 7;

fn winner_fixture() -> (Vec<Digest>, u64) {
    let accepted = keccak256(b"accepted");
    let commits: Vec<Digest> = FIXTURE_WINNER_MINERS
        .iter()
        .zip(FIXTURE_WINNER_NONCES)
        .map(|(m, n)| Commitment::digest_for(&PublicKey(*m), &accepted, n))
        .collect();
    let idx = winner_index(FIXTURE_WINNER_SECRET, &accepted, &commits) as u64;
    (commits, idx)
}

/// Every vector, recomputed now.
pub fn derive() -> Vec<(&'static str, String)> {
    let ra = KeyPair::from_seed(FIXTURE_RA_SEED);
    let genesis = genesis_block(ra.public(), FIXTURE_GENESIS_TIME);
    let tx = fixture_transaction();
    let block = fixture_block();
    let mut r = Rng64::new(0);
    let splitmix: Vec<u8> = (0..4).flat_map(|_| r.next_u64().to_be_bytes()).collect();
    let leaves: Vec<Digest> = (0..3u64).map(|i| keccak256(&i.to_be_bytes())).collect();
    let (commits, idx) = winner_fixture();
    vec![
        ("keccak_empty", keccak256(b"").to_hex()),
        ("keccak_abc", keccak256(b"abc").to_hex()),
        ("splitmix_seed0_first4", hex::encode(splitmix)),
        ("encode_u64_1", hex::encode(canonical_bytes(&1u64))),
        ("encode_bytes_abc", hex::encode(canonical_bytes(&b"abc"[..]))),
        ("ra_public_key", ra.public().to_hex()),
        ("transaction_encoding", hex::encode(canonical_bytes(&tx))),
        ("transaction_id", tx.id().to_hex()),
        ("genesis_header_encoding", hex::encode(canonical_bytes(&genesis.header))),
        ("genesis_hash", genesis.hash().to_hex()),
        ("problem_id", block.problem.id().to_hex()),
        ("block_encoding", hex::encode(canonical_bytes(&block))),
        ("block_hash", block.hash().to_hex()),
        ("merkle_root_3", merkle_root_or_zero(&leaves).to_hex()),
        (
            "mock_sub_digest",
            solve_sub(0, &SubProblemSpec { index: 0, event_count: 1, param_tag: 0 }).to_hex(),
        ),
        ("winner_commit_0", commits[0].to_hex()),
        ("winner_commit_1", commits[1].to_hex()),
        ("winner_index", hex::encode(idx.to_be_bytes())),
    ]
}

/// The frozen vectors as `(name, hex)`.
pub fn frozen() -> Vec<(&'static str, &'static str)> {
    VECTORS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once(' '))
        .map(|(n, h)| (n, h.trim()))
        .collect()
}

/// Compare each frozen vector with its recomputed value.
pub fn check() -> Vec<GoldenCheck> {
    let derived = derive();
    frozen()
        .into_iter()
        .map(|(name, expected)| GoldenCheck {
            name: name.to_string(),
            expected: expected.to_string(),
            actual: derived.iter().find(|(n, _)| *n == name).map(|(_, v)| v.clone()),
        })
        .collect()
}
