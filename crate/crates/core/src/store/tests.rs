use super::*;
use crate::consensus::{assemble_block, issue_problem, RoundParams};
use crate::crypto::{KeyPair, PublicKey};
use crate::model::{genesis_block, TokenUnits, Transaction};
use crate::rng::Rng64;

const PARAMS: RoundParams = RoundParams {
    sub_problem_count: 3,
    event_count: 2,
    reference_count: 1,
    duration: 10,
};

/// Genesis plus `n` blocks; block 2 carries one transfer from the block-1 winner.
fn chain(n: u64) -> (KeyPair, Vec<Block>) {
    let ra = KeyPair::from_seed([1; 32]);
    let miner = KeyPair::from_seed([2; 32]);
    let mut rng = Rng64::new(5);
    let mut blocks = vec![genesis_block(ra.public(), 1_000)];
    let mut world = WorldState::new();
    world.apply_block(&blocks[0]).unwrap();
    for i in 1..=n {
        let tip = blocks.last().unwrap().header.clone();
        let (rs, _) = issue_problem(&ra, &tip, &PARAMS, tip.block_time, &mut rng).unwrap();
        let txs = if i == 2 {
            vec![Transaction::new_signed(&miner, PublicKey([9; 32]), TokenUnits(10), TokenUnits(1), 1)]
        } else {
            vec![]
        };
        let b = assemble_block(&ra, &tip, &world, &rs.problem, miner.public(), txs, tip.block_time + 5)
            .unwrap()
            .block;
        world.apply_block(&b).unwrap();
        blocks.push(b);
    }
    (ra, blocks)
}

fn filled(blocks: &[Block]) -> (ChainStore, StateStore) {
    let mut c = ChainStore::open_memory(StoreMode::Full);
    let mut s = StateStore::open_memory();
    for b in blocks {
        append_block(&mut c, &mut s, b).unwrap();
    }
    (c, s)
}

#[test]
fn append_then_traverse() {
    let (_, blocks) = chain(4);
    let (c, s) = filled(&blocks);
    assert_eq!(c.latest().unwrap(), Some(blocks[4].hash()));
    let hashes: Vec<Digest> = blocks.iter().map(Block::hash).collect();
    assert_eq!(c.hash_list().unwrap(), hashes);
    let walked: Vec<u64> = c.traverse().unwrap().iter().map(|h| h.block_id).collect();
    assert_eq!(walked, vec![4, 3, 2, 1, 0]);
    assert_eq!(s.latest(), Some(blocks[4].hash()));
    assert_eq!(s.merkle_root(), blocks[4].header.state_merkle_root);
    assert_eq!(s.wallet(&PublicKey([9; 32])).balance, TokenUnits(10));
}

#[test]
fn rebuild_matches_incremental() {
    let (_, blocks) = chain(4);
    let (c, s) = filled(&blocks);
    let r = rebuild_state(&c).unwrap();
    assert_eq!(r.snapshot_bytes(), s.snapshot_bytes());
    let mid = state_at(&c, &blocks[2].hash()).unwrap();
    assert_eq!(mid.merkle_root(), blocks[2].header.state_merkle_root);
}

#[test]
fn rejects_non_extending_and_bad_root() {
    let (_, blocks) = chain(3);
    let (mut c, mut s) = filled(&blocks[..2]);
    assert!(matches!(
        append_block(&mut c, &mut s, &blocks[3]),
        Err(StoreError::NotExtendingTip { .. })
    ));
    assert_eq!(append_block(&mut c, &mut s, &blocks[0]), Err(StoreError::GenesisExists));
    let mut bad = blocks[2].clone();
    bad.header.state_merkle_root = Digest::ZERO;
    assert!(matches!(
        append_block(&mut c, &mut s, &bad),
        Err(StoreError::StateRootMismatch { .. })
    ));
    // nothing changed
    assert_eq!(c.latest().unwrap(), Some(blocks[1].hash()));
    assert_eq!(s.latest(), Some(blocks[1].hash()));
    append_block(&mut c, &mut s, &blocks[2]).unwrap();
}

#[test]
fn missing_parent_is_reported() {
    let (_, blocks) = chain(3);
    let (mut c, _) = filled(&blocks);
    c.remove(&blocks[1].hash()).unwrap();
    assert_eq!(
        c.traverse(),
        Err(StoreError::BrokenLink {
            missing: blocks[1].hash(),
            child_block_id: 2
        })
    );
}

#[test]
fn light_store_holds_headers_only() {
    let (_, blocks) = chain(2);
    let mut c = ChainStore::open_memory(StoreMode::Light);
    for b in &blocks {
        c.append_header(&b.header).unwrap();
    }
    assert_eq!(c.traverse().unwrap().len(), 3);
    assert_eq!(c.full_block(&blocks[1].hash()).unwrap(), None);
    assert_eq!(c.header(&blocks[1].hash()).unwrap(), Some(blocks[1].header.clone()));
    let mut s = StateStore::open_memory();
    assert_eq!(append_block(&mut c, &mut s, &blocks[0]), Err(StoreError::NotFullStore));
}

#[test]
fn file_stores_survive_reopen() {
    let (_, blocks) = chain(3);
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("chain.db");
    let sp = dir.path().join("state.db");
    let snapshot = {
        let mut c = ChainStore::open_file(&cp, StoreMode::Full).unwrap();
        let mut s = StateStore::open_file(&sp).unwrap();
        for b in &blocks {
            append_block(&mut c, &mut s, b).unwrap();
        }
        s.snapshot_bytes()
    };
    let c = ChainStore::open_existing(&cp).unwrap();
    assert_eq!(c.mode(), StoreMode::Full);
    assert_eq!(c.latest().unwrap(), Some(blocks[3].hash()));
    let s = StateStore::open_file(&sp).unwrap();
    assert_eq!(s.snapshot_bytes(), snapshot);
    assert_eq!(rebuild_state(&c).unwrap().snapshot_bytes(), snapshot);
    assert_eq!(
        ChainStore::open_file(&cp, StoreMode::Light).err(),
        Some(StoreError::ModeMismatch)
    );
}

#[test]
fn state_must_track_chain() {
    let (_, blocks) = chain(1);
    let (mut c, _) = filled(&blocks[..1]);
    let mut fresh = StateStore::open_memory();
    assert!(matches!(
        append_block(&mut c, &mut fresh, &blocks[1]),
        Err(StoreError::StateOutOfSync { .. })
    ));
}
