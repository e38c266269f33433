mod common;

use common::{ra_key, Harness};
use pouw_core::model::{ProblemDefinition, SignedProblem, TokenUnits};
use pouw_core::worker::Deviation;
use pouw_core::{KeyPair, PublicKey};
use pouw_node::{Adversary, Envelope, Message, Topic};

const ROUND_MS: u64 = 11_000;

fn honest_net(miners: u8) -> (Harness, usize, Vec<usize>) {
    let mut h = Harness::new();
    let ra = h.authority(3);
    let ms = (0..miners).map(|i| h.miner(ra, 10 + i, Deviation::Honest)).collect();
    (h, ra, ms)
}

#[test]
fn honest_rounds_extend_every_chain() {
    let (mut h, ra, miners) = honest_net(3);
    let full = h.full(40, Adversary::default());
    h.run_until(1_000 + 3 * ROUND_MS + 2_000);
    let records = h.nodes[ra].authority().unwrap().records().to_vec();
    assert_eq!(records.len(), 3);
    for r in &records {
        assert_eq!(r.eligible.len(), 3, "{r:?}");
        assert!(r.winner.is_some());
    }
    let tip = h.nodes[ra].tip_hash();
    assert_eq!(h.nodes[ra].tip().block_id, 3);
    for &i in miners.iter().chain([&full]) {
        assert_eq!(h.nodes[i].tip_hash(), tip);
        assert_eq!(h.nodes[i].world(), h.nodes[ra].world());
    }
    let minted = h.nodes[full].world().unwrap().minted();
    assert_eq!(minted, TokenUnits::from_tokens(3 * 64));
}

#[test]
fn cheating_miners_never_win() {
    let mut h = Harness::new();
    let ra = h.authority(4);
    let honest: Vec<usize> = (0..3).map(|i| h.miner(ra, 10 + i, Deviation::Honest)).collect();
    let corrupt = h.miner(ra, 20, Deviation::CorruptSub(vec![0, 1, 2, 3]));
    let wrong = h.miner(ra, 21, Deviation::WrongSeed(5));
    h.run_until(1_000 + 4 * ROUND_MS + 2_000);
    let corrupt_key = h.nodes[corrupt].public();
    let wrong_key = h.nodes[wrong].public();
    let honest_keys: Vec<PublicKey> = honest.iter().map(|&i| h.nodes[i].public()).collect();
    let records = h.nodes[ra].authority().unwrap().records();
    assert_eq!(records.len(), 4);
    for r in records {
        assert!(r.stage1_eliminated.contains(&corrupt_key));
        // every digest is wrong, so the reference check usually catches it first
        assert!(r.stage1_eliminated.contains(&wrong_key) || r.outvoted.contains(&wrong_key));
        assert!(!r.eligible.contains(&wrong_key));
        assert!(honest_keys.contains(&r.winner.unwrap()));
    }
}

#[test]
fn forged_problem_is_dropped() {
    let (mut h, _, miners) = honest_net(1);
    let m = miners[0];
    let tip = h.nodes[m].tip();
    let mallory = KeyPair::from_seed([66; 32]);
    let problem = ProblemDefinition {
        prev_block_hash: tip.hash(),
        published_at: 1,
        expires_at: 100,
        master_seed: pouw_core::model::derive_seed(&tip.hash()),
        sub_problems: Vec::new(),
        ra_secret_commitment: pouw_core::Digest::ZERO,
    };
    // wrong envelope sender on an RA-only topic
    let env = Envelope::seal(&mallory, Topic::BlockProblem, &Message::Problem(SignedProblem::sign(&mallory, problem.clone())));
    h.deliver(m, &env);
    assert_eq!(h.nodes[m].metrics().forged, 1);
    // RA envelope key, but the problem itself signed by someone else
    let env = Envelope::seal(&ra_key(), Topic::BlockProblem, &Message::Problem(SignedProblem::sign(&mallory, problem)));
    h.deliver(m, &env);
    assert_eq!(h.nodes[m].metrics().forged, 2);
    // flipped payload byte breaks the envelope signature
    let mut env = env;
    env.payload[5] ^= 1;
    h.deliver(m, &env);
    assert_eq!(h.nodes[m].metrics().forged, 3);
}

#[test]
fn replayed_problem_is_stale() {
    let mut h = Harness::new();
    let ra = h.authority(2);
    let m = h.miner(ra, 10, Deviation::Honest);
    let replayer = h.full(
        50,
        Adversary {
            replay_old_envelopes: true,
            tamper_responses: false,
        },
    );
    h.run_until(1_000 + 2 * ROUND_MS + 6_000);
    assert!(h.nodes[replayer].metrics().replays_sent > 0);
    let stale = h.nodes[m].metrics().stale;
    assert!(stale > 0, "replays should count as stale");
    assert_eq!(h.nodes[m].tip().block_id, 2);
}

#[test]
fn late_node_syncs_from_hash_list() {
    let (mut h, ra, _) = honest_net(2);
    let late = h.full(41, Adversary::default());
    h.online[late] = false;
    h.run_until(1_000 + 3 * ROUND_MS + 1_000);
    assert_eq!(h.nodes[late].tip().block_id, 0);
    h.rejoin(late);
    h.run_until(h.now_ms + 7_000);
    assert_eq!(h.nodes[late].tip_hash(), h.nodes[ra].tip_hash());
    assert_eq!(h.nodes[late].world(), h.nodes[ra].world());
}

#[test]
fn tampering_peer_is_distrusted() {
    let (mut h, ra, miners) = honest_net(2);
    // added first, so its hash list arrives first and it is asked for blocks
    let liar = h.full(
        51,
        Adversary {
            replay_old_envelopes: false,
            tamper_responses: true,
        },
    );
    let honest = h.full(44, Adversary::default());
    let late = h.full(42, Adversary::default());
    h.online[late] = false;
    h.run_until(1_000 + 3 * ROUND_MS + 1_000);
    // only the two full nodes are left to serve the late node
    let ra_tip = h.nodes[ra].tip_hash();
    for i in miners.into_iter().chain([ra]) {
        h.online[i] = false;
    }
    h.rejoin(late);
    h.run_until(h.now_ms + 20_000);
    let n = &h.nodes[late];
    assert_eq!(n.tip_hash(), ra_tip);
    assert_eq!(n.world(), h.nodes[honest].world());
    assert!(n.metrics().sync_responses_rejected > 0);
    assert!(n.distrusted_peers().contains(&h.nodes[liar].public()));
}

#[test]
fn light_node_checks_proofs() {
    let mut h = Harness::new();
    let ra = h.authority(3);
    let m = h.miner(ra, 10, Deviation::Honest);
    let full = h.full(43, Adversary::default());
    let liar = h.full(
        52,
        Adversary {
            replay_old_envelopes: false,
            tamper_responses: true,
        },
    );
    let light = h.light(60);
    h.run_until(1_000 + ROUND_MS + 500);
    // the only miner won block 1; pay someone before block 2
    let payee = PublicKey([9; 32]);
    let out = h.nodes[m].submit_transfer(payee, TokenUnits::from_tokens(5), TokenUnits(1), h.now_ms);
    assert_eq!(out.len(), 1);
    h.apply(m, out);
    h.run_until(1_000 + 2 * ROUND_MS + 1_000);
    let block2 = h.nodes[full].tip();
    assert_eq!(block2.block_id, 2);
    let tx_id = h.nodes[full].chain().full_block(&block2.hash()).unwrap().unwrap().transactions[0].id();
    assert_eq!(h.nodes[light].tip_hash(), block2.hash());

    for peer in [full, liar] {
        let key = h.nodes[peer].public();
        let out = h.nodes[light].request_tx_proof(key, tx_id, block2.hash());
        h.apply(light, out);
        let out = h.nodes[light].request_balance(key, payee, block2.hash());
        h.apply(light, out);
    }
    h.run_until(h.now_ms + 200);
    let log = h.nodes[light].light_log();
    assert_eq!(log.verified_txs, vec![(block2.hash(), tx_id)]);
    assert_eq!(log.tx_rejected, 1);
    assert_eq!(log.verified_balances.len(), 1);
    assert_eq!(log.verified_balances[0].balance, TokenUnits::from_tokens(5).0);
    assert_eq!(log.balance_rejected, 1);
}
