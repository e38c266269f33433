use pouw_core::model::TokenUnits;
use pouw_sim::{run_scenario, Class, ConfigError, ScenarioConfig, ScenarioError};

fn honest(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        master_seed: seed,
        ..ScenarioConfig::default()
    }
}

#[test]
fn four_honest_miners_five_rounds() {
    let r = run_scenario(&honest(1)).unwrap();
    assert_eq!(r.blocks, 5);
    assert_eq!(r.minted_base_units, TokenUnits::from_tokens(320).0);
    assert_eq!(r.minted_base_units, r.expected_minted_base_units);
    assert!(r.rounds_without_block.is_empty());
    let miners: Vec<_> = r.nodes.iter().filter(|n| n.class != Class::Light).collect();
    assert!(miners.iter().all(|n| n.tip_hash == r.authority_tip));
    assert!(miners.iter().all(|n| n.state_root == miners[0].state_root));
    assert_eq!(r.winners.values().sum::<u64>(), 5);
    assert!(r.convergence.honest_same_tip && r.convergence.rounds_consistent);
}

#[test]
fn equal_configs_give_identical_reports() {
    let a = run_scenario(&honest(9)).unwrap().to_json();
    let b = run_scenario(&honest(9)).unwrap().to_json();
    assert_eq!(a, b);
    let c = run_scenario(&honest(10)).unwrap().to_json();
    assert_ne!(a, c);
}

#[test]
fn lossy_network_still_converges() {
    let cfg = ScenarioConfig {
        drop_rate: 0.2,
        rounds: 4,
        ..honest(3)
    };
    let r = run_scenario(&cfg).unwrap();
    assert!(r.blocks >= 1);
    assert!(r.convergence.honest_same_tip, "{:?}", r.convergence);
    assert!(r.convergence.honest_same_state);
    assert!(r.convergence.supply_matches_schedule);
    assert!(r.messages.values().any(|t| t.dropped > 0));
}

#[test]
fn sybils_share_one_registration() {
    let cfg = ScenarioConfig {
        honest_miners: 3,
        sybil_attempts: 5,
        rounds: 3,
        ..honest(4)
    };
    let r = run_scenario(&cfg).unwrap();
    assert_eq!((r.sybil.attempts, r.sybil.accepted, r.sybil.rejected), (5, 1, 4));
    let sybil = r.eliminations.get(&Class::Sybil).copied().unwrap_or_default();
    assert_eq!(sybil.wins, 0);
    assert_eq!(sybil.eligible, 0);
    assert_eq!(r.blocks, 3);
    let honest = r.eliminations[&Class::Honest];
    assert_eq!(honest.wins, 3);
}

#[test]
fn adversaries_never_win() {
    let cfg = ScenarioConfig {
        corrupt_sub_miners: 1,
        wrong_seed_miners: 1,
        replay_attackers: 1,
        light_nodes: 1,
        rounds: 4,
        ..honest(5)
    };
    let r = run_scenario(&cfg).unwrap();
    for class in [Class::CorruptSub, Class::WrongSeed] {
        let t = r.eliminations[&class];
        assert_eq!(t.wins, 0, "{class:?}");
        assert_eq!(t.eligible, 0, "{class:?}");
    }
    assert_eq!(r.eliminations[&Class::Honest].wins, r.blocks);
    assert_eq!(r.replayed_transactions_included, 0);
    assert!(r.replays_sent > 0);
    assert!(r.light.iter().all(|l| l.headers_consistent && l.balances_match_chain));
}

#[test]
fn bad_configs_are_refused() {
    let cases = [
        ScenarioConfig { drop_rate: 1.0, ..honest(1) },
        ScenarioConfig { latency: (9, 2), ..honest(1) },
        ScenarioConfig { reference_count: 11, ..honest(1) },
        ScenarioConfig { honest_miners: 0, ..honest(1) },
    ];
    for cfg in cases {
        assert!(matches!(run_scenario(&cfg), Err(ScenarioError::Config(_))), "{cfg:?}");
    }
}

#[test]
fn config_json_round_trips() {
    let cfg = ScenarioConfig::adversarial();
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ScenarioConfig::from_json(&text).unwrap(), cfg);
    let unknown = text.replacen('{', "{\"bogus\":1,", 1);
    assert!(ScenarioConfig::from_json(&unknown).is_err());
    for file in ["configs/adversarial.json", "configs/honest.json"] {
        let text = std::fs::read_to_string(file).unwrap();
        ScenarioConfig::from_json(&text).unwrap();
    }
    let bad = serde_json::to_string(&ScenarioConfig { drop_rate: 1.5, ..cfg }).unwrap();
    assert_eq!(ScenarioConfig::from_json(&bad), Err(ConfigError::DropRate(1.5)));
}
