//! Independent oracle for the frozen vectors. Every value is assembled byte by
//! byte with sha3 and ed25519-dalek directly, without the library's encoder.

use ed25519_dalek::{Signer, SigningKey};
use sha3::{Digest as _, Keccak256};

use pouw_core::goldens;

fn keccak(data: &[u8]) -> [u8; 32] {
    Keccak256::digest(data).into()
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn be(v: u64) -> [u8; 8] {
    v.to_be_bytes()
}

fn node(l: &[u8; 32], r: &[u8; 32]) -> [u8; 32] {
    keccak(&[&l[..], &r[..]].concat())
}

struct Oracle {
    vectors: Vec<(&'static str, String)>,
}

fn oracle() -> Oracle {
    let ra = SigningKey::from_bytes(&[1; 32]);
    let ra_pk = ra.verifying_key().to_bytes();
    let sender = SigningKey::from_bytes(&[2; 32]);
    let sender_pk = sender.verifying_key().to_bytes();
    let t0 = 1_700_000_000u64;

    // transaction: sender, receiver, amount, fee, nonce, then signature over the id
    let mut payload = Vec::new();
    payload.extend_from_slice(&sender_pk);
    payload.extend_from_slice(&[3; 32]);
    payload.extend_from_slice(&be(5 << 24));
    payload.extend_from_slice(&be(1));
    payload.extend_from_slice(&be(1));
    let tx_id = keccak(&payload);
    let sig = sender.sign(&tx_id).to_bytes();
    let tx_bytes = [&payload[..], &sig[..]].concat();

    // genesis: problem is all zero with an empty sub-problem list
    let genesis_problem = [&[0u8; 56][..], &[0u8; 4][..], &[0u8; 32][..]].concat();
    let genesis_problem_id = keccak(&genesis_problem);
    let ra_leaf = keccak(&[&ra_pk[..], &be(0), &be(0)].concat());
    let genesis_header = [
        &be(t0)[..],
        &be(0),
        &[0u8; 32],
        &[0u8; 32],
        &ra_leaf,
        &genesis_problem_id,
        &ra_pk,
    ]
    .concat();
    let genesis_hash = keccak(&genesis_header);

    // fixture problem on top of genesis
    let mut problem = Vec::new();
    problem.extend_from_slice(&genesis_hash);
    problem.extend_from_slice(&be(t0 + 1));
    problem.extend_from_slice(&be(t0 + 11));
    problem.extend_from_slice(&genesis_hash[..8]);
    problem.extend_from_slice(&2u32.to_be_bytes());
    for (i, tag) in [(0u64, 7u64), (1, 8)] {
        problem.extend_from_slice(&be(i));
        problem.extend_from_slice(&be(2));
        problem.extend_from_slice(&be(tag));
    }
    problem.extend_from_slice(&keccak(&be(7)));
    let problem_id = keccak(&problem);

    let header = [
        &be(t0 + 12)[..],
        &be(1),
        &genesis_hash,
        &tx_id,
        &keccak(b"state"),
        &problem_id,
        &[0x11; 32],
    ]
    .concat();
    let block = [&header[..], &1u32.to_be_bytes(), &tx_bytes, &problem].concat();

    let mut s = 0u64;
    let split: Vec<u8> = (0..4).flat_map(|_| be(splitmix(&mut s))).collect();

    let l: Vec<[u8; 32]> = (0..3u64).map(|i| keccak(&be(i))).collect();
    let root3 = node(&node(&l[0], &l[1]), &node(&l[2], &l[2]));

    // sub-problem (index 0, 1 event, tag 0) under master seed 0
    let mut seed = 0u64;
    let mut sub_state = splitmix(&mut seed);
    let events: Vec<u8> = (0..4).flat_map(|_| be(splitmix(&mut sub_state))).collect();

    let accepted = keccak(b"accepted");
    let c0 = keccak(&[&[0x11u8; 32][..], &accepted, &be(1)].concat());
    let c1 = keccak(&[&[0x22u8; 32][..], &accepted, &be(2)].concat());
    let h = keccak(&[&be(7)[..], &accepted, &c0, &c1].concat());
    let idx = u64::from_be_bytes(h[..8].try_into().unwrap()) % 2;

    Oracle {
        vectors: vec![
            ("keccak_empty", hex::encode(keccak(b""))),
            ("keccak_abc", hex::encode(keccak(b"abc"))),
            ("splitmix_seed0_first4", hex::encode(split)),
            ("encode_u64_1", "0000000000000001".into()),
            ("encode_bytes_abc", "00000003616263".into()),
            ("ra_public_key", hex::encode(ra_pk)),
            ("transaction_encoding", hex::encode(&tx_bytes)),
            ("transaction_id", hex::encode(tx_id)),
            ("genesis_header_encoding", hex::encode(&genesis_header)),
            ("genesis_hash", hex::encode(genesis_hash)),
            ("problem_id", hex::encode(problem_id)),
            ("block_encoding", hex::encode(&block)),
            ("block_hash", hex::encode(keccak(&header))),
            ("merkle_root_3", hex::encode(root3)),
            ("mock_sub_digest", hex::encode(keccak(&events))),
            ("winner_commit_0", hex::encode(c0)),
            ("winner_commit_1", hex::encode(c1)),
            ("winner_index", hex::encode(be(idx))),
        ],
    }
}

#[test]
fn oracle_agrees_with_frozen_vectors() {
    let frozen = goldens::frozen();
    let o = oracle();
    assert_eq!(frozen.len(), o.vectors.len(), "vector count");
    for ((fname, fhex), (oname, ohex)) in frozen.iter().zip(&o.vectors) {
        assert_eq!(fname, oname);
        assert_eq!(fhex, ohex, "{fname}");
    }
}

#[test]
fn library_agrees_with_frozen_vectors() {
    let checks = goldens::check();
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c.passed(), "{} expected {} got {:?}", c.name, c.expected, c.actual);
    }
}

#[test]
fn known_answer_vectors() {
    let f = goldens::frozen();
    let get = |n: &str| f.iter().find(|(k, _)| *k == n).unwrap().1;
    assert_eq!(get("keccak_empty"), "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
    assert!(get("splitmix_seed0_first4").starts_with("e220a8397b1dcdaf6e789e6aa1b965f4"));
}

/// Prints the oracle's vectors in file format; run with `--ignored --nocapture`
/// to regenerate `goldens/vectors.txt`.
#[test]
#[ignore]
fn print_oracle_vectors() {
    for (n, h) in oracle().vectors {
        println!("{n} {h}");
    }
}
