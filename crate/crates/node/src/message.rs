//! Gossip topics, signed envelopes and the payloads they carry.
//!
//! Wire format of an envelope, all fields in canonical encoding:
//!
//! | field     | bytes | notes                                   |
//! |-----------|-------|-----------------------------------------|
//! | topic     | 1     | see [`Topic`] for tag values            |
//! | sender    | 32    | Ed25519 public key                      |
//! | payload   | 4 + n | big-endian length, then encoded message |
//! | signature | 64    | sender's signature over `topic ‖ payload` |

use pouw_core::codec::{canonical_bytes, decode_canonical, CodecError, Decode, Decoder, Encode, Encoder};
use pouw_core::consensus::{RegistrationAnnouncement, WinnerProof};
use pouw_core::merkle::MerkleProof;
use pouw_core::model::{Commitment, SignedBlock, SignedProblem, Solution, Transaction, Wallet};
use pouw_core::store::StoredBlock;
use pouw_core::{Digest, KeyPair, PublicKey, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Topic {
    ChainDb,
    Transactions,
    BlockProblem,
    BlockCreation,
    MinerCommitment,
    Direct,
}

impl Topic {
    pub const ALL: [Topic; 6] = [
        Topic::ChainDb,
        Topic::Transactions,
        Topic::BlockProblem,
        Topic::BlockCreation,
        Topic::MinerCommitment,
        Topic::Direct,
    ];

    pub fn tag(self) -> u8 {
        match self {
            Topic::ChainDb => 1,
            Topic::Transactions => 2,
            Topic::BlockProblem => 3,
            Topic::BlockCreation => 4,
            Topic::MinerCommitment => 5,
            Topic::Direct => 6,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Topic> {
        Topic::ALL.into_iter().find(|t| t.tag() == tag)
    }

    /// Topics whose envelopes are only accepted from the RA.
    pub fn ra_only(self) -> bool {
        matches!(self, Topic::BlockProblem | Topic::BlockCreation)
    }

    pub fn name(self) -> &'static str {
        match self {
            Topic::ChainDb => "chain_db",
            Topic::Transactions => "transactions",
            Topic::BlockProblem => "block_problem",
            Topic::BlockCreation => "block_creation",
            Topic::MinerCommitment => "miner_commitment",
            Topic::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub topic: Topic,
    pub sender: PublicKey,
    pub payload: Vec<u8>,
    pub signature: Signature,
}

fn signed_bytes(topic: Topic, payload: &[u8]) -> Vec<u8> {
    let mut m = Vec::with_capacity(payload.len() + 1);
    m.push(topic.tag());
    m.extend_from_slice(payload);
    m
}

impl Envelope {
    pub fn seal(key: &KeyPair, topic: Topic, message: &Message) -> Self {
        let payload = canonical_bytes(message);
        let signature = key.sign(&signed_bytes(topic, &payload));
        Self {
            topic,
            sender: key.public(),
            payload,
            signature,
        }
    }

    pub fn verify(&self) -> bool {
        self.sender.verify(&signed_bytes(self.topic, &self.payload), &self.signature)
    }

    pub fn open(&self) -> Result<Message, CodecError> {
        decode_canonical(&self.payload)
    }

    pub fn to_wire(&self) -> Vec<u8> {
        canonical_bytes(self)
    }

    pub fn from_wire(bytes: &[u8]) -> Result<Self, CodecError> {
        decode_canonical(bytes)
    }

    pub fn wire_len(&self) -> usize {
        1 + 32 + 4 + self.payload.len() + 64
    }
}

impl Encode for Envelope {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_u8(self.topic.tag());
        enc.put(&self.sender);
        enc.put_bytes(&self.payload);
        enc.put(&self.signature);
    }
}

impl Decode for Envelope {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let tag = dec.get_u8()?;
        let topic = Topic::from_tag(tag).ok_or(CodecError::InvalidTag { what: "topic", tag })?;
        Ok(Self {
            topic,
            sender: dec.get()?,
            payload: dec.get_bytes()?,
            signature: dec.get()?,
        })
    }
}

/// A block together with the data needed to recompute its winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAnnouncement {
    pub block: SignedBlock,
    pub proof: WinnerProof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyncMessage {
    RequestHashList,
    HashList(Vec<Digest>),
    RequestBlock {
        hash: Digest,
        headers_only: bool,
    },
    BlockData {
        requested: Digest,
        block: StoredBlock,
        seal: Option<Signature>,
    },
    RequestTxProof {
        tx_id: Digest,
        block_hash: Digest,
    },
    TxProof {
        block_hash: Digest,
        tx: Transaction,
        proof: MerkleProof,
    },
    RequestBalance {
        address: PublicKey,
        block_hash: Digest,
    },
    BalanceProof {
        block_hash: Digest,
        address: PublicKey,
        wallet: Wallet,
        proof: MerkleProof,
    },
    NotFound(Digest),
    SolutionUpload(Solution),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Transaction(Transaction),
    Problem(SignedProblem),
    Registration(RegistrationAnnouncement),
    Block(BlockAnnouncement),
    Commitment(Commitment),
    Sync(SyncMessage),
}

impl Message {
    /// Whether this message may travel on `topic`.
    pub fn fits(&self, topic: Topic) -> bool {
        matches!(
            (self, topic),
            (Message::Transaction(_), Topic::Transactions)
                | (Message::Problem(_) | Message::Registration(_), Topic::BlockProblem)
                | (Message::Block(_), Topic::BlockCreation)
                | (Message::Commitment(_), Topic::MinerCommitment)
                | (Message::Sync(SyncMessage::RequestHashList), Topic::ChainDb)
                | (Message::Sync(_), Topic::Direct)
        )
    }
}

impl Encode for BlockAnnouncement {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.block);
        enc.put(&self.proof);
    }
}

impl Decode for BlockAnnouncement {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            block: dec.get()?,
            proof: dec.get()?,
        })
    }
}

impl Encode for SyncMessage {
    fn encode(&self, enc: &mut Encoder) {
        match self {
            SyncMessage::RequestHashList => enc.put_u8(0),
            SyncMessage::HashList(l) => {
                enc.put_u8(1);
                enc.put_list(l);
            }
            SyncMessage::RequestBlock { hash, headers_only } => {
                enc.put_u8(2);
                enc.put(hash);
                enc.put_bool(*headers_only);
            }
            SyncMessage::BlockData { requested, block, seal } => {
                enc.put_u8(3);
                enc.put(requested);
                enc.put(block);
                enc.put(seal);
            }
            SyncMessage::RequestTxProof { tx_id, block_hash } => {
                enc.put_u8(4);
                enc.put(tx_id);
                enc.put(block_hash);
            }
            SyncMessage::TxProof { block_hash, tx, proof } => {
                enc.put_u8(5);
                enc.put(block_hash);
                enc.put(tx);
                enc.put(proof);
            }
            SyncMessage::RequestBalance { address, block_hash } => {
                enc.put_u8(6);
                enc.put(address);
                enc.put(block_hash);
            }
            SyncMessage::BalanceProof {
                block_hash,
                address,
                wallet,
                proof,
            } => {
                enc.put_u8(7);
                enc.put(block_hash);
                enc.put(address);
                enc.put(wallet);
                enc.put(proof);
            }
            SyncMessage::NotFound(h) => {
                enc.put_u8(8);
                enc.put(h);
            }
            SyncMessage::SolutionUpload(s) => {
                enc.put_u8(9);
                enc.put(s);
            }
        }
    }
}

impl Decode for SyncMessage {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(match dec.get_u8()? {
            0 => SyncMessage::RequestHashList,
            1 => SyncMessage::HashList(dec.get_list()?),
            2 => SyncMessage::RequestBlock {
                hash: dec.get()?,
                headers_only: dec.get_bool()?,
            },
            3 => SyncMessage::BlockData {
                requested: dec.get()?,
                block: dec.get()?,
                seal: dec.get()?,
            },
            4 => SyncMessage::RequestTxProof {
                tx_id: dec.get()?,
                block_hash: dec.get()?,
            },
            5 => SyncMessage::TxProof {
                block_hash: dec.get()?,
                tx: dec.get()?,
                proof: dec.get()?,
            },
            6 => SyncMessage::RequestBalance {
                address: dec.get()?,
                block_hash: dec.get()?,
            },
            7 => SyncMessage::BalanceProof {
                block_hash: dec.get()?,
                address: dec.get()?,
                wallet: dec.get()?,
                proof: dec.get()?,
            },
            8 => SyncMessage::NotFound(dec.get()?),
            9 => SyncMessage::SolutionUpload(dec.get()?),
            tag => return Err(CodecError::InvalidTag { what: "sync message", tag }),
        })
    }
}

impl Encode for Message {
    fn encode(&self, enc: &mut Encoder) {
        match self {
            Message::Transaction(t) => {
                enc.put_u8(0);
                enc.put(t);
            }
            Message::Problem(p) => {
                enc.put_u8(1);
                enc.put(p);
            }
            Message::Registration(r) => {
                enc.put_u8(2);
                enc.put(r);
            }
            Message::Block(b) => {
                enc.put_u8(3);
                enc.put(b);
            }
            Message::Commitment(c) => {
                enc.put_u8(4);
                enc.put(c);
            }
            Message::Sync(s) => {
                enc.put_u8(5);
                enc.put(s);
            }
        }
    }
}

impl Decode for Message {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(match dec.get_u8()? {
            0 => Message::Transaction(dec.get()?),
            1 => Message::Problem(dec.get()?),
            2 => Message::Registration(dec.get()?),
            3 => Message::Block(dec.get()?),
            4 => Message::Commitment(dec.get()?),
            5 => Message::Sync(dec.get()?),
            tag => return Err(CodecError::InvalidTag { what: "message", tag }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pouw_core::model::TokenUnits;

    #[test]
    fn envelope_layout() {
        let k = KeyPair::from_seed([3; 32]);
        let env = Envelope::seal(&k, Topic::ChainDb, &Message::Sync(SyncMessage::RequestHashList));
        let wire = env.to_wire();
        assert_eq!(wire[0], 1);
        assert_eq!(&wire[1..33], &k.public().0);
        assert_eq!(&wire[33..37], &2u32.to_be_bytes());
        assert_eq!(&wire[37..39], &[5, 0]);
        assert_eq!(wire.len(), env.wire_len());
        assert_eq!(Envelope::from_wire(&wire).unwrap(), env);
        assert!(env.verify());
    }

    #[test]
    fn signature_binds_topic() {
        let k = KeyPair::from_seed([3; 32]);
        let tx = Transaction::new_signed(&k, PublicKey([1; 32]), TokenUnits(1), TokenUnits(0), 1);
        let mut env = Envelope::seal(&k, Topic::Transactions, &Message::Transaction(tx));
        assert!(env.verify());
        env.topic = Topic::MinerCommitment;
        assert!(!env.verify());
    }

    #[test]
    fn unknown_topic_tag_rejected() {
        let k = KeyPair::from_seed([3; 32]);
        let mut wire = Envelope::seal(&k, Topic::ChainDb, &Message::Sync(SyncMessage::RequestHashList)).to_wire();
        wire[0] = 0x7f;
        assert!(Envelope::from_wire(&wire).is_err());
    }
}
