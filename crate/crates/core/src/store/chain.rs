use std::path::Path;

use crate::codec::{canonical_bytes, decode_canonical, CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::Signature;
use crate::hash::Digest;
use crate::model::{Block, BlockHeader};

use super::kv::{FileKv, KvStore, MemoryKv, WriteBatch};
use super::StoreError;

const CHAIN: &str = "chain";
const META: &str = "meta";
const SEAL: &str = "seal";
const LATEST: &[u8] = b"latest";
const MODE: &[u8] = b"mode";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreMode {
    Full,
    Light,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoredBlock {
    Full(Block),
    HeaderOnly(BlockHeader),
}

impl StoredBlock {
    pub fn header(&self) -> &BlockHeader {
        match self {
            StoredBlock::Full(b) => &b.header,
            StoredBlock::HeaderOnly(h) => h,
        }
    }

    pub fn hash(&self) -> Digest {
        self.header().hash()
    }

    pub fn into_full(self) -> Option<Block> {
        match self {
            StoredBlock::Full(b) => Some(b),
            StoredBlock::HeaderOnly(_) => None,
        }
    }
}

impl Encode for StoredBlock {
    fn encode(&self, enc: &mut Encoder) {
        match self {
            StoredBlock::Full(b) => {
                enc.put_u8(0);
                enc.put(b);
            }
            StoredBlock::HeaderOnly(h) => {
                enc.put_u8(1);
                enc.put(h);
            }
        }
    }
}

impl Decode for StoredBlock {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        match dec.get_u8()? {
            0 => Ok(StoredBlock::Full(dec.get()?)),
            1 => Ok(StoredBlock::HeaderOnly(dec.get()?)),
            tag => Err(CodecError::InvalidTag { what: "stored block", tag }),
        }
    }
}

pub struct ChainStore {
    kv: Box<dyn KvStore>,
    mode: StoreMode,
}

impl std::fmt::Debug for ChainStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainStore").field("mode", &self.mode).finish_non_exhaustive()
    }
}

fn corrupt(e: CodecError) -> StoreError {
    StoreError::Corrupt(e.to_string())
}

impl ChainStore {
    pub fn open_memory(mode: StoreMode) -> Self {
        Self {
            kv: Box::new(MemoryKv::new()),
            mode,
        }
    }

    /// Open or create a file-backed store. An existing file must have been
    /// created with the same mode.
    pub fn open_file(path: impl AsRef<Path>, mode: StoreMode) -> Result<Self, StoreError> {
        let kv = FileKv::open(path)?;
        match kv.get(META, MODE) {
            Some(m) if m != mode_tag(mode) => Err(StoreError::ModeMismatch),
            _ => Ok(Self { kv: Box::new(kv), mode }),
        }
    }

    /// Open an existing file-backed store in whatever mode it was created.
    pub fn open_existing(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let kv = FileKv::open(path)?;
        let mode = match kv.get(META, MODE).as_deref() {
            Some(b"full") => StoreMode::Full,
            Some(b"light") => StoreMode::Light,
            _ => return Err(StoreError::Corrupt("missing store mode".into())),
        };
        Ok(Self { kv: Box::new(kv), mode })
    }

    pub fn mode(&self) -> StoreMode {
        self.mode
    }

    pub fn latest(&self) -> Result<Option<Digest>, StoreError> {
        self.kv
            .get(META, LATEST)
            .map(|b| decode_canonical::<Digest>(&b).map_err(corrupt))
            .transpose()
    }

    pub fn contains(&self, hash: &Digest) -> bool {
        self.kv.get(CHAIN, &hash.0).is_some()
    }

    pub fn get(&self, hash: &Digest) -> Result<Option<StoredBlock>, StoreError> {
        self.kv
            .get(CHAIN, &hash.0)
            .map(|b| decode_canonical::<StoredBlock>(&b).map_err(corrupt))
            .transpose()
    }

    pub fn header(&self, hash: &Digest) -> Result<Option<BlockHeader>, StoreError> {
        Ok(self.get(hash)?.map(|s| s.header().clone()))
    }

    pub fn full_block(&self, hash: &Digest) -> Result<Option<Block>, StoreError> {
        Ok(self.get(hash)?.and_then(StoredBlock::into_full))
    }

    pub fn tip(&self) -> Result<Option<BlockHeader>, StoreError> {
        match self.latest()? {
            Some(h) => self.header(&h),
            None => Ok(None),
        }
    }

    /// Store `block` (or its header, in light mode) without any validation.
    /// Used by `append_block`; also the way to plant corrupt history in tests.
    pub fn put_block(&mut self, block: &Block, set_latest: bool) -> Result<(), StoreError> {
        let stored = match self.mode {
            StoreMode::Full => StoredBlock::Full(block.clone()),
            StoreMode::Light => StoredBlock::HeaderOnly(block.header.clone()),
        };
        self.put(&stored, set_latest)
    }

    fn put(&mut self, stored: &StoredBlock, set_latest: bool) -> Result<(), StoreError> {
        let hash = stored.hash();
        let mut batch = WriteBatch::new();
        batch.put(CHAIN, hash.0.to_vec(), canonical_bytes(stored));
        batch.put(META, MODE.to_vec(), mode_tag(self.mode));
        if set_latest {
            batch.put(META, LATEST.to_vec(), hash.0.to_vec());
        }
        self.kv.commit(batch)
    }

    /// Light-node append: the header must extend the tip (or be genesis on an
    /// empty store).
    pub fn append_header(&mut self, header: &BlockHeader) -> Result<(), StoreError> {
        match self.latest()? {
            None if header.block_id != 0 => {
                return Err(StoreError::NotExtendingTip {
                    parent: header.prev_block_hash,
                })
            }
            Some(_) if header.block_id == 0 => return Err(StoreError::GenesisExists),
            Some(tip) if tip != header.prev_block_hash => {
                return Err(StoreError::NotExtendingTip {
                    parent: header.prev_block_hash,
                })
            }
            _ => {}
        }
        self.put(&StoredBlock::HeaderOnly(header.clone()), true)
    }

    /// Keep the RA signature over `hash` so the block can be served to peers
    /// with proof of origin.
    pub fn put_seal(&mut self, hash: &Digest, signature: &Signature) -> Result<(), StoreError> {
        let mut batch = WriteBatch::new();
        batch.put(SEAL, hash.0.to_vec(), signature.0.to_vec());
        self.kv.commit(batch)
    }

    pub fn seal(&self, hash: &Digest) -> Result<Option<Signature>, StoreError> {
        self.kv
            .get(SEAL, &hash.0)
            .map(|b| decode_canonical::<Signature>(&b).map_err(corrupt))
            .transpose()
    }

    /// Delete a stored entry. Maintenance only; breaks the chain if interior.
    pub fn remove(&mut self, hash: &Digest) -> Result<(), StoreError> {
        let mut batch = WriteBatch::new();
        batch.delete(CHAIN, hash.0.to_vec());
        self.kv.commit(batch)
    }

    /// Headers from the tip back to genesis.
    pub fn traverse(&self) -> Result<Vec<BlockHeader>, StoreError> {
        match self.latest()? {
            Some(tip) => self.traverse_from(&tip),
            None => Ok(Vec::new()),
        }
    }

    /// Headers from `hash` back to genesis, following prev-hash links.
    pub fn traverse_from(&self, hash: &Digest) -> Result<Vec<BlockHeader>, StoreError> {
        let mut out: Vec<BlockHeader> = Vec::new();
        let mut cursor = *hash;
        loop {
            let header = match self.header(&cursor)? {
                Some(h) => h,
                None => {
                    return Err(match out.last() {
                        Some(child) => StoreError::BrokenLink {
                            missing: cursor,
                            child_block_id: child.block_id,
                        },
                        None => StoreError::UnknownBlock(cursor),
                    })
                }
            };
            if let Some(child) = out.last() {
                if header.block_id + 1 != child.block_id {
                    return Err(StoreError::Corrupt(format!(
                        "block {} links to parent with id {}",
                        child.block_id, header.block_id
                    )));
                }
            }
            let done = header.block_id == 0;
            cursor = header.prev_block_hash;
            out.push(header);
            if done {
                return Ok(out);
            }
        }
    }

    /// Block hashes from genesis to the tip.
    pub fn hash_list(&self) -> Result<Vec<Digest>, StoreError> {
        Ok(self.traverse()?.iter().rev().map(BlockHeader::hash).collect())
    }
}

fn mode_tag(mode: StoreMode) -> Vec<u8> {
    match mode {
        StoreMode::Full => b"full".to_vec(),
        StoreMode::Light => b"light".to_vec(),
    }
}
