use std::collections::BTreeMap;
use std::path::Path;

use crate::codec::{canonical_bytes, decode_canonical, Encoder};
use crate::crypto::{Address, PublicKey};
use crate::hash::Digest;
use crate::model::{TokenUnits, Wallet};
use crate::state::WorldState;

use super::kv::{FileKv, KvStore, MemoryKv, WriteBatch};
use super::StoreError;

const STATE: &str = "state";
const META: &str = "meta";
const LATEST: &[u8] = b"latest";
const MINTED: &[u8] = b"minted";
const BURNED: &[u8] = b"burned";

/// Persistent wallet table plus the hash of the block it reflects.
pub struct StateStore {
    kv: Box<dyn KvStore>,
    world: WorldState,
    latest: Option<Digest>,
}

impl std::fmt::Debug for StateStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateStore")
            .field("latest", &self.latest)
            .field("accounts", &self.world.len())
            .finish_non_exhaustive()
    }
}

impl StateStore {
    pub fn open_memory() -> Self {
        Self {
            kv: Box::new(MemoryKv::new()),
            world: WorldState::new(),
            latest: None,
        }
    }

    pub fn open_file(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let kv = FileKv::open(path)?;
        let corrupt = |e: crate::codec::CodecError| StoreError::Corrupt(e.to_string());
        let mut accounts = BTreeMap::new();
        for (k, v) in kv.scan(STATE) {
            let addr = PublicKey(
                k.as_slice()
                    .try_into()
                    .map_err(|_| StoreError::Corrupt("address key length".into()))?,
            );
            accounts.insert(addr, decode_canonical::<Wallet>(&v).map_err(corrupt)?);
        }
        let read_units = |key: &[u8]| -> Result<TokenUnits, StoreError> {
            kv.get(META, key)
                .map(|b| decode_canonical::<TokenUnits>(&b).map_err(corrupt))
                .transpose()
                .map(Option::unwrap_or_default)
        };
        let minted = read_units(MINTED)?;
        let burned = read_units(BURNED)?;
        let latest = kv
            .get(META, LATEST)
            .map(|b| decode_canonical::<Digest>(&b).map_err(corrupt))
            .transpose()?;
        Ok(Self {
            world: WorldState::from_parts(accounts, minted, burned),
            kv: Box::new(kv),
            latest,
        })
    }

    pub(crate) fn from_world(world: WorldState, latest: Digest) -> Self {
        let mut s = Self::open_memory();
        s.commit(world, latest).expect("memory commit");
        s
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn latest(&self) -> Option<Digest> {
        self.latest
    }

    pub fn wallet(&self, address: &Address) -> Wallet {
        self.world.wallet(address)
    }

    pub fn merkle_root(&self) -> Digest {
        self.world.merkle_root()
    }

    /// Canonical bytes of (latest pointer, state), for byte-equality checks.
    pub fn snapshot_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.put(&self.latest);
        enc.put(&self.world);
        enc.finish().expect("state snapshot fits")
    }

    /// Replace the state with `next`, which reflects block `latest`.
    pub(crate) fn commit(&mut self, next: WorldState, latest: Digest) -> Result<(), StoreError> {
        let mut batch = WriteBatch::new();
        for (addr, wallet) in next.accounts() {
            if self.world.get(addr) != Some(wallet) {
                batch.put(STATE, addr.0.to_vec(), canonical_bytes(wallet));
            }
        }
        for (addr, _) in self.world.accounts() {
            if next.get(addr).is_none() {
                batch.delete(STATE, addr.0.to_vec());
            }
        }
        batch.put(META, LATEST.to_vec(), latest.0.to_vec());
        batch.put(META, MINTED.to_vec(), canonical_bytes(&next.minted()));
        batch.put(META, BURNED.to_vec(), canonical_bytes(&next.burned()));
        self.kv.commit(batch)?;
        self.world = next;
        self.latest = Some(latest);
        Ok(())
    }
}
