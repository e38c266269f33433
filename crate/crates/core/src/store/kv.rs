//! Ordered keyed byte storage with named buckets and atomic batch commits.
//!
//! File layout (one file per store): the 8-byte magic `POUWKV01`, a 4-byte
//! big-endian record count, then records of `(bucket, key, value)`, each a
//! 4-byte big-endian length followed by the bytes. Records are sorted by
//! bucket then key, so equal contents give equal files. A commit rewrites a
//! temporary file and renames it over the old one.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::codec::{Decoder, Encoder};

use super::StoreError;

const MAGIC: &[u8; 8] = b"POUWKV01";

#[derive(Debug, Clone, Default)]
pub struct WriteBatch {
    ops: Vec<(String, Vec<u8>, Option<Vec<u8>>)>,
}

impl WriteBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, bucket: &str, key: impl Into<Vec<u8>>, value: impl Into<Vec<u8>>) {
        self.ops.push((bucket.to_owned(), key.into(), Some(value.into())));
    }

    pub fn delete(&mut self, bucket: &str, key: impl Into<Vec<u8>>) {
        self.ops.push((bucket.to_owned(), key.into(), None));
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

pub trait KvStore: Send {
    fn get(&self, bucket: &str, key: &[u8]) -> Option<Vec<u8>>;
    fn scan(&self, bucket: &str) -> Vec<(Vec<u8>, Vec<u8>)>;
    /// Apply every operation in `batch` or none of them.
    fn commit(&mut self, batch: WriteBatch) -> Result<(), StoreError>;
}

type Buckets = BTreeMap<String, BTreeMap<Vec<u8>, Vec<u8>>>;

fn apply(buckets: &mut Buckets, batch: WriteBatch) {
    for (bucket, key, value) in batch.ops {
        let b = buckets.entry(bucket).or_default();
        match value {
            Some(v) => {
                b.insert(key, v);
            }
            None => {
                b.remove(&key);
            }
        }
    }
    buckets.retain(|_, b| !b.is_empty());
}

#[derive(Debug, Default, Clone)]
pub struct MemoryKv {
    buckets: Buckets,
}

impl MemoryKv {
    pub fn new() -> Self {
        Self::default()
    }
}

impl KvStore for MemoryKv {
    fn get(&self, bucket: &str, key: &[u8]) -> Option<Vec<u8>> {
        self.buckets.get(bucket)?.get(key).cloned()
    }

    fn scan(&self, bucket: &str) -> Vec<(Vec<u8>, Vec<u8>)> {
        self.buckets
            .get(bucket)
            .map(|b| b.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            .unwrap_or_default()
    }

    fn commit(&mut self, batch: WriteBatch) -> Result<(), StoreError> {
        apply(&mut self.buckets, batch);
        Ok(())
    }
}

/// File-backed store; the whole file is held in memory.
#[derive(Debug)]
pub struct FileKv {
    path: PathBuf,
    mem: MemoryKv,
}

impl FileKv {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let buckets = match fs::read(&path) {
            Ok(bytes) => decode_file(&bytes)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Buckets::new(),
            Err(e) => return Err(StoreError::Io(e.to_string())),
        };
        Ok(Self {
            path,
            mem: MemoryKv { buckets },
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn encode_file(buckets: &Buckets) -> Result<Vec<u8>, StoreError> {
    let mut enc = Encoder::new();
    enc.put_fixed(MAGIC);
    let count: usize = buckets.values().map(BTreeMap::len).sum();
    let count = u32::try_from(count).map_err(|_| StoreError::Corrupt("too many records".into()))?;
    enc.put_fixed(&count.to_be_bytes());
    for (bucket, entries) in buckets {
        for (k, v) in entries {
            enc.put_bytes(bucket.as_bytes());
            enc.put_bytes(k);
            enc.put_bytes(v);
        }
    }
    enc.finish().map_err(|e| StoreError::Corrupt(e.to_string()))
}

fn decode_file(bytes: &[u8]) -> Result<Buckets, StoreError> {
    let corrupt = |e: crate::codec::CodecError| StoreError::Corrupt(e.to_string());
    let mut dec = Decoder::new(bytes);
    if &dec.get_fixed::<8>().map_err(corrupt)? != MAGIC {
        return Err(StoreError::Corrupt("bad magic".into()));
    }
    let count = u32::from_be_bytes(dec.get_fixed().map_err(corrupt)?);
    let mut buckets = Buckets::new();
    for _ in 0..count {
        let bucket = String::from_utf8(dec.get_bytes().map_err(corrupt)?)
            .map_err(|_| StoreError::Corrupt("bucket name not utf-8".into()))?;
        let key = dec.get_bytes().map_err(corrupt)?;
        let value = dec.get_bytes().map_err(corrupt)?;
        buckets.entry(bucket).or_default().insert(key, value);
    }
    dec.finish().map_err(corrupt)?;
    Ok(buckets)
}

impl KvStore for FileKv {
    fn get(&self, bucket: &str, key: &[u8]) -> Option<Vec<u8>> {
        self.mem.get(bucket, key)
    }

    fn scan(&self, bucket: &str) -> Vec<(Vec<u8>, Vec<u8>)> {
        self.mem.scan(bucket)
    }

    fn commit(&mut self, batch: WriteBatch) -> Result<(), StoreError> {
        let mut next = self.mem.buckets.clone();
        apply(&mut next, batch);
        let bytes = encode_file(&next)?;
        let tmp = self.path.with_extension("tmp");
        let io_err = |e: io::Error| StoreError::Io(e.to_string());
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        fs::write(&tmp, &bytes).map_err(io_err)?;
        fs::rename(&tmp, &self.path).map_err(io_err)?;
        self.mem.buckets = next;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_is_applied_in_order() {
        let mut kv = MemoryKv::new();
        let mut b = WriteBatch::new();
        b.put("a", b"k".to_vec(), b"1".to_vec());
        b.put("a", b"k".to_vec(), b"2".to_vec());
        b.put("b", b"x".to_vec(), b"y".to_vec());
        b.delete("b", b"x".to_vec());
        kv.commit(b).unwrap();
        assert_eq!(kv.get("a", b"k"), Some(b"2".to_vec()));
        assert_eq!(kv.get("b", b"x"), None);
        assert!(kv.scan("b").is_empty());
    }

    #[test]
    fn file_store_persists_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.db");
        {
            let mut kv = FileKv::open(&path).unwrap();
            let mut b = WriteBatch::new();
            b.put("z", b"2".to_vec(), b"two".to_vec());
            b.put("a", b"1".to_vec(), b"one".to_vec());
            kv.commit(b).unwrap();
        }
        let kv = FileKv::open(&path).unwrap();
        assert_eq!(kv.get("a", b"1"), Some(b"one".to_vec()));
        assert_eq!(kv.scan("z"), vec![(b"2".to_vec(), b"two".to_vec())]);

        let other = dir.path().join("t.db");
        let mut kv2 = FileKv::open(&other).unwrap();
        let mut b = WriteBatch::new();
        b.put("a", b"1".to_vec(), b"one".to_vec());
        b.put("z", b"2".to_vec(), b"two".to_vec());
        kv2.commit(b).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&other).unwrap());
    }

    #[test]
    fn corrupt_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.db");
        fs::write(&path, b"NOTMAGIC").unwrap();
        assert!(matches!(FileKv::open(&path), Err(StoreError::Corrupt(_))));
    }
}
