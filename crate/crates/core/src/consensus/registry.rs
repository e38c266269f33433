use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::codec::{canonical_bytes, CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::{Address, KeyPair, PublicKey, Signature};
use crate::hash::{keccak256, Digest};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistrationError {
    #[error("identity already registered to {0:?}")]
    IdentityTaken(Address),
    #[error("address already registered")]
    AddressTaken,
}

/// RA-signed notice that `address` joined under the identity with digest
/// `identity_digest`. The raw identity token stays with the RA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationAnnouncement {
    pub address: Address,
    pub identity_digest: Digest,
    pub signature: Signature,
}

impl RegistrationAnnouncement {
    fn message(address: &Address, identity_digest: &Digest) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.put_fixed(b"register");
        enc.put(address);
        enc.put(identity_digest);
        enc.finish().expect("fixed size")
    }

    pub fn verify(&self, ra: &PublicKey) -> bool {
        ra.verify(&Self::message(&self.address, &self.identity_digest), &self.signature)
    }
}

/// One address per real-world identity token.
#[derive(Debug, Clone, Default)]
pub struct IdentityRegistry {
    by_identity: BTreeMap<Vec<u8>, Address>,
    by_address: BTreeMap<Address, Digest>,
    banned: BTreeSet<Address>,
}

impl IdentityRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register `address` under `identity`. A second address for the same
    /// identity is rejected; nothing is replaced.
    pub fn register(
        &mut self,
        ra: &KeyPair,
        identity: &[u8],
        address: Address,
    ) -> Result<RegistrationAnnouncement, RegistrationError> {
        if let Some(existing) = self.by_identity.get(identity) {
            return Err(RegistrationError::IdentityTaken(*existing));
        }
        if self.by_address.contains_key(&address) {
            return Err(RegistrationError::AddressTaken);
        }
        let identity_digest = keccak256(&canonical_bytes(identity));
        self.by_identity.insert(identity.to_vec(), address);
        self.by_address.insert(address, identity_digest);
        let signature = ra.sign(&RegistrationAnnouncement::message(&address, &identity_digest));
        Ok(RegistrationAnnouncement {
            address,
            identity_digest,
            signature,
        })
    }

    /// Registered and not banned.
    pub fn is_registered(&self, address: &Address) -> bool {
        self.by_address.contains_key(address) && !self.banned.contains(address)
    }

    pub fn ban(&mut self, address: Address) {
        if self.by_address.contains_key(&address) {
            self.banned.insert(address);
        }
    }

    pub fn is_banned(&self, address: &Address) -> bool {
        self.banned.contains(address)
    }

    pub fn len(&self) -> usize {
        self.by_address.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_address.is_empty()
    }

    pub fn addresses(&self) -> impl Iterator<Item = &Address> {
        self.by_address.keys()
    }
}

impl Encode for RegistrationAnnouncement {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.address);
        enc.put(&self.identity_digest);
        enc.put(&self.signature);
    }
}

impl Decode for RegistrationAnnouncement {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            address: dec.get()?,
            identity_digest: dec.get()?,
            signature: dec.get()?,
        })
    }
}
