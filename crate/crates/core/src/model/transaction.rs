use serde::{Deserialize, Serialize};

use crate::codec::{canonical_bytes, CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::{Address, KeyPair, Signature};
use crate::hash::{keccak256, Digest};

use super::token::TokenUnits;

/// A signed token transfer. The id covers every field except the signature,
/// and the signature is made over the id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub sender: Address,
    pub receiver: Address,
    pub amount: TokenUnits,
    pub fee: TokenUnits,
    pub nonce: u64,
    pub signature: Signature,
}

struct TxPayload<'a>(&'a Transaction);

impl Encode for TxPayload<'_> {
    fn encode(&self, enc: &mut Encoder) {
        let tx = self.0;
        enc.put(&tx.sender);
        enc.put(&tx.receiver);
        enc.put(&tx.amount);
        enc.put(&tx.fee);
        enc.put_u64(tx.nonce);
    }
}

impl Transaction {
    pub fn new_signed(key: &KeyPair, receiver: Address, amount: TokenUnits, fee: TokenUnits, nonce: u64) -> Self {
        let mut tx = Self {
            sender: key.public(),
            receiver,
            amount,
            fee,
            nonce,
            signature: Signature([0; 64]),
        };
        tx.signature = key.sign(tx.id().as_bytes());
        tx
    }

    pub fn id(&self) -> Digest {
        keccak256(&canonical_bytes(&TxPayload(self)))
    }

    pub fn signature_valid(&self) -> bool {
        self.sender.verify(self.id().as_bytes(), &self.signature)
    }

    /// amount + fee, `None` on overflow.
    pub fn total_debit(&self) -> Option<TokenUnits> {
        self.amount.checked_add(self.fee)
    }
}

impl Encode for Transaction {
    fn encode(&self, enc: &mut Encoder) {
        TxPayload(self).encode(enc);
        enc.put(&self.signature);
    }
}

impl Decode for Transaction {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            sender: dec.get()?,
            receiver: dec.get()?,
            amount: dec.get()?,
            fee: dec.get()?,
            nonce: dec.get_u64()?,
            signature: dec.get()?,
        })
    }
}

/// Per-address state: balance and count of sent transactions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Wallet {
    pub balance: TokenUnits,
    pub nonce: u64,
}

impl Encode for Wallet {
    fn encode(&self, enc: &mut Encoder) {
        enc.put(&self.balance);
        enc.put_u64(self.nonce);
    }
}

impl Decode for Wallet {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            balance: dec.get()?,
            nonce: dec.get_u64()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::PublicKey;
    use crate::codec::decode_canonical;

    #[test]
    fn id_ignores_signature() {
        let k = KeyPair::from_seed([4; 32]);
        let tx = Transaction::new_signed(&k, Address::default(), TokenUnits(5), TokenUnits(1), 1);
        let mut resigned = tx.clone();
        resigned.signature = Signature([9; 64]);
        assert_eq!(tx.id(), resigned.id());
        assert!(tx.signature_valid());
        assert!(!resigned.signature_valid());
    }

    #[test]
    fn changing_any_field_changes_id() {
        let k = KeyPair::from_seed([4; 32]);
        let tx = Transaction::new_signed(&k, Address::default(), TokenUnits(5), TokenUnits(1), 1);
        let mut t = tx.clone();
        t.amount = TokenUnits(6);
        assert_ne!(t.id(), tx.id());
        let mut t = tx.clone();
        t.nonce = 2;
        assert_ne!(t.id(), tx.id());
    }

    #[test]
    fn transaction_encoding_round_trip() {
        let k = KeyPair::from_seed([4; 32]);
        let tx = Transaction::new_signed(&k, PublicKey([7; 32]), TokenUnits(5), TokenUnits(1), 3);
        let bytes = canonical_bytes(&tx);
        assert_eq!(bytes.len(), 32 + 32 + 8 + 8 + 8 + 64);
        assert_eq!(decode_canonical::<Transaction>(&bytes).unwrap(), tx);
    }
}
