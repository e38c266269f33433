//! Account state derived from the chain, and its Merkle commitment.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::codec::{canonical_bytes, CodecError, Decode, Decoder, Encode, Encoder};
use crate::crypto::Address;
use crate::hash::{keccak256_concat, Digest};
use crate::merkle::{merkle_prove, merkle_root_or_zero, MerkleProof};
use crate::model::{block_reward, validate_transaction, Block, TokenUnits, Transaction, TxViolation, Wallet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("block {block_id}: transaction {index} invalid: {violation}")]
    InvalidTransaction {
        block_id: u64,
        index: usize,
        violation: TxViolation,
    },
    #[error("token arithmetic overflow")]
    Overflow,
}

/// Balances and nonces of every account that has appeared on chain, plus
/// running totals of minted and burned tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldState {
    accounts: BTreeMap<Address, Wallet>,
    minted: TokenUnits,
    burned: TokenUnits,
}

/// Leaf committed for one account: keccak256(address ‖ encoded wallet).
pub fn state_leaf(address: &Address, wallet: &Wallet) -> Digest {
    keccak256_concat(&[&address.0, &canonical_bytes(wallet)])
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wallet for `address`; accounts never seen have a zero wallet.
    pub fn wallet(&self, address: &Address) -> Wallet {
        self.accounts.get(address).copied().unwrap_or_default()
    }

    pub fn get(&self, address: &Address) -> Option<&Wallet> {
        self.accounts.get(address)
    }

    pub fn accounts(&self) -> impl Iterator<Item = (&Address, &Wallet)> {
        self.accounts.iter()
    }

    pub fn len(&self) -> usize {
        self.accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty()
    }

    pub fn minted(&self) -> TokenUnits {
        self.minted
    }

    pub fn burned(&self) -> TokenUnits {
        self.burned
    }

    pub fn total_balance(&self) -> TokenUnits {
        self.accounts.values().map(|w| w.balance).sum()
    }

    /// Ensure an entry exists for `address`.
    pub fn touch(&mut self, address: Address) {
        self.accounts.entry(address).or_default();
    }

    pub(crate) fn from_parts(accounts: BTreeMap<Address, Wallet>, minted: TokenUnits, burned: TokenUnits) -> Self {
        Self { accounts, minted, burned }
    }

    /// Validate and apply: debit amount + fee from the sender, bump its nonce,
    /// credit the receiver, burn the fee.
    pub fn apply_transaction(&mut self, tx: &Transaction) -> Result<(), TxViolation> {
        let sender = self.wallet(&tx.sender);
        validate_transaction(tx, &sender)?;
        let debit = tx.total_debit().expect("validated");
        let w = self.accounts.entry(tx.sender).or_default();
        w.balance = w.balance.checked_sub(debit).expect("validated");
        w.nonce += 1;
        let r = self.accounts.entry(tx.receiver).or_default();
        // receiver overflow is impossible below the supply limit
        r.balance = r.balance.checked_add(tx.amount).expect("balance overflow");
        self.burned = self.burned.checked_add(tx.fee).expect("burn overflow");
        Ok(())
    }

    pub fn credit_reward(&mut self, winner: Address, amount: TokenUnits) -> Result<(), StateError> {
        let w = self.accounts.entry(winner).or_default();
        w.balance = w.balance.checked_add(amount).ok_or(StateError::Overflow)?;
        self.minted = self.minted.checked_add(amount).ok_or(StateError::Overflow)?;
        Ok(())
    }

    /// Apply a whole block: transactions in order, then the reward to the
    /// winner. Genesis pays nothing but still records the winner's account.
    pub fn apply_block(&mut self, block: &Block) -> Result<(), StateError> {
        let block_id = block.header.block_id;
        for (index, tx) in block.transactions.iter().enumerate() {
            self.apply_transaction(tx)
                .map_err(|violation| StateError::InvalidTransaction { block_id, index, violation })?;
        }
        let reward = block_reward(block_id).unwrap_or(TokenUnits::ZERO);
        self.credit_reward(block.header.block_winner, reward)
    }

    fn leaves(&self) -> Vec<Digest> {
        self.accounts.iter().map(|(a, w)| state_leaf(a, w)).collect()
    }

    /// Merkle root over account leaves sorted by address bytes; all-zero when
    /// there are no accounts.
    pub fn merkle_root(&self) -> Digest {
        merkle_root_or_zero(&self.leaves())
    }

    /// Proof that `address` holds its current wallet, if the account exists.
    pub fn prove_account(&self, address: &Address) -> Option<(Wallet, MerkleProof)> {
        let index = self.accounts.keys().position(|a| a == address)?;
        let proof = merkle_prove(&self.leaves(), index).expect("index in range");
        Some((self.accounts[address], proof))
    }
}

impl Encode for WorldState {
    fn encode(&self, enc: &mut Encoder) {
        let entries: Vec<(Address, Wallet)> = self.accounts.iter().map(|(a, w)| (*a, *w)).collect();
        enc.put_list(&entries);
        enc.put(&self.minted);
        enc.put(&self.burned);
    }
}

impl Decode for WorldState {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let entries: Vec<(Address, Wallet)> = dec.get_list()?;
        let mut accounts = BTreeMap::new();
        let mut prev: Option<Address> = None;
        for (a, w) in entries {
            if prev.is_some_and(|p| p >= a) {
                return Err(CodecError::InvalidValue("accounts not strictly ascending"));
            }
            prev = Some(a);
            accounts.insert(a, w);
        }
        Ok(Self {
            accounts,
            minted: dec.get()?,
            burned: dec.get()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::PublicKey;
    use crate::crypto::KeyPair;
    use crate::merkle::merkle_verify;

    #[test]
    fn empty_state_root_is_zero() {
        assert_eq!(WorldState::new().merkle_root(), Digest::ZERO);
    }

    #[test]
    fn one_account_root_is_its_leaf() {
        let mut s = WorldState::new();
        let a = PublicKey([5; 32]);
        s.credit_reward(a, TokenUnits(9)).unwrap();
        assert_eq!(s.merkle_root(), state_leaf(&a, &s.wallet(&a)));
    }

    #[test]
    fn insertion_order_does_not_matter() {
        let addrs: Vec<Address> = (0..6u8).map(|i| PublicKey([i * 37; 32])).collect();
        let mut fwd = WorldState::new();
        let mut rev = WorldState::new();
        for (i, a) in addrs.iter().enumerate() {
            fwd.credit_reward(*a, TokenUnits(i as u64)).unwrap();
        }
        for (i, a) in addrs.iter().enumerate().rev() {
            rev.credit_reward(*a, TokenUnits(i as u64)).unwrap();
        }
        assert_eq!(fwd.merkle_root(), rev.merkle_root());
    }

    #[test]
    fn transfer_burns_fee_and_bumps_nonce() {
        let k = KeyPair::from_seed([1; 32]);
        let to = PublicKey([2; 32]);
        let mut s = WorldState::new();
        s.credit_reward(k.public(), TokenUnits(100)).unwrap();
        let tx = Transaction::new_signed(&k, to, TokenUnits(60), TokenUnits(5), 1);
        s.apply_transaction(&tx).unwrap();
        assert_eq!(s.wallet(&k.public()), Wallet { balance: TokenUnits(35), nonce: 1 });
        assert_eq!(s.wallet(&to), Wallet { balance: TokenUnits(60), nonce: 0 });
        assert_eq!(s.burned(), TokenUnits(5));
        assert_eq!(s.total_balance().0 + s.burned().0, s.minted().0);
        assert!(s.apply_transaction(&tx).is_err());
    }

    #[test]
    fn account_proofs_verify() {
        let mut s = WorldState::new();
        for i in 0..7u8 {
            s.credit_reward(PublicKey([i; 32]), TokenUnits(u64::from(i) * 10)).unwrap();
        }
        let root = s.merkle_root();
        for i in 0..7u8 {
            let a = PublicKey([i; 32]);
            let (w, p) = s.prove_account(&a).unwrap();
            assert!(merkle_verify(&root, &state_leaf(&a, &w), &p));
        }
        assert!(s.prove_account(&PublicKey([99; 32])).is_none());
    }
}
