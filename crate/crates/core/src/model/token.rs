use std::fmt;
use std::iter::Sum;

use serde::{Deserialize, Serialize};

use crate::codec::{CodecError, Decode, Decoder, Encode, Encoder};

/// Token amounts are fixed point: one token is 2^24 base units, which keeps
/// every halving of the block reward exact for 24 epochs past the first.
pub const BASE_UNITS_PER_TOKEN: u64 = 1 << 24;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenUnits(pub u64);

impl TokenUnits {
    pub const ZERO: TokenUnits = TokenUnits(0);

    pub const fn from_tokens(tokens: u64) -> Self {
        Self(tokens * BASE_UNITS_PER_TOKEN)
    }

    pub const fn base_units(self) -> u64 {
        self.0
    }

    pub fn as_tokens_f64(self) -> f64 {
        self.0 as f64 / BASE_UNITS_PER_TOKEN as f64
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        self.0.checked_add(rhs.0).map(Self)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        self.0.checked_sub(rhs.0).map(Self)
    }
}

impl fmt::Debug for TokenUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TokenUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / BASE_UNITS_PER_TOKEN;
        let frac = self.0 % BASE_UNITS_PER_TOKEN;
        if frac == 0 {
            write!(f, "{whole} tok")
        } else {
            write!(f, "{whole}+{frac}/2^24 tok")
        }
    }
}

impl Sum for TokenUnits {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        Self(iter.map(|t| t.0).sum())
    }
}

impl Encode for TokenUnits {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_u64(self.0);
    }
}

impl Decode for TokenUnits {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self(dec.get_u64()?))
    }
}
