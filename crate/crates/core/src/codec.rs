//! Canonical binary encoding.
//!
//! Every value that is hashed, signed or sent over the wire goes through this
//! encoding, so two nodes holding equal values always produce equal bytes.
//!
//! Rules:
//! - integers: 8-byte big-endian unsigned
//! - variable byte strings: 4-byte big-endian length, then the bytes
//! - lists: 4-byte big-endian element count, then each element
//! - fixed-width values (digests, public keys, signatures): raw bytes, no prefix
//! - enum discriminants, booleans and option markers: a single byte
//!
//! Struct fields are emitted in declaration order with no padding.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("unexpected end of input: needed {needed} bytes, {remaining} remaining")]
    UnexpectedEnd { needed: usize, remaining: usize },
    #[error("{0} trailing bytes after value")]
    TrailingBytes(usize),
    #[error("invalid {what} tag {tag:#04x}")]
    InvalidTag { what: &'static str, tag: u8 },
    #[error("length {0} does not fit a 4-byte prefix")]
    LengthOverflow(usize),
    #[error("declared count {count} exceeds remaining input {remaining}")]
    CountTooLarge { count: usize, remaining: usize },
    #[error("invalid value: {0}")]
    InvalidValue(&'static str),
}

pub trait Encode {
    fn encode(&self, enc: &mut Encoder);
}

pub trait Decode: Sized {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError>;
}

#[derive(Debug, Default)]
pub struct Encoder {
    buf: Vec<u8>,
    overflow: Option<usize>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_bool(&mut self, v: bool) {
        self.buf.push(u8::from(v));
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    /// Raw bytes of a fixed-width value.
    pub fn put_fixed(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    fn put_len(&mut self, len: usize) {
        match u32::try_from(len) {
            Ok(l) => self.buf.extend_from_slice(&l.to_be_bytes()),
            Err(_) => {
                self.overflow.get_or_insert(len);
                self.buf.extend_from_slice(&[0xff; 4]);
            }
        }
    }

    /// Length-prefixed byte string.
    pub fn put_bytes(&mut self, bytes: &[u8]) {
        self.put_len(bytes.len());
        self.buf.extend_from_slice(bytes);
    }

    pub fn put_list<T: Encode>(&mut self, items: &[T]) {
        self.put_len(items.len());
        for item in items {
            item.encode(self);
        }
    }

    pub fn put<T: Encode + ?Sized>(&mut self, v: &T) {
        v.encode(self);
    }

    pub fn finish(self) -> Result<Vec<u8>, CodecError> {
        match self.overflow {
            Some(len) => Err(CodecError::LengthOverflow(len)),
            None => Ok(self.buf),
        }
    }
}

pub struct Decoder<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(input: &'a [u8]) -> Self {
        Self { input, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.input.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.remaining() < n {
            return Err(CodecError::UnexpectedEnd {
                needed: n,
                remaining: self.remaining(),
            });
        }
        let out = &self.input[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn get_u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn get_bool(&mut self) -> Result<bool, CodecError> {
        match self.get_u8()? {
            0 => Ok(false),
            1 => Ok(true),
            tag => Err(CodecError::InvalidTag { what: "bool", tag }),
        }
    }

    pub fn get_u64(&mut self) -> Result<u64, CodecError> {
        let mut b = [0u8; 8];
        b.copy_from_slice(self.take(8)?);
        Ok(u64::from_be_bytes(b))
    }

    pub fn get_fixed<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        let mut b = [0u8; N];
        b.copy_from_slice(self.take(N)?);
        Ok(b)
    }

    fn get_len(&mut self) -> Result<usize, CodecError> {
        let b: [u8; 4] = self.get_fixed()?;
        Ok(u32::from_be_bytes(b) as usize)
    }

    pub fn get_bytes(&mut self) -> Result<Vec<u8>, CodecError> {
        let len = self.get_len()?;
        Ok(self.take(len)?.to_vec())
    }

    pub fn get_list<T: Decode>(&mut self) -> Result<Vec<T>, CodecError> {
        let count = self.get_len()?;
        // every element occupies at least one byte
        if count > self.remaining() {
            return Err(CodecError::CountTooLarge {
                count,
                remaining: self.remaining(),
            });
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(T::decode(self)?);
        }
        Ok(out)
    }

    pub fn get<T: Decode>(&mut self) -> Result<T, CodecError> {
        T::decode(self)
    }

    pub fn finish(self) -> Result<(), CodecError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(CodecError::TrailingBytes(n)),
        }
    }
}

/// Encode a value, failing if any length prefix overflows.
pub fn encode_canonical<T: Encode + ?Sized>(v: &T) -> Result<Vec<u8>, CodecError> {
    let mut enc = Encoder::new();
    v.encode(&mut enc);
    enc.finish()
}

/// Encode a value that is known to be representable.
///
/// Panics if a length prefix overflows, which needs a list or byte string
/// with more than `u32::MAX` entries.
pub fn canonical_bytes<T: Encode + ?Sized>(v: &T) -> Vec<u8> {
    encode_canonical(v).expect("canonical encoding length overflow")
}

/// Decode a value that must span the whole input.
pub fn decode_canonical<T: Decode>(bytes: &[u8]) -> Result<T, CodecError> {
    let mut dec = Decoder::new(bytes);
    let v = T::decode(&mut dec)?;
    dec.finish()?;
    Ok(v)
}

impl Encode for u64 {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_u64(*self);
    }
}

impl Decode for u64 {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.get_u64()
    }
}

impl Encode for [u8] {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_bytes(self);
    }
}

impl Encode for Vec<u8> {
    fn encode(&self, enc: &mut Encoder) {
        enc.put_bytes(self);
    }
}

impl Decode for Vec<u8> {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.get_bytes()
    }
}

impl<T: Encode> Encode for Option<T> {
    fn encode(&self, enc: &mut Encoder) {
        match self {
            None => enc.put_u8(0),
            Some(v) => {
                enc.put_u8(1);
                v.encode(enc);
            }
        }
    }
}

impl<T: Decode> Decode for Option<T> {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        match dec.get_u8()? {
            0 => Ok(None),
            1 => Ok(Some(T::decode(dec)?)),
            tag => Err(CodecError::InvalidTag { what: "option", tag }),
        }
    }
}

impl<A: Encode, B: Encode> Encode for (A, B) {
    fn encode(&self, enc: &mut Encoder) {
        self.0.encode(enc);
        self.1.encode(enc);
    }
}

impl<A: Decode, B: Decode> Decode for (A, B) {
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok((A::decode(dec)?, B::decode(dec)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_byte_string() {
        assert_eq!(encode_canonical(&Vec::<u8>::new()).unwrap(), [0, 0, 0, 0]);
    }

    #[test]
    fn list_of_two_empty_byte_strings() {
        let mut enc = Encoder::new();
        enc.put_list(&[Vec::<u8>::new(), Vec::new()]);
        assert_eq!(enc.finish().unwrap(), [0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn integers_are_big_endian() {
        assert_eq!(encode_canonical(&0x0102_0304_0506_0708u64).unwrap(), [1, 2, 3, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn truncated_input_is_an_error() {
        let err = decode_canonical::<u64>(&[0, 1, 2]).unwrap_err();
        assert_eq!(err, CodecError::UnexpectedEnd { needed: 8, remaining: 3 });
    }

    #[test]
    fn trailing_bytes_rejected() {
        assert_eq!(decode_canonical::<u64>(&[0; 9]).unwrap_err(), CodecError::TrailingBytes(1));
    }

    #[test]
    fn absurd_list_count_rejected_without_allocating() {
        let err = decode_canonical::<Vec<u8>>(&[0xff, 0xff, 0xff, 0xff]).unwrap_err();
        assert!(matches!(err, CodecError::UnexpectedEnd { .. }));
        let mut dec = Decoder::new(&[0x7f, 0xff, 0xff, 0xff, 0]);
        assert!(matches!(dec.get_list::<u64>(), Err(CodecError::CountTooLarge { .. })));
    }

    #[test]
    fn option_tag_must_be_zero_or_one() {
        assert_eq!(decode_canonical::<Option<u64>>(&[0]).unwrap(), None);
        assert!(matches!(
            decode_canonical::<Option<u64>>(&[2]),
            Err(CodecError::InvalidTag { what: "option", tag: 2 })
        ));
    }
}
