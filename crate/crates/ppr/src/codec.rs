//! Bit-exact Elias delta coding of indices and a small container format.
//!
//! Wire format (`write_container`): magic bytes `PPR1`, a 1-byte code id
//! (0 = Elias delta), an 8-byte little-endian codeword count, the payload
//! bits packed most-significant-bit first, and a final byte giving how many
//! zero bits pad the last payload byte.

/// Errors from malformed indices or byte streams.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("indices are 1-based; 0 has no codeword")]
    ZeroIndex,
    #[error("index {0} is not below 2^63")]
    IndexTooLarge(u64),
    #[error("bit stream ended inside a codeword")]
    Truncated,
    #[error("container does not start with the PPR1 magic")]
    BadMagic,
    #[error("unsupported code id {0}")]
    UnsupportedCode(u8),
    #[error("padding descriptor {0} is invalid for the payload")]
    BadPadding(u8),
    #[error("payload continues past the declared codewords")]
    TrailingBits,
}

/// A growable bit sequence with exact length, packed MSB-first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reinterprets packed bytes as the first `len` bits.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        assert!(len <= bytes.len() * 8, "length exceeds the byte buffer");
        Self {
            bytes: bytes.to_vec(),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 1 << (7 - self.len % 8);
        }
        self.len += 1;
    }

    /// The bit at `index`; panics when out of range.
    pub fn bit(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range");
        self.bytes[index / 8] >> (7 - index % 8) & 1 == 1
    }

    pub fn extend_from(&mut self, other: &BitString) {
        for i in 0..other.len {
            self.push(other.bit(i));
        }
    }

    /// Appends the low `width` bits of `value`, most significant first.
    fn push_int_msb(&mut self, value: u64, width: u32) {
        for shift in (0..width).rev() {
            self.push(value >> shift & 1 == 1);
        }
    }

    /// Packed bytes plus the count of zero pad bits in the last byte.
    pub fn to_padded_bytes(&self) -> (Vec<u8>, u8) {
        let padding = (8 - self.len % 8) % 8;
        (self.bytes.clone(), padding as u8)
    }
}

/// Encodes `k ∈ [1, 2^63)` as an Elias delta codeword of
/// `⌊log₂k⌋ + 2⌊log₂(⌊log₂k⌋+1)⌋ + 1` bits.
pub fn elias_delta_encode(k: u64) -> Result<BitString, CodecError> {
    if k == 0 {
        return Err(CodecError::ZeroIndex);
    }
    if k >= 1 << 63 {
        return Err(CodecError::IndexTooLarge(k));
    }
    let mut bits = BitString::new();
    let n = 63 - k.leading_zeros(); // ⌊log₂ k⌋
    let l = n + 1; // significant bits of k
    let z = 31 - l.leading_zeros(); // ⌊log₂ l⌋
    for _ in 0..z {
        bits.push(false);
    }
    bits.push_int_msb(l as u64, z + 1);
    bits.push_int_msb(k & !(1 << n), n); // k without its leading 1
    Ok(bits)
}

/// Decodes one codeword starting at bit `start`; returns the index and the
/// number of bits consumed.
pub fn elias_delta_decode_at(bits: &BitString, start: usize) -> Result<(u64, usize), CodecError> {
    let mut pos = start;
    let mut next = |err_past_end: CodecError| -> Result<bool, CodecError> {
        if pos >= bits.len() {
            return Err(err_past_end);
        }
        let b = bits.bit(pos);
        pos += 1;
        Ok(b)
    };
    let mut z = 0u32;
    while !next(CodecError::Truncated)? {
        z += 1;
        if z > 5 {
            // l ≥ 64 would put k at 2^63 or beyond.
            return Err(CodecError::IndexTooLarge(u64::MAX));
        }
    }
    let mut l = 1u64;
    for _ in 0..z {
        l = l << 1 | next(CodecError::Truncated)? as u64;
    }
    if l > 63 {
        return Err(CodecError::IndexTooLarge(u64::MAX));
    }
    let mut k = 1u64;
    for _ in 0..l - 1 {
        k = k << 1 | next(CodecError::Truncated)? as u64;
    }
    Ok((k, pos - start))
}

/// Decodes one codeword at the start of `bits`.
pub fn elias_delta_decode(bits: &BitString) -> Result<(u64, usize), CodecError> {
    elias_delta_decode_at(bits, 0)
}

const MAGIC: &[u8; 4] = b"PPR1";
const CODE_ELIAS_DELTA: u8 = 0;

/// Serializes indices into the PPR1 container.
pub fn write_container(indices: &[u64]) -> Result<Vec<u8>, CodecError> {
    let mut payload = BitString::new();
    for &k in indices {
        payload.extend_from(&elias_delta_encode(k)?);
    }
    let (bytes, padding) = payload.to_padded_bytes();
    let mut out = Vec::with_capacity(13 + bytes.len() + 1);
    out.extend_from_slice(MAGIC);
    out.push(CODE_ELIAS_DELTA);
    out.extend_from_slice(&(indices.len() as u64).to_le_bytes());
    out.extend_from_slice(&bytes);
    out.push(padding);
    Ok(out)
}

/// Parses a PPR1 container back into indices, rejecting trailing data and
/// nonzero padding bits.
pub fn read_container(data: &[u8]) -> Result<Vec<u64>, CodecError> {
    if data.len() < 14 || &data[..4] != MAGIC {
        return Err(if data.len() >= 4 && &data[..4] == MAGIC {
            CodecError::Truncated
        } else {
            CodecError::BadMagic
        });
    }
    if data[4] != CODE_ELIAS_DELTA {
        return Err(CodecError::UnsupportedCode(data[4]));
    }
    let count = u64::from_le_bytes(data[5..13].try_into().unwrap());
    let payload = &data[13..data.len() - 1];
    let padding = data[data.len() - 1];
    if padding > 7 || (payload.is_empty() && padding != 0) {
        return Err(CodecError::BadPadding(padding));
    }
    let bit_len = payload.len() * 8 - padding as usize;
    let bits = BitString::from_bytes(payload, bit_len);
    let mut indices = Vec::new();
    let mut pos = 0usize;
    for _ in 0..count {
        let (k, consumed) = elias_delta_decode_at(&bits, pos)?;
        indices.push(k);
        pos += consumed;
    }
    if pos != bit_len {
        return Err(CodecError::TrailingBits);
    }
    // Pad bits past the payload must be zero.
    for i in bit_len..payload.len() * 8 {
        if payload[i / 8] >> (7 - i % 8) & 1 == 1 {
            return Err(CodecError::BadPadding(padding));
        }
    }
    Ok(indices)
}

/// The closed-form codeword length in bits.
pub fn elias_delta_length(k: u64) -> Result<u32, CodecError> {
    if k == 0 {
        return Err(CodecError::ZeroIndex);
    }
    if k >= 1 << 63 {
        return Err(CodecError::IndexTooLarge(k));
    }
    let n = 63 - k.leading_zeros();
    let z = 31 - (n + 1).leading_zeros();
    Ok(n + 2 * z + 1)
}
