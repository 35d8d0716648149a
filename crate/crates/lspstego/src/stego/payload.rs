//! Secret payload framing: byte stream <-> fixed-width bit groups.
//!
//! Bits are consumed MSB-first within each byte. A stream starts with a
//! 36-bit header (32-bit payload byte length, then 4 zero pad bits) so the
//! extractor knows where the payload ends; the header and the payload are
//! chunked into the carrying scheme's group size (6 bits for the magic cube
//! and 2-LSB schemes, 3 for parity QIM), the last group zero-padded.

/// Bits carried by the length header.
pub const HEADER_BITS: usize = 36;

/// An owned secret byte payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretPayload {
    data: Vec<u8>,
}

impl SecretPayload {
    pub fn new(data: Vec<u8>) -> Self {
        Self { data }
    }

    pub fn empty() -> Self {
        Self { data: Vec::new() }
    }

    pub fn len_bytes(&self) -> usize {
        self.data.len()
    }

    pub fn bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    /// The payload as MSB-first bits.
    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.data
            .iter()
            .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1 == 1))
    }

    /// Number of `group_bits`-wide groups the payload occupies.
    pub fn group_count(&self, group_bits: usize) -> usize {
        (self.data.len() * 8).div_ceil(group_bits)
    }
}

/// Pack a bit iterator into `group_bits`-wide values, zero-padding the tail.
pub fn pack_groups(bits: impl Iterator<Item = bool>, group_bits: usize) -> Vec<u8> {
    debug_assert!((1..=8).contains(&group_bits));
    let mut out = Vec::new();
    let mut acc = 0u8;
    let mut n = 0;
    for bit in bits {
        acc = (acc << 1) | u8::from(bit);
        n += 1;
        if n == group_bits {
            out.push(acc);
            acc = 0;
            n = 0;
        }
    }
    if n > 0 {
        out.push(acc << (group_bits - n));
    }
    out
}

/// Unpack group values back into their MSB-first bits.
pub fn unpack_groups(groups: &[u8], group_bits: usize) -> impl Iterator<Item = bool> + '_ {
    groups
        .iter()
        .flat_map(move |&g| (0..group_bits).rev().map(move |i| (g >> i) & 1 == 1))
}

/// Header bits for a payload of `len` bytes: the 32-bit length MSB-first,
/// then 4 zero pad bits.
pub fn header_bits(len: u32) -> impl Iterator<Item = bool> {
    (0..32u32)
        .rev()
        .map(move |i| (len >> i) & 1 == 1)
        .chain(std::iter::repeat_n(false, HEADER_BITS - 32))
}

/// Recover the declared length from the first 36 bits of a stream.
pub fn parse_header(bits: &mut impl Iterator<Item = bool>) -> Option<u32> {
    let mut len = 0u32;
    for _ in 0..32 {
        len = (len << 1) | u32::from(bits.next()?);
    }
    // Pad bits carry no information; consume and ignore them.
    for _ in 32..HEADER_BITS {
        bits.next()?;
    }
    Some(len)
}

/// Reassemble `len` bytes from an MSB-first bit stream.
pub fn collect_bytes(bits: &mut impl Iterator<Item = bool>, len: usize) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut b = 0u8;
        for _ in 0..8 {
            b = (b << 1) | u8::from(bits.next()?);
        }
        out.push(b);
    }
    Some(out)
}
