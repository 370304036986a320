//! Variable-byte coding.
//!
//! Seven data bits per byte, least significant group first. The **last**
//! byte of each integer has its most significant bit set; continuation
//! bytes have it clear. This is the reverse of the LEB128 convention.

use crate::error::{Error, Result};

const TERMINAL: u8 = 0x80;

/// Number of bytes `x` takes.
#[inline]
pub fn encoded_len(x: u32) -> usize {
    match x {
        0..=0x7f => 1,
        0x80..=0x3fff => 2,
        0x4000..=0x1f_ffff => 3,
        0x20_0000..=0x0fff_ffff => 4,
        _ => 5,
    }
}

#[inline]
pub fn encode_one(mut x: u32, out: &mut Vec<u8>) {
    while x >= 0x80 {
        out.push((x & 0x7f) as u8);
        x >>= 7;
    }
    out.push(x as u8 | TERMINAL);
}

/// Appends every value of `values`.
pub fn encode(values: &[u32], out: &mut Vec<u8>) {
    for &x in values {
        encode_one(x, out);
    }
}

/// Appends the D1 deltas of `values`, the first one taken against `prev`.
pub fn encode_delta(values: &[u32], mut prev: u32, out: &mut Vec<u8>) {
    for &x in values {
        encode_one(x.wrapping_sub(prev), out);
        prev = x;
    }
}

/// Decodes one integer at `*pos`, advancing it.
#[inline]
pub fn decode_one(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    let start = *pos;
    let mut value = 0u32;
    let mut shift = 0u32;
    loop {
        let Some(&byte) = bytes.get(*pos) else {
            return Err(if *pos == start {
                Error::Truncated { offset: start, needed: 1 }
            } else {
                Error::MissingTerminator(start)
            });
        };
        *pos += 1;
        let data = (byte & 0x7f) as u32;
        if shift == 28 && data > 0x0f {
            return Err(Error::VarintOverflow(start));
        }
        value |= data << shift;
        if byte & TERMINAL != 0 {
            return Ok(value);
        }
        shift += 7;
        if shift > 28 {
            return Err(Error::VarintOverflow(start));
        }
    }
}

/// Decodes `n` integers. Returns them with the number of bytes consumed.
pub fn decode(bytes: &[u8], n: usize) -> Result<(Vec<u32>, usize)> {
    let mut out = Vec::with_capacity(n);
    let mut pos = 0;
    for _ in 0..n {
        out.push(decode_one(bytes, &mut pos)?);
    }
    Ok((out, pos))
}

/// Decodes `out.len()` D1 deltas with the prefix sum fused in; returns the
/// bytes consumed.
pub fn decode_delta_into(bytes: &[u8], mut prev: u32, out: &mut [u32]) -> Result<usize> {
    let mut pos = 0;
    for slot in out.iter_mut() {
        prev = prev.wrapping_add(decode_one(bytes, &mut pos)?);
        *slot = prev;
    }
    Ok(pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_takes_seven_bytes() {
        let vals = [1u32, 3840, 131_073, 2];
        let mut out = Vec::new();
        encode(&vals, &mut out);
        assert_eq!(out.len(), 7);
        let lens: Vec<usize> = vals.iter().map(|&v| encoded_len(v)).collect();
        assert_eq!(lens, [1, 2, 3, 1]);
        assert_eq!(out, [0x81, 0x00, 0x9e, 0x01, 0x00, 0x88, 0x82]);
        assert_eq!(decode(&out, 4).unwrap(), (vals.to_vec(), 7));
    }

    #[test]
    fn zero_is_one_flagged_byte() {
        let mut out = Vec::new();
        encode_one(0, &mut out);
        assert_eq!(out, [0x80]);
    }

    #[test]
    fn byte_counts_at_boundaries() {
        for (x, len) in [(0, 1), (127, 1), (128, 2), (16_383, 2), (16_384, 3), (u32::MAX, 5)] {
            let mut out = Vec::new();
            encode_one(x, &mut out);
            assert_eq!(out.len(), len, "{x}");
            assert_eq!(encoded_len(x), len);
            assert_eq!(decode(&out, 1).unwrap().0, vec![x]);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(decode(&[], 1), Err(Error::Truncated { .. })));
        assert!(matches!(decode(&[0x01, 0x02], 1), Err(Error::MissingTerminator(0))));
        assert!(matches!(
            decode(&[0x7f, 0x7f, 0x7f, 0x7f, 0x7f, 0x80], 1),
            Err(Error::VarintOverflow(0))
        ));
        assert!(matches!(decode(&[0x7f, 0x7f, 0x7f, 0x7f, 0x9f], 1), Err(Error::VarintOverflow(0))));
    }

    #[test]
    fn fused_delta_decode() {
        let x = [5u32, 9, 200, 70_000, 70_001];
        let mut out = Vec::new();
        encode_delta(&x, 2, &mut out);
        let mut back = [0u32; 5];
        let used = decode_delta_into(&out, 2, &mut back).unwrap();
        assert_eq!(used, out.len());
        assert_eq!(back, x);
    }
}
