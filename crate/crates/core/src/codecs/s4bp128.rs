//! S4-BP128: binary packing of 128-integer blocks.
//!
//! Stream layout:
//!
//! ```text
//! meta-block*   16 width bytes, then 16 packed blocks (16 * b bytes each)
//! block*        1 width byte, then one packed block   (fewer than 16 left)
//! tail          varint D1 deltas of the last n % 128 values
//! ```
//!
//! Blocks hold the deltas of the whole block region under the chosen mode,
//! seeded with zeros. The tail is coded against the last block value (or 0).
//! Packed words are little-endian.

use crate::bitpack::{max_bits, pack128_into, unpack128_into, unpack128_two_pass, BLOCK};
use crate::codecs::varint;
use crate::delta::{delta_encode_in_place, DeltaMode, SeedVec};
use crate::error::{Error, Result};

pub const META_BLOCKS: usize = 16;

pub fn encode(x: &[u32], mode: DeltaMode, out: &mut Vec<u8>) {
    let nblocks = x.len() / BLOCK;
    let body = nblocks * BLOCK;
    let mut deltas = x[..body].to_vec();
    delta_encode_in_place(&mut deltas, mode, SeedVec::ZERO);

    let mut words = Vec::with_capacity(4 * 32);
    for group in deltas.chunks(META_BLOCKS * BLOCK) {
        let blocks: Vec<&[u32]> = group.chunks_exact(BLOCK).collect();
        let widths: Vec<u32> = blocks.iter().map(|b| max_bits(b)).collect();
        if blocks.len() == META_BLOCKS {
            out.extend(widths.iter().map(|&b| b as u8));
            for (block, &b) in blocks.iter().zip(&widths) {
                write_block(block, b, &mut words, out);
            }
        } else {
            for (block, &b) in blocks.iter().zip(&widths) {
                out.push(b as u8);
                write_block(block, b, &mut words, out);
            }
        }
    }
    let prev = if body > 0 { x[body - 1] } else { 0 };
    varint::encode_delta(&x[body..], prev, out);
}

fn write_block(block: &[u32], b: u32, scratch: &mut Vec<u32>, out: &mut Vec<u8>) {
    scratch.clear();
    pack128_into(block, b, scratch);
    for w in scratch.iter() {
        out.extend_from_slice(&w.to_le_bytes());
    }
}

fn read_width(bytes: &[u8], pos: usize) -> Result<u32> {
    let b = *bytes.get(pos).ok_or(Error::Truncated { offset: pos, needed: 1 })? as u32;
    if b > 32 {
        return Err(Error::InvalidWidth(b));
    }
    Ok(b)
}

/// Copies `4 * b` little-endian words starting at `pos` into `words`.
#[inline]
pub(crate) fn read_words(bytes: &[u8], pos: usize, count: usize, words: &mut [u32]) -> Result<()> {
    let end = pos + 4 * count;
    let src = bytes.get(pos..end).ok_or(Error::Truncated {
        offset: pos,
        needed: end.saturating_sub(bytes.len()),
    })?;
    for (w, chunk) in words[..count].iter_mut().zip(src.chunks_exact(4)) {
        *w = u32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
    }
    Ok(())
}

/// Decodes `out.len()` values from the front of `bytes`; returns the bytes
/// consumed.
pub fn decode_into(bytes: &[u8], out: &mut [u32], mode: DeltaMode, integrated: bool) -> Result<usize> {
    let n = out.len();
    let nblocks = n / BLOCK;
    let mut pos = 0usize;
    let mut seed = SeedVec::ZERO;
    let mut words = [0u32; BLOCK];
    let mut block_idx = 0usize;

    let mut decode_block = |b: u32, pos: &mut usize, seed: &mut SeedVec, idx: usize| -> Result<()> {
        read_words(bytes, *pos, 4 * b as usize, &mut words)?;
        *pos += 16 * b as usize;
        let dst: &mut [u32; BLOCK] = (&mut out[idx * BLOCK..(idx + 1) * BLOCK]).try_into().unwrap();
        *seed = if integrated {
            unpack128_into(&words, b, mode, *seed, dst)
        } else {
            unpack128_two_pass(&words, b, mode, *seed, dst)
        };
        Ok(())
    };

    while nblocks - block_idx >= META_BLOCKS {
        let header = pos;
        pos += META_BLOCKS;
        for j in 0..META_BLOCKS {
            let b = read_width(bytes, header + j)?;
            decode_block(b, &mut pos, &mut seed, block_idx)?;
            block_idx += 1;
        }
    }
    while block_idx < nblocks {
        let b = read_width(bytes, pos)?;
        pos += 1;
        decode_block(b, &mut pos, &mut seed, block_idx)?;
        block_idx += 1;
    }
    let body = nblocks * BLOCK;
    let prev = if body > 0 { out[body - 1] } else { 0 };
    pos += varint::decode_delta_into(&bytes[pos..], prev, &mut out[body..])?;
    Ok(pos)
}
