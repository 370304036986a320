//! Fixed-width bit packing.
//!
//! Two layouts are used:
//!
//! - **Interleaved, 128 values** ([`pack128`], [`unpack128`]). Values are
//!   processed four at a time. Value `4g + l` is written into lane `l` of a
//!   running 4-word vector starting at bit `g * b`; when a vector fills up it
//!   is stored and the value's remaining high bits spill into the low bits
//!   of the next vector. A block at width `b` occupies exactly `4 * b` words.
//! - **Consecutive** ([`pack32`], [`pack_consecutive`]). Value `i` starts at
//!   bit `i * b` of a little-endian stream of 32-bit words.
//!
//! Bits are filled from the least significant end of each word. Unpacking
//! a 128-block can fuse the prefix sum of a [`DeltaMode`] into the same pass.

use crate::delta::{prefix_sum_scalar_in_place, DeltaMode, SeedVec};
use crate::error::{Error, Result};
use crate::vec4::Vec4;

pub const BLOCK: usize = 128;

/// Smallest `b` such that every value is below `2^b`.
#[inline]
pub fn max_bits(block: &[u32]) -> u32 {
    let acc = block.iter().fold(0u32, |a, &x| a | x);
    32 - acc.leading_zeros()
}

#[inline(always)]
fn low_mask(b: u32) -> u32 {
    if b >= 32 {
        u32::MAX
    } else {
        (1u32 << b) - 1
    }
}

fn check_values(block: &[u32], b: u32) -> Result<()> {
    if b > 32 {
        return Err(Error::InvalidWidth(b));
    }
    if b < 32 {
        if let Some(&value) = block.iter().find(|&&x| x >> b != 0) {
            return Err(Error::ValueTooWide { value, width: b });
        }
    }
    Ok(())
}

/// A 128-value block in the interleaved layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedBlock128 {
    pub width: u32,
    /// Exactly `4 * width` words.
    pub words: Vec<u32>,
}

impl PackedBlock128 {
    pub fn byte_len(&self) -> usize {
        self.words.len() * 4
    }
}

/// Packs 128 values at width `b`.
pub fn pack128(block: &[u32], b: u32) -> Result<PackedBlock128> {
    if block.len() != BLOCK {
        return Err(Error::WrongBlockSize {
            got: block.len(),
            expected: BLOCK,
        });
    }
    check_values(block, b)?;
    let mut words = Vec::with_capacity(4 * b as usize);
    pack128_into(block, b, &mut words);
    Ok(PackedBlock128 { width: b, words })
}

/// Appends the interleaved packing of `block` (128 values) to `out`. Bits
/// above `b` are discarded.
pub fn pack128_into(block: &[u32], b: u32, out: &mut Vec<u32>) {
    debug_assert_eq!(block.len(), BLOCK);
    debug_assert!(b <= 32);
    if b == 0 {
        return;
    }
    let start = out.len();
    out.resize(start + 4 * b as usize, 0);
    let words = &mut out[start..];
    let mask = Vec4::splat(low_mask(b));
    let mut acc = Vec4::ZERO;
    let mut shift = 0u32;
    let mut k = 0usize;
    for g in 0..BLOCK / 4 {
        let x = Vec4::load(block, 4 * g).and(mask);
        acc = acc.or(x.shl(shift));
        shift += b;
        if shift >= 32 {
            acc.store(words, 4 * k);
            k += 1;
            shift -= 32;
            acc = if shift > 0 { x.shr(b - shift) } else { Vec4::ZERO };
        }
    }
    debug_assert_eq!(k, b as usize);
}

/// Unpacks a block and applies the prefix sum for `mode` on top of `seed`.
pub fn unpack128(p: &PackedBlock128, mode: DeltaMode, seed: SeedVec) -> Result<([u32; BLOCK], SeedVec)> {
    if p.width > 32 {
        return Err(Error::InvalidWidth(p.width));
    }
    if p.words.len() != 4 * p.width as usize {
        return Err(Error::LengthMismatch(format!(
            "width {} needs {} words, block has {}",
            p.width,
            4 * p.width,
            p.words.len()
        )));
    }
    let mut out = [0u32; BLOCK];
    let seed = unpack128_into(&p.words, p.width, mode, seed, &mut out);
    Ok((out, seed))
}

type UnpackFn = fn(&[u32], Vec4, &mut [u32; BLOCK]) -> Vec4;

const fn mode_code(m: DeltaMode) -> usize {
    match m {
        DeltaMode::None => 0,
        DeltaMode::D1 => 1,
        DeltaMode::D2 => 2,
        DeltaMode::DM => 3,
        DeltaMode::D4 => 4,
    }
}

#[inline(always)]
const fn mode_of(code: usize) -> DeltaMode {
    match code {
        1 => DeltaMode::D1,
        2 => DeltaMode::D2,
        3 => DeltaMode::DM,
        4 => DeltaMode::D4,
        _ => DeltaMode::None,
    }
}

/// Interleaved unpacking at a fixed width with a fused prefix sum. One
/// mask, built once, serves the whole block.
#[inline(always)]
fn unpack_fixed<const B: u32, const MODE: usize>(words: &[u32], mut v: Vec4, out: &mut [u32; BLOCK]) -> Vec4 {
    let mode = mode_of(MODE);
    if B == 0 {
        for at in (0..BLOCK).step_by(4) {
            v = mode.vec_step(Vec4::ZERO, v);
            v.store(out, at);
        }
        return v;
    }
    if B == 32 {
        for at in (0..BLOCK).step_by(4) {
            v = mode.vec_step(Vec4::load(words, at), v);
            v.store(out, at);
        }
        return v;
    }
    let words = &words[..4 * B as usize];
    let mask = Vec4::splat(low_mask(B));
    let mut shift = 0u32;
    let mut at = 0usize;
    for k in 0..B as usize {
        let y = Vec4::load(words, 4 * k);
        while shift + B <= 32 {
            let t = y.shr(shift).and(mask);
            v = mode.vec_step(t, v);
            v.store(out, at);
            at += 4;
            shift += B;
        }
        if shift < 32 {
            let z = Vec4::load(words, 4 * k + 4).shl(32 - shift).and(mask);
            let t = y.shr(shift).or(z);
            v = mode.vec_step(t, v);
            v.store(out, at);
            at += 4;
            shift = shift + B - 32;
        } else {
            shift = 0;
        }
    }
    v
}

macro_rules! width_row {
    ($mode:expr; $($b:literal)*) => {
        [$(unpack_fixed::<$b, { $mode }> as UnpackFn),*]
    };
}

macro_rules! unpack_table {
    ($($mode:expr),*) => {
        [$(width_row!($mode; 0 1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16 17 18 19 20 21 22 23 24 25 26 27 28 29 30 31 32)),*]
    };
}

static UNPACKERS: [[UnpackFn; 33]; 5] = unpack_table!(0, 1, 2, 3, 4);

/// Unpacks `4 * b` words of `words` into `out`, fusing the prefix sum for
/// `mode`. Returns the seed for the next block.
#[inline]
pub fn unpack128_into(words: &[u32], b: u32, mode: DeltaMode, seed: SeedVec, out: &mut [u32; BLOCK]) -> SeedVec {
    SeedVec(UNPACKERS[mode_code(mode)][b as usize](words, seed.0, out))
}

/// Two-pass unpacking: plain unpack, then a separate vectorized prefix sum
/// over the block.
#[inline]
pub fn unpack128_two_pass(words: &[u32], b: u32, mode: DeltaMode, seed: SeedVec, out: &mut [u32; BLOCK]) -> SeedVec {
    UNPACKERS[0][b as usize](words, Vec4::ZERO, out);
    crate::delta::prefix_sum_vec4_in_place(out, mode, seed)
}

/// Packs 32 values in the consecutive layout; exactly `b` words.
pub fn pack32(block: &[u32], b: u32) -> Result<Vec<u32>> {
    if block.len() != 32 {
        return Err(Error::WrongBlockSize {
            got: block.len(),
            expected: 32,
        });
    }
    check_values(block, b)?;
    let mut out = Vec::with_capacity(b as usize);
    pack_consecutive(block, b, &mut out);
    Ok(out)
}

/// Unpacks 32 consecutive-layout values.
pub fn unpack32(words: &[u32], b: u32) -> Result<[u32; 32]> {
    if b > 32 {
        return Err(Error::InvalidWidth(b));
    }
    if words.len() < b as usize {
        return Err(Error::LengthMismatch(format!("width {b} needs {b} words, got {}", words.len())));
    }
    let mut out = [0u32; 32];
    unpack_consecutive(words, b, &mut out);
    Ok(out)
}

/// Appends the consecutive packing of `values` to `out`:
/// `ceil(len * b / 32)` words.
pub fn pack_consecutive(values: &[u32], b: u32, out: &mut Vec<u32>) {
    debug_assert!(b <= 32);
    if b == 0 {
        return;
    }
    let nwords = (values.len() * b as usize).div_ceil(32);
    let start = out.len();
    out.resize(start + nwords, 0);
    let words = &mut out[start..];
    let mask = low_mask(b) as u64;
    for (i, &x) in values.iter().enumerate() {
        let bit = i * b as usize;
        let (w, off) = (bit / 32, (bit % 32) as u32);
        let wide = (x as u64 & mask) << off;
        words[w] |= wide as u32;
        if off + b > 32 {
            words[w + 1] |= (wide >> 32) as u32;
        }
    }
}

/// Fills `out` from a consecutive-layout stream at width `b`.
pub fn unpack_consecutive(words: &[u32], b: u32, out: &mut [u32]) {
    debug_assert!(b <= 32);
    if b == 0 {
        out.fill(0);
        return;
    }
    let mask = low_mask(b) as u64;
    for (i, slot) in out.iter_mut().enumerate() {
        let bit = i * b as usize;
        let (w, off) = (bit / 32, bit % 32);
        let mut wide = words[w] as u64;
        if off + b as usize > 32 {
            wide |= (words[w + 1] as u64) << 32;
        }
        *slot = ((wide >> off) & mask) as u32;
    }
}

/// Bit-level packing into exactly `ceil(len * b / 8)` bytes.
pub fn pack_bytes(values: &[u32], b: u32) -> Vec<u8> {
    let mut words = Vec::new();
    pack_consecutive(values, b, &mut words);
    let nbytes = (values.len() * b as usize).div_ceil(8);
    words.iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect()
}

/// Straight-line transcription of the integrated unpacking procedure with a
/// runtime width. It counts mask constructions so tests can observe that a
/// block needs exactly one.
pub mod reference {
    use super::*;
    use std::cell::Cell;

    thread_local! {
        static MASKS_BUILT: Cell<usize> = const { Cell::new(0) };
    }

    pub fn masks_built() -> usize {
        MASKS_BUILT.with(Cell::get)
    }

    pub fn reset_mask_counter() {
        MASKS_BUILT.with(|c| c.set(0));
    }

    fn build_mask(b: u32) -> Vec4 {
        MASKS_BUILT.with(|c| c.set(c.get() + 1));
        Vec4::splat(low_mask(b))
    }

    pub fn unpack128(words: &[u32], b: u32, mode: DeltaMode, seed: SeedVec) -> (Vec<u32>, SeedVec) {
        let mut w = Vec::with_capacity(BLOCK);
        let mut v = seed.0;
        let m = build_mask(b);
        if b == 0 || b == 32 {
            for g in 0..BLOCK / 4 {
                let t = if b == 0 { Vec4::ZERO } else { Vec4::load(words, 4 * g) };
                v = mode.vec_step(t, v);
                w.extend_from_slice(&v.lanes());
            }
            return (w, SeedVec(v));
        }
        let mut i = 0;
        for k in 0..b as usize {
            let y = Vec4::load(words, 4 * k);
            while i + b <= 32 {
                let t = y.shr(i).and(m);
                v = mode.vec_step(t, v);
                w.extend_from_slice(&v.lanes());
                i += b;
            }
            if i < 32 {
                let z = Vec4::load(words, 4 * k + 4).shl(32 - i).and(m);
                let t = y.shr(i).or(z);
                v = mode.vec_step(t, v);
                w.extend_from_slice(&v.lanes());
                i = i + b - 32;
            } else {
                i = 0;
            }
        }
        (w, SeedVec(v))
    }

    /// Scalar two-pass route: unpack, then the scalar prefix sum.
    pub fn unpack128_scalar_two_pass(words: &[u32], b: u32, mode: DeltaMode, seed: SeedVec) -> (Vec<u32>, SeedVec) {
        let (mut w, _) = unpack128(words, b, DeltaMode::None, SeedVec::ZERO);
        let s = prefix_sum_scalar_in_place(&mut w, mode, seed);
        (w, s)
    }
}
