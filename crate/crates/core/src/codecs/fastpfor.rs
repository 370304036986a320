//! FastPFOR and S4-FastPFOR: patched binary packing.
//!
//! Each 128-integer block is packed at a reduced width `b'`; values that
//! need more bits are exceptions whose high `b - b'` bits go to one of 32
//! side arrays (one per excess width). Exceptions are pooled over pages of
//! up to 512 blocks and each side array is bit packed, padded to a multiple
//! of 32 values.
//!
//! Page layout (all `u32` little-endian):
//!
//! ```text
//! u32        byte length of the rest of the page
//! u32        number of base words that follow
//! u32 * k    base blocks, 4 * b' words per block
//! u32        metadata byte count
//! u8  * m    per block: b, b', exception count, one position byte per exception
//! u32        bitset of present side arrays (bit w-1 for excess width w)
//! per present width w, ascending:
//!   u32      exception count c
//!   u32 * .  c rounded up to a multiple of 32, packed consecutively at w bits
//! ```
//!
//! After the pages, the final `n % 128` values are varint D1 deltas.
//!
//! The scalar variant packs each base block as four consecutive 32-value
//! runs and always uses D1. The S4 variant packs base blocks in the
//! interleaved 128 layout and supports every delta mode. Sizes are identical.

use crate::bitpack::{pack128_into, pack_consecutive, unpack128_into, unpack_consecutive, BLOCK};
use crate::codecs::s4bp128::read_words;
use crate::codecs::varint;
use crate::delta::{delta_encode_in_place, prefix_sum_scalar_in_place, prefix_sum_vec4_in_place, DeltaMode, SeedVec};
use crate::error::{Error, Result};

/// Blocks per exception page.
pub const PAGE_BLOCKS: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseLayout {
    /// Four 32-value consecutive runs per block.
    Scalar,
    /// One interleaved 128-value block.
    Interleaved,
}

/// Counts of values in a block by exact bit width (0..=32).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthHistogram {
    by_width: [u32; 33],
}

impl WidthHistogram {
    pub fn from_block(block: &[u32]) -> Self {
        let mut by_width = [0u32; 33];
        for &x in block {
            by_width[(32 - x.leading_zeros()) as usize] += 1;
        }
        WidthHistogram { by_width }
    }

    /// Number of values below `2^x`.
    pub fn below(&self, x: u32) -> u32 {
        self.by_width[..=x.min(32) as usize].iter().sum()
    }

    pub fn total(&self) -> u32 {
        self.by_width.iter().sum()
    }

    /// Width of the largest value.
    pub fn max_width(&self) -> u32 {
        self.by_width.iter().rposition(|&c| c > 0).unwrap_or(0) as u32
    }

    /// Number of exceptions at reduced width `bp`.
    pub fn exceptions_at(&self, bp: u32) -> u32 {
        self.total() - self.below(bp)
    }
}

/// Widths chosen for one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WidthChoice {
    pub b: u32,
    pub b_prime: u32,
    pub exceptions: u32,
}

/// Estimated cost in bits of packing a block at `bp` with width `b`:
/// `128 * bp + c(bp) * (b - bp + 8)`.
pub fn patch_cost(h: &WidthHistogram, b: u32, bp: u32) -> u64 {
    let c = h.exceptions_at(bp) as u64;
    BLOCK as u64 * bp as u64 + c * (b - bp + 8) as u64
}

/// Picks `b'` in `0..=b` minimizing [`patch_cost`], preferring the smaller
/// width on ties.
pub fn choose_b_prime(h: &WidthHistogram) -> WidthChoice {
    let b = h.max_width();
    let mut best = (patch_cost(h, b, 0), 0);
    for bp in 1..=b {
        let c = patch_cost(h, b, bp);
        if c < best.0 {
            best = (c, bp);
        }
    }
    WidthChoice {
        b,
        b_prime: best.1,
        exceptions: h.exceptions_at(best.1),
    }
}

fn push_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn read_u32(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    let s = bytes.get(*pos..*pos + 4).ok_or(Error::Truncated {
        offset: *pos,
        needed: (*pos + 4).saturating_sub(bytes.len()),
    })?;
    *pos += 4;
    Ok(u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
}

pub fn encode(x: &[u32], mode: DeltaMode, layout: BaseLayout, out: &mut Vec<u8>) {
    let nblocks = x.len() / BLOCK;
    let body = nblocks * BLOCK;
    let mut deltas = x[..body].to_vec();
    delta_encode_in_place(&mut deltas, mode, SeedVec::ZERO);

    for page in deltas.chunks(PAGE_BLOCKS * BLOCK) {
        encode_page(page, layout, out);
    }
    let prev = if body > 0 { x[body - 1] } else { 0 };
    varint::encode_delta(&x[body..], prev, out);
}

fn encode_page(page: &[u32], layout: BaseLayout, out: &mut Vec<u8>) {
    let mut base = Vec::new();
    let mut meta = Vec::new();
    let mut side: Vec<Vec<u32>> = vec![Vec::new(); 33];
    let mut low = [0u32; BLOCK];

    for block in page.chunks_exact(BLOCK) {
        let choice = choose_b_prime(&WidthHistogram::from_block(block));
        let bp = choice.b_prime;
        meta.extend_from_slice(&[choice.b as u8, bp as u8, choice.exceptions as u8]);
        for (i, &v) in block.iter().enumerate() {
            if bp < 32 && v >> bp != 0 {
                meta.push(i as u8);
                side[(choice.b - bp) as usize].push(v >> bp);
            }
        }
        match layout {
            BaseLayout::Interleaved => pack128_into(block, bp, &mut base),
            BaseLayout::Scalar => {
                let mask = if bp >= 32 { u32::MAX } else { (1 << bp) - 1 };
                for (l, &v) in low.iter_mut().zip(block) {
                    *l = v & mask;
                }
                for run in low.chunks_exact(32) {
                    pack_consecutive(run, bp, &mut base);
                }
            }
        }
    }

    let mut page_bytes = Vec::with_capacity(8 + base.len() * 4 + meta.len());
    push_u32(&mut page_bytes, base.len() as u32);
    for w in &base {
        push_u32(&mut page_bytes, *w);
    }
    push_u32(&mut page_bytes, meta.len() as u32);
    page_bytes.extend_from_slice(&meta);
    let present = (1..=32u32)
        .filter(|&w| !side[w as usize].is_empty())
        .fold(0u32, |m, w| m | 1 << (w - 1));
    push_u32(&mut page_bytes, present);
    let mut packed = Vec::new();
    for w in 1..=32u32 {
        let arr = &mut side[w as usize];
        if arr.is_empty() {
            continue;
        }
        push_u32(&mut page_bytes, arr.len() as u32);
        arr.resize(arr.len().div_ceil(32) * 32, 0);
        packed.clear();
        pack_consecutive(arr, w, &mut packed);
        for p in &packed {
            push_u32(&mut page_bytes, *p);
        }
    }
    push_u32(out, page_bytes.len() as u32);
    out.extend_from_slice(&page_bytes);
}

/// Exception values for one excess width, consumed in order.
struct SideArray {
    values: Vec<u32>,
    next: usize,
}

pub fn decode_into(bytes: &[u8], out: &mut [u32], mode: DeltaMode, layout: BaseLayout) -> Result<usize> {
    let n = out.len();
    let nblocks = n / BLOCK;
    let body = nblocks * BLOCK;
    let mut pos = 0usize;
    let mut seed = SeedVec::ZERO;
    let mut done = 0usize;
    while done < nblocks {
        let page_blocks = (nblocks - done).min(PAGE_BLOCKS);
        let page_len = read_u32(bytes, &mut pos)? as usize;
        let page_end = pos + page_len;
        if page_end > bytes.len() {
            return Err(Error::Truncated {
                offset: pos,
                needed: page_end - bytes.len(),
            });
        }
        let dst = &mut out[done * BLOCK..(done + page_blocks) * BLOCK];
        seed = decode_page(&bytes[pos..page_end], dst, mode, layout, seed)?;
        pos = page_end;
        done += page_blocks;
    }
    let prev = if body > 0 { out[body - 1] } else { 0 };
    pos += varint::decode_delta_into(&bytes[pos..], prev, &mut out[body..])?;
    Ok(pos)
}

fn decode_page(page: &[u8], dst: &mut [u32], mode: DeltaMode, layout: BaseLayout, mut seed: SeedVec) -> Result<SeedVec> {
    let mut pos = 0usize;
    let base_words = read_u32(page, &mut pos)? as usize;
    let base_at = pos;
    pos = base_at
        .checked_add(4 * base_words)
        .filter(|&e| e <= page.len())
        .ok_or_else(|| Error::Corrupt(format!("base section of {base_words} words overruns page")))?;
    let meta_len = read_u32(page, &mut pos)? as usize;
    let meta = page.get(pos..pos + meta_len).ok_or(Error::Truncated {
        offset: pos,
        needed: meta_len,
    })?;
    pos += meta_len;
    let present = read_u32(page, &mut pos)?;

    let mut side: Vec<SideArray> = (0..=32)
        .map(|_| SideArray {
            values: Vec::new(),
            next: 0,
        })
        .collect();
    for w in 1..=32u32 {
        if present & (1 << (w - 1)) == 0 {
            continue;
        }
        let count = read_u32(page, &mut pos)? as usize;
        let padded = count.div_ceil(32) * 32;
        let nwords = padded * w as usize / 32;
        let mut words = vec![0u32; nwords];
        read_words(page, pos, nwords, &mut words)?;
        pos += 4 * nwords;
        let mut values = vec![0u32; padded];
        unpack_consecutive(&words, w, &mut values);
        values.truncate(count);
        side[w as usize].values = values;
    }
    if pos != page.len() {
        return Err(Error::Corrupt(format!("{} stray bytes at end of page", page.len() - pos)));
    }

    let mut words = [0u32; BLOCK];
    let mut base_pos = base_at;
    let mut m = 0usize;
    for block in dst.chunks_exact_mut(BLOCK) {
        let head = meta.get(m..m + 3).ok_or(Error::Truncated { offset: m, needed: 3 })?;
        let (b, bp, count) = (head[0] as u32, head[1] as u32, head[2] as usize);
        m += 3;
        if b > 32 || bp > b {
            return Err(Error::InvalidWidth(b.max(bp)));
        }
        let nwords = 4 * bp as usize;
        if base_pos + 4 * nwords > base_at + 4 * base_words {
            return Err(Error::Corrupt("base blocks overrun their section".into()));
        }
        read_words(page, base_pos, nwords, &mut words)?;
        base_pos += 4 * nwords;
        let block: &mut [u32; BLOCK] = block.try_into().unwrap();
        match layout {
            BaseLayout::Interleaved => {
                unpack128_into(&words, bp, DeltaMode::None, SeedVec::ZERO, block);
            }
            BaseLayout::Scalar => {
                for (r, run) in block.chunks_exact_mut(32).enumerate() {
                    unpack_consecutive(&words[r * bp as usize..], bp, run);
                }
            }
        }
        if count > 0 {
            let positions = meta.get(m..m + count).ok_or(Error::Truncated { offset: m, needed: count })?;
            m += count;
            let arr = &mut side[(b - bp) as usize];
            for &p in positions {
                let p = p as usize;
                if p >= BLOCK {
                    return Err(Error::ExceptionPosition(p as u32));
                }
                let high = *arr.values.get(arr.next).ok_or(Error::ExceptionsExhausted(b - bp))?;
                arr.next += 1;
                block[p] |= high << bp;
            }
        }
        seed = match layout {
            BaseLayout::Interleaved => prefix_sum_vec4_in_place(block, mode, seed),
            BaseLayout::Scalar => prefix_sum_scalar_in_place(block, mode, seed),
        };
    }
    if m != meta.len() {
        return Err(Error::Corrupt("unused metadata bytes".into()));
    }
    Ok(seed)
}

/// Width choice for every full block of `x` after delta coding; used to
/// inspect what the encoder does.
pub fn block_choices(x: &[u32], mode: DeltaMode) -> Vec<WidthChoice> {
    let mut deltas = x[..x.len() / BLOCK * BLOCK].to_vec();
    delta_encode_in_place(&mut deltas, mode, SeedVec::ZERO);
    deltas
        .chunks_exact(BLOCK)
        .map(|b| choose_b_prime(&WidthHistogram::from_block(b)))
        .collect()
}
