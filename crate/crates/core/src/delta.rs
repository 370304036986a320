//! Differential coding and its inverse.
//!
//! Four lags are supported. `D1` subtracts the previous integer, `D2` the
//! one two positions back, `D4` the one four back, and `DM` subtracts the
//! last integer of the previous aligned quad from all four integers of the
//! current quad. The values before the start of a list come from a
//! [`SeedVec`], all zeros for a fresh list, so the leading deltas are the
//! values themselves.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::vec4::Vec4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeltaMode {
    /// No differential coding; prefix sum is the identity.
    None,
    D1,
    D2,
    DM,
    D4,
}

impl DeltaMode {
    pub const ALL: [DeltaMode; 4] = [DeltaMode::D1, DeltaMode::D2, DeltaMode::DM, DeltaMode::D4];

    /// How far back the subtrahend sits, in integers.
    pub fn lag(self) -> usize {
        match self {
            DeltaMode::None => 0,
            DeltaMode::D1 => 1,
            DeltaMode::D2 => 2,
            DeltaMode::DM | DeltaMode::D4 => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeltaMode::None => "none",
            DeltaMode::D1 => "d1",
            DeltaMode::D2 => "d2",
            DeltaMode::DM => "dm",
            DeltaMode::D4 => "d4",
        }
    }

    /// One vector step of the prefix sum: `t` holds four deltas, `v` the
    /// previous four decoded integers. Returns the next four integers.
    #[inline(always)]
    pub fn vec_step(self, t: Vec4, v: Vec4) -> Vec4 {
        match self {
            DeltaMode::None => t,
            DeltaMode::D4 => t.add(v),
            DeltaMode::DM => t.add(v.splat_last()),
            DeltaMode::D2 => {
                let s = t.add(t.shift_lanes(2));
                s.add(v.dup_high_pair())
            }
            DeltaMode::D1 => {
                let s = t.add(t.shift_lanes(2));
                let s = s.add(s.shift_lanes(1));
                s.add(v.splat_last())
            }
        }
    }
}

impl fmt::Display for DeltaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeltaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(DeltaMode::None),
            "d1" => Ok(DeltaMode::D1),
            "d2" => Ok(DeltaMode::D2),
            "dm" => Ok(DeltaMode::DM),
            "d4" => Ok(DeltaMode::D4),
            _ => Err(Error::UnknownDeltaMode(s.to_owned())),
        }
    }
}

/// The four integers preceding the current position, lane 3 being the most
/// recent. Starts at zero and becomes the last four decoded integers after
/// each block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SeedVec(pub Vec4);

impl SeedVec {
    pub const ZERO: SeedVec = SeedVec(Vec4::ZERO);

    /// Seed after having produced `values` on top of `self`.
    pub fn advance(self, values: &[u32]) -> SeedVec {
        let n = values.len();
        if n >= 4 {
            return SeedVec(Vec4::load(values, n - 4));
        }
        let mut lanes = [0u32; 4];
        let old = self.0.lanes();
        lanes[..4 - n].copy_from_slice(&old[n..]);
        lanes[4 - n..].copy_from_slice(values);
        SeedVec(Vec4(lanes))
    }
}

/// The value `lag` positions before index `i` of `x`, reaching into `seed`
/// for indices before the start.
#[inline(always)]
fn predecessor(x: &[u32], i: usize, mode: DeltaMode, seed: &[u32; 4]) -> u32 {
    let back = match mode {
        DeltaMode::None => return 0,
        // DM subtracts the last integer of the previous quad.
        DeltaMode::DM => i % 4 + 1,
        m => m.lag(),
    };
    if i >= back {
        x[i - back]
    } else {
        seed[4 - (back - i)]
    }
}

/// Forward differential coding starting from the zero seed.
pub fn delta_encode(x: &[u32], mode: DeltaMode) -> Vec<u32> {
    delta_encode_seeded(x, mode, SeedVec::ZERO).0
}

/// Forward differential coding against `seed`; also returns the seed for
/// the next chunk.
pub fn delta_encode_seeded(x: &[u32], mode: DeltaMode, seed: SeedVec) -> (Vec<u32>, SeedVec) {
    let s = seed.0.lanes();
    let out = (0..x.len()).map(|i| x[i].wrapping_sub(predecessor(x, i, mode, &s))).collect();
    (out, seed.advance(x))
}

/// In-place forward differential coding of `buf` against `seed`.
pub fn delta_encode_in_place(buf: &mut [u32], mode: DeltaMode, seed: SeedVec) -> SeedVec {
    let next = seed.advance(buf);
    if mode == DeltaMode::None {
        return next;
    }
    let s = seed.0.lanes();
    // Walk backwards so every predecessor is still an original value.
    for i in (0..buf.len()).rev() {
        buf[i] = buf[i].wrapping_sub(predecessor(buf, i, mode, &s));
    }
    next
}

/// Scalar prefix sum, the inverse of [`delta_encode_seeded`].
pub fn prefix_sum(deltas: &[u32], mode: DeltaMode, seed: SeedVec) -> (Vec<u32>, SeedVec) {
    let mut out = deltas.to_vec();
    let seed = prefix_sum_scalar_in_place(&mut out, mode, seed);
    (out, seed)
}

/// Scalar in-place prefix sum over any length.
pub fn prefix_sum_scalar_in_place(buf: &mut [u32], mode: DeltaMode, seed: SeedVec) -> SeedVec {
    if mode != DeltaMode::None {
        let s = seed.0.lanes();
        for i in 0..buf.len() {
            buf[i] = buf[i].wrapping_add(predecessor(buf, i, mode, &s));
        }
    }
    seed.advance(buf)
}

/// Vectorized in-place prefix sum. Whole quads take the [`Vec4`] path; a
/// trailing partial quad falls back to the scalar loop.
pub fn prefix_sum_vec4_in_place(buf: &mut [u32], mode: DeltaMode, seed: SeedVec) -> SeedVec {
    if mode == DeltaMode::None {
        return seed.advance(buf);
    }
    let quads = buf.len() / 4 * 4;
    let mut v = seed.0;
    for at in (0..quads).step_by(4) {
        v = mode.vec_step(Vec4::load(buf, at), v);
        v.store(buf, at);
    }
    let (_, tail) = buf.split_at_mut(quads);
    prefix_sum_scalar_in_place(tail, mode, SeedVec(v))
}

/// Mean delta magnitude and mean bit width for one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaGrowth {
    pub mode: DeltaMode,
    pub mean_delta: f64,
    /// Mean of `floor(log2(delta)) + 1`, counting zero deltas as width 0.
    pub mean_bits: f64,
}

/// Delta size statistics for each of the four modes.
///
/// Deltas taken against the zero seed are skipped when the list is longer
/// than the lag, since they are the raw leading values; shorter lists use
/// every delta.
pub fn delta_growth_stats(x: &[u32]) -> Result<Vec<DeltaGrowth>, Error> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(DeltaMode::ALL
        .iter()
        .map(|&mode| {
            let deltas = delta_encode(x, mode);
            let skip = if x.len() > mode.lag() { mode.lag() } else { 0 };
            let body = &deltas[skip..];
            let n = body.len() as f64;
            let sum: f64 = body.iter().map(|&d| d as f64).sum();
            let bits: f64 = body.iter().map(|&d| (32 - d.leading_zeros()) as f64).sum();
            DeltaGrowth {
                mode,
                mean_delta: sum / n,
                mean_bits: bits / n,
            }
        })
        .collect())
}
