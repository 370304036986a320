//! Intersection of sorted, duplicate-free `u32` lists.
//!
//! The pairwise routines take the shorter list `r` first and the longer `f`
//! second. [`intersect`] orders its arguments itself, so any algorithm can be
//! called either way round.
//!
//! V1, V3, SIMD galloping and the scalar routines satisfy the output-to-input
//! property: the result may overwrite the short input, because the k-th match
//! is written only after the k-th element of `r` has been read. The
//! `*_in_place` entry points use that to intersect without allocation.
//!
//! The vectorized routines scan `f` in blocks of `T` integers. Whatever is
//! left of `f` once the full blocks are exhausted is finished with the
//! scalar merge. Inputs with duplicates give unspecified multiplicities.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::vec4::Vec4;

/// Block width of V1.
pub const T_V1: usize = 8;
/// Block width of V3 and SIMD galloping.
pub const T_WIDE: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Scalar,
    Galloping,
    V1,
    V3,
    SimdGalloping,
    Katsov,
    Hybrid,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Scalar,
        Algorithm::Galloping,
        Algorithm::V1,
        Algorithm::V3,
        Algorithm::SimdGalloping,
        Algorithm::Katsov,
        Algorithm::Hybrid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Scalar => "scalar",
            Algorithm::Galloping => "galloping",
            Algorithm::V1 => "v1",
            Algorithm::V3 => "v3",
            Algorithm::SimdGalloping => "simd-galloping",
            Algorithm::Katsov => "katsov",
            Algorithm::Hybrid => "hybrid",
        }
    }

    /// Whether the result may be written over the short input.
    pub fn supports_in_place(&self) -> bool {
        !matches!(self, Algorithm::Katsov)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == lower)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown intersection algorithm {s:?}")))
    }
}

/// Length-ratio bands of the hybrid dispatcher.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntersectConfig {
    /// Below `r1 * |small|` V1 is used.
    pub r1: u64,
    /// Below `r2 * |small|` V3 is used; SIMD galloping above.
    pub r2: u64,
}

impl Default for IntersectConfig {
    fn default() -> Self {
        IntersectConfig { r1: 50, r2: 1000 }
    }
}

impl IntersectConfig {
    pub fn new(r1: u64, r2: u64) -> Result<Self> {
        if r1 >= r2 {
            return Err(Error::InvalidConfig(format!(
                "ratio thresholds must satisfy r1 < r2, got {r1} and {r2}"
            )));
        }
        Ok(IntersectConfig { r1, r2 })
    }

    /// The algorithm used for lists of these lengths (in either order).
    pub fn select(&self, len_a: usize, len_b: usize) -> Algorithm {
        let (small, large) = (len_a.min(len_b) as u64, len_a.max(len_b) as u64);
        if large < self.r1 * small {
            Algorithm::V1
        } else if large < self.r2 * small {
            Algorithm::V3
        } else {
            Algorithm::SimdGalloping
        }
    }
}

/// [`IntersectConfig::select`] with the default bands.
pub fn select_algorithm(len_a: usize, len_b: usize) -> Algorithm {
    IntersectConfig::default().select(len_a, len_b)
}

fn order<'a>(a: &'a [u32], b: &'a [u32]) -> (&'a [u32], &'a [u32]) {
    if a.len() <= b.len() {
        (a, b)
    } else {
        (b, a)
    }
}

/// Intersects `a` and `b` with `algo`. Argument order does not matter.
pub fn intersect(algo: Algorithm, a: &[u32], b: &[u32]) -> Vec<u32> {
    let (r, f) = order(a, b);
    match algo {
        Algorithm::Katsov => intersect_katsov(r, f),
        _ => {
            let mut out = r.to_vec();
            let k = intersect_in_place(algo, &mut out, f);
            out.truncate(k);
            out
        }
    }
}

/// Intersects `r` with `f`, writing the result over the front of `r`, and
/// returns its length. `r` should be the shorter list for the asymmetric
/// algorithms, though the result is correct either way.
///
/// # Panics
///
/// For [`Algorithm::Katsov`], which has no in-place form.
pub fn intersect_in_place(algo: Algorithm, r: &mut [u32], f: &[u32]) -> usize {
    let m = r.len();
    let p = r.as_mut_ptr();
    // SAFETY: `p` is valid for `m` reads and writes, and the output is the
    // input itself, which every kernel below permits.
    unsafe {
        match algo {
            Algorithm::Scalar => scalar_raw(p, m, f, p),
            Algorithm::Galloping => galloping_raw(p, m, f, p),
            Algorithm::V1 => v1_raw(p, m, f, p),
            Algorithm::V3 => v3_raw(p, m, f, p),
            Algorithm::SimdGalloping => simd_galloping_raw(p, m, f, p),
            Algorithm::Hybrid => match select_algorithm(m, f.len()) {
                Algorithm::V1 => v1_raw(p, m, f, p),
                Algorithm::V3 => v3_raw(p, m, f, p),
                _ => simd_galloping_raw(p, m, f, p),
            },
            Algorithm::Katsov => panic!("the Katsov intersection has no in-place form"),
        }
    }
}

macro_rules! fresh {
    ($raw:ident, $r:expr, $f:expr) => {{
        let (r, f) = ($r, $f);
        let mut out = Vec::with_capacity(r.len());
        // SAFETY: `out` has capacity for `r.len()` values and does not
        // overlap `r`; at most `r.len()` values are written.
        unsafe {
            let k = $raw(r.as_ptr(), r.len(), f, out.as_mut_ptr());
            out.set_len(k);
        }
        out
    }};
}

/// Textbook merge; the reference for everything else.
pub fn intersect_scalar(a: &[u32], b: &[u32]) -> Vec<u32> {
    fresh!(scalar_raw, a, b)
}

pub fn intersect_galloping(small: &[u32], large: &[u32]) -> Vec<u32> {
    fresh!(galloping_raw, small, large)
}

pub fn intersect_v1(small: &[u32], large: &[u32]) -> Vec<u32> {
    fresh!(v1_raw, small, large)
}

pub fn intersect_v3(small: &[u32], large: &[u32]) -> Vec<u32> {
    fresh!(v3_raw, small, large)
}

pub fn intersect_simd_galloping(small: &[u32], large: &[u32]) -> Vec<u32> {
    fresh!(simd_galloping_raw, small, large)
}

/// Picks V1, V3 or SIMD galloping from the length ratio.
pub fn intersect_hybrid(a: &[u32], b: &[u32]) -> Vec<u32> {
    intersect(Algorithm::Hybrid, a, b)
}

// Kernel contract shared by the `*_raw` functions: `r` is valid for `m`
// reads, `out` for `m` writes, and `out` either equals `r` or does not
// overlap it. Each returns the number of values written.

/// Merges `r[i..m]` with `f`, appending at `out[k..]`.
#[inline]
unsafe fn merge_tail(r: *const u32, mut i: usize, m: usize, f: &[u32], out: *mut u32, mut k: usize) -> usize {
    let mut j = 0;
    while i < m && j < f.len() {
        let x = *r.add(i);
        let y = f[j];
        if x < y {
            i += 1;
        } else if y < x {
            j += 1;
        } else {
            *out.add(k) = x;
            k += 1;
            i += 1;
            j += 1;
        }
    }
    k
}

unsafe fn scalar_raw(r: *const u32, m: usize, f: &[u32], out: *mut u32) -> usize {
    merge_tail(r, 0, m, f, out, 0)
}

unsafe fn galloping_raw(r: *const u32, m: usize, f: &[u32], out: *mut u32) -> usize {
    let n = f.len();
    if n == 0 {
        return 0;
    }
    let mut j = 0;
    let mut k = 0;
    for i in 0..m {
        let x = *r.add(i);
        if f[j] < x {
            let mut bound = 1;
            while j + bound < n && f[j + bound] < x {
                bound *= 2;
            }
            // f[j + bound / 2] < x, and f[hi] >= x unless hi == n.
            let lo = j + bound / 2 + 1;
            let hi = (j + bound).min(n);
            j = lo + f[lo..hi].partition_point(|&y| y < x);
            if j == n {
                break;
            }
        }
        if f[j] == x {
            *out.add(k) = x;
            k += 1;
        }
    }
    k
}

#[inline(always)]
fn hits<const W: usize>(f: &[u32], at: usize, key: Vec4) -> bool {
    let mut acc = Vec4::ZERO;
    for q in 0..W / 4 {
        acc = acc.or(Vec4::load(f, at + 4 * q).cmp_eq(key));
    }
    acc.movemask() != 0
}

unsafe fn v1_raw(r: *const u32, m: usize, f: &[u32], out: *mut u32) -> usize {
    const T: usize = T_V1;
    let limit = f.len() / T * T;
    let mut j = 0;
    let mut k = 0;
    for i in 0..m {
        let x = *r.add(i);
        while j < limit && f[j + T - 1] < x {
            j += T;
        }
        if j == limit {
            return merge_tail(r, i, m, &f[limit..], out, k);
        }
        if hits::<T>(f, j, Vec4::splat(x)) {
            *out.add(k) = x;
            k += 1;
        }
    }
    k
}

unsafe fn v3_raw(r: *const u32, m: usize, f: &[u32], out: *mut u32) -> usize {
    const T: usize = T_WIDE;
    let limit = f.len() / (4 * T) * (4 * T);
    let mut j = 0;
    let mut k = 0;
    for i in 0..m {
        let x = *r.add(i);
        while j < limit && f[j + 4 * T - 1] < x {
            j += 4 * T;
        }
        if j == limit {
            return merge_tail(r, i, m, &f[limit..], out, k);
        }
        let sub = if f[j + 2 * T - 1] >= x {
            if f[j + T - 1] >= x {
                j
            } else {
                j + T
            }
        } else if f[j + 3 * T - 1] >= x {
            j + 2 * T
        } else {
            j + 3 * T
        };
        if hits::<T>(f, sub, Vec4::splat(x)) {
            *out.add(k) = x;
            k += 1;
        }
    }
    k
}

unsafe fn simd_galloping_raw(r: *const u32, m: usize, f: &[u32], out: *mut u32) -> usize {
    const T: usize = T_WIDE;
    let limit = f.len() / T * T;
    let last = |blk: usize| f[blk * T + T - 1];
    let nblocks = limit / T;
    let mut blk = 0;
    let mut k = 0;
    for i in 0..m {
        let x = *r.add(i);
        if blk == nblocks {
            return merge_tail(r, i, m, &f[limit..], out, k);
        }
        if last(blk) < x {
            // Doubling over block offsets 1, 2, 4, ...; `lo` always ends
            // below x, `hi` at or above it.
            let mut lo = 0;
            let mut hi = 1;
            while blk + hi < nblocks && last(blk + hi) < x {
                lo = hi;
                hi *= 2;
            }
            if blk + hi >= nblocks {
                if last(nblocks - 1) < x {
                    return merge_tail(r, i, m, &f[limit..], out, k);
                }
                hi = nblocks - 1 - blk;
            }
            while lo + 1 < hi {
                let mid = (lo + hi) / 2;
                if last(blk + mid) >= x {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            blk += hi;
        }
        if hits::<T>(f, blk * T, Vec4::splat(x)) {
            *out.add(k) = x;
            k += 1;
        }
    }
    k
}

/// Compares each 4-block of `a` against all four rotations of a 4-block of
/// `b`, then advances whichever block ends lower (both on a tie).
pub fn intersect_katsov(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (na, nb) = (a.len() / 4 * 4, b.len() / 4 * 4);
    let (mut i, mut j) = (0, 0);
    while i < na && j < nb {
        let va = Vec4::load(a, i);
        let vb = Vec4::load(b, j);
        let eq = va
            .cmp_eq(vb)
            .or(va.cmp_eq(vb.rotate_lanes(1)))
            .or(va.cmp_eq(vb.rotate_lanes(2)))
            .or(va.cmp_eq(vb.rotate_lanes(3)));
        if eq.movemask() != 0 {
            for lane in 0..4 {
                if eq.lane(lane) != 0 {
                    out.push(a[i + lane]);
                }
            }
        }
        let (amax, bmax) = (a[i + 3], b[j + 3]);
        if amax <= bmax {
            i += 4;
        }
        if bmax <= amax {
            j += 4;
        }
    }
    // Matches already emitted lie at or below the last finished block of
    // the exhausted list, so the tails cannot repeat them.
    let start = out.len();
    out.resize(start + (a.len() - i).min(b.len() - j), 0);
    // SAFETY: the destination has room for min(|a tail|, |b tail|) values
    // and is a fresh region distinct from `a`.
    let k = unsafe { merge_tail(a.as_ptr().add(i), 0, a.len() - i, &b[j..], out.as_mut_ptr().add(start), 0) };
    out.truncate(start + k);
    out
}

/// Set-vs-set: intersects the lists smallest first, keeping the running
/// result in one buffer sized to the smallest list.
pub fn svs(lists: &[&[u32]], algo: Algorithm) -> Result<Vec<u32>> {
    if lists.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted: Vec<&[u32]> = lists.to_vec();
    sorted.sort_by_key(|l| l.len());
    let mut buf = sorted[0].to_vec();
    for next in &sorted[1..] {
        if buf.is_empty() {
            break;
        }
        svs_step(algo, &mut buf, next);
    }
    Ok(buf)
}

/// One SvS step: replaces `buf` by `buf ∩ next`.
pub fn svs_step(algo: Algorithm, buf: &mut Vec<u32>, next: &[u32]) {
    if algo.supports_in_place() {
        let k = intersect_in_place(algo, buf, next);
        buf.truncate(k);
    } else {
        *buf = intersect(algo, buf, next);
    }
}
