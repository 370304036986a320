//! Four-lane 32-bit vector kernel.
//!
//! Every vectorized routine in the crate is written against [`Vec4`]. Two
//! backends implement it: [`scalar`], a lane loop that serves as the
//! reference, and `sse2`, used on x86-64 unless the `scalar` feature is
//! enabled. The backend is fixed at build time. Both must agree bit for bit;
//! `tests/vec4_backends.rs` checks that on random inputs.
//!
//! Lane 0 is the lowest-addressed integer of a loaded window. All arithmetic
//! wraps modulo 2^32.

use std::fmt;

/// Four unsigned 32-bit lanes, lane 0 first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(C, align(16))]
pub struct Vec4(pub [u32; 4]);

impl fmt::Debug for Vec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a}, {b}, {c}, {d})")
    }
}

impl From<[u32; 4]> for Vec4 {
    fn from(lanes: [u32; 4]) -> Self {
        Vec4(lanes)
    }
}

impl From<Vec4> for [u32; 4] {
    fn from(v: Vec4) -> Self {
        v.0
    }
}

/// Name of the backend compiled into this build.
pub const BACKEND: &str = active::NAME;

// Lane operations keep their intrinsic names rather than operator traits.
#[allow(clippy::should_implement_trait)]
impl Vec4 {
    pub const ZERO: Vec4 = Vec4([0; 4]);
    pub const ONES: Vec4 = Vec4([u32::MAX; 4]);

    #[inline(always)]
    pub const fn new(a: u32, b: u32, c: u32, d: u32) -> Self {
        Vec4([a, b, c, d])
    }

    #[inline(always)]
    pub fn lanes(self) -> [u32; 4] {
        self.0
    }

    #[inline(always)]
    pub fn lane(self, i: usize) -> u32 {
        self.0[i]
    }

    /// Loads `src[at..at + 4]`.
    #[inline(always)]
    pub fn load(src: &[u32], at: usize) -> Self {
        let w = &src[at..at + 4];
        Vec4([w[0], w[1], w[2], w[3]])
    }

    /// Stores the lanes into `dst[at..at + 4]`.
    #[inline(always)]
    pub fn store(self, dst: &mut [u32], at: usize) {
        dst[at..at + 4].copy_from_slice(&self.0);
    }

    #[inline(always)]
    pub fn splat(v: u32) -> Self {
        active::splat(v)
    }

    #[inline(always)]
    pub fn add(self, rhs: Vec4) -> Vec4 {
        active::add(self, rhs)
    }

    #[inline(always)]
    pub fn sub(self, rhs: Vec4) -> Vec4 {
        active::sub(self, rhs)
    }

    #[inline(always)]
    pub fn and(self, rhs: Vec4) -> Vec4 {
        active::and(self, rhs)
    }

    #[inline(always)]
    pub fn or(self, rhs: Vec4) -> Vec4 {
        active::or(self, rhs)
    }

    /// Logical right shift of every lane.
    ///
    /// # Panics
    ///
    /// If `k > 31`. See [`Vec4::checked_shr`].
    #[inline(always)]
    pub fn shr(self, k: u32) -> Vec4 {
        assert!(k < 32, "lane shift out of range: {k}");
        active::shr(self, k)
    }

    /// Left shift of every lane; panics if `k > 31`.
    #[inline(always)]
    pub fn shl(self, k: u32) -> Vec4 {
        assert!(k < 32, "lane shift out of range: {k}");
        active::shl(self, k)
    }

    pub fn checked_shr(self, k: u32) -> Option<Vec4> {
        (k < 32).then(|| active::shr(self, k))
    }

    pub fn checked_shl(self, k: u32) -> Option<Vec4> {
        (k < 32).then(|| active::shl(self, k))
    }

    /// Moves every lane `n` positions toward lane 3, discarding what falls
    /// off and zero-filling from lane 0: `(a, b, c, d)` with `n = 2` becomes
    /// `(0, 0, a, b)`.
    ///
    /// # Panics
    ///
    /// If `n > 4`.
    #[inline(always)]
    pub fn shift_lanes(self, n: usize) -> Vec4 {
        match n {
            0 => self,
            1 => active::shift_lanes::<1>(self),
            2 => active::shift_lanes::<2>(self),
            3 => active::shift_lanes::<3>(self),
            4 => Vec4::ZERO,
            _ => panic!("lane shift out of range: {n}"),
        }
    }

    /// Lane `i` of the result is lane `mask[i]` of `self`.
    ///
    /// Runtime masks go through the lane loop on every backend; the kernels
    /// use the fixed permutations [`Vec4::splat_last`] and
    /// [`Vec4::dup_high_pair`].
    ///
    /// # Panics
    ///
    /// If any index is above 3.
    pub fn shuffle(self, mask: [usize; 4]) -> Vec4 {
        self.checked_shuffle(mask)
            .unwrap_or_else(|| panic!("shuffle index out of range: {mask:?}"))
    }

    pub fn checked_shuffle(self, mask: [usize; 4]) -> Option<Vec4> {
        if mask.iter().any(|&m| m > 3) {
            return None;
        }
        Some(scalar::shuffle(self, mask))
    }

    /// `(x1, x2, x3, x4) -> (x4, x4, x4, x4)`.
    #[inline(always)]
    pub fn splat_last(self) -> Vec4 {
        active::splat_last(self)
    }

    /// `(x1, x2, x3, x4) -> (x3, x4, x3, x4)`.
    #[inline(always)]
    pub fn dup_high_pair(self) -> Vec4 {
        active::dup_high_pair(self)
    }

    /// Lane `i` of the result is lane `(i + n) % 4`: `(a, b, c, d)` with
    /// `n = 1` becomes `(b, c, d, a)`.
    #[inline(always)]
    pub fn rotate_lanes(self, n: usize) -> Vec4 {
        match n % 4 {
            0 => self,
            1 => active::rotate::<1>(self),
            2 => active::rotate::<2>(self),
            _ => active::rotate::<3>(self),
        }
    }

    /// Bit `i` is set iff lane `i` of both vectors is equal.
    #[inline(always)]
    pub fn eq_mask(self, rhs: Vec4) -> u8 {
        active::eq_mask(self, rhs)
    }

    /// All-ones lanes where equal, zero elsewhere.
    #[inline(always)]
    pub fn cmp_eq(self, rhs: Vec4) -> Vec4 {
        active::cmp_eq(self, rhs)
    }

    /// Bit `i` is the top bit of lane `i`, so a `cmp_eq` result maps to its
    /// lane mask.
    #[inline(always)]
    pub fn movemask(self) -> u8 {
        active::movemask(self)
    }
}

/// Portable lane-loop reference backend.
pub mod scalar {
    use super::Vec4;

    pub const NAME: &str = "scalar";

    #[inline(always)]
    fn map2(a: Vec4, b: Vec4, f: impl Fn(u32, u32) -> u32) -> Vec4 {
        Vec4(std::array::from_fn(|i| f(a.0[i], b.0[i])))
    }

    #[inline(always)]
    pub fn splat(v: u32) -> Vec4 {
        Vec4([v; 4])
    }

    #[inline(always)]
    pub fn add(a: Vec4, b: Vec4) -> Vec4 {
        map2(a, b, u32::wrapping_add)
    }

    #[inline(always)]
    pub fn sub(a: Vec4, b: Vec4) -> Vec4 {
        map2(a, b, u32::wrapping_sub)
    }

    #[inline(always)]
    pub fn and(a: Vec4, b: Vec4) -> Vec4 {
        map2(a, b, |x, y| x & y)
    }

    #[inline(always)]
    pub fn or(a: Vec4, b: Vec4) -> Vec4 {
        map2(a, b, |x, y| x | y)
    }

    #[inline(always)]
    pub fn shr(a: Vec4, k: u32) -> Vec4 {
        Vec4(a.0.map(|x| x >> k))
    }

    #[inline(always)]
    pub fn shl(a: Vec4, k: u32) -> Vec4 {
        Vec4(a.0.map(|x| x << k))
    }

    #[inline(always)]
    pub fn shift_lanes<const N: usize>(a: Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| if i >= N { a.0[i - N] } else { 0 }))
    }

    #[inline(always)]
    pub fn shuffle(a: Vec4, mask: [usize; 4]) -> Vec4 {
        Vec4(mask.map(|m| a.0[m]))
    }

    #[inline(always)]
    pub fn splat_last(a: Vec4) -> Vec4 {
        shuffle(a, [3, 3, 3, 3])
    }

    #[inline(always)]
    pub fn dup_high_pair(a: Vec4) -> Vec4 {
        shuffle(a, [2, 3, 2, 3])
    }

    #[inline(always)]
    pub fn rotate<const N: usize>(a: Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| a.0[(i + N) % 4]))
    }

    #[inline(always)]
    pub fn cmp_eq(a: Vec4, b: Vec4) -> Vec4 {
        map2(a, b, |x, y| if x == y { u32::MAX } else { 0 })
    }

    #[inline(always)]
    pub fn movemask(a: Vec4) -> u8 {
        a.0.iter().enumerate().fold(0, |m, (i, &x)| m | (((x >> 31) as u8) << i))
    }

    #[inline(always)]
    pub fn eq_mask(a: Vec4, b: Vec4) -> u8 {
        (0..4).fold(0, |m, i| m | (((a.0[i] == b.0[i]) as u8) << i))
    }
}

/// SSE2 backend. SSE2 is part of the x86-64 baseline, so no runtime
/// detection is needed.
#[cfg(target_arch = "x86_64")]
pub mod sse2 {
    use super::Vec4;
    use std::arch::x86_64::*;

    pub const NAME: &str = "sse2";

    #[inline(always)]
    fn to_m(a: Vec4) -> __m128i {
        // SAFETY: both types are 16 bytes of plain integer data.
        unsafe { std::mem::transmute::<[u32; 4], __m128i>(a.0) }
    }

    #[inline(always)]
    fn from_m(m: __m128i) -> Vec4 {
        // SAFETY: as above.
        Vec4(unsafe { std::mem::transmute::<__m128i, [u32; 4]>(m) })
    }

    #[inline(always)]
    pub fn splat(v: u32) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_set1_epi32(v as i32)) }
    }

    #[inline(always)]
    pub fn add(a: Vec4, b: Vec4) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_add_epi32(to_m(a), to_m(b))) }
    }

    #[inline(always)]
    pub fn sub(a: Vec4, b: Vec4) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_sub_epi32(to_m(a), to_m(b))) }
    }

    #[inline(always)]
    pub fn and(a: Vec4, b: Vec4) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_and_si128(to_m(a), to_m(b))) }
    }

    #[inline(always)]
    pub fn or(a: Vec4, b: Vec4) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_or_si128(to_m(a), to_m(b))) }
    }

    #[inline(always)]
    pub fn shr(a: Vec4, k: u32) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_srl_epi32(to_m(a), _mm_cvtsi32_si128(k as i32))) }
    }

    #[inline(always)]
    pub fn shl(a: Vec4, k: u32) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_sll_epi32(to_m(a), _mm_cvtsi32_si128(k as i32))) }
    }

    #[inline(always)]
    pub fn shift_lanes<const N: usize>(a: Vec4) -> Vec4 {
        // Lane 0 sits at the low address, so moving lanes upward is a byte
        // shift left of the register.
        let m = to_m(a);
        // SAFETY: SSE2 is always present on x86-64.
        from_m(unsafe {
            match N {
                1 => _mm_slli_si128::<4>(m),
                2 => _mm_slli_si128::<8>(m),
                3 => _mm_slli_si128::<12>(m),
                _ => unreachable!(),
            }
        })
    }

    #[inline(always)]
    pub fn splat_last(a: Vec4) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_shuffle_epi32::<0b11_11_11_11>(to_m(a))) }
    }

    #[inline(always)]
    pub fn dup_high_pair(a: Vec4) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_shuffle_epi32::<0b11_10_11_10>(to_m(a))) }
    }

    #[inline(always)]
    pub fn rotate<const N: usize>(a: Vec4) -> Vec4 {
        let m = to_m(a);
        // SAFETY: SSE2 is always present on x86-64.
        from_m(unsafe {
            match N {
                1 => _mm_shuffle_epi32::<0b00_11_10_01>(m),
                2 => _mm_shuffle_epi32::<0b01_00_11_10>(m),
                3 => _mm_shuffle_epi32::<0b10_01_00_11>(m),
                _ => unreachable!(),
            }
        })
    }

    #[inline(always)]
    pub fn cmp_eq(a: Vec4, b: Vec4) -> Vec4 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { from_m(_mm_cmpeq_epi32(to_m(a), to_m(b))) }
    }

    #[inline(always)]
    pub fn movemask(a: Vec4) -> u8 {
        // SAFETY: SSE2 is always present on x86-64.
        unsafe { _mm_movemask_ps(_mm_castsi128_ps(to_m(a))) as u8 }
    }

    #[inline(always)]
    pub fn eq_mask(a: Vec4, b: Vec4) -> u8 {
        movemask(cmp_eq(a, b))
    }
}

#[cfg(all(target_arch = "x86_64", not(feature = "scalar")))]
use sse2 as active;

#[cfg(any(not(target_arch = "x86_64"), feature = "scalar"))]
use scalar as active;
