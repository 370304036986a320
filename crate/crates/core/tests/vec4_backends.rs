//! The SSE2 backend must agree with the scalar lane loop on every operation.

#![cfg(target_arch = "x86_64")]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simdix::vec4::{scalar, sse2, Vec4};

const TRIALS: usize = 1_000_000;

fn lane(rng: &mut ChaCha8Rng) -> u32 {
    // Bias toward edge values so wraparound and equality are exercised.
    match rng.random_range(0..8) {
        0 => 0,
        1 => u32::MAX,
        2 => rng.random_range(0..4),
        3 => 1 << rng.random_range(0..32),
        _ => rng.random(),
    }
}

fn vec(rng: &mut ChaCha8Rng) -> Vec4 {
    Vec4([lane(rng), lane(rng), lane(rng), lane(rng)])
}

#[test]
fn backends_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..TRIALS {
        let a = vec(&mut rng);
        // Every fourth pair shares lanes so equality masks are not all zero.
        let b = if i % 4 == 0 { a.rotate_lanes(i / 4) } else { vec(&mut rng) };
        let k = rng.random_range(0..32);
        let v = lane(&mut rng);
        assert_eq!(sse2::splat(v), scalar::splat(v));
        assert_eq!(sse2::add(a, b), scalar::add(a, b), "add {a:?} {b:?}");
        assert_eq!(sse2::sub(a, b), scalar::sub(a, b), "sub {a:?} {b:?}");
        assert_eq!(sse2::and(a, b), scalar::and(a, b));
        assert_eq!(sse2::or(a, b), scalar::or(a, b));
        assert_eq!(sse2::shr(a, k), scalar::shr(a, k), "shr {a:?} {k}");
        assert_eq!(sse2::shl(a, k), scalar::shl(a, k), "shl {a:?} {k}");
        assert_eq!(sse2::shift_lanes::<1>(a), scalar::shift_lanes::<1>(a));
        assert_eq!(sse2::shift_lanes::<2>(a), scalar::shift_lanes::<2>(a));
        assert_eq!(sse2::shift_lanes::<3>(a), scalar::shift_lanes::<3>(a));
        assert_eq!(sse2::splat_last(a), scalar::splat_last(a));
        assert_eq!(sse2::dup_high_pair(a), scalar::dup_high_pair(a));
        assert_eq!(sse2::rotate::<1>(a), scalar::rotate::<1>(a));
        assert_eq!(sse2::rotate::<2>(a), scalar::rotate::<2>(a));
        assert_eq!(sse2::rotate::<3>(a), scalar::rotate::<3>(a));
        assert_eq!(sse2::cmp_eq(a, b), scalar::cmp_eq(a, b), "cmp_eq {a:?} {b:?}");
        assert_eq!(sse2::eq_mask(a, b), scalar::eq_mask(a, b));
        assert_eq!(sse2::movemask(a), scalar::movemask(a), "movemask {a:?}");
    }
}
