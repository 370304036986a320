//! Compression and intersection of sorted 32-bit posting lists.
//!
//! - [`vec4`]: the four-lane kernel every vectorized routine is built on.
//! - [`delta`]: D1/D2/DM/D4 differential coding and prefix sums.
//! - [`bitpack`]: 32-value consecutive and 128-value interleaved bit packing,
//!   with prefix sums fused into unpacking.
//! - [`codecs`]: varint, the S4-BP128 family, FastPFOR and S4-FastPFOR.
//! - [`intersect`]: scalar, galloping, V1, V3, SIMD galloping, Katsov,
//!   the hybrid dispatcher and SvS.
//! - [`index`]: the hyb+m2 bitmap/list hybrid index and the Skipper list.
//! - [`datagen`]: ClusterData and uniform generators, paired lists, and
//!   small-corpus ingestion.
//! - [`listfile`] and [`bench`]: file formats and the benchmark harness
//!   used by the command-line tool.

pub mod bench;
pub mod bitpack;
pub mod codecs;
pub mod datagen;
pub mod delta;
pub mod error;
pub mod index;
pub mod intersect;
pub mod listfile;
pub mod vec4;

pub use codecs::Codec;
pub use delta::{DeltaMode, SeedVec};
pub use error::{Error, Result};
pub use index::{HybridIndex, HybridIndexConfig};
pub use intersect::Algorithm;
pub use vec4::Vec4;

/// Checks that `x` is strictly increasing; the error carries the first
/// offending index.
pub fn check_strictly_increasing(x: &[u32]) -> Result<()> {
    match x.windows(2).position(|w| w[0] >= w[1]) {
        Some(i) => Err(Error::Unsorted(i + 1)),
        None => Ok(()),
    }
}
