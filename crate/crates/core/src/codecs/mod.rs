//! List codecs over sorted `u32` lists.
//!
//! Streams do not record the number of values; callers keep it and pass it
//! back to [`Codec::decode`].

pub mod fastpfor;
pub mod s4bp128;
pub mod varint;

use std::fmt;
use std::str::FromStr;

use crate::delta::DeltaMode;
use crate::error::{Error, Result};
use fastpfor::BaseLayout;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Codec {
    /// Varint with the prefix sum fused into decoding.
    Varint,
    /// Binary packing of 128-integer blocks. With `integrated: false` the
    /// prefix sum runs as a second pass over each block (the `-NI` schemes).
    S4Bp128 { mode: DeltaMode, integrated: bool },
    /// Scalar patched coding with D1.
    FastPfor,
    /// Patched coding over interleaved base blocks.
    S4FastPfor { mode: DeltaMode },
}

impl Codec {
    /// Every registered codec.
    pub fn all() -> Vec<Codec> {
        let mut v = vec![Codec::Varint];
        for mode in DeltaMode::ALL {
            v.push(Codec::S4Bp128 { mode, integrated: true });
            v.push(Codec::S4Bp128 { mode, integrated: false });
        }
        v.push(Codec::FastPfor);
        v.extend(DeltaMode::ALL.map(|mode| Codec::S4FastPfor { mode }));
        v
    }

    pub fn name(&self) -> String {
        match *self {
            Codec::Varint => "varint".into(),
            Codec::S4Bp128 { mode, integrated } => {
                format!("s4-bp128-{mode}{}", if integrated { "" } else { "-ni" })
            }
            Codec::FastPfor => "fastpfor".into(),
            Codec::S4FastPfor { mode } => format!("s4-fastpfor-{mode}"),
        }
    }

    pub fn delta_mode(&self) -> DeltaMode {
        match *self {
            Codec::Varint | Codec::FastPfor => DeltaMode::D1,
            Codec::S4Bp128 { mode, .. } | Codec::S4FastPfor { mode } => mode,
        }
    }

    pub fn is_integrated(&self) -> bool {
        !matches!(self, Codec::S4Bp128 { integrated: false, .. })
    }

    /// Whether the codec uses vectorized unpacking. Indexes pair vectorized
    /// codecs with the vectorized intersections.
    pub fn is_vectorized(&self) -> bool {
        matches!(self, Codec::S4Bp128 { .. } | Codec::S4FastPfor { .. })
    }

    /// Appends the encoding of `x` to `out`.
    pub fn encode_into(&self, x: &[u32], out: &mut Vec<u8>) {
        match *self {
            Codec::Varint => varint::encode_delta(x, 0, out),
            Codec::S4Bp128 { mode, .. } => s4bp128::encode(x, mode, out),
            Codec::FastPfor => fastpfor::encode(x, DeltaMode::D1, BaseLayout::Scalar, out),
            Codec::S4FastPfor { mode } => fastpfor::encode(x, mode, BaseLayout::Interleaved, out),
        }
    }

    pub fn encode(&self, x: &[u32]) -> Vec<u8> {
        let mut out = Vec::with_capacity(x.len() * 2 + 16);
        self.encode_into(x, &mut out);
        out
    }

    /// Decodes `out.len()` values from the front of `bytes`; returns the
    /// number of bytes read.
    pub fn decode_prefix(&self, bytes: &[u8], out: &mut [u32]) -> Result<usize> {
        match *self {
            Codec::Varint => varint::decode_delta_into(bytes, 0, out),
            Codec::S4Bp128 { mode, integrated } => s4bp128::decode_into(bytes, out, mode, integrated),
            Codec::FastPfor => fastpfor::decode_into(bytes, out, DeltaMode::D1, BaseLayout::Scalar),
            Codec::S4FastPfor { mode } => fastpfor::decode_into(bytes, out, mode, BaseLayout::Interleaved),
        }
    }

    /// Decodes a whole stream holding exactly `n` values.
    pub fn decode(&self, bytes: &[u8], n: usize) -> Result<Vec<u32>> {
        let mut out = vec![0u32; n];
        self.decode_to(bytes, &mut out)?;
        Ok(out)
    }

    /// Like [`Codec::decode`] but into a caller buffer of length `n`.
    pub fn decode_to(&self, bytes: &[u8], out: &mut [u32]) -> Result<()> {
        let used = self.decode_prefix(bytes, out)?;
        if used != bytes.len() {
            return Err(Error::LengthMismatch(format!(
                "{} values used {used} of {} bytes",
                out.len(),
                bytes.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Codec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let unknown = || Error::UnknownCodec(s.to_owned());
        let parse_mode = |m: &str| -> Result<DeltaMode> {
            match m.parse::<DeltaMode>() {
                Ok(DeltaMode::None) | Err(_) => Err(unknown()),
                Ok(mode) => Ok(mode),
            }
        };
        match lower.as_str() {
            "varint" => return Ok(Codec::Varint),
            "fastpfor" => return Ok(Codec::FastPfor),
            _ => {}
        }
        if let Some(rest) = lower.strip_prefix("s4-bp128-") {
            let (m, integrated) = match rest.strip_suffix("-ni") {
                Some(m) => (m, false),
                None => (rest, true),
            };
            return Ok(Codec::S4Bp128 {
                mode: parse_mode(m)?,
                integrated,
            });
        }
        if let Some(m) = lower.strip_prefix("s4-fastpfor-") {
            return Ok(Codec::S4FastPfor { mode: parse_mode(m)? });
        }
        Err(unknown())
    }
}

/// Compressed size in bits per integer.
pub fn bits_per_int(codec: &Codec, x: &[u32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    codec.encode(x).len() as f64 * 8.0 / x.len() as f64
}
