//! On-disk list formats.
//!
//! Plain list: little-endian `u32` count, then `count` little-endian `u32`
//! values.
//!
//! Compressed list:
//!
//! ```text
//! b"SXCL"                 magic
//! u8                      codec name length, then the name in ASCII
//! u32                     value count
//! u32                     payload length in bytes
//! payload                 the codec stream
//! ```
//!
//! All integers are little-endian.

use std::io::{Read, Write};

use crate::codecs::Codec;
use crate::error::{Error, Result};

pub const COMPRESSED_MAGIC: &[u8; 4] = b"SXCL";

pub fn write_list<W: Write>(mut w: W, x: &[u32]) -> Result<()> {
    let count = u32::try_from(x.len()).map_err(|_| Error::InvalidSpec(format!("list of {} values is too long", x.len())))?;
    let mut buf = Vec::with_capacity(4 + 4 * x.len());
    buf.extend_from_slice(&count.to_le_bytes());
    for v in x {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn encode_list(x: &[u32]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_list(&mut buf, x)?;
    Ok(buf)
}

/// Parses a plain list file. The byte length must match the count exactly.
pub fn decode_list(bytes: &[u8]) -> Result<Vec<u32>> {
    let count = read_u32(bytes, 0)? as usize;
    let expected = 4 + 4 * count;
    if bytes.len() != expected {
        return Err(Error::LengthMismatch(format!(
            "list header says {count} values ({expected} bytes) but the file has {} bytes",
            bytes.len()
        )));
    }
    Ok(bytes[4..]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn read_list<R: Read>(mut r: R) -> Result<Vec<u32>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_list(&bytes)
}

/// Like [`decode_list`] but also requires strictly increasing values.
pub fn decode_sorted_list(bytes: &[u8]) -> Result<Vec<u32>> {
    let x = decode_list(bytes)?;
    crate::check_strictly_increasing(&x)?;
    Ok(x)
}

pub fn encode_compressed(codec: Codec, x: &[u32]) -> Result<Vec<u8>> {
    let count = u32::try_from(x.len()).map_err(|_| Error::InvalidSpec(format!("list of {} values is too long", x.len())))?;
    let name = codec.name();
    let payload = codec.encode(x);
    let mut out = Vec::with_capacity(payload.len() + 16 + name.len());
    out.extend_from_slice(COMPRESSED_MAGIC);
    out.push(name.len() as u8);
    out.extend_from_slice(name.as_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Parses a compressed list file and returns the codec and decoded values.
pub fn decode_compressed(bytes: &[u8]) -> Result<(Codec, Vec<u32>)> {
    if bytes.get(..4) != Some(COMPRESSED_MAGIC) {
        return Err(Error::Corrupt("not a compressed list file (bad magic)".into()));
    }
    let name_len = *bytes.get(4).ok_or(Error::Truncated { offset: 4, needed: 1 })? as usize;
    let name = bytes.get(5..5 + name_len).ok_or(Error::Truncated {
        offset: 5,
        needed: name_len,
    })?;
    let name = std::str::from_utf8(name).map_err(|_| Error::Corrupt("codec name is not UTF-8".into()))?;
    let codec: Codec = name.parse()?;
    let mut pos = 5 + name_len;
    let count = read_u32(bytes, pos)? as usize;
    let payload_len = read_u32(bytes, pos + 4)? as usize;
    pos += 8;
    if bytes.len() != pos + payload_len {
        return Err(Error::LengthMismatch(format!(
            "payload length {payload_len} does not match the {} bytes present",
            bytes.len().saturating_sub(pos)
        )));
    }
    let x = codec.decode(&bytes[pos..], count)?;
    Ok((codec, x))
}

fn read_u32(bytes: &[u8], pos: usize) -> Result<u32> {
    let b = bytes.get(pos..pos + 4).ok_or(Error::Truncated {
        offset: pos,
        needed: (pos + 4).saturating_sub(bytes.len()),
    })?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}
