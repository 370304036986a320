//! The hyb+m2 index: posting lists split by document range, each piece
//! stored as a bitmap when dense enough and compressed otherwise.
//!
//! The document-id space `[0, universe)` is cut into `parts` equal-width
//! ranges. Within a part, a term's sublist of length `len` over a range of
//! `w` ids becomes a bitmap iff `w <= B * len`, i.e. its average gap is at
//! most `B`. `B = 0` disables bitmaps. Compressed sublists hold ids relative
//! to the start of their part.
//!
//! A conjunctive query runs part by part: the compressed sublists are
//! decoded and intersected smallest first (SvS), and the survivors are then
//! checked against the bitmaps in increasing popcount order. When every
//! term is a bitmap the bitmaps are ANDed word by word.
//!
//! With `skip_block` set, every compressed sublist also carries a
//! [`SkipperList`], and [`HybridIndex::query_skipmode`] intersects against
//! those instead of decoding the longer lists.
//!
//! # File format
//!
//! Little-endian throughout.
//!
//! ```text
//! b"SXHI"  u16 version (1)
//! u32 B    u8 codec-name length, codec name    u32 parts    u32 skip_block (0: none)
//! u32 universe    u32 term count
//! per part:
//!   u32 lo   u32 hi   u32 sublist count
//!   per sublist, by increasing term id:
//!     u32 term   u8 tag
//!     tag 0 (bitmap):     u32 word count, then u64 words
//!     tag 1 (compressed): u32 length, u32 byte count, then the codec stream
//! ```
//!
//! Skip structures are not stored; they are rebuilt on load.

use std::collections::BTreeMap;
use std::io::Write;

use crate::codecs::{varint, Codec};
use crate::error::{Error, Result};
use crate::intersect::{svs_step, Algorithm};

pub const MAGIC: &[u8; 4] = b"SXHI";
pub const VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HybridIndexConfig {
    /// Average-gap threshold for bitmaps; 0 disables them.
    pub b: u32,
    pub codec: Codec,
    pub parts: u32,
    /// Sampling interval of the skip structures, if any.
    pub skip_block: Option<u32>,
}

impl HybridIndexConfig {
    pub fn new(b: u32, codec: Codec, parts: u32) -> Self {
        HybridIndexConfig {
            b,
            codec,
            parts,
            skip_block: None,
        }
    }

    pub fn with_skip_block(mut self, block: u32) -> Self {
        self.skip_block = Some(block);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.parts == 0 {
            return Err(Error::InvalidConfig("parts must be at least 1".into()));
        }
        if self.skip_block == Some(0) {
            return Err(Error::InvalidConfig("skip block must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether a sublist of `len` ids over a part of `range` ids is stored
    /// as a bitmap.
    pub fn is_bitmap(&self, range: u64, len: usize) -> bool {
        self.b > 0 && len > 0 && range <= self.b as u64 * len as u64
    }

    /// The pairwise algorithm used by SvS: vectorized codecs pair with the
    /// hybrid intersection, scalar codecs with galloping.
    pub fn svs_algorithm(&self) -> Algorithm {
        if self.codec.is_vectorized() {
            Algorithm::Hybrid
        } else {
            Algorithm::Galloping
        }
    }
}

/// Bit `d` is set iff id `d` (relative to the part start) is present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitmap {
    words: Vec<u64>,
    popcount: u32,
}

impl Bitmap {
    pub fn from_sorted(ids: &[u32], range: u32) -> Self {
        let mut words = vec![0u64; (range as usize).div_ceil(64)];
        for &d in ids {
            words[d as usize / 64] |= 1 << (d % 64);
        }
        Bitmap {
            words,
            popcount: ids.len() as u32,
        }
    }

    fn from_words(words: Vec<u64>) -> Self {
        let popcount = words.iter().map(|w| w.count_ones()).sum();
        Bitmap { words, popcount }
    }

    pub fn popcount(&self) -> u32 {
        self.popcount
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn byte_len(&self) -> usize {
        self.words.len() * 8
    }

    #[inline]
    pub fn contains(&self, d: u32) -> bool {
        self.words.get(d as usize / 64).is_some_and(|w| w >> (d % 64) & 1 == 1)
    }

    /// Appends the set positions plus `base` to `out`.
    pub fn extend_ids(&self, base: u32, out: &mut Vec<u32>) {
        extend_ones(&self.words, base, out);
    }
}

fn extend_ones(words: &[u64], base: u32, out: &mut Vec<u32>) {
    for (i, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            out.push(base + (i as u32) * 64 + w.trailing_zeros());
            w &= w - 1;
        }
    }
}

/// Varint D1 stream with a sample of `(value, offset)` every `block`
/// integers, where `offset` is the stream position just after that value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkipperList {
    bytes: Vec<u8>,
    samples: Vec<(u32, u32)>,
    len: usize,
    block: usize,
}

impl SkipperList {
    /// Default sampling interval.
    pub const BLOCK: usize = 32;

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn stream_bytes(&self) -> usize {
        self.bytes.len()
    }

    /// Size of the sample array, 8 bytes per sample.
    pub fn sample_bytes(&self) -> usize {
        self.samples.len() * 8
    }

    /// Storage added by the sample array, in bits per integer.
    pub fn sample_bits_per_int(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        self.sample_bytes() as f64 * 8.0 / self.len as f64
    }

    /// Decodes block `k` into `out` (cleared first).
    fn decode_block(&self, k: usize, out: &mut Vec<u32>) -> Result<()> {
        out.clear();
        let (first, offset) = self.samples[k];
        let count = self.block.min(self.len - k * self.block);
        out.resize(count, 0);
        out[0] = first;
        varint::decode_delta_into(&self.bytes[offset as usize..], first, &mut out[1..])?;
        Ok(())
    }

    pub fn decode_all(&self) -> Result<Vec<u32>> {
        let mut out = vec![0u32; self.len];
        varint::decode_delta_into(&self.bytes, 0, &mut out)?;
        Ok(out)
    }
}

pub fn skipper_build(x: &[u32]) -> SkipperList {
    skipper_build_with(x, SkipperList::BLOCK)
}

/// # Panics
///
/// If `block` is 0.
pub fn skipper_build_with(x: &[u32], block: usize) -> SkipperList {
    assert!(block > 0, "skip block must be positive");
    let mut bytes = Vec::with_capacity(x.len() * 2);
    let mut samples = Vec::with_capacity(x.len().div_ceil(block));
    let mut prev = 0u32;
    for (i, &v) in x.iter().enumerate() {
        varint::encode_one(v.wrapping_sub(prev), &mut bytes);
        prev = v;
        if i % block == 0 {
            samples.push((v, bytes.len() as u32));
        }
    }
    SkipperList {
        bytes,
        samples,
        len: x.len(),
        block,
    }
}

/// Intersects `small` with `f`, seeking through the sample array and
/// decoding one block at a time.
pub fn skipper_intersect(small: &[u32], f: &SkipperList) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(small.len().min(f.len));
    let mut buf = Vec::with_capacity(f.block);
    let mut cur: Option<usize> = None;
    let mut pos = 0;
    for &x in small {
        let from = cur.unwrap_or(0);
        let idx = from + f.samples[from..].partition_point(|s| s.0 <= x);
        if idx == 0 {
            continue;
        }
        let k = idx - 1;
        if cur != Some(k) {
            f.decode_block(k, &mut buf)?;
            cur = Some(k);
            pos = 0;
        }
        while pos < buf.len() && buf[pos] < x {
            pos += 1;
        }
        if pos < buf.len() && buf[pos] == x {
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sublist {
    Bitmap(Bitmap),
    Compressed {
        len: u32,
        bytes: Vec<u8>,
        skip: Option<SkipperList>,
    },
}

impl Sublist {
    fn len(&self) -> u32 {
        match self {
            Sublist::Bitmap(b) => b.popcount,
            Sublist::Compressed { len, .. } => *len,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Part {
    lo: u32,
    hi: u32,
    lists: BTreeMap<u32, Sublist>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridIndex {
    config: HybridIndexConfig,
    universe: u32,
    terms: u32,
    parts: Vec<Part>,
}

/// Size accounting for an index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IndexStats {
    pub postings: u64,
    pub bitmap_lists: usize,
    pub compressed_lists: usize,
    pub bitmap_bytes: u64,
    pub compressed_bytes: u64,
    /// Skip streams and sample arrays, not counted in `bits_per_int`.
    pub skip_bytes: u64,
    /// `(bitmap_bytes + compressed_bytes) * 8 / postings`; `None` when empty.
    pub bits_per_int: Option<f64>,
    /// Sublist counts by length bucket: entry `k` counts lengths in
    /// `[2^k, 2^(k+1))`.
    pub length_histogram: Vec<usize>,
}

fn part_bounds(universe: u32, parts: u32) -> Vec<(u32, u32)> {
    let width = (universe as u64).div_ceil(parts as u64).max(1);
    (0..parts as u64)
        .map(|p| {
            let lo = (p * width).min(universe as u64) as u32;
            let hi = ((p + 1) * width).min(universe as u64) as u32;
            (lo, hi)
        })
        .collect()
}

/// Builds an index over `universe` documents from posting lists indexed by
/// term id.
pub fn build_index(postings: &[Vec<u32>], universe: u32, config: HybridIndexConfig) -> Result<HybridIndex> {
    config.validate()?;
    for list in postings {
        crate::check_strictly_increasing(list)?;
        if let Some(&last) = list.last() {
            if last >= universe {
                return Err(Error::IdOutOfRange {
                    id: last,
                    limit: universe as u64,
                });
            }
        }
    }
    let bounds = part_bounds(universe, config.parts);
    let mut parts: Vec<Part> = bounds
        .iter()
        .map(|&(lo, hi)| Part {
            lo,
            hi,
            lists: BTreeMap::new(),
        })
        .collect();
    let mut rel = Vec::new();
    for (term, list) in postings.iter().enumerate() {
        let mut start = 0;
        for part in parts.iter_mut() {
            let end = start + list[start..].partition_point(|&d| d < part.hi);
            if end > start {
                rel.clear();
                rel.extend(list[start..end].iter().map(|&d| d - part.lo));
                part.lists.insert(term as u32, make_sublist(&rel, part.hi - part.lo, &config));
            }
            start = end;
        }
    }
    Ok(HybridIndex {
        config,
        universe,
        terms: postings.len() as u32,
        parts,
    })
}

fn make_sublist(rel: &[u32], range: u32, config: &HybridIndexConfig) -> Sublist {
    if config.is_bitmap(range as u64, rel.len()) {
        Sublist::Bitmap(Bitmap::from_sorted(rel, range))
    } else {
        Sublist::Compressed {
            len: rel.len() as u32,
            bytes: config.codec.encode(rel),
            skip: config.skip_block.map(|b| skipper_build_with(rel, b as usize)),
        }
    }
}

impl HybridIndex {
    pub fn config(&self) -> &HybridIndexConfig {
        &self.config
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn term_count(&self) -> u32 {
        self.terms
    }

    /// Ids matching every term. Duplicate terms are ignored; an empty term
    /// set or an unknown term gives an empty result.
    pub fn query(&self, terms: &[u32]) -> Result<Vec<u32>> {
        self.run_query(terms, false)
    }

    /// Like [`HybridIndex::query`], but the longer compressed sublists are
    /// searched through their skip structures instead of being decoded.
    /// Requires an index built with `skip_block` set.
    pub fn query_skipmode(&self, terms: &[u32]) -> Result<Vec<u32>> {
        if self.config.skip_block.is_none() {
            return Err(Error::InvalidConfig("index was built without skip structures".into()));
        }
        self.run_query(terms, true)
    }

    fn run_query(&self, terms: &[u32], skip: bool) -> Result<Vec<u32>> {
        let mut terms = terms.to_vec();
        terms.sort_unstable();
        terms.dedup();
        if terms.is_empty() || terms.iter().any(|&t| t >= self.terms) {
            return Ok(Vec::new());
        }
        let algo = self.config.svs_algorithm();
        let mut out = Vec::new();
        let mut scratch = Scratch::default();
        for part in &self.parts {
            self.query_part(part, &terms, algo, skip, &mut scratch, &mut out)?;
        }
        Ok(out)
    }

    fn query_part(&self, part: &Part, terms: &[u32], algo: Algorithm, skip: bool, scratch: &mut Scratch, out: &mut Vec<u32>) -> Result<()> {
        let mut lists = Vec::with_capacity(terms.len());
        for t in terms {
            match part.lists.get(t) {
                Some(l) => lists.push(l),
                None => return Ok(()),
            }
        }
        lists.sort_by_key(|l| l.len());
        let bitmaps: Vec<&Bitmap> = lists
            .iter()
            .filter_map(|l| match l {
                Sublist::Bitmap(b) => Some(b),
                _ => None,
            })
            .collect();
        let compressed: Vec<&Sublist> = lists.iter().copied().filter(|l| matches!(l, Sublist::Compressed { .. })).collect();

        if compressed.is_empty() {
            let words = &mut scratch.words;
            words.clear();
            words.extend_from_slice(&bitmaps[0].words);
            for b in &bitmaps[1..] {
                for (w, o) in words.iter_mut().zip(&b.words) {
                    *w &= o;
                }
            }
            extend_ones(words, part.lo, out);
            return Ok(());
        }

        let buf = &mut scratch.buf;
        let Sublist::Compressed { len, bytes, .. } = compressed[0] else {
            unreachable!()
        };
        buf.resize(*len as usize, 0);
        self.config.codec.decode_to(bytes, buf)?;
        for l in &compressed[1..] {
            if buf.is_empty() {
                return Ok(());
            }
            let Sublist::Compressed { len, bytes, skip: sk } = l else {
                unreachable!()
            };
            if skip {
                let sk = sk.as_ref().ok_or_else(|| Error::Corrupt("missing skip structure".into()))?;
                *buf = skipper_intersect(buf, sk)?;
            } else {
                let tmp = &mut scratch.tmp;
                tmp.resize(*len as usize, 0);
                self.config.codec.decode_to(bytes, tmp)?;
                svs_step(algo, buf, tmp);
            }
        }
        out.extend(buf.iter().filter(|&&d| bitmaps.iter().all(|b| b.contains(d))).map(|&d| d + part.lo));
        Ok(())
    }

    pub fn stats(&self) -> IndexStats {
        let mut s = IndexStats::default();
        for part in &self.parts {
            for l in part.lists.values() {
                let len = l.len();
                s.postings += len as u64;
                let bucket = (31 - len.leading_zeros()) as usize;
                if s.length_histogram.len() <= bucket {
                    s.length_histogram.resize(bucket + 1, 0);
                }
                s.length_histogram[bucket] += 1;
                match l {
                    Sublist::Bitmap(b) => {
                        s.bitmap_lists += 1;
                        s.bitmap_bytes += b.byte_len() as u64;
                    }
                    Sublist::Compressed { bytes, skip, .. } => {
                        s.compressed_lists += 1;
                        s.compressed_bytes += bytes.len() as u64;
                        if let Some(sk) = skip {
                            s.skip_bytes += (sk.stream_bytes() + sk.sample_bytes()) as u64;
                        }
                    }
                }
            }
        }
        if s.postings > 0 {
            s.bits_per_int = Some((s.bitmap_bytes + s.compressed_bytes) as f64 * 8.0 / s.postings as f64);
        }
        s
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut o = Vec::new();
        o.extend_from_slice(MAGIC);
        o.extend_from_slice(&VERSION.to_le_bytes());
        o.extend_from_slice(&self.config.b.to_le_bytes());
        let name = self.config.codec.name();
        o.push(name.len() as u8);
        o.extend_from_slice(name.as_bytes());
        o.extend_from_slice(&self.config.parts.to_le_bytes());
        o.extend_from_slice(&self.config.skip_block.unwrap_or(0).to_le_bytes());
        o.extend_from_slice(&self.universe.to_le_bytes());
        o.extend_from_slice(&self.terms.to_le_bytes());
        for part in &self.parts {
            o.extend_from_slice(&part.lo.to_le_bytes());
            o.extend_from_slice(&part.hi.to_le_bytes());
            o.extend_from_slice(&(part.lists.len() as u32).to_le_bytes());
            for (&term, l) in &part.lists {
                o.extend_from_slice(&term.to_le_bytes());
                match l {
                    Sublist::Bitmap(b) => {
                        o.push(0);
                        o.extend_from_slice(&(b.words.len() as u32).to_le_bytes());
                        for w in &b.words {
                            o.extend_from_slice(&w.to_le_bytes());
                        }
                    }
                    Sublist::Compressed { len, bytes, .. } => {
                        o.push(1);
                        o.extend_from_slice(&len.to_le_bytes());
                        o.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
                        o.extend_from_slice(bytes);
                    }
                }
            }
        }
        o
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    /// Parses and fully validates an index file.
    pub fn from_bytes(bytes: &[u8]) -> Result<HybridIndex> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Corrupt("not an index file (bad magic)".into()));
        }
        let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Corrupt(format!("unsupported index version {version}")));
        }
        let b = r.u32()?;
        let name_len = r.take(1)?[0] as usize;
        let name = std::str::from_utf8(r.take(name_len)?).map_err(|_| Error::Corrupt("codec name is not UTF-8".into()))?;
        let codec: Codec = name.parse()?;
        let parts = r.u32()?;
        let skip_block = match r.u32()? {
            0 => None,
            k => Some(k),
        };
        let config = HybridIndexConfig {
            b,
            codec,
            parts,
            skip_block,
        };
        config.validate().map_err(|e| Error::Corrupt(e.to_string()))?;
        let universe = r.u32()?;
        let terms = r.u32()?;
        let bounds = part_bounds(universe, parts);
        let mut out_parts = Vec::with_capacity(parts as usize);
        for &(want_lo, want_hi) in &bounds {
            let (lo, hi) = (r.u32()?, r.u32()?);
            if (lo, hi) != (want_lo, want_hi) {
                return Err(Error::Corrupt(format!("part bounds {lo}..{hi}, expected {want_lo}..{want_hi}")));
            }
            let count = r.u32()?;
            let mut lists = BTreeMap::new();
            let mut last_term = None;
            for _ in 0..count {
                let term = r.u32()?;
                if term >= terms || last_term.is_some_and(|t| t >= term) {
                    return Err(Error::Corrupt(format!("bad term id {term} in part {lo}..{hi}")));
                }
                last_term = Some(term);
                let l = match r.take(1)?[0] {
                    0 => {
                        let n = r.u32()? as usize;
                        if n != ((hi - lo) as usize).div_ceil(64) {
                            return Err(Error::Corrupt(format!("bitmap of {n} words for a range of {}", hi - lo)));
                        }
                        let words = r
                            .take(8 * n)?
                            .chunks_exact(8)
                            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                            .collect();
                        Sublist::Bitmap(Bitmap::from_words(words))
                    }
                    1 => {
                        let len = r.u32()?;
                        let nbytes = r.u32()? as usize;
                        let stream = r.take(nbytes)?.to_vec();
                        let rel = codec.decode(&stream, len as usize)?;
                        crate::check_strictly_increasing(&rel)?;
                        if rel.last().is_some_and(|&d| d >= hi - lo) {
                            return Err(Error::Corrupt(format!("sublist of term {term} leaves its part")));
                        }
                        Sublist::Compressed {
                            len,
                            bytes: stream,
                            skip: skip_block.map(|k| skipper_build_with(&rel, k as usize)),
                        }
                    }
                    tag => return Err(Error::Corrupt(format!("unknown sublist tag {tag}"))),
                };
                lists.insert(term, l);
            }
            out_parts.push(Part { lo, hi, lists });
        }
        if r.pos != bytes.len() {
            return Err(Error::Corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(HybridIndex {
            config,
            universe,
            terms,
            parts: out_parts,
        })
    }
}

#[derive(Default)]
struct Scratch {
    buf: Vec<u32>,
    tmp: Vec<u32>,
    words: Vec<u64>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos + n).ok_or(Error::Truncated {
            offset: self.pos,
            needed: (self.pos + n).saturating_sub(self.bytes.len()),
        })?;
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}
