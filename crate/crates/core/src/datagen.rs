//! Synthetic sorted lists, paired lists with a planted intersection, and
//! ingestion of small text corpora and query logs.
//!
//! Every generator is driven by a ChaCha8 stream seeded from a `u64`, so a
//! fixed seed gives bit-identical output on every platform.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    Uniform,
    ClusterData,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Uniform => "uniform",
            Distribution::ClusterData => "clusterdata",
        })
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Distribution::Uniform),
            "clusterdata" | "cluster" => Ok(Distribution::ClusterData),
            _ => Err(Error::InvalidSpec(format!("unknown distribution {s:?}"))),
        }
    }
}

/// `n` distinct values from `[0, range)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub range: u64,
    pub distribution: Distribution,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(n: usize, range: u64, distribution: Distribution, seed: u64) -> Self {
        GenSpec {
            n,
            range,
            distribution,
            seed,
        }
    }

    /// 2^16 values in [0, 2^19).
    pub fn dense(distribution: Distribution, seed: u64) -> Self {
        GenSpec::new(1 << 16, 1 << 19, distribution, seed)
    }

    /// 2^16 values in [0, 2^30).
    pub fn sparse(distribution: Distribution, seed: u64) -> Self {
        GenSpec::new(1 << 16, 1 << 30, distribution, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.range > 1 << 32 {
            return Err(Error::InvalidSpec(format!("range {} exceeds 2^32", self.range)));
        }
        if self.n as u64 > self.range {
            return Err(Error::InvalidSpec(format!(
                "cannot draw {} distinct values from a range of {}",
                self.n, self.range
            )));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Vec<u32>> {
        match self.distribution {
            Distribution::Uniform => gen_uniform(self),
            Distribution::ClusterData => gen_clusterdata(self),
        }
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_uniform(spec: &GenSpec) -> Result<Vec<u32>> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed);
    let mut out = Vec::with_capacity(spec.n);
    fill_uniform(&mut rng, 0, spec.range, spec.n, &mut out);
    Ok(out)
}

/// Appends `n` sorted distinct values from `[lo, hi)`.
fn fill_uniform(rng: &mut ChaCha8Rng, lo: u64, hi: u64, n: usize, out: &mut Vec<u32>) {
    let range = (hi - lo) as usize;
    if n == range {
        out.extend((lo..hi).map(|v| v as u32));
        return;
    }
    let start = out.len();
    out.extend(index::sample(rng, range, n).into_iter().map(|v| (lo + v as u64) as u32));
    out[start..].sort_unstable();
}

/// Clustered values: mostly small gaps broken by occasional large ones.
///
/// The value range and the count are halved recursively. The count splits
/// evenly, the range at `n/2 + u` with `u` uniform in `[0, range - n - 1]`,
/// so both halves stay feasible. Each half is either filled uniformly or
/// split again: uniform-left with probability 1/4, uniform-right 1/4,
/// both recursive 1/2. Runs of at most 10 values, and ranges exactly as
/// large as their count, are filled directly.
pub fn gen_clusterdata(spec: &GenSpec) -> Result<Vec<u32>> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed);
    let mut out = Vec::with_capacity(spec.n);
    fill_clustered(&mut rng, 0, spec.range, spec.n, &mut out);
    Ok(out)
}

const CLUSTER_LEAF: usize = 10;

fn fill_clustered(rng: &mut ChaCha8Rng, lo: u64, hi: u64, n: usize, out: &mut Vec<u32>) {
    let range = hi - lo;
    if range == n as u64 || n <= CLUSTER_LEAF {
        fill_uniform(rng, lo, hi, n, out);
        return;
    }
    let slack = range - n as u64 - 1;
    let cut = lo + (n / 2) as u64 + if slack > 0 { rng.random_range(0..=slack) } else { 0 };
    let (left, right) = (n / 2, n - n / 2);
    let p: f64 = rng.random();
    if p < 0.25 {
        fill_uniform(rng, lo, cut, left, out);
        fill_clustered(rng, cut, hi, right, out);
    } else if p < 0.5 {
        fill_clustered(rng, lo, cut, left, out);
        fill_uniform(rng, cut, hi, right, out);
    } else {
        fill_clustered(rng, lo, cut, left, out);
        fill_clustered(rng, cut, hi, right, out);
    }
}

/// Size of the planted intersection in [`gen_pair`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Density {
    /// `m / 3` shared values.
    Third,
    /// `m / 100` shared values, at least one when `m > 0`.
    Hundredth,
}

impl Density {
    pub fn core_size(&self, m: usize) -> usize {
        match self {
            Density::Third => m / 3,
            Density::Hundredth => {
                if m == 0 {
                    0
                } else {
                    (m / 100).max(1)
                }
            }
        }
    }
}

impl FromStr for Density {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "third" => Ok(Density::Third),
            "hundredth" => Ok(Density::Hundredth),
            _ => Err(Error::InvalidSpec(format!("unknown intersection density {s:?}"))),
        }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Density::Third => "third",
            Density::Hundredth => "hundredth",
        })
    }
}

/// A short and a long list sharing a planted core.
///
/// The core (`density.core_size(m)` values) and two extra lists of
/// `m - core` and `n - core` values are drawn independently; the short list
/// is core ∪ first extra, the long list core ∪ second extra. Collisions
/// between draws can only shrink the lists or grow the intersection.
pub fn gen_pair(m: usize, n: usize, density: Density, range: u64, distribution: Distribution, seed: u64) -> Result<(Vec<u32>, Vec<u32>)> {
    if m > n {
        return Err(Error::InvalidSpec(format!("short length {m} exceeds long length {n}")));
    }
    let c = density.core_size(m);
    let mut seeds = rng_for(seed);
    let mut draw = |len: usize| GenSpec::new(len, range, distribution, seeds.random()).generate();
    let core = draw(c)?;
    let small_extra = draw(m - c)?;
    let large_extra = draw(n - c)?;
    Ok((union(&core, &small_extra), union(&core, &large_extra)))
}

fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Shannon entropy in bits of the empirical distribution of successive
/// differences (the first value counts as a difference from 0).
pub fn delta_entropy(x: &[u32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<u32, u64> = HashMap::new();
    let mut prev = 0u32;
    for &v in x {
        *counts.entry(v.wrapping_sub(prev)).or_default() += 1;
        prev = v;
    }
    let n = x.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Posting lists over `docs` documents for `terms` terms. Term `t` holds
/// roughly `docs / (t + 1)^0.9` documents drawn with `distribution`, so
/// the first terms are dense and the tail is sparse.
pub fn gen_corpus(docs: u32, terms: usize, distribution: Distribution, seed: u64) -> Result<Vec<Vec<u32>>> {
    let mut seeds = rng_for(seed);
    (0..terms)
        .map(|t| {
            let len = ((docs as f64 / ((t + 1) as f64).powf(0.9)).round() as usize).clamp(1, docs as usize);
            GenSpec::new(len, docs as u64, distribution, seeds.random()).generate()
        })
        .collect()
}

/// Conjunctive queries of 2 to 4 distinct terms, skewed toward low term ids
/// (which [`gen_corpus`] makes the frequent ones).
pub fn gen_queries(terms: usize, count: usize, seed: u64) -> Vec<Vec<u32>> {
    if terms < 2 {
        return Vec::new();
    }
    let mut rng = rng_for(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(2..=4.min(terms));
            let mut q: Vec<u32> = Vec::with_capacity(k);
            while q.len() < k {
                let u: f64 = rng.random();
                let t = ((u * u * terms as f64) as usize).min(terms - 1) as u32;
                if !q.contains(&t) {
                    q.push(t);
                }
            }
            q
        })
        .collect()
}

/// Postings extracted from a text corpus: one document per line, terms are
/// maximal runs of alphanumeric characters, lowercased.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub docs: u32,
    /// Term strings by id, in order of first appearance.
    pub terms: Vec<String>,
    pub postings: Vec<Vec<u32>>,
    pub vocab: HashMap<String, u32>,
}

impl Corpus {
    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.vocab.get(&term.to_lowercase()).copied()
    }
}

fn tokens(line: &str) -> impl Iterator<Item = String> + '_ {
    line.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

fn lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String)>> {
    r.split(b'\n').enumerate().map(|(i, line)| {
        let line = line?;
        let text = String::from_utf8(line).map_err(|_| Error::Malformed {
            line: i + 1,
            msg: "invalid UTF-8".into(),
        })?;
        Ok((i + 1, text.trim_end_matches('\r').to_owned()))
    })
}

pub fn ingest_corpus<R: BufRead>(r: R) -> Result<Corpus> {
    let mut c = Corpus::default();
    for item in lines(r) {
        let (_, line) = item?;
        let doc = c.docs;
        for tok in tokens(&line) {
            let id = match c.vocab.get(&tok) {
                Some(&id) => id,
                None => {
                    let id = c.terms.len() as u32;
                    c.vocab.insert(tok.clone(), id);
                    c.terms.push(tok);
                    c.postings.push(Vec::new());
                    id
                }
            };
            let list = &mut c.postings[id as usize];
            if list.last() != Some(&doc) {
                list.push(doc);
            }
        }
        c.docs += 1;
    }
    Ok(c)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryLog {
    /// Distinct term ids per kept query, in first-mention order.
    pub queries: Vec<Vec<u32>>,
    /// Queries naming a term absent from the corpus.
    pub dropped_unknown: usize,
    /// Queries with fewer than two distinct terms.
    pub dropped_short: usize,
}

/// Reads one whitespace-separated query per line. Blank lines are skipped.
pub fn ingest_querylog<R: BufRead>(r: R, corpus: &Corpus) -> Result<QueryLog> {
    let mut log = QueryLog::default();
    for item in lines(r) {
        let (_, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        let mut q = Vec::new();
        let mut unknown = false;
        for tok in tokens(&line) {
            match corpus.vocab.get(&tok) {
                Some(&id) if !q.contains(&id) => q.push(id),
                Some(_) => {}
                None => unknown = true,
            }
        }
        if unknown {
            log.dropped_unknown += 1;
        } else if q.len() < 2 {
            log.dropped_short += 1;
        } else {
            log.queries.push(q);
        }
    }
    Ok(log)
}

/// Parses queries given as whitespace-separated numeric term ids.
pub fn parse_id_queries<R: BufRead>(r: R) -> Result<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    for item in lines(r) {
        let (no, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        let q = line
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>().map_err(|_| Error::Malformed {
                    line: no,
                    msg: format!("not a term id: {t:?}"),
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        out.push(q);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check_strictly_increasing;

    #[test]
    fn uniform_basics() {
        let all = gen_uniform(&GenSpec::new(100, 100, Distribution::Uniform, 1)).unwrap();
        assert_eq!(all, (0..100).collect::<Vec<u32>>());
        assert!(gen_uniform(&GenSpec::new(0, 10, Distribution::Uniform, 1)).unwrap().is_empty());
        assert!(gen_uniform(&GenSpec::new(11, 10, Distribution::Uniform, 1)).is_err());

        let spec = GenSpec::new(10_000, 1 << 24, Distribution::Uniform, 7);
        let x = gen_uniform(&spec).unwrap();
        check_strictly_increasing(&x).unwrap();
        let mean_gap = (x[x.len() - 1] - x[0]) as f64 / (x.len() - 1) as f64;
        let expect = spec.range as f64 / spec.n as f64;
        assert!((mean_gap / expect - 1.0).abs() < 0.05, "{mean_gap} vs {expect}");
    }

    #[test]
    fn clusterdata_is_valid_and_deterministic() {
        for spec in [
            GenSpec::dense(Distribution::ClusterData, 3),
            GenSpec::new(5000, 5000, Distribution::ClusterData, 1),
        ] {
            let x = gen_clusterdata(&spec).unwrap();
            assert_eq!(x.len(), spec.n);
            check_strictly_increasing(&x).unwrap();
            assert!((*x.last().unwrap() as u64) < spec.range);
            assert_eq!(gen_clusterdata(&spec).unwrap(), x);
        }
        assert!(gen_clusterdata(&GenSpec::new(3, 2, Distribution::ClusterData, 0)).is_err());
    }

    #[test]
    fn entropy_oracle() {
        assert_eq!(delta_entropy(&[1, 2, 3, 4]), 0.0);
        // Gaps 1, 1, 3, 3 -> two equiprobable symbols.
        assert!((delta_entropy(&[1, 2, 5, 8]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_core_sizes() {
        for (m, n, d, want) in [
            (3usize, 30_000usize, Density::Third, 1usize),
            (100, 100, Density::Hundredth, 1),
            (999, 999, Density::Third, 333),
            (1000, 64_000, Density::Hundredth, 10),
        ] {
            assert_eq!(d.core_size(m), want);
            for dist in [Distribution::Uniform, Distribution::ClusterData] {
                let (a, b) = gen_pair(m, n, d, 1 << 26, dist, 5).unwrap();
                check_strictly_increasing(&a).unwrap();
                check_strictly_increasing(&b).unwrap();
                assert!(a.len() <= m && b.len() <= n);
                let common = a.iter().filter(|v| b.binary_search(v).is_ok()).count();
                assert!(common >= want, "{m} {n} {d}: {common}");
            }
        }
        assert!(gen_pair(5, 4, Density::Third, 100, Distribution::Uniform, 0).is_err());
    }

    #[test]
    fn toy_corpus() {
        let text = "the cat sat\nthe dog, the CAT\n";
        let c = ingest_corpus(text.as_bytes()).unwrap();
        assert_eq!(c.docs, 2);
        assert_eq!(c.terms, ["the", "cat", "sat", "dog"]);
        assert_eq!(c.postings, vec![vec![0, 1], vec![0, 1], vec![0], vec![1]]);

        let log = ingest_querylog("cat dog\nthe\nthe zebra\n\ncat cat\nsat THE\n".as_bytes(), &c).unwrap();
        assert_eq!(log.queries, vec![vec![1, 3], vec![2, 0]]);
        assert_eq!(log.dropped_unknown, 1);
        assert_eq!(log.dropped_short, 2);
    }

    #[test]
    fn malformed_lines_report_position() {
        let bad = b"fine\n\xff\xfe\n";
        assert!(matches!(ingest_corpus(&bad[..]), Err(Error::Malformed { line: 2, .. })));
        assert!(matches!(
            parse_id_queries("1 2\n3 x\n".as_bytes()),
            Err(Error::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn synthetic_corpus_shape() {
        let postings = gen_corpus(10_000, 50, Distribution::ClusterData, 9).unwrap();
        assert_eq!(postings.len(), 50);
        assert_eq!(postings[0].len(), 10_000);
        assert!(postings[49].len() < postings[1].len());
        for p in &postings {
            check_strictly_increasing(p).unwrap();
        }
        let qs = gen_queries(50, 100, 1);
        assert!(qs.iter().all(|q| (2..=4).contains(&q.len()) && q.iter().all(|&t| t < 50)));
        assert_eq!(gen_queries(50, 100, 1), qs);
    }
}
