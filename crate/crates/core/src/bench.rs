//! Benchmark harness. Every case runs one untimed warm-up and then at least
//! [`MIN_REPS`] timed repetitions; reports carry the mean and the sample
//! standard deviation. Inputs are seeded, so every column except the
//! timings is reproducible.
//!
//! CSV schema (header included):
//!
//! ```text
//! operation,params,n,bits_per_int,mis_mean,mis_std,ms_per_op,reps
//! ```
//!
//! `mis` is millions of integers per second (for queries, millions of
//! queries per second, with `n` the number of queries). Empty cells mean
//! "not applicable".

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use crate::bitpack::{pack128, unpack128_into, unpack128_two_pass, BLOCK};
use crate::codecs::{bits_per_int, Codec};
use crate::datagen::{gen_pair, Density, Distribution, GenSpec};
use crate::delta::{DeltaMode, SeedVec};
use crate::error::Result;
use crate::index::HybridIndex;
use crate::intersect::{intersect, Algorithm};

pub const MIN_REPS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub operation: String,
    pub params: String,
    pub n: usize,
    pub bits_per_int: Option<f64>,
    pub mis_mean: f64,
    pub mis_std: f64,
    pub ms_per_op: Option<f64>,
    pub reps: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
}

pub const CSV_HEADER: &str = "operation,params,n,bits_per_int,mis_mean,mis_std,ms_per_op,reps";

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.4},{:.4},{},{}",
                r.operation,
                r.params,
                r.n,
                opt(r.bits_per_int),
                r.mis_mean,
                r.mis_std,
                opt(r.ms_per_op),
                r.reps
            );
        }
        s
    }

    pub fn find(&self, operation: &str, params: &str) -> Option<&BenchRecord> {
        self.records.iter().find(|r| r.operation == operation && r.params == params)
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Times `f` (one warm-up, then `reps` runs) and returns seconds per run.
pub fn time_runs(reps: usize, mut f: impl FnMut()) -> Vec<f64> {
    f();
    (0..reps.max(MIN_REPS))
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect()
}

fn record(operation: &str, params: String, n: usize, ints_per_run: f64, secs: &[f64]) -> BenchRecord {
    let speeds: Vec<f64> = secs.iter().map(|s| ints_per_run / s.max(1e-12) / 1e6).collect();
    let (mis_mean, mis_std) = mean_std(&speeds);
    BenchRecord {
        operation: operation.into(),
        params,
        n,
        bits_per_int: None,
        mis_mean,
        mis_std,
        ms_per_op: None,
        reps: secs.len(),
    }
}

/// Integrated versus two-pass unpacking: for every width 1..=31 and mode,
/// 4096 integers (32 blocks) unpacked `calls` times per repetition.
pub fn bench_unpack(modes: &[DeltaMode], calls: usize, reps: usize, seed: u64) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    const N: usize = 4096;
    let mut state = seed | 1;
    for b in 1..=31u32 {
        let mask = (1u32 << b) - 1;
        let deltas: Vec<u32> = (0..N)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state as u32 & mask
            })
            .collect();
        let packed: Vec<Vec<u32>> = deltas
            .chunks_exact(BLOCK)
            .map(|c| pack128(c, b).map(|p| p.words))
            .collect::<Result<_>>()?;
        for &mode in modes {
            for integrated in [true, false] {
                let mut out = [0u32; BLOCK];
                let secs = time_runs(reps, || {
                    for _ in 0..calls {
                        let mut seed = SeedVec::ZERO;
                        for words in &packed {
                            seed = if integrated {
                                unpack128_into(words, b, mode, seed, &mut out)
                            } else {
                                unpack128_two_pass(words, b, mode, seed, &mut out)
                            };
                            black_box(&out);
                        }
                    }
                });
                let params = format!("b={b};mode={mode};integrated={integrated}");
                report.records.push(record("unpack", params, N, (N * calls) as f64, &secs));
            }
        }
    }
    Ok(report)
}

/// Compressed size and decoding speed of every codec on `lists` arrays of
/// each configuration (`name`, spec template); seeds are `seed..seed+lists`.
pub fn bench_decode(configs: &[(&str, GenSpec)], codecs: &[Codec], lists: usize, reps: usize, seed: u64) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for &(name, spec) in configs {
        let data: Vec<Vec<u32>> = (0..lists as u64)
            .map(|i| GenSpec { seed: seed + i, ..spec }.generate())
            .collect::<Result<_>>()?;
        let total: usize = data.iter().map(Vec::len).sum();
        for codec in codecs {
            let enc: Vec<Vec<u8>> = data.iter().map(|x| codec.encode(x)).collect();
            let bits = enc.iter().map(Vec::len).sum::<usize>() as f64 * 8.0 / total.max(1) as f64;
            let mut out = vec![0u32; spec.n];
            let mut failed = None;
            let secs = time_runs(reps, || {
                for (e, x) in enc.iter().zip(&data) {
                    if let Err(err) = codec.decode_to(e, &mut out[..x.len()]) {
                        failed = Some(err);
                    }
                    black_box(&out);
                }
            });
            if let Some(err) = failed {
                return Err(err);
            }
            let mut r = record("decode", format!("data={name};codec={codec}"), total, total as f64, &secs);
            r.bits_per_int = Some(bits);
            report.records.push(r);
        }
    }
    Ok(report)
}

/// Mean compressed size (bits/int) of `codec` over `lists` generated arrays.
pub fn mean_bits_per_int(codec: &Codec, spec: GenSpec, lists: usize) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..lists as u64 {
        let x = GenSpec {
            seed: spec.seed + i,
            ..spec
        }
        .generate()?;
        acc += bits_per_int(codec, &x);
    }
    Ok(acc / lists as f64)
}

/// Pairwise intersection over a length-ratio sweep: the long list has `n`
/// values and the short one `n / ratio` for ratio = 1, 2, 4, ... up to
/// `max_ratio`.
#[allow(clippy::too_many_arguments)]
pub fn bench_intersect(
    n: usize,
    max_ratio: usize,
    range: u64,
    densities: &[Density],
    distributions: &[Distribution],
    algos: &[Algorithm],
    reps: usize,
    seed: u64,
) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for &dist in distributions {
        for &density in densities {
            let mut ratio = 1;
            while ratio <= max_ratio {
                let m = (n / ratio).max(1);
                let (small, large) = gen_pair(m, n, density, range, dist, seed ^ ratio as u64)?;
                for &algo in algos {
                    let secs = time_runs(reps, || {
                        black_box(intersect(algo, &small, &large));
                    });
                    let params = format!("dist={dist};density={density};ratio={ratio};algo={algo}");
                    let mut r = record(
                        "intersect",
                        params,
                        small.len() + large.len(),
                        (small.len() + large.len()) as f64,
                        &secs,
                    );
                    r.ms_per_op = Some(mean_std(&secs).0 * 1e3);
                    report.records.push(r);
                }
                ratio *= 2;
            }
        }
    }
    Ok(report)
}

/// Replays `queries` against `index`, `reps` times, in either query mode.
pub fn bench_query(index: &HybridIndex, label: &str, queries: &[Vec<u32>], skipmode: bool, reps: usize) -> Result<BenchRecord> {
    let mut failed = None;
    let secs = time_runs(reps, || {
        for q in queries {
            let res = if skipmode { index.query_skipmode(q) } else { index.query(q) };
            match res {
                Ok(v) => {
                    black_box(v);
                }
                Err(e) => failed = Some(e),
            }
        }
    });
    if let Some(e) = failed {
        return Err(e);
    }
    let mut r = record(
        "query",
        format!("{label};skipmode={skipmode}"),
        queries.len(),
        queries.len() as f64,
        &secs,
    );
    r.bits_per_int = index.stats().bits_per_int;
    r.ms_per_op = Some(mean_std(&secs).0 * 1e3 / queries.len().max(1) as f64);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_helpers() {
        let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - 2.138_089_935).abs() < 1e-6);
        assert_eq!(time_runs(1, || {}).len(), MIN_REPS);
    }

    #[test]
    fn unpack_report_shape() {
        let r = bench_unpack(&[DeltaMode::D4], 1, 5, 1).unwrap();
        assert_eq!(r.records.len(), 31 * 2);
        assert_eq!(r.records[0].params, "b=1;mode=d4;integrated=true");
        assert!(r.records.iter().all(|x| x.reps >= MIN_REPS));
        let csv = r.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 63);
    }

    #[test]
    fn intersect_sweep_covers_powers_of_two() {
        let r = bench_intersect(
            1024,
            1024,
            1 << 20,
            &[Density::Third, Density::Hundredth],
            &[Distribution::Uniform],
            &[Algorithm::Scalar],
            5,
            3,
        )
        .unwrap();
        assert_eq!(r.records.len(), 2 * 11);
        assert!(r
            .find("intersect", "dist=uniform;density=hundredth;ratio=1024;algo=scalar")
            .is_some());
    }
}
