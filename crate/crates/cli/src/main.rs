//! Command-line front end: list generation, compression, intersection,
//! index building and querying, and benchmarks that print CSV.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success                                              |
//! | 1    | I/O or other failure                                 |
//! | 2    | bad command line                                     |
//! | 3    | unknown codec, algorithm, distribution or bad option |
//! | 4    | malformed or corrupt input file                      |
//! | 5    | length mismatch between a header and its data        |
//! | 6    | unsorted input list or id out of range               |

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use simdix::bench::{self, BenchReport};
use simdix::codecs::Codec;
use simdix::datagen::{self, Corpus, Density, Distribution, GenSpec};
use simdix::delta::DeltaMode;
use simdix::index::{build_index, HybridIndex, HybridIndexConfig};
use simdix::intersect::{intersect, Algorithm};
use simdix::listfile;
use simdix::Error;

#[derive(Parser)]
#[command(name = "simdix", version, about = "Compress and intersect sorted integer lists")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a sorted list file.
    Gen {
        #[arg(short, long)]
        n: usize,
        /// Values are drawn from [0, 2^range_bits).
        #[arg(long, default_value_t = 30)]
        range_bits: u32,
        #[arg(long, default_value = "clusterdata")]
        dist: Distribution,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Generate a short and a long list sharing a planted intersection.
    GenPair {
        #[arg(short, long)]
        m: usize,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value = "third")]
        density: Density,
        #[arg(long, default_value_t = 30)]
        range_bits: u32,
        #[arg(long, default_value = "clusterdata")]
        dist: Distribution,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        small: PathBuf,
        #[arg(long)]
        large: PathBuf,
    },
    /// Compress a list file.
    Compress {
        #[arg(short, long, default_value = "s4-bp128-d4")]
        codec: Codec,
        input: PathBuf,
        output: PathBuf,
    },
    /// Restore a list file from its compressed form.
    Decompress { input: PathBuf, output: PathBuf },
    /// Intersect two list files and print the result size.
    Intersect {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "hybrid")]
        algo: Algorithm,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build a hybrid index from a text corpus or a synthetic one.
    BuildIndex {
        /// Text corpus, one document per line.
        #[arg(long, conflicts_with_all = ["docs", "terms"])]
        corpus: Option<PathBuf>,
        /// Synthetic corpus size in documents.
        #[arg(long, requires = "terms")]
        docs: Option<u32>,
        /// Synthetic vocabulary size.
        #[arg(long, requires = "docs")]
        terms: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Average-gap threshold for bitmaps; 0 disables them.
        #[arg(short = 'B', long = "bitmap-gap", default_value_t = 16)]
        bitmap_gap: u32,
        #[arg(long, default_value = "s4-bp128-d4")]
        codec: Codec,
        #[arg(long, default_value_t = 32)]
        parts: u32,
        /// Also build skip structures sampled every this many integers.
        #[arg(long)]
        skip_block: Option<u32>,
        /// Where to write the vocabulary of a text corpus (one term per line).
        #[arg(long, requires = "corpus")]
        vocab_out: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run conjunctive queries against an index; prints one line of ids per query.
    Query {
        #[arg(short, long)]
        index: PathBuf,
        /// Term ids of a single query.
        #[arg(long, num_args = 1.., conflicts_with = "log")]
        terms: Vec<String>,
        /// Query log: one query per line, term ids, or words with --vocab.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Vocabulary file; queries are then words rather than ids.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Use the skip structures instead of decoding the longer lists.
        #[arg(long)]
        skipmode: bool,
        /// Print only the result sizes.
        #[arg(long)]
        count: bool,
    },
    /// Integrated versus two-pass unpacking for widths 1..=31.
    BenchUnpack {
        #[arg(long, value_delimiter = ',', default_value = "d1,d2,dm,d4")]
        modes: Vec<DeltaMode>,
        #[arg(long, default_value_t = 32)]
        calls: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Size and decoding speed of every codec on dense and sparse data.
    BenchDecode {
        #[arg(long, default_value = "clusterdata")]
        dist: Distribution,
        #[arg(long, default_value_t = 16)]
        lists: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Intersection speed over length ratios 1:1 up to --max-ratio.
    BenchIntersect {
        #[arg(short, long, default_value_t = 1 << 20)]
        n: usize,
        #[arg(long, default_value_t = 8192)]
        max_ratio: usize,
        #[arg(long, default_value_t = 26)]
        range_bits: u32,
        #[arg(long, value_delimiter = ',', default_value = "scalar,galloping,v1,v3,simd-galloping,katsov,hybrid")]
        algos: Vec<Algorithm>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Replay a query log against an index.
    BenchQuery {
        #[arg(short, long)]
        index: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        skipmode: bool,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return 1;
    };
    match e {
        Error::UnknownCodec(_) | Error::UnknownDeltaMode(_) | Error::InvalidSpec(_) | Error::InvalidConfig(_) => 3,
        Error::Truncated { .. }
        | Error::MissingTerminator(_)
        | Error::VarintOverflow(_)
        | Error::ValueTooWide { .. }
        | Error::WrongBlockSize { .. }
        | Error::InvalidWidth(_)
        | Error::ExceptionsExhausted(_)
        | Error::ExceptionPosition(_)
        | Error::Malformed { .. }
        | Error::Corrupt(_) => 4,
        Error::LengthMismatch(_) => 5,
        Error::Unsorted(_) | Error::IdOutOfRange { .. } | Error::EmptyInput => 6,
        Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                // A codec, algorithm, distribution or mode name that does not parse.
                ErrorKind::ValueValidation | ErrorKind::InvalidValue => ExitCode::from(3),
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn range(bits: u32) -> Result<u64> {
    if bits > 32 {
        return Err(Error::InvalidSpec(format!("range bits must be at most 32, got {bits}")).into());
    }
    Ok(1u64 << bits)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_list(path: &Path) -> Result<Vec<u32>> {
    listfile::decode_sorted_list(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit_report(report: &BenchReport, out: Option<&Path>) -> Result<()> {
    let csv = report.to_csv();
    match out {
        Some(p) => write(p, csv.as_bytes()),
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
            Ok(())
        }
    }
}

fn load_vocab(path: &Path) -> Result<Corpus> {
    let text = String::from_utf8(read(path)?).map_err(|_| Error::Malformed {
        line: 0,
        msg: "vocabulary is not UTF-8".into(),
    })?;
    let mut c = Corpus::default();
    for (i, term) in text.lines().enumerate() {
        c.vocab.insert(term.to_owned(), i as u32);
        c.terms.push(term.to_owned());
    }
    Ok(c)
}

/// Reads a query log as term ids, or as words when a vocabulary is given.
fn load_queries(log: &Path, vocab: Option<&Path>) -> Result<Vec<Vec<u32>>> {
    let file = fs::File::open(log).with_context(|| format!("opening {}", log.display()))?;
    let reader = BufReader::new(file);
    match vocab {
        Some(v) => {
            let corpus = load_vocab(v)?;
            let parsed = datagen::ingest_querylog(reader, &corpus)?;
            eprintln!(
                "{} queries kept, {} dropped for unknown terms, {} with fewer than two terms",
                parsed.queries.len(),
                parsed.dropped_unknown,
                parsed.dropped_short
            );
            Ok(parsed.queries)
        }
        None => Ok(datagen::parse_id_queries(reader)?),
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Gen {
            n,
            range_bits,
            dist,
            seed,
            out,
        } => {
            let x = GenSpec::new(n, range(range_bits)?, dist, seed).generate()?;
            write(&out, &listfile::encode_list(&x)?)
        }
        Cmd::GenPair {
            m,
            n,
            density,
            range_bits,
            dist,
            seed,
            small,
            large,
        } => {
            let (a, b) = datagen::gen_pair(m, n, density, range(range_bits)?, dist, seed)?;
            write(&small, &listfile::encode_list(&a)?)?;
            write(&large, &listfile::encode_list(&b)?)
        }
        Cmd::Compress { codec, input, output } => {
            let x = read_list(&input)?;
            let bytes = listfile::encode_compressed(codec, &x)?;
            eprintln!(
                "{} values, {} bytes, {:.3} bits/int",
                x.len(),
                bytes.len(),
                simdix::codecs::bits_per_int(&codec, &x)
            );
            write(&output, &bytes)
        }
        Cmd::Decompress { input, output } => {
            let (_, x) = listfile::decode_compressed(&read(&input)?).with_context(|| format!("in {}", input.display()))?;
            write(&output, &listfile::encode_list(&x)?)
        }
        Cmd::Intersect { a, b, algo, out } => {
            let (x, y) = (read_list(&a)?, read_list(&b)?);
            let r = intersect(algo, &x, &y);
            println!("{}", r.len());
            if let Some(p) = out {
                write(&p, &listfile::encode_list(&r)?)?;
            }
            Ok(())
        }
        Cmd::BuildIndex {
            corpus,
            docs,
            terms,
            seed,
            bitmap_gap,
            codec,
            parts,
            skip_block,
            vocab_out,
            out,
        } => {
            let (postings, universe) = match (corpus, docs, terms) {
                (Some(path), _, _) => {
                    let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
                    let c = datagen::ingest_corpus(BufReader::new(file))?;
                    if let Some(v) = vocab_out {
                        let mut text = c.terms.join("\n");
                        text.push('\n');
                        write(&v, text.as_bytes())?;
                    }
                    (c.postings, c.docs)
                }
                (None, Some(d), Some(t)) => (datagen::gen_corpus(d, t, Distribution::ClusterData, seed)?, d),
                _ => bail!(Error::InvalidConfig("give either --corpus or both --docs and --terms".into())),
            };
            let mut cfg = HybridIndexConfig::new(bitmap_gap, codec, parts);
            cfg.skip_block = skip_block;
            let idx = build_index(&postings, universe, cfg)?;
            let s = idx.stats();
            eprintln!(
                "{} postings, {} bitmaps ({} bytes), {} compressed lists ({} bytes), {} bits/int",
                s.postings,
                s.bitmap_lists,
                s.bitmap_bytes,
                s.compressed_lists,
                s.compressed_bytes,
                s.bits_per_int.map_or("n/a".into(), |b| format!("{b:.3}"))
            );
            write(&out, &idx.to_bytes())
        }
        Cmd::Query {
            index,
            terms,
            log,
            vocab,
            skipmode,
            count,
        } => {
            let idx = HybridIndex::from_bytes(&read(&index)?).with_context(|| format!("in {}", index.display()))?;
            let queries = match log {
                Some(l) => load_queries(&l, vocab.as_deref())?,
                None if terms.is_empty() => bail!(Error::InvalidConfig("give --terms or --log".into())),
                None => match vocab {
                    Some(v) => {
                        let line = terms.join(" ");
                        let corpus = load_vocab(&v)?;
                        let mut q = Vec::new();
                        for t in line.split_whitespace() {
                            match corpus.term_id(t) {
                                Some(id) => q.push(id),
                                // An unknown word matches nothing.
                                None => q.push(u32::MAX),
                            }
                        }
                        vec![q]
                    }
                    None => datagen::parse_id_queries(terms.join(" ").as_bytes())?,
                },
            };
            let stdout = std::io::stdout();
            let mut w = std::io::BufWriter::new(stdout.lock());
            for q in &queries {
                let r = if skipmode { idx.query_skipmode(q)? } else { idx.query(q)? };
                if count {
                    writeln!(w, "{}", r.len())?;
                } else {
                    let ids: Vec<String> = r.iter().map(u32::to_string).collect();
                    writeln!(w, "{}", ids.join(" "))?;
                }
            }
            Ok(())
        }
        Cmd::BenchUnpack { modes, calls, reps, out } => emit_report(&bench::bench_unpack(&modes, calls, reps, 1)?, out.as_deref()),
        Cmd::BenchDecode {
            dist,
            lists,
            reps,
            seed,
            out,
        } => {
            let configs = [("dense", GenSpec::dense(dist, 0)), ("sparse", GenSpec::sparse(dist, 0))];
            emit_report(&bench::bench_decode(&configs, &Codec::all(), lists, reps, seed)?, out.as_deref())
        }
        Cmd::BenchIntersect {
            n,
            max_ratio,
            range_bits,
            algos,
            reps,
            seed,
            out,
        } => {
            let report = bench::bench_intersect(
                n,
                max_ratio,
                range(range_bits)?,
                &[Density::Third, Density::Hundredth],
                &[Distribution::ClusterData, Distribution::Uniform],
                &algos,
                reps,
                seed,
            )?;
            emit_report(&report, out.as_deref())
        }
        Cmd::BenchQuery {
            index,
            log,
            vocab,
            skipmode,
            reps,
            out,
        } => {
            let idx = HybridIndex::from_bytes(&read(&index)?).with_context(|| format!("in {}", index.display()))?;
            let queries = load_queries(&log, vocab.as_deref())?;
            let c = idx.config();
            let label = format!("codec={};B={};parts={}", c.codec, c.b, c.parts);
            let rec = bench::bench_query(&idx, &label, &queries, skipmode, reps)?;
            emit_report(&BenchReport { records: vec![rec] }, out.as_deref())
        }
    }
}
