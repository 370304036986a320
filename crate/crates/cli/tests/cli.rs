use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn simdix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simdix"))
        .args(args)
        .output()
        .expect("spawn simdix")
}

fn ok(args: &[&str]) -> String {
    let out = simdix(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn read_list(path: &str) -> Vec<u32> {
    let bytes = fs::read(Path::new(path)).unwrap();
    let n = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
    let vals: Vec<u32> = bytes[4..]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    assert_eq!(vals.len(), n);
    vals
}

#[test]
fn compress_decompress_is_identity() {
    let dir = TempDir::new().unwrap();
    let (raw, packed, back) = (p(&dir, "x.bin"), p(&dir, "x.sx"), p(&dir, "y.bin"));
    ok(&["gen", "-n", "5003", "--range-bits", "20", "--seed", "7", "-o", &raw]);
    for codec in ["varint", "s4-bp128-d1", "s4-bp128-d4-ni", "fastpfor", "s4-fastpfor-dm"] {
        ok(&["compress", "--codec", codec, &raw, &packed]);
        ok(&["decompress", &packed, &back]);
        assert_eq!(fs::read(&raw).unwrap(), fs::read(&back).unwrap(), "{codec}");
    }
}

#[test]
fn intersect_algorithms_agree_with_scalar() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.bin"), p(&dir, "b.bin"));
    ok(&[
        "gen-pair",
        "-m",
        "300",
        "-n",
        "60000",
        "--range-bits",
        "22",
        "--seed",
        "3",
        "--small",
        &a,
        "--large",
        &b,
    ]);
    let want_path = p(&dir, "want.bin");
    let want = ok(&["intersect", &a, &b, "--algo", "scalar", "-o", &want_path]);
    // The planted core is a lower bound; random extras can also collide.
    assert!(want.trim().parse::<usize>().unwrap() >= 100);
    for algo in ["galloping", "v1", "v3", "simd-galloping", "katsov", "hybrid"] {
        let got_path = p(&dir, "got.bin");
        let got = ok(&["intersect", &b, &a, "--algo", algo, "-o", &got_path]);
        assert_eq!(got, want, "{algo}");
        assert_eq!(read_list(&got_path), read_list(&want_path), "{algo}");
    }
}

#[test]
fn one_term_query_returns_posting_list() {
    let dir = TempDir::new().unwrap();
    let corpus = p(&dir, "corpus.txt");
    fs::write(&corpus, "the cat sat\nthe dog\na cat and the dog\n\ncat\n").unwrap();
    let (idx, vocab) = (p(&dir, "ix.bin"), p(&dir, "vocab.txt"));
    ok(&[
        "build-index",
        "--corpus",
        &corpus,
        "--vocab-out",
        &vocab,
        "--parts",
        "2",
        "--skip-block",
        "32",
        "-o",
        &idx,
    ]);
    assert_eq!(ok(&["query", "-i", &idx, "--vocab", &vocab, "--terms", "cat"]).trim(), "0 2 4");
    assert_eq!(ok(&["query", "-i", &idx, "--vocab", &vocab, "--terms", "the", "dog"]).trim(), "1 2");
    assert_eq!(
        ok(&["query", "-i", &idx, "--vocab", &vocab, "--skipmode", "--terms", "the", "dog"]).trim(),
        "1 2"
    );
    assert_eq!(ok(&["query", "-i", &idx, "--vocab", &vocab, "--terms", "cat", "zebra"]).trim(), "");
}

#[test]
fn synthetic_index_log_queries() {
    let dir = TempDir::new().unwrap();
    let (idx, log) = (p(&dir, "ix.bin"), p(&dir, "q.txt"));
    ok(&["build-index", "--docs", "20000", "--terms", "50", "--seed", "1", "-o", &idx]);
    fs::write(&log, "0 1\n2 3 4\n").unwrap();
    let counts = ok(&["query", "-i", &idx, "--log", &log, "--count"]);
    assert_eq!(counts.lines().count(), 2);
    let csv = ok(&["bench-query", "-i", &idx, "--log", &log]);
    assert!(csv.starts_with("operation,params,n,"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let raw = p(&dir, "x.bin");
    ok(&["gen", "-n", "100", "--range-bits", "16", "-o", &raw]);

    assert_eq!(simdix(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(simdix(&["intersect", &raw, &raw, "--algo", "quick"]).status.code(), Some(3));
    assert_eq!(simdix(&["compress", "--codec", "nope", &raw, &p(&dir, "o")]).status.code(), Some(3));
    assert_eq!(simdix(&["decompress", &p(&dir, "missing"), &p(&dir, "o")]).status.code(), Some(1));
    assert_eq!(
        simdix(&["gen", "-n", "10", "--range-bits", "40", "-o", &raw]).status.code(),
        Some(3)
    );

    let junk = p(&dir, "junk.sx");
    fs::write(&junk, b"not a compressed list").unwrap();
    assert_eq!(simdix(&["decompress", &junk, &p(&dir, "o")]).status.code(), Some(4));

    let short = p(&dir, "short.bin");
    let mut bytes = fs::read(&raw).unwrap();
    bytes.truncate(bytes.len() - 4);
    fs::write(&short, bytes).unwrap();
    assert_eq!(simdix(&["intersect", &short, &raw]).status.code(), Some(5));

    let unsorted = p(&dir, "unsorted.bin");
    let mut b = 2u32.to_le_bytes().to_vec();
    b.extend(5u32.to_le_bytes());
    b.extend(3u32.to_le_bytes());
    fs::write(&unsorted, b).unwrap();
    assert_eq!(simdix(&["intersect", &unsorted, &raw]).status.code(), Some(6));
}
