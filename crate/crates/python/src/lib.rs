//! Python bindings. Lists cross the boundary as `list[int]`, compressed
//! data and serialized indexes as `bytes`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use simdix::codecs::{bits_per_int, Codec};
use simdix::datagen::{self, Density, Distribution, GenSpec};
use simdix::index::{build_index, HybridIndex, HybridIndexConfig};
use simdix::intersect::{self as ix, Algorithm};
use simdix::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn check_sorted(x: &[u32]) -> PyResult<()> {
    simdix::check_strictly_increasing(x).map_err(err)
}

/// Names of every codec.
#[pyfunction]
fn codecs() -> Vec<String> {
    Codec::all().iter().map(Codec::name).collect()
}

/// Names of every intersection algorithm.
#[pyfunction]
fn algorithms() -> Vec<&'static str> {
    Algorithm::ALL.iter().map(|a| a.as_str()).collect()
}

/// Compresses a strictly increasing list.
#[pyfunction]
fn encode<'py>(py: Python<'py>, codec: &str, values: Vec<u32>) -> PyResult<Bound<'py, PyBytes>> {
    let codec: Codec = parse(codec)?;
    check_sorted(&values)?;
    Ok(PyBytes::new(py, &codec.encode(&values)))
}

/// Decompresses `n` values.
#[pyfunction]
fn decode(codec: &str, data: &[u8], n: usize) -> PyResult<Vec<u32>> {
    let codec: Codec = parse(codec)?;
    codec.decode(data, n).map_err(err)
}

#[pyfunction]
fn compressed_bits_per_int(codec: &str, values: Vec<u32>) -> PyResult<f64> {
    let codec: Codec = parse(codec)?;
    check_sorted(&values)?;
    Ok(bits_per_int(&codec, &values))
}

/// Intersects two strictly increasing lists.
#[pyfunction]
#[pyo3(signature = (a, b, algorithm = "hybrid"))]
fn intersect(a: Vec<u32>, b: Vec<u32>, algorithm: &str) -> PyResult<Vec<u32>> {
    let algo: Algorithm = parse(algorithm)?;
    check_sorted(&a)?;
    check_sorted(&b)?;
    Ok(ix::intersect(algo, &a, &b))
}

/// Intersects any number of lists, shortest first.
#[pyfunction]
#[pyo3(signature = (lists, algorithm = "hybrid"))]
fn svs(lists: Vec<Vec<u32>>, algorithm: &str) -> PyResult<Vec<u32>> {
    let algo: Algorithm = parse(algorithm)?;
    for l in &lists {
        check_sorted(l)?;
    }
    let refs: Vec<&[u32]> = lists.iter().map(Vec::as_slice).collect();
    ix::svs(&refs, algo).map_err(err)
}

/// `n` distinct sorted values below `range`.
#[pyfunction]
#[pyo3(signature = (n, range, distribution = "clusterdata", seed = 0))]
fn generate(n: usize, range: u64, distribution: &str, seed: u64) -> PyResult<Vec<u32>> {
    let dist: Distribution = parse(distribution)?;
    GenSpec::new(n, range, dist, seed).generate().map_err(err)
}

/// A short and a long list with a planted common core.
#[pyfunction]
#[pyo3(signature = (m, n, range, density = "third", distribution = "clusterdata", seed = 0))]
fn generate_pair(m: usize, n: usize, range: u64, density: &str, distribution: &str, seed: u64) -> PyResult<(Vec<u32>, Vec<u32>)> {
    let density: Density = parse(density)?;
    let dist: Distribution = parse(distribution)?;
    datagen::gen_pair(m, n, density, range, dist, seed).map_err(err)
}

#[pyfunction]
fn delta_entropy(values: Vec<u32>) -> f64 {
    datagen::delta_entropy(&values)
}

/// Partitioned index mixing bitmaps and compressed lists.
#[pyclass(name = "HybridIndex", module = "simdix_py", frozen)]
struct PyHybridIndex {
    inner: HybridIndex,
}

#[pymethods]
impl PyHybridIndex {
    /// `postings[t]` is the sorted list of documents containing term `t`.
    #[new]
    #[pyo3(signature = (postings, universe, b = 16, codec = "s4-bp128-d4", parts = 32, skip_block = None))]
    fn new(postings: Vec<Vec<u32>>, universe: u32, b: u32, codec: &str, parts: u32, skip_block: Option<u32>) -> PyResult<Self> {
        let mut cfg = HybridIndexConfig::new(b, parse(codec)?, parts);
        cfg.skip_block = skip_block;
        Ok(Self {
            inner: build_index(&postings, universe, cfg).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self {
            inner: HybridIndex::from_bytes(data).map_err(err)?,
        })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_bytes())
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let bytes = std::fs::read(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Self::from_bytes(&bytes)
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        std::fs::write(&path, self.inner.to_bytes()).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// Documents containing every term.
    #[pyo3(signature = (terms, skipmode = false))]
    fn query(&self, terms: Vec<u32>, skipmode: bool) -> PyResult<Vec<u32>> {
        let r = if skipmode {
            self.inner.query_skipmode(&terms)
        } else {
            self.inner.query(&terms)
        };
        r.map_err(err)
    }

    #[getter]
    fn universe(&self) -> u32 {
        self.inner.universe()
    }

    #[getter]
    fn term_count(&self) -> u32 {
        self.inner.term_count()
    }

    /// Size accounting as a dict.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let s = self.inner.stats();
        let d = pyo3::types::PyDict::new(py);
        d.set_item("postings", s.postings)?;
        d.set_item("bitmap_lists", s.bitmap_lists)?;
        d.set_item("compressed_lists", s.compressed_lists)?;
        d.set_item("bitmap_bytes", s.bitmap_bytes)?;
        d.set_item("compressed_bytes", s.compressed_bytes)?;
        d.set_item("skip_bytes", s.skip_bytes)?;
        d.set_item("bits_per_int", s.bits_per_int)?;
        d.set_item("length_histogram", s.length_histogram)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let c = self.inner.config();
        format!(
            "HybridIndex(terms={}, universe={}, b={}, codec={}, parts={})",
            self.inner.term_count(),
            self.inner.universe(),
            c.b,
            c.codec,
            c.parts
        )
    }
}

#[pymodule]
fn simdix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(codecs, m)?)?;
    m.add_function(wrap_pyfunction!(algorithms, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(compressed_bits_per_int, m)?)?;
    m.add_function(wrap_pyfunction!(intersect, m)?)?;
    m.add_function(wrap_pyfunction!(svs, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pair, m)?)?;
    m.add_function(wrap_pyfunction!(delta_entropy, m)?)?;
    m.add_class::<PyHybridIndex>()?;
    Ok(())
}
