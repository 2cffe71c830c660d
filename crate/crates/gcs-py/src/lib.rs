//! Python bindings: build grammar-compressed indexes from bytes and query
//! them. Positions and occurrence numbers are 1-based, matching the CLI;
//! bytes map to symbols as `symbol = byte + 1`.

use pyo3::exceptions::{PyIndexError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use gcs::format::{self, IndexFile};
use gcs::grammar::Symbol;
use gcs::index::{Engine, IndexOptions, TextIndex};
use gcs::pathcount::{InputDag, PathCountIndex, DEFAULT_MAX_PATHS};

#[derive(FromPyObject)]
enum CharArg {
    Int(u8),
    Bytes(Vec<u8>),
    Str(String),
}

fn to_symbol(c: CharArg) -> PyResult<Symbol> {
    let byte = match c {
        CharArg::Int(b) => b,
        CharArg::Bytes(b) if b.len() == 1 => b[0],
        CharArg::Str(s) if s.len() == 1 => s.as_bytes()[0],
        _ => {
            return Err(PyValueError::new_err(
                "character must be an int in 0..=255 or a single-byte str/bytes",
            ))
        }
    };
    Ok(Symbol(u32::from(byte) + 1))
}

fn query_err(e: gcs::error::QueryError) -> PyErr {
    PyIndexError::new_err(e.to_string())
}

/// A compressed text supporting access, rank and select without
/// decompression.
#[pyclass(frozen)]
struct GrammarIndex {
    inner: TextIndex,
}

#[pymethods]
impl GrammarIndex {
    /// Compress `text` and build the index. `balanced=True` selects the
    /// expanded-fanout engine.
    #[new]
    #[pyo3(signature = (text, balanced = false, epsilon = 0.5))]
    fn new(text: &[u8], balanced: bool, epsilon: f64) -> PyResult<Self> {
        if text.is_empty() {
            return Err(PyValueError::new_err("text must be non-empty"));
        }
        let symbols: Vec<Symbol> = text.iter().map(|&b| Symbol(u32::from(b) + 1)).collect();
        let opts = IndexOptions {
            engine: if balanced { Engine::Balanced } else { Engine::Unbalanced },
            epsilon,
        };
        let inner = TextIndex::build_from_text(&symbols, 256, opts)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(GrammarIndex { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.text_len() as usize
    }

    /// The substring at positions `i..=j` (1-based, inclusive).
    fn access<'py>(&self, py: Python<'py>, i: u64, j: u64) -> PyResult<Bound<'py, PyBytes>> {
        let syms = self.inner.access(i, j).map_err(query_err)?;
        let bytes: Vec<u8> = syms.iter().map(|s| (s.0 - 1) as u8).collect();
        Ok(PyBytes::new(py, &bytes))
    }

    /// Occurrences of `c` among the first `i` bytes (`i = 0` gives 0).
    fn rank(&self, c: CharArg, i: u64) -> PyResult<u64> {
        self.inner.rank(to_symbol(c)?, i).map_err(query_err)
    }

    /// Position of the `k`-th occurrence of `c` (1-based).
    fn select(&self, c: CharArg, k: u64) -> PyResult<u64> {
        self.inner.select(to_symbol(c)?, k).map_err(query_err)
    }

    #[getter]
    fn num_rules(&self) -> usize {
        self.inner.grammar().num_rules()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.inner.grammar().height()
    }

    #[getter]
    fn engine(&self) -> &'static str {
        match self.inner.engine() {
            Engine::Unbalanced => "unbalanced",
            Engine::Balanced => "balanced",
        }
    }

    /// Write the index to a file in the GCSX format.
    fn save(&self, path: &str) -> PyResult<()> {
        let bytes = format::write_text_index(&self.inner);
        std::fs::write(path, bytes).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// Load an index written by `save` (or the CLI).
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        match format::read_index(&bytes) {
            Ok(IndexFile::Text(inner)) => Ok(GrammarIndex { inner }),
            Ok(IndexFile::PathCount(_)) => {
                Err(PyValueError::new_err("file holds a path-count index"))
            }
            Err(e) => Err(PyValueError::new_err(e.to_string())),
        }
    }
}

/// Distinct node-to-sink path counts in a DAG, answered through two rank
/// queries on a derived grammar-compressed string.
#[pyclass(frozen)]
struct PathCounter {
    inner: PathCountIndex,
}

#[pymethods]
impl PathCounter {
    /// Build from an edge list of `(from, to)` name pairs. Parallel edges
    /// are allowed and count as distinct paths.
    #[new]
    #[pyo3(signature = (edges, max_paths = DEFAULT_MAX_PATHS))]
    fn new(edges: Vec<(String, String)>, max_paths: u64) -> PyResult<Self> {
        let mut dag = InputDag::new();
        for (a, b) in &edges {
            let fa = dag.add_node(a);
            let fb = dag.add_node(b);
            dag.add_edge(fa, fb);
        }
        let inner = PathCountIndex::build(&dag, max_paths)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PathCounter { inner })
    }

    /// Number of distinct paths from `node` to `sink`.
    fn count(&self, node: &str, sink: &str) -> PyResult<u64> {
        self.inner.count_paths(node, sink).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Total number of source-to-sink paths (the derived string length).
    #[getter]
    fn total_paths(&self) -> u64 {
        self.inner.total_paths()
    }
}

#[pymodule]
fn gcs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GrammarIndex>()?;
    m.add_class::<PathCounter>()?;
    Ok(())
}
