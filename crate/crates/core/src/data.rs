//! Datasets: synthetic generators, text loaders and the binary matrix format.
//!
//! Binary matrices are stored as the magic `SCE1`, then `rows` and `cols` as
//! little-endian `u64`, then `rows × cols` little-endian IEEE-754 `f64` in
//! row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph};
use crate::matrix::DenseMatrix;
use crate::rng::{stream, Purpose};
use crate::scalar::Scalar;

pub const MATRIX_MAGIC: &[u8; 4] = b"SCE1";

/// Graph, node features and optional labels.
#[derive(Clone, Debug)]
pub struct Dataset<T> {
    pub name: String,
    pub graph: Graph,
    pub features: DenseMatrix<T>,
    pub labels: Option<Vec<Option<usize>>>,
}

/// Stochastic block model: every intra-block pair is an edge with
/// probability `p_in`, every inter-block pair with `p_out`. Labels are block
/// ids.
pub fn gen_sbm(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(Graph, Vec<usize>)> {
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("{name} = {p} is not a probability")));
        }
    }
    if block_sizes.len() < 2 {
        return Err(Error::Config(format!(
            "a block model needs at least two blocks, got {}",
            block_sizes.len()
        )));
    }
    let labels: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let n = labels.len();
    let mut rng = stream(seed, Purpose::Graph);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let (graph, _) = Graph::from_edges(n, &edges)?;
    Ok((graph, labels))
}

/// `signal · e(label) + noise · N(0, I)` per row, where `e(c)` has ones at the
/// columns `j` with `j mod C == c` (`C` = number of classes).
pub fn gen_features<T: Scalar>(
    labels: &[usize],
    f: usize,
    signal: f64,
    noise: f64,
    seed: u64,
) -> Result<DenseMatrix<T>> {
    if f == 0 {
        return Err(Error::Config("feature width must be at least 1".into()));
    }
    if !(signal >= 0.0 && noise >= 0.0) {
        return Err(Error::Config(format!(
            "signal and noise must be non-negative, got {signal} and {noise}"
        )));
    }
    let classes = labels.iter().max().map_or(0, |&c| c + 1);
    let mut rng = stream(seed, Purpose::Features);
    let mut data = Vec::with_capacity(labels.len() * f);
    for &label in labels {
        for j in 0..f {
            let onehot = if j % classes == label { signal } else { 0.0 };
            let gaussian: f64 = rng.sample(StandardNormal);
            data.push(T::of(onehot + noise * gaussian));
        }
    }
    DenseMatrix::from_vec(labels.len(), f, data)
}

/// Writes the `SCE1` binary format.
pub fn write_matrix<T: Scalar, W: Write>(m: &DenseMatrix<T>, mut sink: W) -> Result<()> {
    sink.write_all(MATRIX_MAGIC)?;
    sink.write_all(&(m.rows() as u64).to_le_bytes())?;
    sink.write_all(&(m.cols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.data().len() * 8);
    for v in m.data() {
        let v = v.to_f64().expect("scalars convert to f64");
        buf.extend_from_slice(&v.to_le_bytes());
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(())
}

/// Reads the `SCE1` binary format.
pub fn read_matrix<T: Scalar, R: Read>(mut source: R) -> Result<DenseMatrix<T>> {
    let mut magic = [0u8; 4];
    read_exact(&mut source, &mut magic, "magic")?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected {MATRIX_MAGIC:?}"
        )));
    }
    let mut word = [0u8; 8];
    read_exact(&mut source, &mut word, "row count")?;
    let rows = u64::from_le_bytes(word);
    read_exact(&mut source, &mut word, "column count")?;
    let cols = u64::from_le_bytes(word);
    let len = rows
        .checked_mul(cols)
        .and_then(|l| l.checked_mul(8))
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| Error::Format(format!("{rows}x{cols} matrix overflows")))?;

    // Read in bounded chunks so a corrupt header cannot force a huge
    // allocation up front.
    let mut bytes = Vec::with_capacity(len.min(1 << 24));
    let got = source.by_ref().take(len as u64).read_to_end(&mut bytes)?;
    if got != len {
        return Err(Error::Format(format!(
            "truncated payload: expected {len} bytes, found {got}"
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    DenseMatrix::from_vec(rows as usize, cols as usize, data)
        .map_err(|e| Error::Format(e.to_string()))
}

fn read_exact<R: Read>(source: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    source.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => {
            Error::Format(format!("truncated header: missing {what}"))
        }
        _ => Error::Io(e),
    })
}

/// Plain-text features: one row per line, values separated by commas and/or
/// whitespace. Blank lines and `#` comments are skipped.
pub fn read_features_text<T: Scalar, R: BufRead>(source: R) -> Result<DenseMatrix<T>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(T::of)
                    .ok_or_else(|| Error::Parse {
                        line: idx + 1,
                        msg: format!("expected a finite number, found {t:?}"),
                    })
            })
            .collect::<Result<Vec<T>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!(
                        "row has {} values, earlier rows have {}",
                        row.len(),
                        first.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows)
}

/// Labels: one integer per line, `-1` for unlabeled nodes.
pub fn read_labels<R: BufRead>(source: R) -> Result<Vec<Option<usize>>> {
    let mut labels = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let value: i64 = trimmed.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("expected an integer label, found {trimmed:?}"),
        })?;
        labels.push(match value {
            -1 => None,
            v if v >= 0 => Some(v as usize),
            v => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("label {v} is negative (only -1 marks unlabeled)"),
                })
            }
        });
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(labels: &[Option<usize>], mut sink: W) -> Result<()> {
    for l in labels {
        match l {
            Some(c) => writeln!(sink, "{c}")?,
            None => writeln!(sink, "-1")?,
        }
    }
    Ok(())
}

/// Loads a feature matrix in either the binary or the text format, chosen by
/// the leading magic bytes.
pub fn load_features<T: Scalar>(path: &Path) -> Result<DenseMatrix<T>> {
    let mut reader = BufReader::new(open(path)?);
    let head = reader.fill_buf()?;
    if head.starts_with(MATRIX_MAGIC) {
        read_matrix(reader)
    } else {
        read_features_text(reader)
    }
    .map_err(|e| with_path(e, path))
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    let loaded = load_edge_list(BufReader::new(open(path)?)).map_err(|e| with_path(e, path))?;
    if loaded.skipped_self_loops > 0 {
        eprintln!(
            "warning: {}: skipped {} self-loop line(s)",
            path.display(),
            loaded.skipped_self_loops
        );
    }
    Ok(loaded.graph)
}

/// Assembles a dataset from an edge list, a feature file and an optional
/// labels file, checking that all three agree on the node count.
pub fn load_dataset<T: Scalar>(
    graph_path: &Path,
    features_path: &Path,
    labels_path: Option<&Path>,
) -> Result<Dataset<T>> {
    let graph = load_graph(graph_path)?;
    let features = load_features(features_path)?;
    let n = graph.num_nodes();
    if features.rows() != n {
        return Err(Error::Data(format!(
            "{} has {} feature rows but {} has {n} nodes",
            features_path.display(),
            features.rows(),
            graph_path.display()
        )));
    }
    let labels = match labels_path {
        Some(p) => {
            let labels = read_labels(BufReader::new(open(p)?)).map_err(|e| with_path(e, p))?;
            if labels.len() != n {
                return Err(Error::Data(format!(
                    "{} has {} labels but {} has {n} nodes",
                    p.display(),
                    labels.len(),
                    graph_path.display()
                )));
            }
            Some(labels)
        }
        None => None,
    };
    let name = graph_path
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Ok(Dataset {
        name,
        graph,
        features,
        labels,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    }
}
