//! Undirected simple graphs in compressed sparse row form, with the
//! Laplacian quadratic forms and cut sizes defined on them.
//!
//! The Laplacian `L = D - A` is never materialized; every quadratic form is a
//! single pass over the stored edges.

use std::collections::BTreeSet;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// Immutable undirected graph without self-loops or parallel edges.
///
/// Neighbor lists are sorted ascending and the adjacency is symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    num_edges: usize,
}

/// Outcome of [`load_edge_list`].
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub skipped_self_loops: usize,
}

impl Graph {
    /// Builds a graph on `n` nodes from undirected edges.
    ///
    /// Duplicates (in either orientation) collapse to one edge. Self-loops are
    /// dropped; the returned count says how many were seen.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<(Self, usize)> {
        let mut self_loops = 0;
        let mut canonical = BTreeSet::new();
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::Index { index: x, n });
                }
            }
            if u == v {
                self_loops += 1;
                continue;
            }
            canonical.insert((u.min(v), u.max(v)));
        }

        let mut degree = vec![0usize; n];
        for &(u, v) in &canonical {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0usize; offsets[n]];
        // Pairs come out in (min, max) order: filling every node's smaller
        // neighbors first and its larger neighbors second keeps lists sorted.
        for &(u, v) in &canonical {
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        for &(u, v) in &canonical {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
        }

        Ok((
            Self {
                offsets,
                neighbors,
                num_edges: canonical.len(),
            },
            self_loops,
        ))
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|i| self.degree(i)).collect()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// `xᵀ L x = Σ_{(i,j) ∈ E} (x_i - x_j)²`
    pub fn laplacian_quadratic<T: Scalar>(&self, x: &[T]) -> Result<T> {
        if x.len() != self.num_nodes() {
            return Err(Error::Dimension(format!(
                "vector has length {}, graph has {} nodes",
                x.len(),
                self.num_nodes()
            )));
        }
        Ok(self
            .edges()
            .map(|(u, v)| {
                let d = x[u] - x[v];
                d * d
            })
            .sum())
    }

    /// `Tr(Xᵀ L X) = Σ_{(i,j) ∈ E} ‖X_i - X_j‖²`
    pub fn laplacian_quadratic_matrix<T: Scalar>(&self, x: &DenseMatrix<T>) -> Result<T> {
        if x.rows() != self.num_nodes() {
            return Err(Error::Dimension(format!(
                "matrix has {} rows, graph has {} nodes",
                x.rows(),
                self.num_nodes()
            )));
        }
        Ok(self
            .edges()
            .map(|(u, v)| squared_distance(x.row(u), x.row(v)))
            .sum())
    }

    /// Number of edges with exactly one endpoint in `subset`.
    ///
    /// Repeated ids in `subset` are treated as one membership.
    pub fn cut_size(&self, subset: &[usize]) -> Result<u64> {
        let n = self.num_nodes();
        let mut member = vec![false; n];
        for &s in subset {
            if s >= n {
                return Err(Error::Index { index: s, n });
            }
            member[s] = true;
        }
        Ok(self.cut_size_of_indicator(&member))
    }

    pub(crate) fn cut_size_of_indicator(&self, member: &[bool]) -> u64 {
        self.edges()
            .filter(|&(u, v)| member[u] != member[v])
            .count() as u64
    }
}

pub(crate) fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Reads a whitespace-separated edge list.
///
/// Lines starting with `#` are comments, except `# nodes=N`, which fixes the
/// node count (otherwise it is the largest id plus one).
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let mut edges = Vec::new();
    let mut declared: Option<(usize, usize)> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("nodes=") {
                let n = value.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad node count {value:?}: {e}"),
                })?;
                declared = Some((n, lineno));
            }
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next_id = |what: &str| -> Result<usize> {
            let tok = fields.next().ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("missing {what} node id"),
            })?;
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("expected a non-negative integer, found {tok:?}"),
            })
        };
        let u = next_id("first")?;
        let v = next_id("second")?;
        if let Some(extra) = fields.next() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("unexpected trailing field {extra:?}"),
            });
        }
        edges.push((u, v));
    }

    let needed = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let n = match declared {
        Some((n, lineno)) if n < needed => {
            return Err(Error::Parse {
                line: lineno,
                msg: format!(
                    "header declares {n} nodes but edges reference node {}",
                    needed - 1
                ),
            })
        }
        Some((n, _)) => n,
        None => needed,
    };
    let (graph, skipped_self_loops) = Graph::from_edges(n, &edges)?;
    Ok(LoadedGraph {
        graph,
        skipped_self_loops,
    })
}

/// Writes the graph as an edge list with a `# nodes=N` header.
pub fn write_edge_list<W: std::io::Write>(graph: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# nodes={}", graph.num_nodes())?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}
