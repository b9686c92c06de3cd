use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::MeasurementOperator;

/// Simple undirected graph on vertices `0..len`, sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Self-loops are dropped and repeated edges merged.
    pub fn from_edges(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); vertices];
        for (a, b) in edges {
            if a >= vertices || b >= vertices {
                return Err(Error::InvalidParameter(format!("edge ({a}, {b}) out of range")));
            }
            if a != b {
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        Ok(Self { adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect() })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }
}

/// Rows of `A_T` joined when they share a generator variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub subset: Vec<usize>,
    pub graph: Graph,
    pub max_degree: usize,
    /// `|T| (2|T| - 1)`
    pub degree_bound: usize,
    pub bound_holds: bool,
}

/// Builds the row dependency graph of `A_T` for a symmetric Toeplitz kind.
/// Each variable sits on at most two diagonals, so it appears in at most
/// `2|T|` rows of `A_T`; a row therefore meets at most `|T| (2|T| - 1)`
/// other rows.
pub fn dependency_graph(op: &MeasurementOperator, subset: &[usize]) -> Result<DependencyGraph> {
    if !op.kind().is_symmetric() || op.composes_d() {
        return Err(Error::UnsupportedKind {
            op: "dependency_graph",
            kind: format!("{}{}", op.kind(), if op.composes_d() { " composed with D" } else { "" }),
        });
    }
    if subset.is_empty() || subset.iter().any(|&t| t >= op.n()) {
        return Err(Error::InvalidParameter("column subset must be nonempty and in range".into()));
    }
    let k = op.k();
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); op.generator().len()];
    for i in 0..k {
        let vars: BTreeSet<usize> = subset.iter().map(|&t| op.generator_index(i, t)).collect();
        for v in vars {
            rows_of[v].push(i);
        }
    }
    let edges = rows_of
        .iter()
        .flat_map(|rows| rows.iter().flat_map(move |&a| rows.iter().map(move |&b| (a, b))));
    let graph = Graph::from_edges(k, edges)?;
    let t = subset.len();
    let degree_bound = t * (2 * t - 1);
    let max_degree = graph.max_degree();
    Ok(DependencyGraph {
        subset: subset.to_vec(),
        graph,
        max_degree,
        degree_bound,
        bound_holds: max_degree <= degree_bound,
    })
}
