//! Constant-degree directed graphs and their resilience.
//!
//! A digraph on `n` vertices is `(alpha, beta)`-resilient when every vertex
//! subset of size at least `alpha * n` induces a strongly connected component
//! of size at least `beta * n`. Unions of `d` random Hamiltonian cycles are
//! resilient with high probability; [`monte_carlo_resilient`] draws them and,
//! for small `n`, certifies the draw by exhaustive enumeration.
//!
//! Fractional sizes are rounded up: a subset requirement of `alpha * n`
//! becomes `ceil(alpha * n)` and so does the component threshold.

mod construct;
mod exponent;
mod resilience;
mod scc;

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::fraction::Fraction;

pub use construct::{
    monte_carlo_resilient, monte_carlo_resilient_with, random_hamiltonian_union,
    random_hamiltonian_union_with, Certification, MonteCarloParams, ResilientGraph,
    DEFAULT_VERIFY_LIMIT,
};
pub use exponent::{failure_exponent, ExponentTerms};
pub use resilience::{
    balanced_cut_condition, find_resilience_violation, is_resilient, largest_induced_scc,
    MAX_ENUMERATION_VERTICES,
};
pub use scc::{scc_partition, SccPartition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("{n} vertices exceeds the enumeration limit of {max}")]
    TooLargeForEnumeration { n: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("no resilient graph found in {attempts} attempts")]
    AttemptsExhausted { attempts: usize },
}

/// A simple directed graph: no self-loops, no parallel edges.
///
/// Adjacency lists are kept sorted, so [`Digraph::edges`] yields edges in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Digraph {
    pub fn empty(n: usize) -> Self {
        Digraph {
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    g.insert_edge(u, v).expect("in range, no loops");
                }
            }
        }
        g
    }

    /// Builds a graph from an edge list. Repeated edges collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.insert_edge(u, v)?;
        }
        Ok(g)
    }

    fn check_edge(&self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.n();
        for vertex in [u, v] {
            if vertex >= n {
                return Err(GraphError::VertexOutOfRange { vertex, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    /// Inserts `(u, v)`; returns `false` if the edge was already present.
    pub fn insert_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        self.check_edge(u, v)?;
        match self.out[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.out[u].insert(pos, v);
                let pos = self.inn[v].binary_search(&u).unwrap_err();
                self.inn[v].insert(pos, u);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    /// Inserts `(u, v)`, rejecting duplicates.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if self.insert_edge(u, v)? {
            Ok(())
        } else {
            Err(GraphError::DuplicateEdge(u, v))
        }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.out[u].binary_search(&v).is_ok()
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out[u].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.inn[v].len()
    }

    /// Maximum over all vertices of in-degree and out-degree.
    pub fn degree(&self) -> usize {
        self.out
            .iter()
            .chain(self.inn.iter())
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }

    /// Minimum over all vertices of in-degree and out-degree.
    pub fn min_degree(&self) -> usize {
        self.out
            .iter()
            .chain(self.inn.iter())
            .map(Vec::len)
            .min()
            .unwrap_or(0)
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// The subgraph induced by `vertices`, relabelled `0..vertices.len()` in
    /// the given order.
    pub fn induced(&self, vertices: &[usize]) -> Digraph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut g = Digraph::empty(vertices.len());
        for (i, &u) in vertices.iter().enumerate() {
            for &v in &self.out[u] {
                if index[v] != usize::MAX {
                    g.insert_edge(i, index[v])
                        .expect("relabelled edge is valid");
                }
            }
        }
        g
    }

    /// Out- and in-neighbourhoods as bitmasks; `None` above 64 vertices.
    pub(crate) fn masks(&self) -> Option<(Vec<u64>, Vec<u64>)> {
        if self.n() > 64 {
            return None;
        }
        let to_mask = |vs: &Vec<usize>| vs.iter().fold(0u64, |m, &v| m | (1u64 << v));
        Some((
            self.out.iter().map(to_mask).collect(),
            self.inn.iter().map(to_mask).collect(),
        ))
    }
}

pub(crate) fn check_fraction_range(
    f: Fraction,
    allow_one: bool,
    what: &'static str,
) -> Result<(), GraphError> {
    let ok = !f.is_zero() && (f < Fraction::ONE || (allow_one && f == Fraction::ONE));
    if ok {
        Ok(())
    } else {
        Err(GraphError::InvalidParameter(what))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_out_of_range() {
        assert_eq!(
            Digraph::from_edges(3, [(1, 1)]),
            Err(GraphError::SelfLoop(1))
        );
        assert_eq!(
            Digraph::from_edges(3, [(0, 3)]),
            Err(GraphError::VertexOutOfRange { vertex: 3, n: 3 })
        );
        let mut g = Digraph::empty(3);
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.add_edge(0, 1), Err(GraphError::DuplicateEdge(0, 1)));
    }

    #[test]
    fn edges_are_sorted_and_degrees_tracked() {
        let g = Digraph::from_edges(4, [(2, 0), (0, 3), (0, 1), (2, 0)]).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (0, 3), (2, 0)]);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree(), 2);
        assert_eq!(g.min_degree(), 0);
        assert_eq!(g.in_neighbors(0), &[2]);
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = Digraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let h = g.induced(&[3, 0, 1]);
        let edges: Vec<_> = h.edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
    }
}
