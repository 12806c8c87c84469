use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{find_resilience_violation, Digraph, GraphError};
use crate::fraction::Fraction;
use crate::rng::seeded;

/// Graphs with at most this many vertices are certified exhaustively.
pub const DEFAULT_VERIFY_LIMIT: usize = 24;

/// Union of `d` directed Hamiltonian cycles, each the cyclic order of an
/// independent uniform permutation of `0..n`. Coinciding edges collapse, so
/// degrees may fall below `d`. For `n = 2` a cycle is the antiparallel pair.
pub fn random_hamiltonian_union(n: usize, d: usize, seed: u64) -> Result<Digraph, GraphError> {
    random_hamiltonian_union_with(n, d, &mut seeded(seed))
}

pub fn random_hamiltonian_union_with<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<Digraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidParameter("need at least 2 vertices"));
    }
    if d < 1 {
        return Err(GraphError::InvalidParameter("need at least one cycle"));
    }
    let mut g = Digraph::empty(n);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..d {
        order.shuffle(rng);
        for i in 0..n {
            g.insert_edge(order[i], order[(i + 1) % n])?;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloParams {
    pub n: usize,
    pub d: usize,
    pub alpha: Fraction,
    pub beta: Fraction,
    pub max_attempts: usize,
    pub verify_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    /// Exhaustively checked; `attempts` draws were needed.
    Verified { attempts: usize },
    /// Above the verification limit: first draw, resilient only with high
    /// probability.
    Unverified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResilientGraph {
    pub graph: Digraph,
    pub certification: Certification,
}

impl ResilientGraph {
    pub fn is_verified(&self) -> bool {
        matches!(self.certification, Certification::Verified { .. })
    }
}

pub fn monte_carlo_resilient(
    params: &MonteCarloParams,
    seed: u64,
) -> Result<ResilientGraph, GraphError> {
    monte_carlo_resilient_with(params, &mut seeded(seed))
}

/// Draws Hamiltonian-cycle unions until one is `(alpha, beta)`-resilient.
///
/// Above `verify_limit` vertices the first draw is returned unchecked.
pub fn monte_carlo_resilient_with<R: Rng + ?Sized>(
    params: &MonteCarloParams,
    rng: &mut R,
) -> Result<ResilientGraph, GraphError> {
    if params.max_attempts < 1 {
        return Err(GraphError::InvalidParameter(
            "max_attempts must be positive",
        ));
    }
    if params.n > params.verify_limit {
        let graph = random_hamiltonian_union_with(params.n, params.d, rng)?;
        return Ok(ResilientGraph {
            graph,
            certification: Certification::Unverified,
        });
    }
    for attempt in 1..=params.max_attempts {
        let graph = random_hamiltonian_union_with(params.n, params.d, rng)?;
        if find_resilience_violation(&graph, params.alpha, params.beta)?.is_none() {
            return Ok(ResilientGraph {
                graph,
                certification: Certification::Verified { attempts: attempt },
            });
        }
    }
    Err(GraphError::AttemptsExhausted {
        attempts: params.max_attempts,
    })
}
