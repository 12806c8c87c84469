//! Exhaustive resilience checks on bitmask adjacency.

use alloc::vec::Vec;

use super::{check_fraction_range, Digraph, GraphError};
use crate::fraction::Fraction;

/// Largest `n` accepted by the enumeration routines.
pub const MAX_ENUMERATION_VERTICES: usize = 63;

fn reach_within(start: usize, adj: &[u64], mask: u64) -> u64 {
    let mut reached = 1u64 << start;
    let mut frontier = reached;
    while frontier != 0 {
        let mut next = 0u64;
        let mut f = frontier;
        while f != 0 {
            let u = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[u];
        }
        next &= mask & !reached;
        reached |= next;
        frontier = next;
    }
    reached
}

/// Size of the largest SCC of the subgraph induced by `mask`, stopping early
/// once a component of size `stop_at` is found.
fn largest_scc_in_mask(out: &[u64], inn: &[u64], mask: u64, stop_at: usize) -> usize {
    let mut remaining = mask;
    let mut best = 0usize;
    while remaining != 0 && (remaining.count_ones() as usize) > best {
        let v = remaining.trailing_zeros() as usize;
        let comp = reach_within(v, out, mask) & reach_within(v, inn, mask);
        best = best.max(comp.count_ones() as usize);
        if best >= stop_at {
            return best;
        }
        remaining &= !comp;
    }
    best
}

fn enumeration_masks(g: &Digraph) -> Result<(Vec<u64>, Vec<u64>), GraphError> {
    if g.n() > MAX_ENUMERATION_VERTICES {
        return Err(GraphError::TooLargeForEnumeration {
            n: g.n(),
            max: MAX_ENUMERATION_VERTICES,
        });
    }
    Ok(g.masks().expect("n checked above"))
}

/// Calls `visit` on every `k`-subset of `0..n` (Gosper's hack); stops when
/// `visit` returns `false`. Returns whether enumeration ran to completion.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(u64) -> bool) -> bool {
    debug_assert!(n <= MAX_ENUMERATION_VERTICES);
    if k > n {
        return true;
    }
    if k == 0 {
        return visit(0);
    }
    let limit = 1u64 << n;
    let mut x = (1u64 << k) - 1;
    while x < limit {
        if !visit(x) {
            return false;
        }
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    true
}

fn mask_to_vertices(mask: u64) -> Vec<usize> {
    (0..64).filter(|&v| mask & (1u64 << v) != 0).collect()
}

/// Largest SCC of the subgraph induced by `vertices` (at most 64 vertices in
/// the graph).
pub fn largest_induced_scc(g: &Digraph, vertices: &[usize]) -> Result<usize, GraphError> {
    let (out, inn) = enumeration_masks(g)?;
    let mut mask = 0u64;
    for &v in vertices {
        if v >= g.n() {
            return Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: g.n(),
            });
        }
        mask |= 1u64 << v;
    }
    Ok(largest_scc_in_mask(&out, &inn, mask, usize::MAX))
}

fn resilience_sizes(
    g: &Digraph,
    alpha: Fraction,
    beta: Fraction,
) -> Result<(usize, usize), GraphError> {
    check_fraction_range(alpha, true, "alpha must lie in (0, 1]")?;
    check_fraction_range(beta, true, "beta must lie in (0, 1]")?;
    if beta > alpha {
        return Err(GraphError::InvalidParameter("beta must not exceed alpha"));
    }
    Ok((alpha.ceil_mul(g.n()), beta.ceil_mul(g.n())))
}

/// A subset of size `ceil(alpha * n)` whose induced subgraph has no SCC of
/// size `ceil(beta * n)`, if one exists.
///
/// Only the minimum subset size is enumerated: enlarging a subset keeps every
/// edge of the smaller induced subgraph, so its largest SCC cannot shrink.
pub fn find_resilience_violation(
    g: &Digraph,
    alpha: Fraction,
    beta: Fraction,
) -> Result<Option<Vec<usize>>, GraphError> {
    let (subset_size, threshold) = resilience_sizes(g, alpha, beta)?;
    let (out, inn) = enumeration_masks(g)?;
    let mut witness = None;
    for_each_subset(g.n(), subset_size, |mask| {
        if largest_scc_in_mask(&out, &inn, mask, threshold) < threshold {
            witness = Some(mask);
            false
        } else {
            true
        }
    });
    Ok(witness.map(mask_to_vertices))
}

/// Whether every subset of `ceil(alpha * n)` vertices induces a strongly
/// connected component of at least `ceil(beta * n)` vertices.
pub fn is_resilient(g: &Digraph, alpha: Fraction, beta: Fraction) -> Result<bool, GraphError> {
    Ok(find_resilience_violation(g, alpha, beta)?.is_none())
}

/// The balanced-cut hypothesis: for all disjoint `A`, `B` with
/// `|A| + |B| = ceil(lambda * n)` and `|A|, |B| <= ceil((1 + gamma) / 2 * lambda * n)`
/// there is an edge from `A` to `B` and an edge from `B` to `A`.
///
/// When it holds, every `ceil(lambda * n)`-subset induces an SCC of at least
/// `ceil(gamma * lambda * n)` vertices.
pub fn balanced_cut_condition(
    g: &Digraph,
    lambda: Fraction,
    gamma: Fraction,
) -> Result<bool, GraphError> {
    check_fraction_range(lambda, true, "lambda must lie in (0, 1]")?;
    check_fraction_range(gamma, false, "gamma must lie in (0, 1)")?;
    let (out, _) = enumeration_masks(g)?;
    let n = g.n();
    let subset_size = lambda.ceil_mul(n);
    let side_cap = Fraction::ONE
        .checked_add(gamma)
        .and_then(|s| s.checked_mul(lambda))
        .and_then(|s| s.checked_div_int(2))
        .map_err(|_| GraphError::InvalidParameter("fraction overflow"))?
        .ceil_mul(n);

    let out_union = |set: u64| {
        let mut acc = 0u64;
        let mut s = set;
        while s != 0 {
            acc |= out[s.trailing_zeros() as usize];
            s &= s - 1;
        }
        acc
    };

    Ok(for_each_subset(n, subset_size, |w| {
        // (A, B) and (B, A) are the same cut, so pin the lowest vertex of W in A.
        let low = w & w.wrapping_neg();
        let rest = w & !low;
        let mut sub = rest;
        loop {
            let a = sub | low;
            let b = w & !a;
            let (size_a, size_b) = (a.count_ones() as usize, b.count_ones() as usize);
            if size_a <= side_cap
                && size_b <= side_cap
                && (out_union(a) & b == 0 || out_union(b) & a == 0)
            {
                return false;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        true
    }))
}
