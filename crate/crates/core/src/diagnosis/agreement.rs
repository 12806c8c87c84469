use alloc::vec::Vec;

use crate::digraph::{scc_partition, Digraph, SccPartition};
use crate::grid_model::{Comparison, ParticipantId};

/// A batch of member-wise tests from one group to another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledEdge {
    pub from: usize,
    pub to: usize,
    /// `Match` iff every member-wise comparison matched.
    pub label: Comparison,
}

/// Test outcomes between homogeneous groups ("super-vertices").
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgreementGraph {
    groups: Vec<Vec<ParticipantId>>,
    edges: Vec<LabeledEdge>,
}

impl AgreementGraph {
    pub fn new(groups: Vec<Vec<ParticipantId>>) -> Self {
        AgreementGraph {
            groups,
            edges: Vec::new(),
        }
    }

    pub fn push_edge(&mut self, from: usize, to: usize, label: Comparison) {
        assert!(from < self.groups.len() && to < self.groups.len() && from != to);
        self.edges.push(LabeledEdge { from, to, label });
    }

    pub fn groups(&self) -> &[Vec<ParticipantId>] {
        &self.groups
    }

    pub fn edges(&self) -> &[LabeledEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// The digraph formed by match-labelled edges.
    pub fn match_graph(&self) -> Digraph {
        Digraph::from_edges(
            self.groups.len(),
            self.edges
                .iter()
                .filter(|e| e.label.is_match())
                .map(|e| (e.from, e.to)),
        )
        .expect("edges validated on insertion")
    }

    pub fn match_sccs(&self) -> SccPartition {
        scc_partition(&self.match_graph())
    }

    /// Participants of each match-SCC.
    pub fn match_scc_members(&self) -> Vec<Vec<ParticipantId>> {
        self.match_sccs()
            .components()
            .iter()
            .map(|comp| {
                let mut members: Vec<_> = comp
                    .iter()
                    .flat_map(|&g| self.groups[g].iter().copied())
                    .collect();
                members.sort_unstable();
                members
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SccClassification {
    /// Super-vertices proven good, ascending.
    pub good: Vec<usize>,
    /// Super-vertices left for individual resolution, ascending.
    pub unresolved: Vec<usize>,
}

/// Marks every match-SCC with more than `bad_bound` super-vertices as good.
///
/// A good tester never reports a match on a bad group, so no match edge runs
/// from good to bad and every match-SCC is homogeneous. An all-bad SCC has at
/// most `bad_bound` members when `bad_bound` bounds the bad super-vertices.
pub fn classify_homogeneous_sccs(ag: &AgreementGraph, bad_bound: usize) -> SccClassification {
    let mut out = SccClassification::default();
    for comp in ag.match_sccs().components() {
        let target = if comp.len() > bad_bound {
            &mut out.good
        } else {
            &mut out.unresolved
        };
        target.extend_from_slice(comp);
    }
    out.good.sort_unstable();
    out.unresolved.sort_unstable();
    out
}
