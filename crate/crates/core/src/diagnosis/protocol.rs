//! The 3-round and 5-round diagnosis protocols.
//!
//! Both follow the same plan. Grouping rounds glue participants into
//! homogeneous groups: a group that survives intra-group testing is all good
//! or all bad, because a good tester always exposes a bad neighbour. One round
//! of tests along a resilient digraph between the groups then yields a large
//! match-SCC of good groups. Members of that SCC re-test everything still in
//! doubt in a final round.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::agreement::{classify_homogeneous_sccs, AgreementGraph, SccClassification};
use super::engine::{TestBench, TestRequest};
use super::DiagnosisError;
use crate::digraph::{
    monte_carlo_resilient_with, Certification, Digraph, MonteCarloParams, ResilientGraph,
    DEFAULT_VERIFY_LIMIT,
};
use crate::fraction::Fraction;
use crate::grid_model::ParticipantId;

/// Supplies the resilient digraph once the number of groups is known.
pub trait GraphSource {
    fn resilient_graph<R: Rng + ?Sized>(
        &mut self,
        n: usize,
        rng: &mut R,
    ) -> Result<ResilientGraph, DiagnosisError>;
}

/// Draws Hamiltonian-cycle unions, certifying them up to `verify_limit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloGraphs {
    pub d: usize,
    pub alpha: Fraction,
    pub beta: Fraction,
    pub max_attempts: usize,
    pub verify_limit: usize,
}

pub const DEFAULT_GRAPH_ATTEMPTS: usize = 200;

impl MonteCarloGraphs {
    /// Degree 4, `(15/16, 7/16)`-resilient.
    pub fn h4() -> Self {
        MonteCarloGraphs {
            d: 4,
            alpha: Fraction::new(15, 16).expect("constant"),
            beta: Fraction::new(7, 16).expect("constant"),
            max_attempts: DEFAULT_GRAPH_ATTEMPTS,
            verify_limit: DEFAULT_VERIFY_LIMIT,
        }
    }

    /// Degree 8, `(7/8, 7/16)`-resilient.
    pub fn h8() -> Self {
        MonteCarloGraphs {
            d: 8,
            alpha: Fraction::new(7, 8).expect("constant"),
            beta: Fraction::new(7, 16).expect("constant"),
            ..Self::h4()
        }
    }
}

impl GraphSource for MonteCarloGraphs {
    fn resilient_graph<R: Rng + ?Sized>(
        &mut self,
        n: usize,
        rng: &mut R,
    ) -> Result<ResilientGraph, DiagnosisError> {
        if n < 2 {
            return Ok(ResilientGraph {
                graph: Digraph::empty(n),
                certification: Certification::Verified { attempts: 0 },
            });
        }
        let params = MonteCarloParams {
            n,
            d: self.d,
            alpha: self.alpha,
            beta: self.beta,
            max_attempts: self.max_attempts,
            verify_limit: self.verify_limit,
        };
        monte_carlo_resilient_with(&params, rng)
            .map_err(|source| DiagnosisError::GraphConstruction { n, source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Good,
    Bad,
}

/// Sizes observed during a run, for checking the counting arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountingBounds {
    pub participants: usize,
    /// Participants discarded by the grouping rounds.
    pub discarded: usize,
    /// Surviving homogeneous groups.
    pub super_vertices: usize,
    /// Upper bound on all-bad groups used for classification.
    pub bad_bound: usize,
    pub good_super_vertices: usize,
    pub unresolved: usize,
    /// Members of good-classified groups.
    pub proven_good: usize,
    pub final_round_tests: usize,
    /// Largest number of final-round tests handed to a single tester.
    pub max_tests_per_tester: usize,
}

impl CountingBounds {
    /// Whether the final round fits with one test per proven-good tester.
    pub fn pool_sufficient(&self) -> bool {
        self.final_round_tests <= self.proven_good
    }
}

/// What the supervisor learns from a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    /// Verdict per participant, indexed by id.
    pub verdicts: Vec<Verdict>,
    pub rounds_used: u32,
    pub agreement: AgreementGraph,
    pub classification: SccClassification,
    pub counts: CountingBounds,
    pub graph_certification: Certification,
}

type Group = Vec<ParticipantId>;

fn shuffled_participants<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<ParticipantId> {
    let mut order: Vec<ParticipantId> = (0..n as u32).map(ParticipantId).collect();
    order.shuffle(rng);
    order
}

/// Keeps the groups whose tests all matched; returns `(survivors, discarded)`.
fn split_by_outcome<B: TestBench + ?Sized>(
    bench: &mut B,
    groups: Vec<Group>,
    tests_per_group: &[Vec<TestRequest>],
) -> Result<(Vec<Group>, Vec<ParticipantId>), DiagnosisError> {
    let flat: Vec<TestRequest> = tests_per_group.iter().flatten().copied().collect();
    let outcomes = bench.run_round(&flat)?;
    let mut survivors = Vec::new();
    let mut discarded = Vec::new();
    let mut offset = 0;
    for (group, tests) in groups.into_iter().zip(tests_per_group) {
        let clean = outcomes[offset..offset + tests.len()]
            .iter()
            .all(|c| c.is_match());
        offset += tests.len();
        if clean {
            survivors.push(group);
        } else {
            discarded.extend(group);
        }
    }
    Ok((survivors, discarded))
}

/// Every participant tests its successor on a random directed 4-cycle.
fn cycle_round<B: TestBench + ?Sized, R: Rng + ?Sized>(
    bench: &mut B,
    rng: &mut R,
) -> Result<(Vec<Group>, Vec<ParticipantId>), DiagnosisError> {
    let order = shuffled_participants(bench.participant_count(), rng);
    let cycles: Vec<Group> = order.chunks(4).map(<[ParticipantId]>::to_vec).collect();
    let tests: Vec<Vec<TestRequest>> = cycles
        .iter()
        .map(|c| {
            (0..c.len())
                .map(|i| TestRequest::new(c[i], c[(i + 1) % c.len()]))
                .collect()
        })
        .collect();
    split_by_outcome(bench, cycles, &tests)
}

/// Random pairs of equal-size groups test each other member by member and
/// merge when all tests match. An odd group out is discarded.
fn pairing_round<B: TestBench + ?Sized, R: Rng + ?Sized>(
    bench: &mut B,
    mut groups: Vec<Group>,
    rng: &mut R,
) -> Result<(Vec<Group>, Vec<ParticipantId>), DiagnosisError> {
    groups.shuffle(rng);
    let mut leftover = Vec::new();
    if groups.len() % 2 == 1 {
        leftover = groups.pop().expect("odd length");
    }
    let mut merged = Vec::with_capacity(groups.len() / 2);
    let mut tests = Vec::with_capacity(groups.len() / 2);
    let mut it = groups.into_iter();
    while let (Some(a), Some(b)) = (it.next(), it.next()) {
        let mut t = Vec::with_capacity(a.len() * 2);
        for (&x, &y) in a.iter().zip(&b) {
            t.push(TestRequest::new(x, y));
            t.push(TestRequest::new(y, x));
        }
        tests.push(t);
        let mut m = a;
        m.extend(b);
        merged.push(m);
    }
    let (survivors, mut discarded) = split_by_outcome(bench, merged, &tests)?;
    discarded.extend(leftover);
    Ok((survivors, discarded))
}

/// Tests along the edges of `h`: member `i` of the origin group re-executes
/// the task of member `i` of the destination group.
fn graph_round<B: TestBench + ?Sized>(
    bench: &mut B,
    groups: Vec<Group>,
    h: &Digraph,
) -> Result<AgreementGraph, DiagnosisError> {
    let edges: Vec<(usize, usize)> = h.edges().collect();
    let mut flat = Vec::new();
    for &(x, y) in &edges {
        for (&tester, &subject) in groups[x].iter().zip(&groups[y]) {
            flat.push(TestRequest::new(tester, subject));
        }
    }
    let outcomes = bench.run_round(&flat)?;
    let mut ag = AgreementGraph::new(groups);
    let mut offset = 0;
    for &(x, y) in &edges {
        let width = ag.groups()[x].len().min(ag.groups()[y].len());
        let all = outcomes[offset..offset + width]
            .iter()
            .all(|c| c.is_match());
        offset += width;
        ag.push_edge(
            x,
            y,
            if all {
                crate::grid_model::Comparison::Match
            } else {
                crate::grid_model::Comparison::Mismatch
            },
        );
    }
    Ok(ag)
}

/// Proven-good testers re-execute every discarded task and one
/// representative task (lowest id) per unresolved group.
fn resolution_round<B: TestBench + ?Sized>(
    bench: &mut B,
    ag: &AgreementGraph,
    class: &SccClassification,
    discarded: &[ParticipantId],
    counts: &mut CountingBounds,
) -> Result<Vec<Verdict>, DiagnosisError> {
    let n = bench.participant_count();
    let mut verdicts = vec![Verdict::Bad; n];
    let mut testers: Vec<ParticipantId> = class
        .good
        .iter()
        .flat_map(|&g| ag.groups()[g].iter().copied())
        .collect();
    testers.sort_unstable();
    for &p in &testers {
        verdicts[p.0 as usize] = Verdict::Good;
    }

    // (subject, group to extend the verdict to)
    let mut work: Vec<(ParticipantId, Option<usize>)> =
        discarded.iter().map(|&p| (p, None)).collect();
    for &g in &class.unresolved {
        let rep = *ag.groups()[g].iter().min().expect("groups are non-empty");
        work.push((rep, Some(g)));
    }
    counts.proven_good = testers.len();
    counts.final_round_tests = work.len();
    if !work.is_empty() && testers.is_empty() {
        return Err(DiagnosisError::NoProvenGood {
            pending: work.len(),
        });
    }
    counts.max_tests_per_tester = if testers.is_empty() {
        0
    } else {
        work.len().div_ceil(testers.len())
    };

    let requests: Vec<TestRequest> = work
        .iter()
        .enumerate()
        .map(|(i, &(subject, _))| TestRequest::new(testers[i % testers.len()], subject))
        .collect();
    let outcomes = bench.run_round(&requests)?;
    for (&(subject, group), outcome) in work.iter().zip(outcomes) {
        let verdict = if outcome.is_match() {
            Verdict::Good
        } else {
            Verdict::Bad
        };
        match group {
            None => verdicts[subject.0 as usize] = verdict,
            Some(g) => {
                for &p in &ag.groups()[g] {
                    verdicts[p.0 as usize] = verdict;
                }
            }
        }
    }
    Ok(verdicts)
}

fn finish<B: TestBench + ?Sized, G: GraphSource, R: Rng + ?Sized>(
    bench: &mut B,
    graphs: &mut G,
    rng: &mut R,
    groups: Vec<Group>,
    discarded: Vec<ParticipantId>,
    bad_bound: usize,
    grouping_rounds: u32,
) -> Result<ProtocolOutcome, DiagnosisError> {
    let mut counts = CountingBounds {
        participants: bench.participant_count(),
        discarded: discarded.len(),
        super_vertices: groups.len(),
        bad_bound,
        ..CountingBounds::default()
    };
    let h = graphs.resilient_graph(groups.len(), rng)?;
    let agreement = graph_round(bench, groups, &h.graph)?;
    let classification = classify_homogeneous_sccs(&agreement, bad_bound);
    counts.good_super_vertices = classification.good.len();
    counts.unresolved = classification.unresolved.len();
    let verdicts = resolution_round(bench, &agreement, &classification, &discarded, &mut counts)?;
    Ok(ProtocolOutcome {
        verdicts,
        rounds_used: grouping_rounds + 2,
        agreement,
        classification,
        counts,
        graph_certification: h.certification,
    })
}

/// Three rounds after the commit round.
///
/// `max_bad` bounds the number of bad participants; at most `max_bad / 4`
/// surviving 4-cycles can then be all bad. Expects a participant count
/// divisible by 4.
pub fn three_round_protocol<B, G, R>(
    bench: &mut B,
    graphs: &mut G,
    max_bad: usize,
    rng: &mut R,
) -> Result<ProtocolOutcome, DiagnosisError>
where
    B: TestBench + ?Sized,
    G: GraphSource,
    R: Rng + ?Sized,
{
    let n = bench.participant_count();
    if !n.is_multiple_of(4) {
        return Err(DiagnosisError::Indivisible { n, by: 4 });
    }
    let (cycles, discarded) = cycle_round(bench, rng)?;
    finish(bench, graphs, rng, cycles, discarded, max_bad / 4, 1)
}

/// Five rounds after the commit round: three doubling rounds build groups of
/// eight, then a degree-8 graph round and a resolution round. Expects a
/// participant count divisible by 8.
pub fn five_round_protocol<B, G, R>(
    bench: &mut B,
    graphs: &mut G,
    max_bad: usize,
    rng: &mut R,
) -> Result<ProtocolOutcome, DiagnosisError>
where
    B: TestBench + ?Sized,
    G: GraphSource,
    R: Rng + ?Sized,
{
    let n = bench.participant_count();
    if !n.is_multiple_of(8) {
        return Err(DiagnosisError::Indivisible { n, by: 8 });
    }
    let mut groups: Vec<Group> = shuffled_participants(n, rng)
        .into_iter()
        .map(|p| vec![p])
        .collect();
    let mut discarded = Vec::new();
    for _ in 0..3 {
        let (survivors, dropped) = pairing_round(bench, groups, rng)?;
        groups = survivors;
        discarded.extend(dropped);
    }
    finish(bench, graphs, rng, groups, discarded, max_bad / 8, 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::Comparison;
    use crate::rng::seeded;
    use alloc::collections::BTreeSet;

    /// Bench where `bad` participants forge and always corroborate each other.
    struct Mock {
        n: usize,
        bad: BTreeSet<u32>,
        rounds: u32,
    }

    impl TestBench for Mock {
        fn participant_count(&self) -> usize {
            self.n
        }

        fn run_round(&mut self, tests: &[TestRequest]) -> Result<Vec<Comparison>, DiagnosisError> {
            self.rounds += 1;
            Ok(tests
                .iter()
                .map(|t| {
                    let tb = self.bad.contains(&t.tester.0);
                    let sb = self.bad.contains(&t.subject.0);
                    if tb == sb {
                        Comparison::Match
                    } else {
                        Comparison::Mismatch
                    }
                })
                .collect())
        }
    }

    #[test]
    fn three_round_on_mock_is_exact() {
        for seed in 0..50 {
            let mut bench = Mock {
                n: 40,
                bad: [3, 17].into_iter().collect(),
                rounds: 0,
            };
            let out = three_round_protocol(
                &mut bench,
                &mut MonteCarloGraphs::h4(),
                2,
                &mut seeded(seed),
            )
            .unwrap();
            assert_eq!(out.rounds_used, 3);
            assert_eq!(bench.rounds, 3);
            for (i, v) in out.verdicts.iter().enumerate() {
                let expect = if bench.bad.contains(&(i as u32)) {
                    Verdict::Bad
                } else {
                    Verdict::Good
                };
                assert_eq!(*v, expect, "seed {seed} participant {i}");
            }
        }
    }

    #[test]
    fn five_round_on_mock_is_exact() {
        for seed in 0..50 {
            let mut bench = Mock {
                n: 80,
                bad: (0..8).map(|i| i * 9).collect(),
                rounds: 0,
            };
            let out = five_round_protocol(
                &mut bench,
                &mut MonteCarloGraphs::h8(),
                8,
                &mut seeded(seed),
            )
            .unwrap();
            assert_eq!(out.rounds_used, 5);
            assert_eq!(bench.rounds, 5);
            let bad: BTreeSet<u32> = out
                .verdicts
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == Verdict::Bad)
                .map(|(i, _)| i as u32)
                .collect();
            assert_eq!(bad, bench.bad);
        }
    }

    #[test]
    fn rejects_indivisible_counts() {
        let mut bench = Mock {
            n: 18,
            bad: BTreeSet::new(),
            rounds: 0,
        };
        assert_eq!(
            three_round_protocol(&mut bench, &mut MonteCarloGraphs::h4(), 0, &mut seeded(0)),
            Err(DiagnosisError::Indivisible { n: 18, by: 4 })
        );
    }
}
