//! Collusion-proof cheater diagnosis.
//!
//! After a commit round fixes every participant's answer, the protocols in
//! [`protocol`] flag every forged answer using nothing but equality tests
//! between answers, provided cheaters are at most 5% ([`Protocol::ThreeRound`])
//! or 10% ([`Protocol::FiveRound`]) of the participants. [`run_diagnosis`]
//! wires a [`Scenario`] through the simulator and scores the verdicts against
//! ground truth.

mod agreement;
mod engine;
mod protocol;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

pub use agreement::{classify_homogeneous_sccs, AgreementGraph, LabeledEdge, SccClassification};
pub use engine::{GridEngine, TestBench, TestRequest};
pub use protocol::{
    five_round_protocol, three_round_protocol, CountingBounds, GraphSource, MonteCarloGraphs,
    ProtocolOutcome, Verdict, DEFAULT_GRAPH_ATTEMPTS,
};

use crate::digraph::{Certification, GraphError};
use crate::grid_model::{
    Behavior, GridError, ParticipantId, Population, Scenario, ScenarioError, TaskId,
};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosisError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("could not build a resilient graph on {n} super-vertices: {source}")]
    GraphConstruction { n: usize, source: GraphError },
    #[error("{pending} tests pending but no participant was proven good")]
    NoProvenGood { pending: usize },
    #[error("participant count {n} is not divisible by {by}")]
    Indivisible { n: usize, by: usize },
    #[error("participant {0} does not exist")]
    UnknownParticipant(ParticipantId),
    #[error("tests requested before the commit round")]
    NotCommitted,
    #[error("traitors are not admitted to diagnosis runs")]
    TraitorsNotAdmitted,
    #[error(
        "{cheaters} cheaters exceed the protocol bound of {bound} for {participants} participants"
    )]
    OutOfContract {
        cheaters: usize,
        bound: usize,
        participants: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    ThreeRound,
    FiveRound,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::ThreeRound => "3round",
            Protocol::FiveRound => "5round",
        }
    }

    /// Participant counts are padded up to a multiple of this.
    pub fn padding_multiple(self) -> usize {
        match self {
            Protocol::ThreeRound => 20,
            Protocol::FiveRound => 40,
        }
    }

    /// Largest admissible cheater count for `n` real participants.
    pub fn cheater_bound(self, n: usize) -> usize {
        match self {
            Protocol::ThreeRound => n / 20,
            Protocol::FiveRound => n / 10,
        }
    }

    pub fn rounds(self) -> u32 {
        match self {
            Protocol::ThreeRound => 3,
            Protocol::FiveRound => 5,
        }
    }

    /// Most test re-executions any single task can receive.
    pub fn replication_bound(self) -> u32 {
        match self {
            Protocol::ThreeRound => 6,
            Protocol::FiveRound => 12,
        }
    }

    pub fn graphs(self) -> MonteCarloGraphs {
        match self {
            Protocol::ThreeRound => MonteCarloGraphs::h4(),
            Protocol::FiveRound => MonteCarloGraphs::h8(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskVerdict {
    Correct,
    Forged,
}

/// Verdicts and cost accounting over the real (non-padding) participants.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisResult {
    pub participant_verdicts: BTreeMap<ParticipantId, Verdict>,
    pub task_verdicts: BTreeMap<TaskId, TaskVerdict>,
    /// Rounds after the commit round.
    pub rounds_used: u32,
    pub tests_issued: usize,
    pub max_replication_per_task: u32,
    /// Number of tasks by test re-execution count.
    pub replication_histogram: BTreeMap<u32, usize>,
    pub counts: CountingBounds,
    pub graph_certification: Certification,
    pub out_of_contract: bool,
    /// Participants of each match-SCC of the agreement graph.
    pub match_sccs: Vec<Vec<ParticipantId>>,
}

impl DiagnosisResult {
    pub fn forged_tasks(&self) -> BTreeSet<TaskId> {
        self.task_verdicts
            .iter()
            .filter(|(_, v)| **v == TaskVerdict::Forged)
            .map(|(t, _)| *t)
            .collect()
    }
}

/// Verdicts compared with ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Score {
    pub forged_truth: BTreeSet<TaskId>,
    /// Forged tasks the protocol accepted.
    pub missed: BTreeSet<TaskId>,
    /// Good participants flagged bad.
    pub false_accusations: BTreeSet<ParticipantId>,
    /// Match-SCCs mixing good and bad participants.
    pub mixed_sccs: usize,
}

impl Score {
    pub fn exact_match(&self) -> bool {
        self.missed.is_empty() && self.false_accusations.is_empty()
    }
}

/// Scores `result` against the hidden values in `engine`.
pub fn score(result: &DiagnosisResult, engine: &GridEngine) -> Score {
    let pop = engine.population();
    let committed = engine.committed();
    let mut s = Score::default();
    for task in pop.tasks.iter().take(pop.real) {
        let forged = committed[&task.id].value != task.true_value();
        if forged {
            s.forged_truth.insert(task.id);
        }
        if forged && result.task_verdicts.get(&task.id) != Some(&TaskVerdict::Forged) {
            s.missed.insert(task.id);
        }
    }
    for (&p, &v) in &result.participant_verdicts {
        if v == Verdict::Bad && pop.profile(p).is_good() {
            s.false_accusations.insert(p);
        }
    }
    s.mixed_sccs = result
        .match_sccs
        .iter()
        .filter(|members| {
            let good = members
                .iter()
                .filter(|&&p| pop.profile(p).is_good())
                .count();
            good != 0 && good != members.len()
        })
        .count();
    // a forged task marked correct is also counted through the owner's verdict
    for t in &s.forged_truth {
        let owner = ParticipantId(t.0 as u32);
        if result.participant_verdicts.get(&owner) == Some(&Verdict::Good) {
            s.missed.insert(*t);
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub allow_out_of_contract: bool,
    pub graph_attempts: usize,
    pub verify_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            allow_out_of_contract: false,
            graph_attempts: DEFAULT_GRAPH_ATTEMPTS,
            verify_limit: crate::digraph::DEFAULT_VERIFY_LIMIT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiagnosisRun {
    pub result: DiagnosisResult,
    pub score: Score,
    pub engine: GridEngine,
}

const PROTOCOL_STREAM: u64 = 0x7072_6f74;

/// Builds the population, commits, runs `protocol` and scores the outcome.
pub fn run_diagnosis(
    protocol: Protocol,
    scenario: &Scenario,
    options: RunOptions,
) -> Result<DiagnosisRun, DiagnosisError> {
    let mut population = Population::build(scenario)?;
    if population
        .profiles
        .iter()
        .any(|p| p.behavior == Behavior::Traitor)
    {
        return Err(DiagnosisError::TraitorsNotAdmitted);
    }
    let real = population.real;
    let cheaters = population.cheaters().count();
    let bound = protocol.cheater_bound(real);
    let out_of_contract = cheaters > bound;
    if out_of_contract && !options.allow_out_of_contract {
        return Err(DiagnosisError::OutOfContract {
            cheaters,
            bound,
            participants: real,
        });
    }
    population.pad_to_multiple(protocol.padding_multiple());

    let mut engine = GridEngine::new(population);
    engine.commit_phase()?;
    let mut graphs = MonteCarloGraphs {
        max_attempts: options.graph_attempts,
        verify_limit: options.verify_limit,
        ..protocol.graphs()
    };
    let mut rng = seeded(derive_seed(scenario.seed, PROTOCOL_STREAM));
    let outcome = match protocol {
        Protocol::ThreeRound => three_round_protocol(&mut engine, &mut graphs, bound, &mut rng)?,
        Protocol::FiveRound => five_round_protocol(&mut engine, &mut graphs, bound, &mut rng)?,
    };

    let mut participant_verdicts = BTreeMap::new();
    let mut task_verdicts = BTreeMap::new();
    let mut replication_histogram = BTreeMap::new();
    let mut max_replication = 0;
    for i in 0..real {
        let v = outcome.verdicts[i];
        participant_verdicts.insert(ParticipantId(i as u32), v);
        task_verdicts.insert(
            TaskId(i as u64),
            match v {
                Verdict::Good => TaskVerdict::Correct,
                Verdict::Bad => TaskVerdict::Forged,
            },
        );
        let reps = engine.tests_per_task()[i];
        max_replication = max_replication.max(reps);
        *replication_histogram.entry(reps).or_insert(0) += 1;
    }
    let result = DiagnosisResult {
        participant_verdicts,
        task_verdicts,
        rounds_used: outcome.rounds_used,
        tests_issued: engine.tests_issued(),
        max_replication_per_task: max_replication,
        replication_histogram,
        counts: outcome.counts,
        graph_certification: outcome.graph_certification,
        out_of_contract,
        match_sccs: outcome.agreement.match_scc_members(),
    };
    let score = score(&result, &engine);
    Ok(DiagnosisRun {
        result,
        score,
        engine,
    })
}
