//! Tasks, participants, assignments and responses.
//!
//! The supervisor never sees [`TaskSpec::true_value`]. Everything on the
//! supervisor side works through [`compare`], which only says whether two
//! responses to the same task agree.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::adversary::{self, AdversaryError, AdversaryKnowledge, Coalition};
use crate::rng::{derive_seed, mix64, prf};

mod population;

pub use population::{CoalitionLayout, Population, Scenario, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticipantId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoalitionId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("responses refer to different tasks ({0} vs {1})")]
    TaskMismatch(TaskId, TaskId),
    #[error("{0} cannot test its own response")]
    SelfTest(ParticipantId),
    #[error("good participant {0} cannot belong to a coalition")]
    GoodInCoalition(ParticipantId),
    #[error("{0} cheats or betrays but has no coalition")]
    MissingCoalition(ParticipantId),
    #[error("assignment targets {assigned}, not {evaluator}")]
    WrongParticipant {
        assigned: ParticipantId,
        evaluator: ParticipantId,
    },
    #[error("assignment is for {assigned}, task given is {given}")]
    WrongTask { assigned: TaskId, given: TaskId },
    #[error("coalition {0:?} is not the participant's coalition")]
    WrongCoalition(Option<CoalitionId>),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
}

/// A unit of work with its hidden ground truth `g(task)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskSpec {
    pub id: TaskId,
    true_value: u64,
}

impl TaskSpec {
    pub fn new(id: TaskId, true_value: u64) -> Self {
        TaskSpec { id, true_value }
    }

    /// Ground truth. Only simulators, adversaries and scorers may read it.
    pub fn true_value(&self) -> u64 {
        self.true_value
    }
}

const TASK_STREAM: u64 = 0x7461_736b;

/// `n` tasks with ids `0..n`; values come from a PRF keyed by the seed.
pub fn generate_tasks(n: usize, seed: u64) -> Vec<TaskSpec> {
    let run_key = derive_seed(seed, TASK_STREAM);
    (0..n as u64)
        .map(|id| TaskSpec::new(TaskId(id), prf(run_key, id)))
        .collect()
}

/// The coalition's false function on `task`, re-salted until it differs
/// from the true value.
pub fn forged_value(coalition_key: u64, task: &TaskSpec) -> u64 {
    let mut salt = 0u64;
    loop {
        let v = prf(coalition_key ^ mix64(salt), task.id.0);
        if v != task.true_value {
            return v;
        }
        salt += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Behavior {
    Good,
    /// Forges its own tasks.
    Cheater,
    /// Honest on its own tasks but corroborates coalition forgeries.
    Traitor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParticipantProfile {
    pub id: ParticipantId,
    pub behavior: Behavior,
    pub coalition: Option<CoalitionId>,
}

impl ParticipantProfile {
    pub fn good(id: ParticipantId) -> Self {
        ParticipantProfile {
            id,
            behavior: Behavior::Good,
            coalition: None,
        }
    }

    pub fn new(
        id: ParticipantId,
        behavior: Behavior,
        coalition: Option<CoalitionId>,
    ) -> Result<Self, GridError> {
        match (behavior, coalition) {
            (Behavior::Good, Some(_)) => Err(GridError::GoodInCoalition(id)),
            (Behavior::Cheater | Behavior::Traitor, None) => Err(GridError::MissingCoalition(id)),
            _ => Ok(ParticipantProfile {
                id,
                behavior,
                coalition,
            }),
        }
    }

    pub fn is_good(&self) -> bool {
        self.behavior == Behavior::Good
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignmentKind {
    Original,
    /// Re-execution of `subject`'s task.
    Test {
        subject: ParticipantId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub task: TaskId,
    pub participant: ParticipantId,
    pub round: u32,
    pub kind: AssignmentKind,
}

impl Assignment {
    pub fn original(task: TaskId, participant: ParticipantId, round: u32) -> Self {
        Assignment {
            task,
            participant,
            round,
            kind: AssignmentKind::Original,
        }
    }

    pub fn test(
        task: TaskId,
        tester: ParticipantId,
        subject: ParticipantId,
        round: u32,
    ) -> Result<Self, GridError> {
        if tester == subject {
            return Err(GridError::SelfTest(tester));
        }
        Ok(Assignment {
            task,
            participant: tester,
            round,
            kind: AssignmentKind::Test { subject },
        })
    }

    pub fn subject(&self) -> Option<ParticipantId> {
        match self.kind {
            AssignmentKind::Original => None,
            AssignmentKind::Test { subject } => Some(subject),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Response {
    pub assignment: Assignment,
    pub value: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Match,
    Mismatch,
}

impl Comparison {
    pub fn is_match(self) -> bool {
        self == Comparison::Match
    }
}

/// The supervisor's only detection primitive.
pub fn compare(a: &Response, b: &Response) -> Result<Comparison, GridError> {
    if a.assignment.task != b.assignment.task {
        return Err(GridError::TaskMismatch(
            a.assignment.task,
            b.assignment.task,
        ));
    }
    Ok(if a.value == b.value {
        Comparison::Match
    } else {
        Comparison::Mismatch
    })
}

/// What `profile` answers on `assignment`.
///
/// `coalition` must be the participant's own coalition when it has one.
pub fn evaluate(
    profile: &ParticipantProfile,
    coalition: Option<&Coalition>,
    assignment: &Assignment,
    task: &TaskSpec,
    knowledge: &AdversaryKnowledge<'_>,
) -> Result<Response, GridError> {
    if assignment.participant != profile.id {
        return Err(GridError::WrongParticipant {
            assigned: assignment.participant,
            evaluator: profile.id,
        });
    }
    if assignment.task != task.id {
        return Err(GridError::WrongTask {
            assigned: assignment.task,
            given: task.id,
        });
    }
    let respond = |value| {
        Ok(Response {
            assignment: *assignment,
            value,
        })
    };
    if profile.behavior == Behavior::Good {
        return respond(task.true_value);
    }
    let coalition = match coalition {
        Some(c) if Some(c.id) == profile.coalition => c,
        other => return Err(GridError::WrongCoalition(other.map(|c| c.id))),
    };
    match (profile.behavior, assignment.kind) {
        (Behavior::Cheater, AssignmentKind::Original) => respond(forged_value(coalition.key, task)),
        (Behavior::Traitor, AssignmentKind::Original) => respond(task.true_value),
        _ => respond(adversary::strategy_response(
            coalition, profile.id, assignment, task, knowledge,
        )?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{KnowledgeMode, Strategy};
    use alloc::collections::BTreeMap;
    use alloc::collections::BTreeSet;

    fn digest(tasks: &[TaskSpec]) -> u64 {
        tasks
            .iter()
            .fold(0u64, |acc, t| mix64(acc ^ t.true_value()))
    }

    #[test]
    fn task_generation_is_deterministic_and_distinct() {
        assert_eq!(generate_tasks(1, 3).len(), 1);
        let a = generate_tasks(100, 11);
        assert_eq!(a, generate_tasks(100, 11));
        let distinct: BTreeSet<u64> = a.iter().map(|t| t.true_value()).collect();
        assert_eq!(distinct.len(), 100);
        assert_eq!(digest(&a), GOLDEN_DIGEST_100_11);
    }

    const GOLDEN_DIGEST_100_11: u64 = 8_556_396_841_118_066_166;

    fn coalition() -> Coalition {
        Coalition::new(
            CoalitionId(0),
            [ParticipantId(1), ParticipantId(2)],
            Strategy::ConsistentCollusion,
            99,
        )
    }

    #[test]
    fn honest_and_forged_answers() {
        let task = generate_tasks(1, 5)[0];
        let c = coalition();
        let committed = BTreeMap::new();
        let know = AdversaryKnowledge::new(KnowledgeMode::SameRound, 0, &[], &committed);
        let good = ParticipantProfile::good(ParticipantId(0));
        let r = evaluate(
            &good,
            None,
            &Assignment::original(task.id, good.id, 0),
            &task,
            &know,
        )
        .unwrap();
        assert_eq!(r.value, task.true_value());

        let cheater =
            ParticipantProfile::new(ParticipantId(1), Behavior::Cheater, Some(c.id)).unwrap();
        let r = evaluate(
            &cheater,
            Some(&c),
            &Assignment::original(task.id, cheater.id, 0),
            &task,
            &know,
        )
        .unwrap();
        assert_ne!(r.value, task.true_value());

        let traitor =
            ParticipantProfile::new(ParticipantId(2), Behavior::Traitor, Some(c.id)).unwrap();
        let r = evaluate(
            &traitor,
            Some(&c),
            &Assignment::original(task.id, traitor.id, 0),
            &task,
            &know,
        )
        .unwrap();
        assert_eq!(r.value, task.true_value());
    }

    #[test]
    fn forged_values_never_hit_the_truth() {
        for t in generate_tasks(2000, 8) {
            assert_ne!(forged_value(17, &t), t.true_value());
        }
        // forcing a collision exercises the re-salting path
        let t = TaskSpec::new(TaskId(4), prf(17, 4));
        assert_ne!(forged_value(17, &t), t.true_value());
    }

    #[test]
    fn colluders_match_on_the_same_task() {
        let task = generate_tasks(3, 1)[2];
        let c = coalition();
        let p = ParticipantProfile::new(ParticipantId(1), Behavior::Cheater, Some(c.id)).unwrap();
        let q = ParticipantProfile::new(ParticipantId(2), Behavior::Cheater, Some(c.id)).unwrap();
        let mut committed = BTreeMap::new();
        let orig = evaluate(
            &p,
            Some(&c),
            &Assignment::original(task.id, p.id, 0),
            &task,
            &AdversaryKnowledge::new(KnowledgeMode::SameRound, 0, &[], &committed),
        )
        .unwrap();
        committed.insert(task.id, orig);
        let check = Assignment::test(task.id, q.id, p.id, 1).unwrap();
        let know = AdversaryKnowledge::new(KnowledgeMode::SameRound, 1, &[], &committed);
        let echo = evaluate(&q, Some(&c), &check, &task, &know).unwrap();
        assert_eq!(compare(&orig, &echo).unwrap(), Comparison::Match);
        assert_eq!(compare(&echo, &orig).unwrap(), Comparison::Match);
    }

    #[test]
    fn compare_rejects_different_tasks() {
        let a = Response {
            assignment: Assignment::original(TaskId(0), ParticipantId(0), 0),
            value: 1,
        };
        let b = Response {
            assignment: Assignment::original(TaskId(1), ParticipantId(1), 0),
            value: 1,
        };
        assert!(compare(&a, &b).is_err());
        let c = Response { value: 2, ..a };
        assert_eq!(compare(&a, &c).unwrap(), Comparison::Mismatch);
        assert_eq!(compare(&a, &a).unwrap(), Comparison::Match);
    }

    #[test]
    fn profile_invariants() {
        assert!(
            ParticipantProfile::new(ParticipantId(0), Behavior::Good, Some(CoalitionId(0)))
                .is_err()
        );
        assert!(ParticipantProfile::new(ParticipantId(0), Behavior::Cheater, None).is_err());
        assert!(Assignment::test(TaskId(0), ParticipantId(3), ParticipantId(3), 1).is_err());
    }
}
