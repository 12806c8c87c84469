//! The simulated grid seen through the supervisor's keyhole.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::DiagnosisError;
use crate::adversary::{AdversaryKnowledge, KnowledgeMode};
use crate::grid_model::{
    compare, evaluate, Assignment, Comparison, ParticipantId, Population, Response, TaskId,
};

/// One re-execution: `tester` recomputes the task committed by `subject`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestRequest {
    pub tester: ParticipantId,
    pub subject: ParticipantId,
}

impl TestRequest {
    pub fn new(tester: ParticipantId, subject: ParticipantId) -> Self {
        TestRequest { tester, subject }
    }
}

/// Everything a protocol may do: count participants and run a round of tests.
///
/// Each participant committed one task in the commit round; a test compares
/// the tester's answer against that commitment.
pub trait TestBench {
    fn participant_count(&self) -> usize;

    /// Runs one round. Outcomes come back in request order.
    fn run_round(&mut self, tests: &[TestRequest]) -> Result<Vec<Comparison>, DiagnosisError>;
}

/// Simulator backing a [`TestBench`] with a [`Population`].
#[derive(Debug, Clone)]
pub struct GridEngine {
    population: Population,
    committed: BTreeMap<TaskId, Response>,
    round: u32,
    log: Vec<Assignment>,
    tests_per_task: Vec<u32>,
    tests_issued: usize,
}

impl GridEngine {
    pub fn new(population: Population) -> Self {
        let n = population.len();
        GridEngine {
            population,
            committed: BTreeMap::new(),
            round: 0,
            log: Vec::new(),
            tests_per_task: vec![0; n],
            tests_issued: 0,
        }
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn tests_issued(&self) -> usize {
        self.tests_issued
    }

    /// Number of test re-executions of each task, indexed by task id.
    pub fn tests_per_task(&self) -> &[u32] {
        &self.tests_per_task
    }

    pub fn committed(&self) -> &BTreeMap<TaskId, Response> {
        &self.committed
    }

    /// Round 0: every participant answers its own task.
    pub fn commit_phase(&mut self) -> Result<&BTreeMap<TaskId, Response>, DiagnosisError> {
        let empty = BTreeMap::new();
        let knowledge = AdversaryKnowledge::new(KnowledgeMode::SameRound, 0, &[], &empty);
        let mut committed = BTreeMap::new();
        for (profile, task) in self.population.profiles.iter().zip(&self.population.tasks) {
            let assignment = Assignment::original(task.id, profile.id, 0);
            self.log.push(assignment);
            let coalition = self.population.coalition_of(profile.id);
            let response = evaluate(profile, coalition, &assignment, task, &knowledge)?;
            committed.insert(task.id, response);
        }
        self.committed = committed;
        self.round = 0;
        Ok(&self.committed)
    }
}

fn task_of(p: ParticipantId) -> TaskId {
    TaskId(p.0 as u64)
}

impl TestBench for GridEngine {
    fn participant_count(&self) -> usize {
        self.population.len()
    }

    fn run_round(&mut self, tests: &[TestRequest]) -> Result<Vec<Comparison>, DiagnosisError> {
        if self.committed.len() != self.population.len() {
            return Err(DiagnosisError::NotCommitted);
        }
        let n = self.population.len();
        self.round += 1;
        let round = self.round;
        for t in tests {
            for p in [t.tester, t.subject] {
                if p.0 as usize >= n {
                    return Err(DiagnosisError::UnknownParticipant(p));
                }
            }
            self.log.push(Assignment::test(
                task_of(t.subject),
                t.tester,
                t.subject,
                round,
            )?);
        }
        let first = self.log.len() - tests.len();
        let outcomes = {
            let knowledge = AdversaryKnowledge::new(
                KnowledgeMode::SameRound,
                round,
                &self.log,
                &self.committed,
            );
            let mut outcomes = Vec::with_capacity(tests.len());
            for assignment in &self.log[first..] {
                let profile = self.population.profile(assignment.participant);
                let coalition = self.population.coalition_of(assignment.participant);
                let task = &self.population.tasks[assignment.task.0 as usize];
                let answer = evaluate(profile, coalition, assignment, task, &knowledge)?;
                outcomes.push(compare(&self.committed[&assignment.task], &answer)?);
            }
            outcomes
        };
        for t in tests {
            self.tests_per_task[t.subject.0 as usize] += 1;
        }
        self.tests_issued += tests.len();
        Ok(outcomes)
    }
}
