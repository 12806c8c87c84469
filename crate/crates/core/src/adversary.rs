//! Coalition strategies: what colluders answer when asked to re-execute
//! somebody else's task.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::grid_model::{
    forged_value, Assignment, AssignmentKind, CoalitionId, ParticipantId, Response, TaskId,
    TaskSpec,
};
use crate::rng::{mix64, prf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(alloc::string::String),
    #[error("{0} is not a member of the coalition")]
    NotAMember(ParticipantId),
    #[error("strategies only answer test assignments")]
    NotATest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Echo a member's committed answer; garbage on anybody else's task.
    ConsistentCollusion,
    /// Always disagree with the tested response.
    FrameGood,
    /// Disagree with fellow members up to and including round `until_round`
    /// so that all-coalition groups get discarded early; collude afterwards.
    Martyr { until_round: u32 },
    /// Echo members; compute the true value for everybody else.
    OracleCollusion,
    /// Per-test pseudorandom choice among echo, truth, forgery and garbage.
    Randomized { seed: u64 },
}

impl Strategy {
    pub const NAMES: [&'static str; 5] = [
        "consistent_collusion",
        "frame_good",
        "martyr",
        "oracle_collusion",
        "randomized",
    ];

    /// The deterministic built-in strategies.
    pub fn builtins() -> [Strategy; 4] {
        [
            Strategy::ConsistentCollusion,
            Strategy::FrameGood,
            Strategy::Martyr { until_round: 1 },
            Strategy::OracleCollusion,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::ConsistentCollusion => "consistent_collusion",
            Strategy::FrameGood => "frame_good",
            Strategy::Martyr { .. } => "martyr",
            Strategy::OracleCollusion => "oracle_collusion",
            Strategy::Randomized { .. } => "randomized",
        }
    }

    /// Looks a strategy up by name. `param` sets `until_round` for `martyr`
    /// (default 1) and the seed for `randomized` (default 0).
    pub fn from_name(name: &str, param: Option<u64>) -> Result<Strategy, AdversaryError> {
        Ok(match name {
            "consistent_collusion" => Strategy::ConsistentCollusion,
            "frame_good" => Strategy::FrameGood,
            "martyr" => Strategy::Martyr {
                until_round: param.unwrap_or(1) as u32,
            },
            "oracle_collusion" => Strategy::OracleCollusion,
            "randomized" => Strategy::Randomized {
                seed: param.unwrap_or(0),
            },
            other => return Err(AdversaryError::UnknownStrategy(other.into())),
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::from_name(s, None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    pub id: CoalitionId,
    pub members: BTreeSet<ParticipantId>,
    pub strategy: Strategy,
    /// Key of the shared false function.
    pub key: u64,
}

impl Coalition {
    pub fn new(
        id: CoalitionId,
        members: impl IntoIterator<Item = ParticipantId>,
        strategy: Strategy,
        key: u64,
    ) -> Self {
        Coalition {
            id,
            members: members.into_iter().collect(),
            strategy,
            key,
        }
    }

    pub fn contains(&self, p: ParticipantId) -> bool {
        self.members.contains(&p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KnowledgeMode {
    /// Every assignment of the current round is visible.
    SameRound,
    /// Only assignments of completed rounds are visible.
    Delayed,
}

/// What a coalition may condition on when answering.
#[derive(Debug, Clone)]
pub struct AdversaryKnowledge<'a> {
    mode: KnowledgeMode,
    current_round: u32,
    visible: Vec<&'a Assignment>,
    committed: &'a BTreeMap<TaskId, Response>,
}

impl<'a> AdversaryKnowledge<'a> {
    /// In delayed mode assignments of `current_round` or later are dropped.
    pub fn new(
        mode: KnowledgeMode,
        current_round: u32,
        assignments: &'a [Assignment],
        committed: &'a BTreeMap<TaskId, Response>,
    ) -> Self {
        let visible = assignments
            .iter()
            .filter(|a| match mode {
                KnowledgeMode::SameRound => a.round <= current_round,
                KnowledgeMode::Delayed => a.round < current_round,
            })
            .collect();
        AdversaryKnowledge {
            mode,
            current_round,
            visible,
            committed,
        }
    }

    pub fn mode(&self) -> KnowledgeMode {
        self.mode
    }

    pub fn current_round(&self) -> u32 {
        self.current_round
    }

    pub fn visible_assignments(&self) -> impl Iterator<Item = &Assignment> + '_ {
        self.visible.iter().copied()
    }

    /// Committed original response for `task`, if its round has completed.
    pub fn committed(&self, task: TaskId) -> Option<u64> {
        self.committed
            .get(&task)
            .filter(|r| r.assignment.round < self.current_round)
            .map(|r| r.value)
    }
}

fn garbage(key: u64, task: TaskId) -> u64 {
    prf(key ^ 1, task.0)
}

fn differing_from(candidate: u64, avoid: Option<u64>) -> u64 {
    match avoid {
        Some(v) if v == candidate => candidate.wrapping_add(1),
        _ => candidate,
    }
}

/// The value `member` returns on a test assignment.
pub fn strategy_response(
    coalition: &Coalition,
    member: ParticipantId,
    assignment: &Assignment,
    task: &TaskSpec,
    knowledge: &AdversaryKnowledge<'_>,
) -> Result<u64, AdversaryError> {
    if !coalition.contains(member) {
        return Err(AdversaryError::NotAMember(member));
    }
    let subject = match assignment.kind {
        AssignmentKind::Test { subject } => subject,
        AssignmentKind::Original => return Err(AdversaryError::NotATest),
    };
    let committed = knowledge.committed(task.id);
    let ally = coalition.contains(subject);
    // echo a fellow member; if its commit is not visible, its forgery is
    // the best guess
    let corroborate = || committed.unwrap_or_else(|| forged_value(coalition.key, task));
    let junk = garbage(coalition.key, task.id);

    Ok(match coalition.strategy {
        Strategy::ConsistentCollusion => {
            if ally {
                corroborate()
            } else {
                junk
            }
        }
        Strategy::FrameGood => differing_from(junk, committed),
        Strategy::Martyr { until_round } => {
            if ally && assignment.round <= until_round {
                differing_from(junk, committed)
            } else if ally {
                corroborate()
            } else {
                junk
            }
        }
        Strategy::OracleCollusion => {
            if ally {
                corroborate()
            } else {
                task.true_value()
            }
        }
        Strategy::Randomized { seed } => {
            let coin = prf(
                seed ^ coalition.key,
                mix64(task.id.0 ^ ((assignment.round as u64) << 40)) ^ ((member.0 as u64) << 8),
            );
            match coin % 4 {
                0 => corroborate(),
                1 => task.true_value(),
                2 => forged_value(coalition.key, task),
                _ => junk,
            }
        }
    })
}
