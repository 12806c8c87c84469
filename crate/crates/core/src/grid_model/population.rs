use alloc::vec::Vec;

use rand::seq::SliceRandom;
use thiserror::Error;

use super::{generate_tasks, Behavior, CoalitionId, ParticipantId, ParticipantProfile, TaskSpec};
use crate::adversary::{Coalition, Strategy};
use crate::rng::{derive_seed, seeded};

const LAYOUT_STREAM: u64 = 0x6c61_796f;
const COALITION_KEY_STREAM: u64 = 0x6b65_7900;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("a scenario needs at least one participant")]
    NoParticipants,
    #[error("{members} coalition members do not fit among {participants} participants")]
    TooManyMembers { members: usize, participants: usize },
    #[error("coalition {0} is empty")]
    EmptyCoalition(usize),
}

/// Size of one coalition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoalitionLayout {
    pub cheaters: usize,
    pub traitors: usize,
}

impl CoalitionLayout {
    pub fn cheaters(cheaters: usize) -> Self {
        CoalitionLayout {
            cheaters,
            traitors: 0,
        }
    }
}

/// Who participates, who colludes with whom, and how.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub participants: usize,
    pub coalitions: Vec<CoalitionLayout>,
    pub strategy: Strategy,
    pub seed: u64,
}

impl Scenario {
    /// `cheaters` split as evenly as possible over `coalitions` groups.
    pub fn with_cheaters(
        participants: usize,
        cheaters: usize,
        coalitions: usize,
        strategy: Strategy,
        seed: u64,
    ) -> Self {
        let groups = coalitions.max(1).min(cheaters.max(1));
        let layout = if cheaters == 0 {
            Vec::new()
        } else {
            (0..groups)
                .map(|i| {
                    CoalitionLayout::cheaters(
                        cheaters / groups + usize::from(i < cheaters % groups),
                    )
                })
                .collect()
        };
        Scenario {
            participants,
            coalitions: layout,
            strategy,
            seed,
        }
    }

    pub fn cheater_count(&self) -> usize {
        self.coalitions.iter().map(|c| c.cheaters).sum()
    }

    pub fn traitor_count(&self) -> usize {
        self.coalitions.iter().map(|c| c.traitors).sum()
    }
}

/// A realised scenario: one task per participant, task `i` belonging to
/// participant `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    pub profiles: Vec<ParticipantProfile>,
    pub coalitions: Vec<Coalition>,
    pub tasks: Vec<TaskSpec>,
    /// Participants at or above this index are supervisor-known padding.
    pub real: usize,
    pub seed: u64,
}

impl Population {
    pub fn build(scenario: &Scenario) -> Result<Population, ScenarioError> {
        let n = scenario.participants;
        if n == 0 {
            return Err(ScenarioError::NoParticipants);
        }
        let members: usize = scenario.cheater_count() + scenario.traitor_count();
        if members > n {
            return Err(ScenarioError::TooManyMembers {
                members,
                participants: n,
            });
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut seeded(derive_seed(scenario.seed, LAYOUT_STREAM)));

        let mut profiles: Vec<ParticipantProfile> = (0..n as u32)
            .map(|i| ParticipantProfile::good(ParticipantId(i)))
            .collect();
        let mut coalitions = Vec::with_capacity(scenario.coalitions.len());
        let mut next = order.into_iter();
        for (idx, layout) in scenario.coalitions.iter().enumerate() {
            if layout.cheaters + layout.traitors == 0 {
                return Err(ScenarioError::EmptyCoalition(idx));
            }
            let cid = CoalitionId(idx as u32);
            let mut ids = Vec::new();
            for k in 0..layout.cheaters + layout.traitors {
                let p = next.next().expect("member count checked");
                let behavior = if k < layout.cheaters {
                    Behavior::Cheater
                } else {
                    Behavior::Traitor
                };
                profiles[p as usize] = ParticipantProfile {
                    id: ParticipantId(p),
                    behavior,
                    coalition: Some(cid),
                };
                ids.push(ParticipantId(p));
            }
            coalitions.push(Coalition::new(
                cid,
                ids,
                scenario.strategy,
                derive_seed(scenario.seed, COALITION_KEY_STREAM + idx as u64),
            ));
        }
        Ok(Population {
            profiles,
            coalitions,
            tasks: generate_tasks(n, scenario.seed),
            real: n,
            seed: scenario.seed,
        })
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Appends good padding participants up to the next multiple of `multiple`.
    pub fn pad_to_multiple(&mut self, multiple: usize) {
        let target = self.len().div_ceil(multiple) * multiple;
        let start = self.len();
        self.profiles
            .extend((start..target).map(|i| ParticipantProfile::good(ParticipantId(i as u32))));
        self.tasks = generate_tasks(target, self.seed);
    }

    pub fn is_padding(&self, p: ParticipantId) -> bool {
        p.0 as usize >= self.real
    }

    pub fn profile(&self, p: ParticipantId) -> &ParticipantProfile {
        &self.profiles[p.0 as usize]
    }

    pub fn coalition_of(&self, p: ParticipantId) -> Option<&Coalition> {
        self.profile(p)
            .coalition
            .map(|c| &self.coalitions[c.0 as usize])
    }

    pub fn cheaters(&self) -> impl Iterator<Item = ParticipantId> + '_ {
        self.profiles
            .iter()
            .filter(|p| p.behavior == Behavior::Cheater)
            .map(|p| p.id)
    }
}
