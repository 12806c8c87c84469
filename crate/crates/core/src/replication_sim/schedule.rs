use alloc::vec::Vec;

use super::SimError;

/// Why a task sits in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Original,
    /// A check copy of a task first committed in `original_round`.
    Duplicate {
        original_round: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledTask {
    pub task: u64,
    pub kind: SlotKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledRound {
    pub index: usize,
    pub sequence: usize,
    pub tasks: Vec<ScheduledTask>,
}

/// Rounds split into `interleave` sequences taken in turn.
///
/// Round `r` belongs to sequence `r % interleave`. A round only starts after
/// the previous round of its own sequence completes, so a duplicate placed
/// `interleave` rounds after its original never runs before the original's
/// answer is in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineSchedule {
    interleave: usize,
    rounds: Vec<ScheduledRound>,
}

/// Round receiving the check copy of a task committed in `round`.
pub fn check_round(round: usize, interleave: usize) -> usize {
    round + interleave
}

/// Spreads `n_tasks` originals over `rounds` rounds as evenly as possible,
/// earlier rounds taking the remainder.
pub fn pipeline_schedule(
    n_tasks: u64,
    rounds: usize,
    interleave: usize,
) -> Result<PipelineSchedule, SimError> {
    if rounds == 0 {
        return Err(SimError::InvalidParameter("rounds must be at least 1"));
    }
    if interleave == 0 {
        return Err(SimError::InvalidParameter("interleave must be at least 1"));
    }
    let mut schedule = PipelineSchedule {
        interleave,
        rounds: Vec::new(),
    };
    schedule.ensure_round(rounds - 1);
    let per = n_tasks / rounds as u64;
    let extra = n_tasks % rounds as u64;
    let mut next = 0u64;
    for (r, round) in schedule.rounds.iter_mut().enumerate() {
        let take = per + u64::from((r as u64) < extra);
        round
            .tasks
            .extend((next..next + take).map(|task| ScheduledTask {
                task,
                kind: SlotKind::Original,
            }));
        next += take;
    }
    Ok(schedule)
}

impl PipelineSchedule {
    pub fn interleave(&self) -> usize {
        self.interleave
    }

    pub fn rounds(&self) -> &[ScheduledRound] {
        &self.rounds
    }

    fn ensure_round(&mut self, index: usize) {
        while self.rounds.len() <= index {
            let r = self.rounds.len();
            self.rounds.push(ScheduledRound {
                index: r,
                sequence: r % self.interleave,
                tasks: Vec::new(),
            });
        }
    }

    /// Round holding the original of `task`, if any.
    pub fn original_round(&self, task: u64) -> Option<usize> {
        self.rounds.iter().position(|r| {
            r.tasks
                .iter()
                .any(|t| t.task == task && t.kind == SlotKind::Original)
        })
    }

    /// Adds an original in the given round, growing the schedule if needed.
    pub fn push_original(&mut self, round: usize, task: u64) {
        self.ensure_round(round);
        self.rounds[round].tasks.push(ScheduledTask {
            task,
            kind: SlotKind::Original,
        });
    }

    /// Queues a check copy of a task committed in `original_round` and
    /// returns the round it lands in.
    pub fn push_duplicate(&mut self, original_round: usize, task: u64) -> usize {
        let target = check_round(original_round, self.interleave);
        self.ensure_round(target);
        self.rounds[target].tasks.push(ScheduledTask {
            task,
            kind: SlotKind::Duplicate { original_round },
        });
        target
    }

    /// Every duplicate runs in a later round of the same sequence as its
    /// original.
    pub fn respects_sequencing(&self) -> bool {
        self.rounds.iter().all(|round| {
            round.tasks.iter().all(|t| match t.kind {
                SlotKind::Original => true,
                SlotKind::Duplicate { original_round } => {
                    original_round < round.index
                        && self.rounds[original_round].sequence == round.sequence
                }
            })
        })
    }
}
