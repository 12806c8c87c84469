//! Round-pipelined duplication experiments.
//!
//! Participants `0..cheaters` forge, the next `traitors` answer their own
//! tasks honestly but corroborate forgeries, and the rest are honest. Only
//! who lands where matters, so participants are plain indices and answers are
//! reduced to "truth" or "the coalition's forgery".

mod experiments;
mod schedule;

pub use experiments::{
    run_delayed_duplication, run_delayed_with_streams, run_same_round_duplication, run_sybil_ramp,
    DelayedRun, DelayedStreams, SybilParams, SybilRun,
};
pub use schedule::{
    check_round, pipeline_schedule, PipelineSchedule, ScheduledRound, ScheduledTask, SlotKind,
};

use thiserror::Error;

use crate::economics::EconError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Econ(#[from] EconError),
}

/// Who is who in a replication experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimPopulation {
    pub size: u32,
    pub cheaters: u32,
    pub traitors: u32,
}

/// Default number of participants.
pub const DEFAULT_POPULATION: u32 = 10_000;

impl SimPopulation {
    pub fn new(size: u32, cheaters: u32, traitors: u32) -> Result<Self, SimError> {
        if size < 3 {
            return Err(SimError::InvalidParameter(
                "population needs at least 3 participants",
            ));
        }
        if cheaters as u64 + traitors as u64 > size as u64 {
            return Err(SimError::InvalidParameter(
                "coalition larger than the population",
            ));
        }
        Ok(SimPopulation {
            size,
            cheaters,
            traitors,
        })
    }

    /// `round(fraction * size)` cheaters and no traitors.
    pub fn with_fraction(size: u32, fraction: f64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(SimError::InvalidParameter(
                "coalition fraction must lie in [0, 1]",
            ));
        }
        let cheaters = libm::round(fraction * size as f64) as u32;
        Self::new(size, cheaters, 0)
    }

    pub fn coalition_size(&self) -> u32 {
        self.cheaters + self.traitors
    }

    pub fn coalition_fraction(&self) -> f64 {
        self.coalition_size() as f64 / self.size as f64
    }

    pub fn is_cheater(&self, p: u32) -> bool {
        p < self.cheaters
    }

    pub fn in_coalition(&self, p: u32) -> bool {
        p < self.coalition_size()
    }
}

/// Outcome counters of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimMetrics {
    pub tasks_total: u64,
    /// Originals that returned a forged value.
    pub tasks_forged: u64,
    /// Forged originals whose check copy disagreed.
    pub forged_caught: u64,
    pub forged_undetected: u64,
    /// Honest responses that lost the third-copy vote.
    pub false_accusations: u64,
    pub duplicates_issued: u64,
    /// Third copies shipped after a mismatch.
    pub tiebreaks_issued: u64,
    /// Votes won by the forged value.
    pub tiebreak_errors: u64,
}

impl SimMetrics {
    /// `forged_caught / tasks_forged`; `None` without forgeries.
    pub fn empirical_catch_rate(&self) -> Option<f64> {
        (self.tasks_forged > 0).then(|| self.forged_caught as f64 / self.tasks_forged as f64)
    }

    pub fn replication_overhead(&self) -> f64 {
        if self.tasks_total == 0 {
            0.0
        } else {
            self.duplicates_issued as f64 / self.tasks_total as f64
        }
    }

    pub fn undetected_fraction(&self) -> f64 {
        if self.tasks_total == 0 {
            0.0
        } else {
            self.forged_undetected as f64 / self.tasks_total as f64
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.forged_caught + self.forged_undetected == self.tasks_forged
            && self.tasks_forged <= self.tasks_total
    }
}

/// Binomial standard error of a proportion `p` over `n` trials.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    libm::sqrt(p * (1.0 - p) / n as f64)
}
