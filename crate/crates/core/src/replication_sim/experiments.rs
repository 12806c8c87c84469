use alloc::vec::Vec;

use rand::Rng;

use super::schedule::PipelineSchedule;
use super::{SimError, SimMetrics, SimPopulation};
use crate::economics::sybil_replication_prob;
use crate::rng::{derive_seed, seeded, SimRng};

const ASSIGNMENT_STREAM: u64 = 0x6173_7369_676e;
const DUPLICATION_STREAM: u64 = 0x6475_706c;
const TIEBREAK_STREAM: u64 = 0x7469_6562;

fn other_than<R: Rng + ?Sized>(rng: &mut R, n: u32, a: u32) -> u32 {
    let x = rng.gen_range(0..n - 1);
    if x >= a {
        x + 1
    } else {
        x
    }
}

fn other_than_two<R: Rng + ?Sized>(rng: &mut R, n: u32, a: u32, b: u32) -> u32 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mut x = rng.gen_range(0..n - 2);
    if x >= lo {
        x += 1;
    }
    if x >= hi {
        x += 1;
    }
    x
}

fn check_probability(p: f64, what: &'static str) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SimError::InvalidParameter(what))
    }
}

/// Check copy of a forged original went to an honest checker: ship a third
/// copy and let the majority decide.
fn resolve_mismatch(
    pop: &SimPopulation,
    original: u32,
    checker: u32,
    rng: &mut SimRng,
    m: &mut SimMetrics,
) {
    m.tiebreaks_issued += 1;
    let third = other_than_two(rng, pop.size, original, checker);
    if pop.in_coalition(third) {
        m.tiebreak_errors += 1;
        m.false_accusations += 1;
    }
}

/// Every task is duplicated once in its own round, so a coalition sees both
/// copies before answering and forges exactly when both land inside it.
pub fn run_same_round_duplication(
    pop: &SimPopulation,
    n_tasks: u64,
    seed: u64,
) -> Result<SimMetrics, SimError> {
    let mut rng = seeded(derive_seed(seed, ASSIGNMENT_STREAM));
    let mut m = SimMetrics {
        tasks_total: n_tasks,
        duplicates_issued: n_tasks,
        ..SimMetrics::default()
    };
    for _ in 0..n_tasks {
        let original = rng.gen_range(0..pop.size);
        let checker = other_than(&mut rng, pop.size, original);
        if pop.is_cheater(original) && pop.in_coalition(checker) {
            m.tasks_forged += 1;
            m.forged_undetected += 1;
        }
    }
    Ok(m)
}

/// Seeds of the three independent random streams of a delayed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayedStreams {
    pub assignment: u64,
    pub duplication: u64,
    pub tiebreak: u64,
}

impl DelayedStreams {
    pub fn from_seed(seed: u64) -> Self {
        DelayedStreams {
            assignment: derive_seed(seed, ASSIGNMENT_STREAM),
            duplication: derive_seed(seed, DUPLICATION_STREAM),
            tiebreak: derive_seed(seed, TIEBREAK_STREAM),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayedRun {
    pub metrics: SimMetrics,
    /// Per-task cheat decisions, when recorded.
    pub decisions: Option<Vec<bool>>,
    /// Originals and check copies, when recorded.
    pub schedule: Option<PipelineSchedule>,
}

/// Rounds of `pop.size` tasks in two interleaved sequences; each check copy
/// goes out after its original is committed.
pub fn run_delayed_duplication(
    pop: &SimPopulation,
    replication_prob: f64,
    n_tasks: u64,
    seed: u64,
) -> Result<SimMetrics, SimError> {
    run_delayed_with_streams(
        pop,
        replication_prob,
        n_tasks,
        DelayedStreams::from_seed(seed),
        false,
    )
    .map(|r| r.metrics)
}

pub fn run_delayed_with_streams(
    pop: &SimPopulation,
    replication_prob: f64,
    n_tasks: u64,
    streams: DelayedStreams,
    record: bool,
) -> Result<DelayedRun, SimError> {
    check_probability(
        replication_prob,
        "replication probability must lie in [0, 1]",
    )?;
    const INTERLEAVE: usize = 2;
    let per_round = pop.size as u64;
    let mut assign = seeded(streams.assignment);
    let mut dup = seeded(streams.duplication);
    let mut tie = seeded(streams.tiebreak);
    let mut m = SimMetrics {
        tasks_total: n_tasks,
        ..SimMetrics::default()
    };
    let mut decisions = record.then(Vec::new);
    let mut schedule = if record {
        Some(super::pipeline_schedule(0, 1, INTERLEAVE)?)
    } else {
        None
    };

    let mut start = 0u64;
    let mut round = 0usize;
    let mut committed: Vec<(u64, u32, bool)> = Vec::with_capacity(per_round as usize);
    while start < n_tasks {
        let end = (start + per_round).min(n_tasks);
        // Commit: cheaters decide knowing nothing about later check copies.
        committed.clear();
        for task in start..end {
            let original = assign.gen_range(0..pop.size);
            let forged = pop.is_cheater(original);
            committed.push((task, original, forged));
            if let Some(d) = decisions.as_mut() {
                d.push(forged);
            }
            if let Some(s) = schedule.as_mut() {
                s.push_original(round, task);
            }
        }
        m.tasks_forged += committed.iter().filter(|c| c.2).count() as u64;
        // Check copies for this round land `INTERLEAVE` rounds later.
        for &(task, original, forged) in &committed {
            if !dup.gen_bool(replication_prob) {
                if forged {
                    m.forged_undetected += 1;
                }
                continue;
            }
            m.duplicates_issued += 1;
            if let Some(s) = schedule.as_mut() {
                s.push_duplicate(round, task);
            }
            let checker = other_than(&mut dup, pop.size, original);
            if !forged {
                continue;
            }
            if pop.in_coalition(checker) {
                m.forged_undetected += 1;
            } else {
                m.forged_caught += 1;
                resolve_mismatch(pop, original, checker, &mut tie, &mut m);
            }
        }
        start = end;
        round += 1;
    }
    Ok(DelayedRun {
        metrics: m,
        decisions,
        schedule,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SybilParams {
    pub p: f64,
    pub g: f64,
    pub ramp: u32,
    /// Number of identities, by creation order, whose replication
    /// probabilities are traced.
    pub trace_identities: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SybilRun {
    pub metrics: SimMetrics,
    /// Forgeries an identity got away with plus the one that caught it.
    pub catch_attempts: Vec<u32>,
    /// Forgery counts of cheating identities still active at the end.
    pub open_attempts: Vec<u32>,
    /// Replication probability of each task of each traced identity.
    pub traces: Vec<Vec<f64>>,
    pub identities_created: u64,
}

impl SybilRun {
    /// Fraction of cheating identities caught within `k` forgeries, among
    /// those that were caught or survived at least `k`.
    pub fn caught_within(&self, k: u32) -> Option<f64> {
        let hit = self.catch_attempts.iter().filter(|&&a| a <= k).count();
        let total =
            self.catch_attempts.len() + self.open_attempts.iter().filter(|&&a| a >= k).count();
        (total > 0).then(|| hit as f64 / total as f64)
    }
}

#[derive(Clone, Copy)]
struct Identity {
    id: u64,
    completed: u64,
    forgeries: u32,
}

/// Tasks go to uniformly random slots; each slot holds one identity, and a
/// caught cheater comes back under a fresh identity with no history.
pub fn run_sybil_ramp(
    pop: &SimPopulation,
    params: &SybilParams,
    n_tasks: u64,
    seed: u64,
) -> Result<SybilRun, SimError> {
    sybil_replication_prob(0, params.p, params.g, params.ramp)?;
    let streams = DelayedStreams::from_seed(seed);
    let mut assign = seeded(streams.assignment);
    let mut dup = seeded(streams.duplication);
    let mut tie = seeded(streams.tiebreak);
    let mut slots: Vec<Identity> = (0..pop.size as u64)
        .map(|id| Identity {
            id,
            completed: 0,
            forgeries: 0,
        })
        .collect();
    let mut next_id = pop.size as u64;
    let trace_len = params.trace_identities;
    let mut traces = alloc::vec![Vec::new(); trace_len];
    let mut run = SybilRun {
        metrics: SimMetrics {
            tasks_total: n_tasks,
            ..SimMetrics::default()
        },
        catch_attempts: Vec::new(),
        open_attempts: Vec::new(),
        traces: Vec::new(),
        identities_created: next_id,
    };
    let m = &mut run.metrics;
    for _ in 0..n_tasks {
        let slot = assign.gen_range(0..pop.size);
        let forged = pop.is_cheater(slot);
        let ident = &mut slots[slot as usize];
        let q = sybil_replication_prob(ident.completed, params.p, params.g, params.ramp)?;
        if (ident.id as usize) < trace_len {
            traces[ident.id as usize].push(q);
        }
        if forged {
            m.tasks_forged += 1;
            ident.forgeries += 1;
        }
        let mut caught = false;
        if dup.gen_bool(q) {
            m.duplicates_issued += 1;
            let checker = other_than(&mut dup, pop.size, slot);
            if forged && !pop.in_coalition(checker) {
                caught = true;
                resolve_mismatch(pop, slot, checker, &mut tie, m);
            }
        }
        if caught {
            m.forged_caught += 1;
            run.catch_attempts.push(ident.forgeries);
            *ident = Identity {
                id: next_id,
                completed: 0,
                forgeries: 0,
            };
            next_id += 1;
        } else {
            if forged {
                m.forged_undetected += 1;
            }
            ident.completed += 1;
        }
    }
    run.open_attempts = slots
        .iter()
        .take(pop.cheaters as usize)
        .map(|i| i.forgeries)
        .collect();
    run.traces = traces;
    run.identities_created = next_id;
    Ok(run)
}
