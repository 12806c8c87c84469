//! Machine-readable run reports.
//!
//! Every command emits one JSON document. `generated_at_unix` is the only
//! field that changes between identical runs and is omitted under
//! `--no-timestamp`.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use gridcheck_core::diagnosis::{CountingBounds, DiagnosisRun, Protocol, Verdict};
use gridcheck_core::digraph::Certification;
use gridcheck_core::replication_sim::{binomial_se, SimMetrics};
use serde::Serialize;

/// Width of the reported confidence intervals, in standard errors.
pub const CI_SIGMAS: f64 = 3.0;

pub fn timestamp(include: bool) -> Option<u64> {
    include.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificationReport {
    pub verified: bool,
    pub attempts: Option<usize>,
}

impl From<Certification> for CertificationReport {
    fn from(c: Certification) -> Self {
        match c {
            Certification::Verified { attempts } => CertificationReport {
                verified: true,
                attempts: Some(attempts),
            },
            Certification::Unverified => CertificationReport {
                verified: false,
                attempts: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountsReport {
    pub participants: usize,
    pub discarded: usize,
    pub super_vertices: usize,
    pub bad_bound: usize,
    pub good_super_vertices: usize,
    pub unresolved: usize,
    pub proven_good: usize,
    pub final_round_tests: usize,
    pub max_tests_per_tester: usize,
}

impl From<&CountingBounds> for CountsReport {
    fn from(c: &CountingBounds) -> Self {
        CountsReport {
            participants: c.participants,
            discarded: c.discarded,
            super_vertices: c.super_vertices,
            bad_bound: c.bad_bound,
            good_super_vertices: c.good_super_vertices,
            unresolved: c.unresolved,
            proven_good: c.proven_good,
            final_round_tests: c.final_round_tests,
            max_tests_per_tester: c.max_tests_per_tester,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosisReport {
    pub command: &'static str,
    pub protocol: &'static str,
    pub seed: u64,
    pub participants: usize,
    pub cheaters: usize,
    pub coalitions: usize,
    pub strategy: String,
    pub exact_match: bool,
    pub false_accusations: usize,
    pub missed: usize,
    pub mixed_sccs: usize,
    pub out_of_contract: bool,
    pub rounds_used: u32,
    pub tests_issued: usize,
    pub max_replication_per_task: u32,
    /// Task count by number of test re-executions.
    pub replication_histogram: BTreeMap<u32, usize>,
    pub flagged_participants: Vec<u32>,
    pub forged_tasks: Vec<u64>,
    pub forged_truth: Vec<u64>,
    pub match_scc_sizes: Vec<usize>,
    pub graph_certification: CertificationReport,
    pub counts: CountsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

impl DiagnosisReport {
    pub fn new(protocol: Protocol, seed: u64, run: &DiagnosisRun, stamp: bool) -> Self {
        let r = &run.result;
        let pop = run.engine.population();
        DiagnosisReport {
            command: "diagnose",
            protocol: protocol.name(),
            seed,
            participants: pop.real,
            cheaters: pop.cheaters().filter(|p| !pop.is_padding(*p)).count(),
            coalitions: pop.coalitions.len(),
            strategy: pop
                .coalitions
                .first()
                .map_or("none", |c| c.strategy.name())
                .to_string(),
            exact_match: run.score.exact_match(),
            false_accusations: run.score.false_accusations.len(),
            missed: run.score.missed.len(),
            mixed_sccs: run.score.mixed_sccs,
            out_of_contract: r.out_of_contract,
            rounds_used: r.rounds_used,
            tests_issued: r.tests_issued,
            max_replication_per_task: r.max_replication_per_task,
            replication_histogram: r.replication_histogram.clone(),
            flagged_participants: r
                .participant_verdicts
                .iter()
                .filter(|(_, v)| **v == Verdict::Bad)
                .map(|(p, _)| p.0)
                .collect(),
            forged_tasks: r.forged_tasks().iter().map(|t| t.0).collect(),
            forged_truth: run.score.forged_truth.iter().map(|t| t.0).collect(),
            match_scc_sizes: r.match_sccs.iter().map(Vec::len).collect(),
            graph_certification: r.graph_certification.into(),
            counts: (&r.counts).into(),
            generated_at_unix: timestamp(stamp),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub estimate: f64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Option<Self> {
        (trials > 0).then(|| {
            let p = hits as f64 / trials as f64;
            let half = CI_SIGMAS * binomial_se(p, trials);
            Proportion {
                estimate: p,
                trials,
                ci_low: (p - half).max(0.0),
                ci_high: (p + half).min(1.0),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    pub seed: u64,
    pub tasks_total: u64,
    pub tasks_forged: u64,
    pub forged_caught: u64,
    pub forged_undetected: u64,
    pub false_accusations: u64,
    pub duplicates_issued: u64,
    pub tiebreaks_issued: u64,
    pub tiebreak_errors: u64,
    pub catch_rate: Option<f64>,
    pub undetected_fraction: f64,
    pub replication_overhead: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caught_within_10: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities_created: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<Vec<f64>>,
}

impl SimRecord {
    pub fn new(seed: u64, m: &SimMetrics) -> Self {
        SimRecord {
            seed,
            tasks_total: m.tasks_total,
            tasks_forged: m.tasks_forged,
            forged_caught: m.forged_caught,
            forged_undetected: m.forged_undetected,
            false_accusations: m.false_accusations,
            duplicates_issued: m.duplicates_issued,
            tiebreaks_issued: m.tiebreaks_issued,
            tiebreak_errors: m.tiebreak_errors,
            catch_rate: m.empirical_catch_rate(),
            undetected_fraction: m.undetected_fraction(),
            replication_overhead: m.replication_overhead(),
            caught_within_10: None,
            identities_created: None,
            traces: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimAggregate {
    pub runs: usize,
    pub tasks_total: u64,
    pub tasks_forged: u64,
    pub forged_caught: u64,
    pub forged_undetected: u64,
    pub false_accusations: u64,
    /// Pooled `forged_caught / tasks_forged`.
    pub catch_rate: Option<Proportion>,
    /// Pooled `forged_undetected / tasks_total`.
    pub undetected_fraction: Option<Proportion>,
    pub mean_replication_overhead: f64,
}

impl SimAggregate {
    pub fn new(records: &[SimRecord]) -> Self {
        let sum = |f: fn(&SimRecord) -> u64| records.iter().map(f).sum::<u64>();
        let tasks_total = sum(|r| r.tasks_total);
        let tasks_forged = sum(|r| r.tasks_forged);
        let forged_caught = sum(|r| r.forged_caught);
        let forged_undetected = sum(|r| r.forged_undetected);
        SimAggregate {
            runs: records.len(),
            tasks_total,
            tasks_forged,
            forged_caught,
            forged_undetected,
            false_accusations: sum(|r| r.false_accusations),
            catch_rate: Proportion::new(forged_caught, tasks_forged),
            undetected_fraction: Proportion::new(forged_undetected, tasks_total),
            mean_replication_overhead: if records.is_empty() {
                0.0
            } else {
                records.iter().map(|r| r.replication_overhead).sum::<f64>() / records.len() as f64
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub command: &'static str,
    pub mode: &'static str,
    pub population: u32,
    pub cheaters: u32,
    pub traitors: u32,
    pub n_tasks: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replication_prob: Option<f64>,
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp: Option<u32>,
    pub records: Vec<SimRecord>,
    pub aggregate: SimAggregate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "mode",
    "seed",
    "tasks_total",
    "tasks_forged",
    "forged_caught",
    "forged_undetected",
    "false_accusations",
    "duplicates_issued",
    "tiebreaks_issued",
    "tiebreak_errors",
    "catch_rate",
    "undetected_fraction",
    "replication_overhead",
    "caught_within_10",
];

/// One row per seed; empty cells for undefined rates.
pub fn sim_csv(report: &SimReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("writing to memory");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.records {
        w.write_record([
            report.mode.to_string(),
            r.seed.to_string(),
            r.tasks_total.to_string(),
            r.tasks_forged.to_string(),
            r.forged_caught.to_string(),
            r.forged_undetected.to_string(),
            r.false_accusations.to_string(),
            r.duplicates_issued.to_string(),
            r.tiebreaks_issued.to_string(),
            r.tiebreak_errors.to_string(),
            opt(r.catch_rate),
            r.undetected_fraction.to_string(),
            r.replication_overhead.to_string(),
            opt(r.caught_within_10),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
}
