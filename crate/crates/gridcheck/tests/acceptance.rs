//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

#![allow(clippy::needless_range_loop)]

use std::sync::Mutex;
use std::thread;

use gridcheck::commands::{self, SimMode};
use gridcheck::config::SimulateConfig;
use gridcheck::report::{to_json, DiagnosisReport};
use gridcheck_core::adversary::Strategy;
use gridcheck_core::diagnosis::{run_diagnosis, Protocol, RunOptions};
use gridcheck_core::digraph::{
    balanced_cut_condition, failure_exponent, is_resilient, random_hamiltonian_union, Digraph,
};
use gridcheck_core::economics::{
    cooperation_preferred, deterrence_threshold, repeated_catch_probability, sybil_replication_prob,
};
use gridcheck_core::grid_model::Scenario;
use gridcheck_core::replication_sim::{
    binomial_se, run_delayed_duplication, run_same_round_duplication, SimPopulation,
};
use gridcheck_core::rng::seeded;
use gridcheck_core::Fraction;
use rand::Rng;

/// Independent high-precision evaluations of the failure exponent.
const EXPONENT_ANCHOR_H4: f64 = -0.280_864_886_717_604_5;
const EXPONENT_ANCHOR_H8: f64 = -1.100_344_714_346_031_9;

/// Resilience-rate floor at n = 20, d = 4. A 1000-draw pilot found no
/// failures; with the rule-of-three bound p >= 0.997 the floor is
/// 0.997 - 3 * sqrt(0.997 * 0.003 / 200).
const RESILIENCE_RATE_FLOOR: f64 = 0.985;
const RESILIENCE_SAMPLES: u64 = 200;

const DIAGNOSIS_SEEDS: u64 = 200;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn frac(n: u64, d: u64) -> Fraction {
    Fraction::new(n, d).unwrap()
}

fn strategies(seed: u64) -> Vec<Strategy> {
    let mut s = Strategy::builtins().to_vec();
    s.push(Strategy::Randomized { seed });
    s
}

fn workers() -> usize {
    thread::available_parallelism().map_or(4, |n| n.get())
}

/// Runs `job` over `items` on all cores, keeping results in input order.
fn par_map<T: Sync, R: Send>(items: &[T], job: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let chunk = items.len().div_ceil(workers()).max(1);
    let out: Vec<Mutex<Vec<R>>> = items
        .chunks(chunk)
        .map(|_| Mutex::new(Vec::new()))
        .collect();
    thread::scope(|s| {
        for (part, slot) in items.chunks(chunk).zip(&out) {
            let job = &job;
            s.spawn(move || {
                let r: Vec<R> = part.iter().map(job).collect();
                *slot.lock().unwrap() = r;
            });
        }
    });
    out.into_iter()
        .flat_map(|m| m.into_inner().unwrap())
        .collect()
}

#[derive(Clone, Copy)]
struct DiagnosisCase {
    protocol: Protocol,
    n: usize,
    cheaters: usize,
    strategy_idx: usize,
    seed: u64,
}

impl DiagnosisCase {
    fn scenario(&self) -> Scenario {
        let strategy = strategies(self.seed)[self.strategy_idx];
        let coalitions = 1 + (self.seed % 3) as usize;
        Scenario::with_cheaters(self.n, self.cheaters, coalitions, strategy, self.seed)
    }
}

#[derive(Default)]
struct DiagnosisTally {
    runs: usize,
    inexact: Vec<String>,
    wrong_rounds: usize,
    max_replication: u32,
    mixed_sccs: usize,
}

fn diagnosis_matrix(protocol: Protocol, sizes: &[usize]) -> Vec<DiagnosisCase> {
    let mut cases = Vec::new();
    for &n in sizes {
        for cheaters in 0..=protocol.cheater_bound(n) {
            for strategy_idx in 0..5 {
                for s in 0..DIAGNOSIS_SEEDS {
                    cases.push(DiagnosisCase {
                        protocol,
                        n,
                        cheaters,
                        strategy_idx,
                        seed: s * 1_000_003 + (n * 31 + cheaters) as u64,
                    });
                }
            }
        }
    }
    cases
}

fn run_matrix(cases: &[DiagnosisCase]) -> DiagnosisTally {
    let results = par_map(cases, |c| {
        run_diagnosis(c.protocol, &c.scenario(), RunOptions::default())
    });
    let mut t = DiagnosisTally::default();
    for (c, run) in cases.iter().zip(results) {
        t.runs += 1;
        match run {
            Ok(run) => {
                if !run.score.exact_match() {
                    t.inexact.push(format!(
                        "n={} cheaters={} strategy={} seed={}",
                        c.n,
                        c.cheaters,
                        c.scenario().strategy,
                        c.seed
                    ));
                }
                if run.result.rounds_used != c.protocol.rounds() {
                    t.wrong_rounds += 1;
                }
                t.max_replication = t.max_replication.max(run.result.max_replication_per_task);
                t.mixed_sccs += run.score.mixed_sccs;
            }
            Err(e) => t.inexact.push(format!("n={} seed={}: {e}", c.n, c.seed)),
        }
    }
    t
}

fn judge_matrix(t: &DiagnosisTally, protocol: Protocol) -> Verdict {
    let pass = t.inexact.is_empty()
        && t.wrong_rounds == 0
        && t.max_replication <= protocol.replication_bound();
    verdict(
        pass,
        format!(
            "{} runs, {} inexact{}, {} with wrong round count, max replication {} (bound {})",
            t.runs,
            t.inexact.len(),
            t.inexact
                .first()
                .map(|s| format!(" (first: {s})"))
                .unwrap_or_default(),
            t.wrong_rounds,
            t.max_replication,
            protocol.replication_bound()
        ),
    )
}

fn criterion_exponent() -> Verdict {
    let h4 = failure_exponent(7.0 / 15.0, 15.0 / 16.0, 4)
        .unwrap()
        .coefficient;
    let h8 = failure_exponent(0.5, 7.0 / 8.0, 8).unwrap().coefficient;
    let pass = h4 <= -0.25
        && h8 <= -1.0
        && (h4 - EXPONENT_ANCHOR_H4).abs() <= 1e-9
        && (h8 - EXPONENT_ANCHOR_H8).abs() <= 1e-9;
    verdict(
        pass,
        format!("H4 coefficient {h4:.12}, H8 coefficient {h8:.12}"),
    )
}

fn naive_largest_scc(adj: &[Vec<bool>], subset: &[usize]) -> usize {
    let k = subset.len();
    let mut reach: Vec<Vec<bool>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| i == j || adj[subset[i]][subset[j]])
                .collect()
        })
        .collect();
    for m in 0..k {
        for i in 0..k {
            if reach[i][m] {
                for j in 0..k {
                    if reach[m][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..k)
        .map(|i| (0..k).filter(|&j| reach[i][j] && reach[j][i]).count())
        .max()
        .unwrap_or(0)
}

fn subsets_of_size(n: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n)
        .filter(move |m| m.count_ones() as usize == size)
        .map(move |m| (0..n).filter(|&v| m >> v & 1 == 1).collect())
}

fn criterion_resilience_oracle() -> Verdict {
    let mut rng = seeded(0x0004_AC1E);
    let (mut disagreements, mut cut_held, mut cut_counterexamples) = (0, 0, 0);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=12usize);
        let density = rng.gen_range(0.1..0.95);
        let mut adj = vec![vec![false; n]; n];
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(density) {
                    adj[u][v] = true;
                    edges.push((u, v));
                }
            }
        }
        let g = Digraph::from_edges(n, edges).unwrap();
        let den = rng.gen_range(2..=12u64);
        let a = rng.gen_range(1..=den);
        let b = rng.gen_range(1..=a);
        let (alpha, beta) = (frac(a, den), frac(b, den));
        let size = alpha.ceil_mul(n);
        let need = beta.ceil_mul(n);
        let naive =
            (size..=n).all(|k| subsets_of_size(n, k).all(|s| naive_largest_scc(&adj, &s) >= need));
        if naive != is_resilient(&g, alpha, beta).unwrap() {
            disagreements += 1;
        }
        let gamma = frac(rng.gen_range(1..den), den);
        if balanced_cut_condition(&g, alpha, gamma).unwrap() {
            cut_held += 1;
            let need = gamma.checked_mul(alpha).unwrap().ceil_mul(n);
            if subsets_of_size(n, size).any(|s| naive_largest_scc(&adj, &s) < need) {
                cut_counterexamples += 1;
            }
        }
    }
    verdict(
        disagreements == 0 && cut_counterexamples == 0 && cut_held > 0,
        format!(
            "1000 graphs: {disagreements} disagreements; balanced-cut condition held on {cut_held}, {cut_counterexamples} counterexamples"
        ),
    )
}

fn criterion_resilience_rate() -> Verdict {
    let (alpha, beta) = (frac(15, 16), frac(7, 16));
    let seeds: Vec<u64> = (0..RESILIENCE_SAMPLES).map(|i| 0x5A3C_0000 + i).collect();
    let hits = par_map(&seeds, |&s| {
        let g = random_hamiltonian_union(20, 4, s).unwrap();
        is_resilient(&g, alpha, beta).unwrap()
    })
    .into_iter()
    .filter(|&r| r)
    .count();
    let rate = hits as f64 / RESILIENCE_SAMPLES as f64;
    verdict(
        rate >= RESILIENCE_RATE_FLOOR,
        format!(
            "{hits}/{RESILIENCE_SAMPLES} resilient (rate {rate:.3}, floor {RESILIENCE_RATE_FLOOR})"
        ),
    )
}

fn criterion_same_round() -> Verdict {
    let pop = SimPopulation::with_fraction(10_000, 0.05).unwrap();
    let n = 1_000_000;
    let m = run_same_round_duplication(&pop, n, 0x0625).unwrap();
    let target = 0.0025;
    let observed = m.undetected_fraction();
    let tol = 3.0 * binomial_se(target, n);
    verdict(
        (observed - target).abs() <= tol && m.is_consistent(),
        format!("undetected fraction {observed:.6} over {n} tasks, target {target} +/- {tol:.6}"),
    )
}

fn criterion_delayed() -> Verdict {
    let mut failures = Vec::new();
    let pop = SimPopulation::with_fraction(10_000, 0.01).unwrap();
    let m = run_delayed_duplication(&pop, 1.0, 10_100_000, 0x0099).unwrap();
    let headline = m.empirical_catch_rate().unwrap();
    let tol = 3.0 * binomial_se(0.99, m.tasks_forged);
    if m.tasks_forged < 100_000 || (headline - 0.99).abs() > tol {
        failures.push(format!("headline {headline:.5}"));
    }
    for f in [0.01, 0.05, 0.10] {
        for rp in [0.25, 0.5, 1.0] {
            let pop = SimPopulation::with_fraction(10_000, f).unwrap();
            let tasks = (100_000.0 / f) as u64;
            let m =
                run_delayed_duplication(&pop, rp, tasks, (f * 1000.0) as u64 ^ (rp * 64.0) as u64)
                    .unwrap();
            let expect = rp * (1.0 - f);
            let rate = m.empirical_catch_rate().unwrap();
            if (rate - expect).abs() > 3.0 * binomial_se(expect, m.tasks_forged)
                || !m.is_consistent()
            {
                failures.push(format!("f={f} rp={rp}: {rate:.5} vs {expect:.5}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "catch rate {headline:.5} over {} forged tasks (target 0.99 +/- {tol:.5}); 3x3 grid {}",
            m.tasks_forged,
            if failures.is_empty() {
                "within 3 SE".to_string()
            } else {
                failures.join("; ")
            }
        ),
    )
}

fn criterion_economics() -> Verdict {
    let mut rng = seeded(0xEC0);
    let mut violations = 0;
    for _ in 0..100_000 {
        let b = rng.gen_range(0.0..10.0f64).max(f64::MIN_POSITIVE);
        let u = rng.gen_range(0.0..10.0);
        let c = rng.gen_range(0.0..10.0);
        let p = rng.gen_range(0.0..=1.0);
        let t = deterrence_threshold(b, u, c).unwrap();
        if cooperation_preferred(b, u, c, p) != (p > t) {
            violations += 1;
        }
    }
    let sybil = sybil_replication_prob(20, 0.5, 0.95, 20).unwrap();
    let sybil_late = sybil_replication_prob(1000, 0.5, 0.95, 20).unwrap();
    let repeat = repeated_catch_probability(0.5, 10).unwrap();
    let pass = violations == 0
        && sybil == 10.0 / 19.0
        && sybil_late == 10.0 / 19.0
        && repeat == 1.0 - 2f64.powi(-10);
    verdict(
        pass,
        format!("{violations} threshold violations in 1e5 draws; sybil floor {sybil}; ten-attempt catch {repeat}"),
    )
}

fn criterion_determinism(samples: &[DiagnosisCase]) -> Verdict {
    let render = |c: &DiagnosisCase| {
        let run = run_diagnosis(c.protocol, &c.scenario(), RunOptions::default()).unwrap();
        to_json(&DiagnosisReport::new(c.protocol, c.seed, &run, false))
    };
    let mut differing = samples.iter().filter(|c| render(c) != render(c)).count();
    let sim = SimulateConfig {
        n_tasks: 200_000,
        coalition_fraction: 0.05,
        ..SimulateConfig::default()
    };
    for mode in [SimMode::SameRound, SimMode::Delayed, SimMode::Sybil] {
        let once = || to_json(&commands::simulate(mode, &sim, &[3, 4], false).unwrap());
        if once() != once() {
            differing += 1;
        }
    }
    verdict(
        differing == 0,
        format!(
            "{} diagnosis and 3 simulation reports rendered twice, {differing} differ",
            samples.len()
        ),
    )
}

#[test]
fn acceptance() {
    let three = run_matrix(&diagnosis_matrix(Protocol::ThreeRound, &[20, 40, 100, 200]));
    let five_cases = diagnosis_matrix(Protocol::FiveRound, &[40, 80, 200]);
    let five = run_matrix(&five_cases);
    let determinism_sample: Vec<DiagnosisCase> = five_cases.iter().step_by(701).copied().collect();

    let results = [
        ("exponent anchors", criterion_exponent()),
        (
            "3-round exactness",
            judge_matrix(&three, Protocol::ThreeRound),
        ),
        (
            "5-round exactness",
            judge_matrix(&five, Protocol::FiveRound),
        ),
        ("resilience oracle", criterion_resilience_oracle()),
        ("empirical resilience rate", criterion_resilience_rate()),
        ("same-round collusion leak", criterion_same_round()),
        ("delayed duplication catch rate", criterion_delayed()),
        ("economics identities", criterion_economics()),
        (
            "SCC homogeneity",
            verdict(
                three.mixed_sccs + five.mixed_sccs == 0,
                format!(
                    "{} mixed match-SCCs across {} diagnosis runs",
                    three.mixed_sccs + five.mixed_sccs,
                    three.runs + five.runs
                ),
            ),
        ),
        ("determinism", criterion_determinism(&determinism_sample)),
    ];
    let mut failed = Vec::new();
    for (i, (name, v)) in results.iter().enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {}", i + 1, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
