//! Thin adapters from configuration to the core library.

use anyhow::{bail, Context};
use gridcheck_core::diagnosis::{run_diagnosis, Protocol, RunOptions};
use gridcheck_core::digraph::{
    failure_exponent, find_resilience_violation, monte_carlo_resilient, random_hamiltonian_union,
    Certification, Digraph, MonteCarloParams,
};
use gridcheck_core::economics::{
    balance_residual, cooperation_preferred, deterrence_threshold, repeated_catch_probability,
    solve_balance, sybil_replication_prob, BalanceParams, UtilityDistribution,
};
use gridcheck_core::replication_sim::{
    run_delayed_duplication, run_same_round_duplication, run_sybil_ramp, SimPopulation, SybilParams,
};
use gridcheck_core::Fraction;
use serde::Serialize;

use crate::config::{EconConfig, ExperimentConfig, SimulateConfig};
use crate::report::{timestamp, DiagnosisReport, SimAggregate, SimRecord, SimReport};

/// A Hamiltonian-cycle union, or the first Monte Carlo draw that passes the
/// resilience check when `alpha` and `beta` are given.
pub fn graph_gen(
    n: usize,
    d: usize,
    seed: u64,
    resilience: Option<(Fraction, Fraction)>,
    max_attempts: usize,
    verify_limit: usize,
) -> anyhow::Result<(Digraph, Option<Certification>)> {
    match resilience {
        None => Ok((random_hamiltonian_union(n, d, seed)?, None)),
        Some((alpha, beta)) => {
            let params = MonteCarloParams {
                n,
                d,
                alpha,
                beta,
                max_attempts,
                verify_limit,
            };
            let r = monte_carlo_resilient(&params, seed)?;
            Ok((r.graph, Some(r.certification)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub n: usize,
    pub m: usize,
    pub alpha: String,
    pub beta: String,
    pub subset_size: usize,
    pub scc_threshold: usize,
    pub resilient: bool,
    /// A subset whose induced subgraph has no large enough SCC.
    pub witness: Option<Vec<usize>>,
}

pub fn graph_verify(g: &Digraph, alpha: Fraction, beta: Fraction) -> anyhow::Result<VerifyReport> {
    let witness = find_resilience_violation(g, alpha, beta)?;
    Ok(VerifyReport {
        command: "graph verify",
        n: g.n(),
        m: g.edge_count(),
        alpha: alpha.to_string(),
        beta: beta.to_string(),
        subset_size: alpha.ceil_mul(g.n()),
        scc_threshold: beta.ceil_mul(g.n()),
        resilient: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub command: &'static str,
    pub gamma: f64,
    pub lambda: f64,
    pub d: u32,
    pub a: f64,
    pub b: f64,
    pub coefficient: f64,
    pub vacuous: bool,
}

pub fn graph_exponent(gamma: Fraction, lambda: Fraction, d: u32) -> anyhow::Result<ExponentReport> {
    let t = failure_exponent(gamma.to_f64(), lambda.to_f64(), d)?;
    Ok(ExponentReport {
        command: "graph exponent",
        gamma: gamma.to_f64(),
        lambda: lambda.to_f64(),
        d,
        a: t.a,
        b: t.b,
        coefficient: t.coefficient,
        vacuous: t.is_vacuous(),
    })
}

pub fn diagnose(
    protocol: Protocol,
    config: &ExperimentConfig,
    stamp: bool,
) -> anyhow::Result<DiagnosisReport> {
    let scenario = config.scenario.to_scenario(config.seed)?;
    let options = RunOptions {
        allow_out_of_contract: config.scenario.allow_out_of_contract,
        graph_attempts: config.scenario.graph_attempts,
        ..RunOptions::default()
    };
    let run = run_diagnosis(protocol, &scenario, options)?;
    Ok(DiagnosisReport::new(protocol, config.seed, &run, stamp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterReport {
    pub command: &'static str,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub cooperation_preferred: bool,
    pub threshold: Option<f64>,
}

pub fn econ_deter(e: &EconConfig) -> anyhow::Result<DeterReport> {
    if !(0.0..=1.0).contains(&e.p) {
        bail!("P must lie in [0, 1]");
    }
    Ok(DeterReport {
        command: "econ deter",
        b: e.b,
        u: e.u,
        c: e.c,
        p: e.p,
        cooperation_preferred: cooperation_preferred(e.b, e.u, e.c, e.p),
        threshold: deterrence_threshold(e.b, e.u, e.c).ok(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub command: &'static str,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub threshold: f64,
}

pub fn econ_threshold(e: &EconConfig) -> anyhow::Result<ThresholdReport> {
    Ok(ThresholdReport {
        command: "econ threshold",
        b: e.b,
        u: e.u,
        c: e.c,
        threshold: deterrence_threshold(e.b, e.u, e.c)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub command: &'static str,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "P")]
    pub p: f64,
    /// Residual at `P`.
    pub residual: f64,
    pub solution: Option<f64>,
    pub solution_residual: Option<f64>,
    pub step_boundary: Option<bool>,
}

/// Balance equation with `r(P) = P / G`.
pub fn econ_balance(e: &EconConfig) -> anyhow::Result<BalanceReport> {
    if !(e.g > 0.0 && e.g <= 1.0) {
        bail!("G must lie in (0, 1]");
    }
    let dist = UtilityDistribution::from_masses(&e.utility)?;
    let params = BalanceParams {
        l: e.l,
        s: e.s,
        b: e.b,
        c: e.c,
    };
    let g = e.g;
    let r = move |p: f64| p / g;
    let residual = balance_residual(e.p, &params, &dist, &r)?;
    let sol = solve_balance(&params, &dist, &r, e.tolerance)?;
    Ok(BalanceReport {
        command: "econ balance",
        l: e.l,
        s: e.s,
        b: e.b,
        c: e.c,
        g: e.g,
        p: e.p,
        residual,
        solution: sol.map(|s| s.p),
        solution_residual: sol.map(|s| s.residual),
        step_boundary: sol.map(|s| s.step_boundary),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SybilReport {
    pub command: &'static str,
    pub t: u64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub ramp: u32,
    pub replication_prob: f64,
    /// Chance that ten cheating attempts at catch probability `P` are all
    /// missed, subtracted from one.
    pub caught_within_10: f64,
}

pub fn econ_sybil(e: &EconConfig) -> anyhow::Result<SybilReport> {
    Ok(SybilReport {
        command: "econ sybil",
        t: e.t,
        p: e.p,
        g: e.g,
        ramp: e.ramp,
        replication_prob: sybil_replication_prob(e.t, e.p, e.g, e.ramp)?,
        caught_within_10: repeated_catch_probability(e.p, 10)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    SameRound,
    Delayed,
    Sybil,
}

impl SimMode {
    pub fn name(self) -> &'static str {
        match self {
            SimMode::SameRound => "same_round",
            SimMode::Delayed => "delayed",
            SimMode::Sybil => "sybil",
        }
    }
}

fn sim_population(s: &SimulateConfig) -> anyhow::Result<SimPopulation> {
    for (v, what) in [
        (s.coalition_fraction, "coalition_fraction"),
        (s.traitor_fraction, "traitor_fraction"),
    ] {
        if !(0.0..=1.0).contains(&v) {
            bail!("{what} must lie in [0, 1]");
        }
    }
    let size = s.population as f64;
    let cheaters = (s.coalition_fraction * size).round() as u32;
    let traitors = (s.traitor_fraction * size).round() as u32;
    Ok(SimPopulation::new(s.population, cheaters, traitors)?)
}

/// One run per seed, in the order given.
pub fn simulate(
    mode: SimMode,
    s: &SimulateConfig,
    seeds: &[u64],
    stamp: bool,
) -> anyhow::Result<SimReport> {
    let pop = sim_population(s)?;
    let mut records = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let record = match mode {
            SimMode::SameRound => {
                SimRecord::new(seed, &run_same_round_duplication(&pop, s.n_tasks, seed)?)
            }
            SimMode::Delayed => SimRecord::new(
                seed,
                &run_delayed_duplication(&pop, s.replication_prob, s.n_tasks, seed)?,
            ),
            SimMode::Sybil => {
                let params = SybilParams {
                    p: s.p,
                    g: s.g,
                    ramp: s.ramp,
                    trace_identities: s.trace_identities,
                };
                let run = run_sybil_ramp(&pop, &params, s.n_tasks, seed)
                    .with_context(|| format!("seed {seed}"))?;
                let mut r = SimRecord::new(seed, &run.metrics);
                r.caught_within_10 = run.caught_within(10);
                r.identities_created = Some(run.identities_created);
                r.traces = run.traces;
                r
            }
        };
        records.push(record);
    }
    let sybil = mode == SimMode::Sybil;
    Ok(SimReport {
        command: "simulate",
        mode: mode.name(),
        population: pop.size,
        cheaters: pop.cheaters,
        traitors: pop.traitors,
        n_tasks: s.n_tasks,
        replication_prob: (mode == SimMode::Delayed).then_some(s.replication_prob),
        p: sybil.then_some(s.p),
        g: sybil.then_some(s.g),
        ramp: sybil.then_some(s.ramp),
        aggregate: SimAggregate::new(&records),
        records,
        generated_at_unix: timestamp(stamp),
    })
}
