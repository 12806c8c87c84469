//! Command-line front end. Output goes to `--out` or the supplied writer.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gridcheck_core::diagnosis::Protocol;
use gridcheck_core::Fraction;

use crate::commands::{self, SimMode};
use crate::config::{EconConfig, ExperimentConfig, SimulateConfig};
use crate::edgelist::{read_edge_list, to_edge_list_string};
use crate::report::{sim_csv, to_json};

#[derive(Debug, Parser)]
#[command(
    name = "gridcheck",
    version,
    about = "Cheater detection experiments for grid computations"
)]
pub struct Cli {
    /// Omit the generation timestamp so identical runs give identical bytes.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random Hamiltonian-cycle unions and resilience checks.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Run a diagnosis protocol on a simulated population.
    Diagnose(DiagnoseArgs),
    /// Deterrence and supervisor economics.
    Econ(EconArgs),
    /// Duplication experiments over seed ranges.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Write an edge list of a union of `d` random Hamiltonian cycles.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// With --beta, redraw until the graph passes the resilience check.
        #[arg(long, requires = "beta")]
        alpha: Option<Fraction>,
        #[arg(long, requires = "alpha")]
        beta: Option<Fraction>,
        #[arg(long, default_value_t = 200)]
        max_attempts: usize,
        #[arg(long, default_value_t = gridcheck_core::digraph::DEFAULT_VERIFY_LIMIT)]
        verify_limit: usize,
    },
    /// Check (alpha, beta)-resilience of an edge list read from --input or stdin.
    Verify {
        #[arg(long)]
        alpha: Fraction,
        #[arg(long)]
        beta: Fraction,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Coefficient of n in the exponent of the failure bound.
    Exponent {
        #[arg(long)]
        gamma: Fraction,
        #[arg(long)]
        lambda: Fraction,
        #[arg(long)]
        d: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProtocolArg {
    #[value(name = "3round")]
    ThreeRound,
    #[value(name = "5round")]
    FiveRound,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    pub protocol: ProtocolArg,
    /// TOML configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, conflicts_with = "cheater_fraction")]
    pub cheaters: Option<usize>,
    #[arg(long)]
    pub cheater_fraction: Option<f64>,
    #[arg(long)]
    pub coalitions: Option<usize>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub strategy_param: Option<u64>,
    #[arg(long)]
    pub allow_out_of_contract: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EconCommand {
    Deter,
    Threshold,
    Balance,
    Sybil,
}

#[derive(Debug, Args)]
pub struct EconArgs {
    pub command: EconCommand,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long = "U")]
    pub u: Option<f64>,
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long = "P")]
    pub p: Option<f64>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long = "S")]
    pub s: Option<f64>,
    #[arg(long = "G")]
    pub g: Option<f64>,
    #[arg(long)]
    pub ramp: Option<u32>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Utility distribution as `value:mass` pairs, e.g. `1:0.5,3:0.5`.
    #[arg(long)]
    pub utility: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimModeArg {
    #[value(name = "same_round")]
    SameRound,
    Delayed,
    Sybil,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub mode: SimModeArg,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// First seed; runs use consecutive seeds.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Half-open seed range `A..B`, or a single seed.
    #[arg(long, conflicts_with = "seed")]
    pub seeds: Option<String>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub population: Option<u32>,
    #[arg(long)]
    pub coalition_fraction: Option<f64>,
    #[arg(long)]
    pub traitor_fraction: Option<f64>,
    #[arg(long)]
    pub replication_prob: Option<f64>,
    #[arg(long)]
    pub n_tasks: Option<u64>,
    #[arg(long = "P")]
    pub p: Option<f64>,
    #[arg(long = "G")]
    pub g: Option<f64>,
    #[arg(long)]
    pub ramp: Option<u32>,
    #[arg(long)]
    pub trace_identities: Option<usize>,
    /// Emit one CSV row per seed instead of a JSON report.
    #[arg(long)]
    pub csv: bool,
}

/// What a command produced and whether it counts as success.
pub struct Output {
    pub text: String,
    pub success: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

pub fn parse_utility(text: &str) -> anyhow::Result<Vec<(f64, f64)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (v, m) = pair
                .split_once(':')
                .with_context(|| format!("`{pair}` is not a value:mass pair"))?;
            Ok((v.trim().parse()?, m.trim().parse()?))
        })
        .collect()
}

pub fn parse_seed_range(text: &str) -> anyhow::Result<Vec<u64>> {
    match text.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
            if a >= b {
                bail!("seed range {text} is empty");
            }
            Ok((a..b).collect())
        }
        None => Ok(vec![text.trim().parse()?]),
    }
}

fn econ_config(args: &EconArgs) -> anyhow::Result<EconConfig> {
    let mut e = ExperimentConfig::load_or_default(args.config.as_deref())?.econ;
    set(&mut e.b, args.b);
    set(&mut e.u, args.u);
    set(&mut e.c, args.c);
    set(&mut e.p, args.p);
    set(&mut e.l, args.l);
    set(&mut e.s, args.s);
    set(&mut e.g, args.g);
    set(&mut e.ramp, args.ramp);
    set(&mut e.t, args.t);
    set(&mut e.tolerance, args.tolerance);
    if let Some(u) = &args.utility {
        e.utility = parse_utility(u)?;
    }
    Ok(e)
}

fn simulate_config(args: &SimulateArgs) -> anyhow::Result<(SimulateConfig, Vec<u64>)> {
    let cfg = ExperimentConfig::load_or_default(args.config.as_deref())?;
    let mut s = cfg.simulate;
    set(&mut s.runs, args.runs);
    set(&mut s.population, args.population);
    set(&mut s.coalition_fraction, args.coalition_fraction);
    set(&mut s.traitor_fraction, args.traitor_fraction);
    set(&mut s.replication_prob, args.replication_prob);
    set(&mut s.n_tasks, args.n_tasks);
    set(&mut s.p, args.p);
    set(&mut s.g, args.g);
    set(&mut s.ramp, args.ramp);
    set(&mut s.trace_identities, args.trace_identities);
    let seeds = match &args.seeds {
        Some(range) => parse_seed_range(range)?,
        None => {
            let first = args.seed.unwrap_or(cfg.seed);
            (0..s.runs.max(1)).map(|i| first.wrapping_add(i)).collect()
        }
    };
    Ok((s, seeds))
}

fn diagnose_config(args: &DiagnoseArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load_or_default(args.config.as_deref())?;
    let sc = &mut cfg.scenario;
    set(&mut cfg.seed, args.seed);
    set(&mut sc.participants, args.n);
    if args.cheaters.is_some() {
        sc.cheaters = args.cheaters;
        sc.cheater_fraction = None;
    }
    if args.cheater_fraction.is_some() {
        sc.cheater_fraction = args.cheater_fraction;
        sc.cheaters = None;
    }
    set(&mut sc.coalitions, args.coalitions);
    set(&mut sc.strategy, args.strategy.clone());
    if args.strategy_param.is_some() {
        sc.strategy_param = args.strategy_param;
    }
    sc.allow_out_of_contract |= args.allow_out_of_contract;
    Ok(cfg)
}

/// Executes a parsed command. `input` feeds `graph verify` without --input.
pub fn execute(cli: &Cli, input: &mut dyn BufRead) -> anyhow::Result<Output> {
    let stamp = !cli.no_timestamp;
    let ok = |text: String| Output {
        text,
        success: true,
    };
    Ok(match &cli.command {
        Command::Graph(GraphCommand::Gen {
            n,
            d,
            seed,
            alpha,
            beta,
            max_attempts,
            verify_limit,
        }) => {
            let resilience = alpha.zip(*beta);
            let (g, cert) =
                commands::graph_gen(*n, *d, *seed, resilience, *max_attempts, *verify_limit)?;
            if let Some(cert) = cert {
                eprintln!("certification: {cert:?}");
            }
            ok(to_edge_list_string(&g))
        }
        Command::Graph(GraphCommand::Verify {
            alpha,
            beta,
            input: path,
        }) => {
            let g = match path {
                Some(p) => read_edge_list(std::io::BufReader::new(
                    std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?,
                ))?,
                None => read_edge_list(input)?,
            };
            let report = commands::graph_verify(&g, *alpha, *beta)?;
            Output {
                success: report.resilient,
                text: to_json(&report),
            }
        }
        Command::Graph(GraphCommand::Exponent { gamma, lambda, d }) => {
            ok(to_json(&commands::graph_exponent(*gamma, *lambda, *d)?))
        }
        Command::Diagnose(args) => {
            let protocol = match args.protocol {
                ProtocolArg::ThreeRound => Protocol::ThreeRound,
                ProtocolArg::FiveRound => Protocol::FiveRound,
            };
            let report = commands::diagnose(protocol, &diagnose_config(args)?, stamp)?;
            Output {
                success: report.exact_match || report.out_of_contract,
                text: to_json(&report),
            }
        }
        Command::Econ(args) => {
            let e = econ_config(args)?;
            ok(match args.command {
                EconCommand::Deter => to_json(&commands::econ_deter(&e)?),
                EconCommand::Threshold => to_json(&commands::econ_threshold(&e)?),
                EconCommand::Balance => to_json(&commands::econ_balance(&e)?),
                EconCommand::Sybil => to_json(&commands::econ_sybil(&e)?),
            })
        }
        Command::Simulate(args) => {
            let mode = match args.mode {
                SimModeArg::SameRound => SimMode::SameRound,
                SimModeArg::Delayed => SimMode::Delayed,
                SimModeArg::Sybil => SimMode::Sybil,
            };
            let (s, seeds) = simulate_config(args)?;
            let report = commands::simulate(mode, &s, &seeds, stamp)?;
            ok(if args.csv {
                sim_csv(&report)
            } else {
                to_json(&report)
            })
        }
    })
}

/// Writes through a sibling temporary file so readers never see a partial
/// report.
pub fn write_atomically(path: &Path, text: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)
}

/// Parses `args`, runs the command and delivers its output. Returns whether
/// the command succeeded.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write) -> anyhow::Result<bool>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let output = execute(&cli, input)?;
    match &cli.out {
        Some(path) => write_atomically(path, &output.text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(output.text.as_bytes())?,
    }
    Ok(output.success)
}
