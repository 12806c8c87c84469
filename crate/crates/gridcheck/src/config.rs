//! TOML experiment configuration.
//!
//! Every key is optional and unknown keys are rejected. All randomness flows
//! from the top-level `seed`.
//!
//! ```toml
//! seed = 7
//!
//! [graph]
//! n = 16
//! d = 4
//! alpha = "15/16"     # fractions: "p/q", decimal string or number
//! beta = "7/16"
//! max_attempts = 200
//! verify_limit = 24
//!
//! [scenario]
//! participants = 20
//! cheaters = 1        # or cheater_fraction = 0.05, or [[scenario.coalition]] blocks
//! coalitions = 1      # cheaters are split evenly over this many coalitions
//! strategy = "consistent_collusion"
//! # strategy_param = 1  # martyr: last disruptive round; randomized: seed
//! allow_out_of_contract = false
//! graph_attempts = 200
//!
//! [econ]
//! B = 1.0
//! U = 2.0
//! C = 2.0
//! P = 0.5
//! L = 100.0
//! S = 1.0
//! G = 0.95
//! ramp = 20
//! t = 0
//! tolerance = 1e-9
//! utility = [[1.0, 0.5], [3.0, 0.5]]   # (value, probability mass) pairs
//!
//! [simulate]
//! population = 10000
//! coalition_fraction = 0.05
//! traitor_fraction = 0.0
//! replication_prob = 1.0
//! n_tasks = 100000
//! runs = 1            # seeds seed, seed + 1, ...
//! P = 0.5
//! G = 0.95
//! ramp = 20
//! trace_identities = 0
//! ```

use std::path::Path;

use anyhow::{bail, Context};
use gridcheck_core::adversary::Strategy;
use gridcheck_core::economics::DEFAULT_RAMP;
use gridcheck_core::grid_model::{CoalitionLayout, Scenario};
use gridcheck_core::replication_sim::DEFAULT_POPULATION;
use gridcheck_core::Fraction;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub graph: GraphConfig,
    pub scenario: ScenarioConfig,
    pub econ: EconConfig,
    pub simulate: SimulateConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// The file at `path`, or all defaults.
    pub fn load_or_default(path: Option<&Path>) -> anyhow::Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

/// A fraction written as `"p/q"`, a decimal string or a TOML number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(try_from = "FractionRepr", into = "String")]
pub struct FractionValue(pub Fraction);

#[derive(Deserialize)]
#[serde(untagged)]
enum FractionRepr {
    Int(u64),
    Float(f64),
    Text(String),
}

impl TryFrom<FractionRepr> for FractionValue {
    type Error = String;

    fn try_from(r: FractionRepr) -> Result<Self, String> {
        let text = match r {
            FractionRepr::Int(i) => i.to_string(),
            FractionRepr::Float(f) => f.to_string(),
            FractionRepr::Text(s) => s,
        };
        text.parse().map(FractionValue).map_err(|e| format!("{e}"))
    }
}

impl From<FractionValue> for String {
    fn from(f: FractionValue) -> String {
        f.0.to_string()
    }
}

fn frac(num: u64, den: u64) -> FractionValue {
    FractionValue(Fraction::new(num, den).expect("nonzero denominator"))
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    pub n: usize,
    pub d: usize,
    pub alpha: FractionValue,
    pub beta: FractionValue,
    pub max_attempts: usize,
    pub verify_limit: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            n: 16,
            d: 4,
            alpha: frac(15, 16),
            beta: frac(7, 16),
            max_attempts: 200,
            verify_limit: gridcheck_core::digraph::DEFAULT_VERIFY_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoalitionConfig {
    pub cheaters: usize,
    pub traitors: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub participants: usize,
    pub cheaters: Option<usize>,
    pub cheater_fraction: Option<f64>,
    pub coalitions: usize,
    #[serde(rename = "coalition")]
    pub coalition_list: Vec<CoalitionConfig>,
    pub strategy: String,
    pub strategy_param: Option<u64>,
    pub allow_out_of_contract: bool,
    pub graph_attempts: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            participants: 20,
            cheaters: None,
            cheater_fraction: None,
            coalitions: 1,
            coalition_list: Vec::new(),
            strategy: "consistent_collusion".into(),
            strategy_param: None,
            allow_out_of_contract: false,
            graph_attempts: gridcheck_core::diagnosis::DEFAULT_GRAPH_ATTEMPTS,
        }
    }
}

impl ScenarioConfig {
    pub fn strategy(&self) -> anyhow::Result<Strategy> {
        Ok(Strategy::from_name(&self.strategy, self.strategy_param)?)
    }

    pub fn cheater_count(&self) -> anyhow::Result<usize> {
        match (self.cheaters, self.cheater_fraction) {
            (Some(_), Some(_)) => bail!("give either cheaters or cheater_fraction, not both"),
            (Some(c), None) => Ok(c),
            (None, Some(f)) => {
                if !(0.0..=1.0).contains(&f) {
                    bail!("cheater_fraction must lie in [0, 1]");
                }
                Ok((f * self.participants as f64).floor() as usize)
            }
            (None, None) => Ok(0),
        }
    }

    pub fn to_scenario(&self, seed: u64) -> anyhow::Result<Scenario> {
        let strategy = self.strategy()?;
        if self.coalition_list.is_empty() {
            let cheaters = self.cheater_count()?;
            return Ok(Scenario::with_cheaters(
                self.participants,
                cheaters,
                self.coalitions,
                strategy,
                seed,
            ));
        }
        if self.cheaters.is_some() || self.cheater_fraction.is_some() {
            bail!("coalition blocks replace cheaters and cheater_fraction");
        }
        Ok(Scenario {
            participants: self.participants,
            coalitions: self
                .coalition_list
                .iter()
                .map(|c| CoalitionLayout {
                    cheaters: c.cheaters,
                    traitors: c.traitors,
                })
                .collect(),
            strategy,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconConfig {
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub ramp: u32,
    pub t: u64,
    pub tolerance: f64,
    /// `(value, probability mass)` pairs in increasing value order.
    pub utility: Vec<(f64, f64)>,
}

impl Default for EconConfig {
    fn default() -> Self {
        EconConfig {
            b: 1.0,
            u: 2.0,
            c: 2.0,
            p: 0.5,
            l: 100.0,
            s: 1.0,
            g: 0.95,
            ramp: DEFAULT_RAMP,
            t: 0,
            tolerance: 1e-9,
            utility: (1..=10).map(|v| (v as f64, 0.1)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub population: u32,
    pub coalition_fraction: f64,
    pub traitor_fraction: f64,
    pub replication_prob: f64,
    pub n_tasks: u64,
    pub runs: u64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub ramp: u32,
    pub trace_identities: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            population: DEFAULT_POPULATION,
            coalition_fraction: 0.05,
            traitor_fraction: 0.0,
            replication_prob: 1.0,
            n_tasks: 100_000,
            runs: 1,
            p: 0.5,
            g: 0.95,
            ramp: DEFAULT_RAMP,
            trace_identities: 0,
        }
    }
}
