//! Command-line flags and the equivalent JSON run configuration.
//!
//! Every subcommand's flags deserialize from the same field names, so a run
//! written to `<output_dir>/config.json` can be replayed with `--config`.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Parser)]
#[command(name = "latdec", version, about = "Decoherence of electrons hopping on a vibrating lattice")]
pub struct Cli {
    /// Replay a JSON run configuration instead of giving a subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Material preset name or path to a material JSON file [default: gold].
    #[arg(long, global = true)]
    pub material: Option<String>,
    /// Lattice temperature in K [default: 300].
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    /// Directory for output files [default: out].
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Seed for all random substreams [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_material")]
    pub material: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub command: Command,
}

fn default_material() -> String {
    "gold".into()
}
fn default_temperature() -> f64 {
    300.0
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            material: default_material(),
            temperature: default_temperature(),
            output_dir: default_output_dir(),
            seed: 0,
            command,
        }
    }

    /// Apply flags given on the command line on top of this configuration.
    pub fn override_with(mut self, cli: &Cli) -> Self {
        if let Some(m) = &cli.material {
            self.material = m.clone();
        }
        if let Some(t) = cli.temperature {
            self.temperature = t;
        }
        if let Some(d) = &cli.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(s) = cli.seed {
            self.seed = s;
        }
        self
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory so
    /// that the same run written to two places carries the same hash.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("object").remove("output_dir");
        let text = serde_json::to_string(&v).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Temporal displacement correlator and its exponential envelope fit.
    Correlator(CorrelatorArgs),
    /// Displacement correlator between site 1 and site n, and the lattice correlation length.
    Spatial(SpatialArgs),
    /// Noisy two-level system: averaged equations, closed form and Monte Carlo.
    Twolevel(TwoLevelArgs),
    /// N-site chain with noisy bonds.
    Chain(ChainArgs),
    /// Decoherence, relaxation and hopping timescales.
    Estimates(EstimatesArgs),
    /// Repeat a calculation over a range of one parameter.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Correlator(_) => "correlator",
            Command::Spatial(_) => "spatial",
            Command::Twolevel(_) => "twolevel",
            Command::Chain(_) => "chain",
            Command::Estimates(_) => "estimates",
            Command::Sweep(_) => "sweep",
        }
    }
}

macro_rules! cli_defaults {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                <$t>::parse_from(["latdec"])
            }
        }
    )*};
}
cli_defaults!(CorrelatorArgs, SpatialArgs, TwoLevelArgs, ChainArgs, EstimatesArgs);

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelatorArgs {
    /// Largest time difference, with unit (fs, ps, s).
    #[arg(long, default_value = "20ps")]
    pub t_max: String,
    /// Peaks entering the fit: a time bound such as `9ps`, `all`, or `decay:<factor>`.
    #[arg(long, default_value = "9ps")]
    pub fit_window: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthRule {
    /// 1/n envelope of the equal-time correlator.
    Envelope,
    /// Exact |sin(n a q_D) / (n sin(a q_D))| ratio.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialArgs {
    /// Largest site index.
    #[arg(long, default_value_t = 200)]
    pub n_max: u32,
    /// Time difference, with unit.
    #[arg(long, default_value = "0ps")]
    pub dt: String,
    /// Correlation ratio that defines the correlation length.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = LengthRule::Envelope)]
    pub rule: LengthRule,
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoLevelArgs {
    /// Site-energy splitting ε, in units of the reference energy.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// Deterministic hopping α, in units of the reference energy.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// White-noise strength β₀, in units of the reference energy.
    #[arg(long, default_value_t = 0.2)]
    pub beta0: f64,
    /// Reference energy in eV; natural times (`nat`) are in units of ħ/E_ref.
    #[arg(long, default_value_t = 1.0)]
    pub reference_energy_ev: f64,
    /// Final time (`…nat`, or fs/ps/s).
    #[arg(long, default_value = "10nat")]
    pub t_max: String,
    /// Output spacing.
    #[arg(long, default_value = "0.1nat")]
    pub dt_out: String,
    /// Monte Carlo trajectories; 0 skips the Monte Carlo run.
    #[arg(long, default_value_t = 0)]
    pub n_traj: usize,
    /// Largest Monte Carlo step.
    #[arg(long, default_value = "0.01nat")]
    pub dt_max: String,
    /// Noise correlation time; 0 gives white noise.
    #[arg(long, default_value = "0nat")]
    pub correlation_time: String,
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 128)]
    pub n_sites: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Noise strength on every bond.
    #[arg(long, default_value_t = 0.5)]
    pub beta0: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    /// Initially occupied site [default: the middle site].
    #[arg(long)]
    pub start_site: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub reference_energy_ev: f64,
    #[arg(long, default_value = "10nat")]
    pub t_max: String,
    #[arg(long, default_value = "1nat")]
    pub dt_out: String,
    #[arg(long, default_value_t = 256)]
    pub n_traj: usize,
    #[arg(long, default_value = "0.01nat")]
    pub dt_max: String,
    /// Upper bound on sites × trajectories × steps.
    #[arg(long, default_value_t = 2e10)]
    pub budget: f64,
    /// Coherence ratio that defines the coherence length.
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatesArgs {
    /// Superposition separation [default: the lattice constant].
    #[arg(long)]
    pub delta_x: Option<String>,
    /// Override the material's Fermi energy, eV.
    #[arg(long)]
    pub fermi_energy_ev: Option<f64>,
    /// Override the material's tunneling energy, eV.
    #[arg(long)]
    pub hop_energy_ev: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTarget {
    /// High-temperature equal-time spatial correlator for n = 1..n_max (keys: temperature, n_max).
    SpatialHighT,
    /// Eigenvalues of the averaged two-level equations (keys: epsilon, alpha, beta0).
    DecayRates,
    /// Temporal correlator by quadrature and in closed form (keys: temperature, dt).
    Temporal,
    /// Timescale report (keys: temperature).
    Estimates,
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub target: SweepTarget,
    /// `key=value`, `key=a,b,c` or `key=start:stop:count`; exactly one key may take several values.
    #[arg(long = "set", value_name = "KEY=VALUES")]
    #[serde(default)]
    pub set: Vec<String>,
}
