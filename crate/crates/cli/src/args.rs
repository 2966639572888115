use clap::{Args, Parser, Subcommand};

use crate::config::{parse_float_list, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "chaoscope", version, about = "Bouncing-ball map simulation and chaos diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the map and write the orbit
    Orbit(OrbitArgs),
    /// Bifurcation diagram over a q range
    Bifurcate(BifurcateArgs),
    /// Lyapunov exponents: a running series at one q, or a sweep over a q range
    Lyapunov(LyapunovArgs),
    /// Topological entropy at one q, or a sweep over a q range
    Entropy(EntropyArgs),
    /// Topological entropy over a (k, q) grid
    EntropyGrid(EntropyGridArgs),
    /// Correlation integral and correlation dimension fit
    Corrdim(CorrdimArgs),
    /// Regenerate a figure data set from a built-in preset
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory
    #[arg(long)]
    pub out: Option<String>,
    /// Data file format: csv, json or both
    #[arg(long)]
    pub format: Option<String>,
    /// Also write a gnuplot script
    #[arg(long)]
    pub plot: bool,
    /// Read settings from a key = value file; flags override it
    #[arg(long)]
    pub config: Option<String>,
    /// Worker threads (wall-clock only, never changes output)
    #[arg(long, env = "CHAOSCOPE_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Start {
    /// Restitution coefficient, 0 < k < 1
    #[arg(long)]
    pub k: Option<f64>,
    /// Initial phase
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    /// Initial velocity
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    /// Iterations discarded before sampling
    #[arg(long)]
    pub transient: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QRange {
    #[arg(long)]
    pub q_min: Option<f64>,
    #[arg(long)]
    pub q_max: Option<f64>,
    /// Grid points, both ends included
    #[arg(long)]
    pub q_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EntropyOpts {
    /// Seeds drawn from the attractor
    #[arg(long)]
    pub pool_size: Option<usize>,
    /// Longest orbit length n
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Comma-separated, strictly decreasing
    #[arg(long)]
    pub epsilons: Option<String>,
    /// Iterations between pool seeds
    #[arg(long)]
    pub stride: Option<usize>,
    /// Random extra iterations added to each stride
    #[arg(long)]
    pub stride_jitter: Option<usize>,
    /// Seed for the stride jitter
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub start: Start,
    #[arg(long)]
    pub q: Option<f64>,
    /// Points written after the transient
    #[arg(long)]
    pub steps: Option<usize>,
    /// Keep the phase unwrapped
    #[arg(long)]
    pub unwrapped: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BifurcateArgs {
    #[command(flatten)]
    pub start: Start,
    #[command(flatten)]
    pub range: QRange,
    /// Samples kept per q
    #[arg(long)]
    pub samples: Option<usize>,
    /// Start every q from the initial state
    #[arg(long)]
    pub no_continuation: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub start: Start,
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub range: QRange,
    /// Tangent-space iterations
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub no_continuation: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub start: Start,
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub range: QRange,
    #[command(flatten)]
    pub est: EntropyOpts,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EntropyGridArgs {
    #[command(flatten)]
    pub range: QRange,
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long)]
    pub k_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    #[arg(long)]
    pub transient: Option<usize>,
    #[command(flatten)]
    pub est: EntropyOpts,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CorrdimArgs {
    #[command(flatten)]
    pub start: Start,
    #[arg(long)]
    pub q: Option<f64>,
    /// Attractor points used
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_points: Option<usize>,
    /// Lower radius of an explicit fit window
    #[arg(long)]
    pub fit_low: Option<f64>,
    /// Upper radius of an explicit fit window
    #[arg(long)]
    pub fit_high: Option<f64>,
    /// toroidal or euclidean
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub unwrapped: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Figure id, e.g. fig1a or fig7
    pub figure: String,
    #[command(flatten)]
    pub common: Common,
}

impl Start {
    fn apply(&self, c: &mut RunConfig) {
        c.k = self.k;
        c.phi0 = self.phi0;
        c.v0 = self.v0;
        c.transient = self.transient;
    }
}

impl QRange {
    fn apply(&self, c: &mut RunConfig) {
        c.q_min = self.q_min;
        c.q_max = self.q_max;
        c.q_steps = self.q_steps;
    }
}

impl EntropyOpts {
    fn apply(&self, c: &mut RunConfig) -> Result<(), CliError> {
        c.pool_size = self.pool_size;
        c.n_max = self.n_max;
        c.epsilons = self.epsilons.as_deref().map(|s| parse_float_list("epsilons", s)).transpose()?;
        c.stride = self.stride;
        c.stride_jitter = self.stride_jitter;
        c.seed = self.seed;
        Ok(())
    }
}

impl Common {
    fn apply(&self, c: &mut RunConfig) {
        c.out = self.out.clone();
        c.format = self.format.clone();
        c.plot = self.plot.then_some(true);
    }
}

fn off(flag: bool) -> Option<bool> {
    flag.then_some(false)
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Orbit(a) => &a.common,
            Command::Bifurcate(a) => &a.common,
            Command::Lyapunov(a) => &a.common,
            Command::Entropy(a) => &a.common,
            Command::EntropyGrid(a) => &a.common,
            Command::Corrdim(a) => &a.common,
            Command::Reproduce(a) => &a.common,
        }
    }

    /// Settings given on the command line only.
    pub fn to_config(&self) -> Result<RunConfig, CliError> {
        let mut c;
        match self {
            Command::Orbit(a) => {
                c = RunConfig::new("orbit");
                a.start.apply(&mut c);
                c.q = a.q;
                c.steps = a.steps;
                c.wrap = off(a.unwrapped);
            }
            Command::Bifurcate(a) => {
                c = RunConfig::new("bifurcate");
                a.start.apply(&mut c);
                a.range.apply(&mut c);
                c.samples = a.samples;
                c.continuation = off(a.no_continuation);
            }
            Command::Lyapunov(a) => {
                c = RunConfig::new("lyapunov");
                a.start.apply(&mut c);
                a.range.apply(&mut c);
                c.q = a.q;
                c.steps = a.steps;
                c.continuation = off(a.no_continuation);
            }
            Command::Entropy(a) => {
                c = RunConfig::new("entropy");
                a.start.apply(&mut c);
                a.range.apply(&mut c);
                c.q = a.q;
                a.est.apply(&mut c)?;
            }
            Command::EntropyGrid(a) => {
                c = RunConfig::new("entropy-grid");
                a.range.apply(&mut c);
                c.k_min = a.k_min;
                c.k_max = a.k_max;
                c.k_steps = a.k_steps;
                c.phi0 = a.phi0;
                c.v0 = a.v0;
                c.transient = a.transient;
                a.est.apply(&mut c)?;
            }
            Command::Corrdim(a) => {
                c = RunConfig::new("corrdim");
                a.start.apply(&mut c);
                c.q = a.q;
                c.points = a.points;
                c.r_min = a.r_min;
                c.r_max = a.r_max;
                c.r_points = a.r_points;
                c.fit_low = a.fit_low;
                c.fit_high = a.fit_high;
                c.metric = a.metric.clone();
                c.wrap = off(a.unwrapped);
            }
            Command::Reproduce(a) => {
                c = RunConfig::new("reproduce");
                c.figure = Some(a.figure.clone());
            }
        }
        self.common().apply(&mut c);
        Ok(c)
    }
}
