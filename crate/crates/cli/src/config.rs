use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qnorm_sld::montecarlo::{Estimator, MIN_SAMPLES};
use qnorm_sld::PqParams;

#[derive(Debug, Parser)]
#[command(name = "qnorm-sld", version, about = "Sharp large-deviation tails of rescaled q-norms on l_p balls and spheres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tail of the rescaled q-norm under the cone measure.
    SldCone(TailArgs),
    /// Tail of the rescaled q-norm under the uniform ball measure.
    SldBall(TailArgs),
    /// Volume of the intersection of volume-normalised l_p and l_q balls.
    Intersect(IntersectArgs),
    /// Tail of the rescaled projection length of the l_q ball.
    Project(ProjectArgs),
    /// Rate function and prefactor terms over a level grid.
    RateCurve(CurveArgs),
    /// Monte Carlo estimates of both tails.
    Mc(McArgs),
    /// Analytic tails next to Monte Carlo, with ratios.
    Compare(McArgs),
    /// Ball volumes and normalising constants.
    Constants(ConstantsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Plain,
    Tilted,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Plain => Estimator::Plain,
            EstimatorArg::Tilted => Estimator::Tilted,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PqArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
}

/// A single level or an inclusive `lo:hi:steps` grid.
#[derive(Debug, Clone, Args)]
pub struct LevelArgs {
    #[arg(long, value_delimiter = ',', conflicts_with = "z_grid")]
    pub z: Vec<f64>,
    #[arg(long, value_parser = parse_grid)]
    pub z_grid: Option<Grid>,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Monte Carlo sample count; omit to skip simulation where it is optional.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, env = "QNORM_SLD_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Plain)]
    pub estimator: EstimatorArg,
}

#[derive(Debug, Clone, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub pq: PqArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub level: LevelArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IntersectArgs {
    #[command(flatten)]
    pub pq: PqArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub q_proj: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub level: LevelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub pq: PqArgs,
    #[command(flatten)]
    pub level: LevelArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub pq: PqArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub level: LevelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub pq: PqArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.hi } else { self.lo + h * i as f64 })
            .collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(format!("expected lo:hi:steps, got '{s}'"));
    };
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lo '{lo}': {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad hi '{hi}': {e}"))?;
    let steps: usize = steps.trim().parse().map_err(|e| format!("bad steps '{steps}': {e}"))?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err("grid bounds must be finite".into());
    }
    if steps == 0 {
        return Err("steps must be at least 1".into());
    }
    if hi < lo || (steps > 1 && hi == lo) {
        return Err(format!("need lo < hi, got {lo}:{hi}"));
    }
    Ok(Grid { lo, hi, steps })
}

/// Bad configuration, reported before any computation.
#[derive(Debug)]
pub struct ConfigError {
    pub flag: &'static str,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid --{}: {}", self.flag, self.message)
    }
}

fn bad(flag: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        flag,
        message: message.into(),
    }
}

impl PqArgs {
    pub fn params(&self) -> Result<PqParams, ConfigError> {
        let flag = if self.p.is_finite() && self.p > 0.0 { "q" } else { "p" };
        PqParams::new(self.p, self.q).map_err(|e| bad(flag, e.to_string()))
    }
}

impl LevelArgs {
    pub fn levels(&self) -> Result<Vec<f64>, ConfigError> {
        let zs = match (&self.z_grid, self.z.is_empty()) {
            (Some(g), _) => g.points(),
            (None, false) => self.z.clone(),
            (None, true) => return Err(bad("z", "one of --z or --z-grid is required")),
        };
        if let Some(z) = zs.iter().find(|z| !(z.is_finite() && **z > 0.0)) {
            return Err(bad("z", format!("levels must be positive and finite, got {z}")));
        }
        Ok(zs)
    }
}

impl SimArgs {
    pub fn samples(&self) -> Result<Option<usize>, ConfigError> {
        match self.samples {
            Some(s) if s < MIN_SAMPLES => Err(bad("samples", format!("need at least {MIN_SAMPLES}, got {s}"))),
            s => Ok(s),
        }
    }

    pub fn required_samples(&self) -> Result<usize, ConfigError> {
        self.samples()?.ok_or_else(|| bad("samples", "required for this command"))
    }
}

pub fn check_n(ns: &[usize]) -> Result<(), ConfigError> {
    if ns.iter().any(|&n| n == 0) {
        return Err(bad("n", "dimensions must be at least 1"));
    }
    Ok(())
}

pub fn check_t(ts: &[f64]) -> Result<(), ConfigError> {
    if let Some(t) = ts.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(bad("t", format!("must be positive and finite, got {t}")));
    }
    Ok(())
}

pub fn check_q_proj(q: f64) -> Result<(), ConfigError> {
    if !(q > 2.0) {
        return Err(bad("q-proj", format!("must exceed 2, got {q}")));
    }
    Ok(())
}
