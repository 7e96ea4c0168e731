use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pcf_spectral::definition::{parse_definition, parse_weights, FractalDefinition, Preset};
use pcf_spectral::functions::FunctionSpec;
use pcf_spectral::pipeline::{Model, DEFAULT_MAX_LEVEL};
use pcf_spectral::spectra::{BoundaryCondition, MeasureWeights};

#[derive(Debug, Parser)]
#[command(name = "pcf-spectral", version, about = "Spectral analysis of p.c.f. self-similar fractals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure summary, harmonic verification and spectral exponent.
    Describe(RunConfig),
    /// Eigenvalues to `spectrum.csv`.
    Spectrum(RunConfig),
    /// Counting-function fit and volume estimate to `weyl.json`.
    Weyl(RunConfig),
    /// Green, heat and potential kernels to `kernels.json`.
    Kernels(RunConfig),
    /// Commutator singular values to `svals.csv` and `summability.json`.
    Commutator(RunConfig),
    /// Self-similar invariance of the energy functional to `invariance.json`.
    Invariance(RunConfig),
}

impl Command {
    pub fn config(&self) -> &RunConfig {
        match self {
            Command::Describe(c)
            | Command::Spectrum(c)
            | Command::Weyl(c)
            | Command::Kernels(c)
            | Command::Commutator(c)
            | Command::Invariance(c) => c,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Built-in definition: interval or gasket.
    #[arg(long, conflicts_with = "def", required_unless_present = "def")]
    pub preset: Option<Preset>,
    /// Path to a fractal-definition JSON document.
    #[arg(long)]
    pub def: Option<PathBuf>,
    /// Level m of the approximation.
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long, default_value = "dirichlet")]
    pub bc: BoundaryCondition,
    /// Measure weights overriding the definition, e.g. `0.25,0.75`.
    #[arg(long)]
    pub mu: Option<String>,
    /// Schatten or potential exponent.
    #[arg(long)]
    pub p: Option<f64>,
    /// Function spec as inline JSON or a path to a JSON file.
    #[arg(long = "fn")]
    pub function: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Tolerance override for the command's primary check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Record wall-clock time in report metadata (breaks byte-identical output).
    #[arg(long)]
    pub record_time: bool,
}

/// Definition, model and digest source resolved from a run configuration.
pub struct Resolved {
    pub definition: FractalDefinition,
    pub model: Model,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved> {
        let definition = match (&self.preset, &self.def) {
            (Some(p), _) => p.definition(),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read definition file {}", path.display()))?;
                parse_definition(&text).with_context(|| format!("in {}", path.display()))?
            }
            (None, None) => bail!("one of --preset or --def is required"),
        };
        let measure = match &self.mu {
            Some(text) => Some(MeasureWeights::new(parse_weights(text)?)?),
            None => None,
        };
        let model = Model::from_definition(&definition, measure)?;
        Ok(Resolved { definition, model })
    }

    pub fn level_or(&self, default: usize) -> Result<usize> {
        let m = self.level.unwrap_or(default);
        if m > DEFAULT_MAX_LEVEL {
            bail!("level {m} exceeds the maximum {DEFAULT_MAX_LEVEL}");
        }
        Ok(m)
    }

    /// The `--fn` spec, or a random harmonic function of level
    /// `default_level` seeded by `--seed`.
    pub fn function(&self, default_level: usize) -> Result<FunctionSpec> {
        let Some(arg) = &self.function else {
            return Ok(FunctionSpec::RandomHarmonic { level: default_level, seed: self.seed });
        };
        let text = if arg.trim_start().starts_with('{') {
            arg.clone()
        } else {
            fs::read_to_string(arg).with_context(|| format!("cannot read function file {arg}"))?
        };
        Ok(FunctionSpec::parse(&text)?)
    }
}
