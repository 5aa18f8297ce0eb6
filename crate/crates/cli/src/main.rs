mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stochint::basis::BasisKind;
use stochint::coefficients::Normalization;

use commands::{Failure, Format, Output};
use config::{
    ApproximateConfig, CoeffsConfig, KernelConfig, RunConfig, TensorSource, ValidateConfig,
};

/// Iterated Itô and Stratonovich integrals via multiple Fourier series.
#[derive(Parser, Debug)]
#[command(name = "stochint", version, about)]
struct Cli {
    /// Replay the run configuration embedded in a tensor file or JSON output.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file: the tensor for `coeffs`, the report otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a coefficient tensor and print its Parseval summary.
    Coeffs(CoeffsArgs),
    /// Evaluate truncated expansions on drawn Gaussians.
    Approximate(ApproximateArgs),
    /// Compare Monte Carlo mean-square errors against theory.
    Validate(ValidateArgs),
}

fn parse_k(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if (1..=5).contains(&k) => Ok(k),
        _ => Err(format!("'{s}' is not supported: multiplicity 1..5")),
    }
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long, default_value = "legendre")]
    basis: BasisKind,
    /// Interval start.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t: f64,
    /// Interval end.
    #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
    end: f64,
    /// Monomial exponents α₁,…,α_k of ψ_l(s) = (t − s)^α_l; zeros by default.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<u32>,
}

impl KernelArgs {
    fn into_config(self, k: usize) -> Result<KernelConfig, Failure> {
        let weights = if self.weights.is_empty() {
            vec![0; k]
        } else {
            self.weights
        };
        if weights.len() != k {
            return Err(Failure::Usage(format!(
                "{} weights given for multiplicity {k}",
                weights.len()
            )));
        }
        Ok(KernelConfig {
            basis: self.basis,
            t: self.t,
            end: self.end,
            weights,
        })
    }
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    #[arg(long, value_parser = parse_k)]
    k: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, value_enum, default_value = "absolute")]
    normalization: NormArg,
    /// Also write the tensor as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelArgs,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum NormArg {
    Absolute,
    Unit,
}

#[derive(Args, Debug)]
struct ApproximateArgs {
    /// Noise indices i₁,…,i_k; 0 is the time integral.
    #[arg(long, value_delimiter = ',', required = true)]
    indices: Vec<usize>,
    /// Must agree with the number of indices when given.
    #[arg(long, value_parser = parse_k)]
    k: Option<usize>,
    /// Truncation order; defaults to the tensor's order with --tensor.
    #[arg(long)]
    p: Option<usize>,
    /// Number of Wiener components; defaults to the largest index.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, env = "STOCHINT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    draws: u64,
    /// Print each Itô correction term's share of strat − ito.
    #[arg(long)]
    breakdown: bool,
    /// Read coefficients from a tensor file instead of building them.
    #[arg(long)]
    tensor: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, env = "STOCHINT_SEED", default_value_t = 0)]
    seed: u64,
    /// Monte Carlo paths per row.
    #[arg(long, default_value_t = 20_000)]
    paths: usize,
    /// Grid steps per path.
    #[arg(long, default_value_t = 4096)]
    steps: usize,
}

fn config_from(command: Command) -> Result<(RunConfig, Option<PathBuf>), Failure> {
    Ok(match command {
        Command::Coeffs(a) => {
            let normalization = match a.normalization {
                NormArg::Absolute => Normalization::Absolute,
                NormArg::Unit => Normalization::UnitInterval,
            };
            let cfg = CoeffsConfig {
                kernel: a.kernel.into_config(a.k)?,
                p: a.p,
                normalization,
            };
            (RunConfig::Coeffs(cfg), a.csv)
        }
        Command::Approximate(a) => {
            let k = a.indices.len();
            if !(1..=5).contains(&k) {
                return Err(Failure::Usage(format!(
                    "{k} indices given: multiplicity 1..5"
                )));
            }
            if a.k.is_some_and(|given| given != k) {
                return Err(Failure::Usage(format!(
                    "--k {} but {k} indices",
                    a.k.unwrap_or(0)
                )));
            }
            let source = match a.tensor {
                Some(path) => TensorSource::File(path),
                None => TensorSource::Inline(a.kernel.into_config(k)?),
            };
            let m =
                a.m.unwrap_or_else(|| a.indices.iter().copied().max().unwrap_or(0).max(1));
            let cfg = ApproximateConfig {
                source,
                p: a.p,
                indices: a.indices,
                m,
                seed: a.seed,
                draws: a.draws,
                breakdown: a.breakdown,
            };
            (RunConfig::Approximate(cfg), None)
        }
        Command::Validate(a) => {
            let cfg = ValidateConfig {
                seed: a.seed,
                paths: a.paths,
                steps: a.steps,
                rows: config::default_rows(),
            };
            (RunConfig::Validate(cfg), None)
        }
    })
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let (config, csv) = match (cli.config, cli.command) {
        (Some(path), None) => (commands::load_config(&path)?, None),
        (Some(_), Some(_)) => {
            return Err(Failure::Usage(
                "--config replaces the subcommand; give one or the other".into(),
            ))
        }
        (None, Some(command)) => config_from(command)?,
        (None, None) => {
            return Err(Failure::Usage(
                "a subcommand or --config is required".into(),
            ))
        }
    };
    match &config {
        RunConfig::Coeffs(cfg) => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("stochint.tensor"));
            let output = commands::coeffs(cfg, &out, cli.format)?;
            if let Some(csv) = csv {
                commands::coeffs_csv(&out, &csv)?;
            }
            Ok(output)
        }
        RunConfig::Approximate(cfg) => emit(commands::approximate(cfg, cli.format)?, cli.out),
        RunConfig::Validate(cfg) => emit(commands::validate(cfg, cli.format)?, cli.out),
    }
}

/// Redirects the report to `--out` when given.
fn emit(output: Output, out: Option<PathBuf>) -> Result<Output, Failure> {
    match out {
        Some(path) => {
            std::fs::write(&path, &output.text)
                .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))?;
            Ok(Output {
                text: format!("wrote {}\n", path.display()),
                ok: output.ok,
            })
        }
        None => Ok(output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(output) => {
            print!("{}", output.text);
            if output.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
