//! `walshrec`: reproducible command-line runs of the walsh-recon toolkit.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "walshrec", version, about = "Walsh-basis field reconstruction with qubit sensors")]
struct Cli {
    /// Directory that receives the output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Master seed; recorded in every output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Walsh coefficients of a profile.
    Transform(TransformArgs),
    /// Compress a profile with one of the index-selection methods.
    Compress(CompressArgs),
    /// Simulate an acquisition and export the reconstruction envelope.
    Sense(SenseArgs),
    /// Filter functions and coherence decay of Walsh sequences.
    Ddfilter(DdfilterArgs),
}

#[derive(Debug, Args, Serialize)]
struct ProfileArgs {
    /// Corpus name (f1..f5, exp, sin), `const:<value>`, or a `t,value` CSV path.
    #[arg(long)]
    profile: String,
    /// Window length T in seconds; defaults to the profile's own.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Ordering {
    Paley,
    Sequency,
}

#[derive(Debug, Args, Serialize)]
struct TransformArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Compute the first 2^order coefficients.
    #[arg(long, conflicts_with = "indices")]
    order: Option<u32>,
    /// Explicit indices, e.g. `0,3,8-15`.
    #[arg(long)]
    indices: Option<String>,
    #[arg(long, value_enum, default_value = "paley")]
    ordering: Ordering,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Cpmgpdd,
    Threshold,
    Subdegree,
}

#[derive(Debug, Args, Serialize)]
struct PlanArgs {
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Threshold negligibility for `--method threshold`.
    #[arg(long)]
    p0: Option<u32>,
    /// Sequence count for `cpmgpdd`, maximum degree for `subdegree`, or the
    /// full reconstruction order when no method is given.
    #[arg(long)]
    order: Option<u32>,
    /// Sub-degree cutoff offset: keep sub-degree ≤ d - offset.
    #[arg(long, default_value_t = 2)]
    subdegree_offset: u32,
    /// Explicit Paley indices instead of a method.
    #[arg(long, conflicts_with = "method")]
    indices: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct CompressArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[command(flatten)]
    plan: PlanArgs,
}

#[derive(Debug, Args, Serialize)]
struct SenseArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[command(flatten)]
    plan: PlanArgs,
    /// Repetitions M per sequence.
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    /// Use exact outcome probabilities instead of sampling shots.
    #[arg(long)]
    noiseless: bool,
    /// Coupling strength γ in rad per field unit per second.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Base coherence time; omit for unit visibility.
    #[arg(long)]
    t2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    stretch: f64,
    /// T₂ scales as max(pulses, 1)^pulse_exponent.
    #[arg(long, default_value_t = 0.0)]
    pulse_exponent: f64,
    /// Multiplies the envelope variance to absorb systematic errors.
    #[arg(long, default_value_t = 1.0)]
    inflation: f64,
    /// Envelope CSV rows.
    #[arg(long, default_value_t = 256)]
    points: usize,
    /// Exit with status 3 if any coefficient hits the dynamic-range limit.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum NoiseKind {
    Flat,
    Powerlaw,
    Lorentzian,
}

#[derive(Debug, Args, Serialize)]
struct DdfilterArgs {
    /// Sequence indices, e.g. `1,3,4-7`.
    #[arg(long)]
    indices: String,
    #[arg(long, value_enum, default_value = "paley")]
    ordering: Ordering,
    /// Reconstruction order n; defaults to the largest degree requested.
    #[arg(long)]
    order: Option<u32>,
    /// Upper end of the ωT grid.
    #[arg(long, default_value_t = 100.0)]
    omega_t_max: f64,
    #[arg(long, default_value_t = 1001)]
    points: usize,
    /// Rank the sequences by χ under this noise spectrum.
    #[arg(long, value_enum)]
    noise: Option<NoiseKind>,
    #[arg(long, default_value_t = 1.0)]
    noise_amplitude: f64,
    /// Power-law exponent, e.g. -1 for 1/f noise.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    noise_exponent: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_cutoff: f64,
    #[arg(long, default_value_t = 1e-4)]
    omega_min: f64,
    #[arg(long, default_value_t = 100.0)]
    omega_max: f64,
    /// Window length T in seconds.
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
}

/// Process outcome beyond plain success.
pub enum Outcome {
    Done,
    Saturated,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use walsh_recon::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::Io(_) | Error::Csv(_) | Error::Json(_)) => 1,
        Some(_) => 2,
        None if err.downcast_ref::<std::io::Error>().is_some() => 1,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Saturated) => {
            eprintln!("error: dynamic range exceeded (--strict)");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
