mod commands;
mod config;
mod matrix;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Packing-norm and vorticity-energy diagnostics.
///
/// Every command writes `<out>/<command>.json`; exit status is 1 when a
/// recorded inequality fails and 2 on usage, input or parameter errors.
#[derive(Parser, Debug)]
#[command(name = "regladder", version, args_override_self = true)]
pub struct Cli {
    /// JSON file of flag values; keys are flag names, command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. Results are bitwise reproducible only for a fixed count.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one norm of a grid field or atomic measure.
    Norm(commands::NormArgs),
    /// The packing-norm ladder of a grid field with its consistency checks.
    Ladder(commands::LadderArgs),
    /// Compact-embedding verdict for exponent choices.
    Embed(commands::EmbedArgs),
    /// Haar level energies and the H^-1 estimate.
    Wavelet(commands::WaveletArgs),
    /// Evolve planar vortex patches and track energy diagnostics.
    Sim2d(commands::Sim2dArgs),
    /// Energy concentration of a shrinking steady vortex family.
    Dmj(commands::DmjArgs),
    /// Energy-to-packing bound chain for 3D vorticity.
    Sim3d(commands::Sim3dArgs),
    /// Print the coverage matrix, or re-check a saved report.
    Report(commands::ReportArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REGLADDER_LOG", "warn")).init();
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
    {
        log::warn!("thread pool already initialised: {e}");
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
