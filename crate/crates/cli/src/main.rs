//! `qsim`: run scenes, gain sweeps and the verification suites.

mod manifest;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Exit codes. Stable contract for scripts.
pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_EXPECTED_INFEASIBLE: u8 = 2;
pub const EXIT_THEOREM_VIOLATION: u8 = 3;

/// Directory searched for scene files given by bare name.
pub const SCENE_DIR_ENV: &str = "QSIM_SCENE_DIR";

#[derive(Parser, Debug)]
#[command(name = "qsim", version, about = "Quasi-static planar manipulation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Converge,
    Jam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Lcp,
    Model,
    Timestep,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roll out one scene and write its trajectory.
    Simulate(SimulateArgs),
    /// Run a scene over a list of feedback gains.
    Sweep(SweepArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
}

#[derive(clap::Args, Debug)]
pub struct SimulateArgs {
    /// Scene file or built-in scene name.
    pub scene: String,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub duration: Option<f64>,
    /// Replace the scene's feedback scale `c`.
    #[arg(long = "c-override")]
    pub c_override: Option<f64>,
    /// Trajectory output; defaults to `<scene>.<format>` in the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(clap::Args, Debug)]
pub struct SweepArgs {
    pub scene: String,
    /// Comma-separated, strictly decreasing gains.
    #[arg(long = "c-list", default_value = "1,0.1,0.01,0.001")]
    pub c_list: String,
    #[arg(long, value_enum, default_value = "converge")]
    pub mode: SweepMode,
    #[arg(long = "out-dir", default_value = "sweep")]
    pub out_dir: PathBuf,
    /// Concurrent rollouts.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub duration: Option<f64>,
    /// Format of the per-gain trajectories.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout, with a manifest beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command_line: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match cli.command {
        Command::Simulate(a) => run::simulate(&a, &command_line),
        Command::Sweep(a) => run::sweep(&a, &command_line),
        Command::Verify(a) => run::verify(&a, &command_line),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
