//! Batch driver for the renormalization toolkit.
//!
//! One subcommand per operation family; all runs are deterministic given
//! the configuration and seed, and every artifact embeds the tool version
//! and a configuration hash.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use iet_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ietlab", version, about = "Renormalization laboratory for interval exchanges")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Map description file (JSON).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Induction steps (Zorich steps where the command says so).
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Pullback/estimation depth in induction moves.
    #[arg(long, default_value_t = 40)]
    pub depth: usize,
    /// Seed for randomized scans; mandatory determinism anchor.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Mantissa bits for float scalars.
    #[arg(long, default_value_t = 128)]
    pub precision: u32,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma list of artifact kinds: csv,json,jsonl,svg (default all).
    #[arg(long, default_value = "all")]
    pub format: String,
}

#[derive(Subcommand, Clone, Debug)]
enum Cmd {
    /// Run Rauzy-Veech induction and emit the step trace.
    Induct {
        #[command(flatten)]
        common: Common,
        /// Also dump the accumulated incidence matrix as CSV.
        #[arg(long, default_value_t = true)]
        matrix: bool,
    },
    /// Estimate the Lyapunov spectrum of the height cocycle.
    Lyapunov {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the stable and central-stable subspaces.
    Filtration {
        #[command(flatten)]
        common: Common,
    },
    /// Build an affine exchange with a prescribed prefix and log-slope.
    BuildAiet {
        #[command(flatten)]
        common: Common,
        /// Comma-separated log-slopes (decimal strings).
        #[arg(long)]
        omega: String,
        /// Moves of the target path the output must reproduce.
        #[arg(long, default_value_t = 20)]
        prefix: usize,
    },
    /// Birkhoff sums of a piecewise-constant observable along one orbit.
    Birkhoff {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: String,
        /// Base point, as p/q.
        #[arg(long, default_value = "1/7")]
        x: String,
        /// Trace length in both directions.
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// Bounded-return-time certificates at one point.
    BoundedTimes {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: String,
        #[arg(long, default_value = "1/7")]
        x: String,
        /// Number of certificate times to emit.
        #[arg(long, default_value_t = 5)]
        k_max: usize,
    },
    /// Partial sums of the wandering-interval series at one point.
    Wandering {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1/7")]
        x: String,
        /// Terms per branch.
        #[arg(long, default_value_t = 400)]
        n: usize,
    },
    /// Scan for bounded-central certificate times.
    CheckBc {
        #[command(flatten)]
        common: Common,
        /// Window length in Zorich blocks (searched when omitted).
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        entry_cap: u64,
        #[arg(long, default_value_t = 100.0)]
        norm_cap: f64,
    },
    /// Scan for high-singularity certificate times.
    CheckHs {
        #[command(flatten)]
        common: Common,
        /// Height balance bound.
        #[arg(long, default_value_t = 10)]
        balance: i64,
    },
    /// Sample the conjugacy to the exchange with the same rotation prefix.
    Conjugacy {
        #[command(flatten)]
        common: Common,
        /// Target standard exchange (JSON spec).
        #[arg(long)]
        target: PathBuf,
        /// Partition level.
        #[arg(long, default_value_t = 8)]
        level: usize,
    },
    /// Closure of the permutation datum under both Rauzy operations.
    RauzyClass {
        #[command(flatten)]
        common: Common,
    },
    /// Full evidence bundle for one periodic-type instance.
    Report {
        #[command(flatten)]
        common: Common,
        /// Log-slopes; defaults to the exact unit eigenvector of the loop.
        #[arg(long)]
        omega: Option<String>,
        /// Loop search cap when the instance data is derived.
        #[arg(long, default_value_t = 12)]
        loop_cap: usize,
        /// Random points for the certificate scan.
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Connection { .. } => 3,
        Error::PrecisionExhausted(_) | Error::SpectralGapNotResolved(_) => 4,
        Error::BadSpec(_) | Error::BadScalar(_) | Error::NotABijection | Error::Reducible(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let hash = output::config_hash(&argv[1..]);
    let result = match cli.cmd {
        Cmd::Induct { common, matrix } => commands::induct(&common, hash, matrix),
        Cmd::Lyapunov { common } => commands::lyapunov(&common, hash),
        Cmd::Filtration { common } => commands::filtration(&common, hash),
        Cmd::BuildAiet {
            common,
            omega,
            prefix,
        } => commands::build_aiet(&common, hash, &omega, prefix),
        Cmd::Birkhoff { common, omega, x, n } => commands::birkhoff(&common, hash, &omega, &x, n),
        Cmd::BoundedTimes {
            common,
            omega,
            x,
            k_max,
        } => commands::bounded_times(&common, hash, &omega, &x, k_max),
        Cmd::Wandering { common, x, n } => commands::wandering(&common, hash, &x, n),
        Cmd::CheckBc {
            common,
            window,
            entry_cap,
            norm_cap,
        } => commands::check_bc(&common, hash, window, entry_cap, norm_cap),
        Cmd::CheckHs { common, balance } => commands::check_hs(&common, hash, balance),
        Cmd::Conjugacy {
            common,
            target,
            level,
        } => commands::conjugacy(&common, hash, &target, level),
        Cmd::RauzyClass { common } => commands::rauzy_class(&common, hash),
        Cmd::Report {
            common,
            omega,
            loop_cap,
            points,
        } => commands::report(&common, hash, omega.as_deref(), loop_cap, points),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::CliError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
        Err(commands::CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
