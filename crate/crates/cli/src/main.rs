//! `multieq` command-line front end.

mod commands;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multieq::network::DEFAULT_SYMMETRIZER_TOL;
use multieq::sweep::PiGrid;
use multieq::{Error, ErrorClass, PsiKind};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[command(
    name = "multieq",
    version,
    about = "Equilibria of cooperative network dynamics x' = -Dx + pi*A*psi(x)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    #[command(flatten)]
    pub common: Common,

    /// Rerun from a config.json written by an earlier run.
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Common {
    /// Adjacency matrix (CSV rows or JSON {"n", "rows"}); defaults to the built-in six-node example.
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Saturating nonlinearity: boltzmann, mm or cubic-tanh.
    #[arg(long, global = true, default_value = "boltzmann")]
    pub psi: PsiKind,

    #[arg(long, global = true, env = "MULTIEQ_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Output directory.
    #[arg(long, global = true, default_value = "results", value_name = "DIR")]
    pub out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Newton residual threshold (default 1e-10 * max(1, |Delta|_inf)).
    #[arg(long, global = true)]
    pub tol_newton: Option<f64>,

    /// Relative tolerance for the symmetrizability check.
    #[arg(long, global = true, default_value_t = DEFAULT_SYMMETRIZER_TOL)]
    pub tol_symmetrizer: f64,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Validate a network and report its spectral thresholds.
    Analyze {
        /// Effort for the Gershgorin panels (default: the second threshold).
        #[arg(long)]
        pi: Option<f64>,
    },
    /// Multistart census of equilibria at one effort.
    Equilibria {
        #[arg(long)]
        pi: f64,
        #[arg(long, default_value_t = 1000)]
        starts: usize,
        /// Sampling box half-width as a multiple of max(alpha, 1).
        #[arg(long, default_value_t = 1.5)]
        box_scale: f64,
    },
    /// Censuses over a grid of efforts.
    Sweep {
        /// lo:hi:count, evenly spaced on (lo, hi].
        #[arg(long)]
        pi_grid: PiGrid,
        #[arg(long, default_value_t = 1000)]
        starts: usize,
        /// Run each census independently instead of seeding from the previous one.
        #[arg(long)]
        no_warm_start: bool,
    },
    /// Integrate an ensemble of random initial conditions.
    Simulate {
        #[arg(long)]
        pi: f64,
        #[arg(long, default_value_t = 100)]
        starts: usize,
        /// Initial conditions are uniform on [-w, w]^n.
        #[arg(long, default_value_t = 2.0)]
        half_width: f64,
        #[arg(long, default_value_t = 400.0)]
        t_max: f64,
        /// Starts for the census that supplies the attractor list.
        #[arg(long, default_value_t = 1000)]
        census_starts: usize,
        /// Number of full trajectories written to disk.
        #[arg(long, default_value_t = 10)]
        trajectories: usize,
    },
    /// Full report for the built-in six-node example.
    Example1 {
        #[arg(long, default_value_t = 1000)]
        starts: usize,
        /// Efforts to census, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.1, 1.5, 1.838])]
        pi: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        ensemble_starts: usize,
    },
    /// Random-network experiment.
    Example2 {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        w_lo: f64,
        #[arg(long, default_value_t = 1.0)]
        w_hi: f64,
        #[arg(long, default_value = "1:20:50")]
        pi_grid: PiGrid,
        #[arg(long, default_value_t = 1000)]
        starts: usize,
        /// 10^4 starts at each of 500 efforts.
        #[arg(long)]
        paper_scale: bool,
    },
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Io => 1,
        ErrorClass::Model | ErrorClass::Usage => 2,
        ErrorClass::Numerical => 3,
    }
}

fn resolve(cli: Cli) -> multieq::Result<Cli> {
    let Some(path) = &cli.config else {
        if cli.command.is_none() {
            return Err(Error::InvalidParameter(
                "a subcommand or --config is required".into(),
            ));
        }
        return Ok(cli);
    };
    if cli.command.is_some() {
        return Err(Error::InvalidParameter(
            "--config replaces the subcommand; give one or the other".into(),
        ));
    }
    let mut loaded: Cli = serde_json::from_str(&fs::read_to_string(path)?)?;
    loaded.common.out = cli.common.out;
    loaded.common.threads = cli.common.threads;
    Ok(loaded)
}

fn validate(common: &Common) -> multieq::Result<()> {
    if common.tol_newton.is_some_and(|t| !(t > 0.0)) || !(common.tol_symmetrizer > 0.0) {
        return Err(Error::InvalidParameter(
            "tolerances must be positive".into(),
        ));
    }
    if common.threads == Some(0) {
        return Err(Error::InvalidParameter(
            "--threads must be at least 1".into(),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.common.out.clone();
    let result = resolve(cli).and_then(|cli| {
        validate(&cli.common)?;
        if let Some(t) = cli.common.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
        commands::run(&cli)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if fs::create_dir_all(&out).is_ok() {
                let mut text = serde_json::to_string_pretty(&e.to_json()).unwrap_or_default();
                text.push('\n');
                let _ = fs::write(out.join("error.json"), text);
            }
            ExitCode::from(exit_code(e.class()))
        }
    }
}
