use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hs_cli::run;
use hs_cli::{RunConfig, SolverChoice};

/// Conservative Hunter-Saxton solvers and their verification checks.
#[derive(Parser)]
#[command(name = "hs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solvers and write snapshots under --out.
    Simulate(Common),
    /// Run both solvers and report their largest discrepancy.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5e-3)]
        tolerance: f64,
    },
    /// Run verification checks and write verify.json.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated check names, or `all`.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        checks: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Built-in scenario (zero, delta[:alpha], breaking[:slope], two-atom,
    /// eq-counter-check) or a JSON state file.
    #[arg(long, default_value = "delta:8")]
    scenario: String,
    #[arg(long, value_enum, default_value_t = SolverChoice::Lagrangian)]
    solver: SolverChoice,
    #[arg(long, default_value_t = 2.0)]
    t_end: f64,
    /// Comma-separated output times; default is nine equally spaced times.
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    /// Kernel exponent of the smoothed system.
    #[arg(long, default_value_t = 3)]
    n: u32,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale every output velocity by this factor.
    #[arg(long)]
    perturb_u: Option<f64>,
}

impl From<Common> for RunConfig {
    fn from(c: Common) -> Self {
        RunConfig {
            scenario: c.scenario,
            solver: c.solver,
            t_end: c.t_end,
            times: c.times,
            n: c.n,
            gamma: c.gamma,
            grid: c.grid,
            dt: c.dt,
            out: c.out,
            seed: c.seed,
            perturb_u: c.perturb_u,
        }
    }
}

fn execute(command: Command) -> hs_core::Result<bool> {
    match command {
        Command::Simulate(common) => {
            let sim = run::simulate(&common.into())?;
            for t in &sim.manifest.trajectories {
                println!("{}: {} snapshots, energy {:.6e}", t.solver.label(), t.snapshots.len(), t.energy);
            }
            Ok(true)
        }
        Command::Compare { common, tolerance } => {
            let r = run::compare(&common.into(), tolerance)?;
            println!(
                "{} max |du| {:.3e}, max |dC| {:.3e}, max bl {:.3e} (tolerance {:.1e})",
                if r.pass { "PASS" } else { "FAIL" },
                r.max_sup_u,
                r.max_energy_diff,
                r.max_bl,
                r.tolerance
            );
            Ok(r.pass)
        }
        Command::Verify { common, checks } => {
            let r = run::verify(&common.into(), &checks)?;
            for c in &r.results {
                println!("{}", c.summary());
            }
            Ok(r.pass)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
