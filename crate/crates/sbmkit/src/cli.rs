//! Command-line front end. Every result is a single JSON line on stdout
//! (grids and raw path exports go to CSV files); errors go to stderr with a
//! nonzero status. All numerics live in the library modules.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::SbmError;
use crate::kernels::{
    density_bounds, exact_density, hitting_density, hitting_total_mass, joint_density_from_zero,
    killed_density, marginal_density_from_zero, SpaceTimePoint,
};
use crate::model::DriftParams;
use crate::numerics::{Estimate, QuadratureSpec};
use crate::simulate::{
    endpoint_density, simulate_paths, simulate_paths_killed, write_summaries_csv_file, WalkConfig,
};
use crate::verify::{
    default_ck_params, default_sandwich_params, default_sandwich_points, default_walk_config,
    grid_spec, run_ck_symmetry_suite, run_mc_suite, run_reduction_suite, run_sandwich_suite,
    SuiteReport,
};

const EXIT_OK: i32 = 0;
const EXIT_FAILURE: i32 = 1;
const EXIT_USAGE: i32 = 2;

/// Caps the rayon worker count from SBMKIT_THREADS (default: all cores).
pub fn init_thread_pool() {
    if let Ok(raw) = std::env::var("SBMKIT_THREADS") {
        if let Ok(threads) = raw.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

#[derive(Parser)]
#[command(name = "sbmkit", version, about = "Density kernels and a walk oracle for skew Brownian motion with two-valued drift")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Drift on [0, inf)
    #[arg(long, allow_hyphen_values = true)]
    m1: f64,
    /// Drift on (-inf, 0)
    #[arg(long, allow_hyphen_values = true)]
    m2: f64,
    /// Skewness, in (0, 1)
    #[arg(long)]
    p: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<DriftParams, SbmError> {
        DriftParams::new(self.m1, self.m2, self.p)
    }
}

#[derive(clap::Args)]
struct TolArgs {
    /// Absolute quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    /// Relative quadrature tolerance
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
}

impl TolArgs {
    fn spec(&self) -> Result<QuadratureSpec, SbmError> {
        QuadratureSpec::new(self.abs_tol, self.rel_tol, 2000)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Recurrence/transience from the drift signs
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        m1: f64,
        #[arg(long, allow_hyphen_values = true)]
        m2: f64,
    },
    /// Canonical scale function s(x)
    Scale {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// P[hit b before a] from x, a < x < b
    ExitProb {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
    /// Density kernels
    #[command(subcommand)]
    Density(DensityCommand),
    /// First-passage density at s, or its total mass with --total
    Hitting {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        total: bool,
    },
    /// Run the lattice walk and report summary statistics
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        /// Lattice steps per unit time
        #[arg(long, default_value_t = 10_000)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Absorb paths at their first visit to 0
        #[arg(long)]
        killed: bool,
        /// Write per-path summaries as CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print an endpoint histogram with this bin width
        #[arg(long = "bin-width")]
        bin_width: Option<f64>,
    },
    /// Run verification suites; exit status 0 only if all checks pass
    Verify {
        #[arg(long)]
        suite: SuiteKind,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Override the Monte Carlo path count
        #[arg(long)]
        paths: Option<usize>,
        /// Override the lattice resolution of the Monte Carlo suite
        #[arg(long)]
        n: Option<u32>,
    },
}

#[derive(Subcommand)]
enum DensityCommand {
    /// Two-sided bounds at (t, x, y)
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// Exact density via the first-passage convolution
    Exact {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Density from the origin: joint with the local time when --l is
    /// given, marginal otherwise
    FromZero {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        l: Option<f64>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Density of the process killed at 0
    Killed {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteKind {
    Sandwich,
    Reduction,
    Ck,
    Mc,
    All,
}

#[derive(Serialize)]
struct ClassifyOut {
    kind: crate::model::Classification,
}

#[derive(Serialize)]
struct ScaleOut {
    s: f64,
}

#[derive(Serialize)]
struct ProbabilityOut {
    probability: f64,
}

#[derive(Serialize)]
struct BoundsOut {
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct EstimateOut {
    value: f64,
    error: f64,
    converged: bool,
}

impl From<Estimate> for EstimateOut {
    fn from(e: Estimate) -> Self {
        Self {
            value: e.value,
            error: e.error,
            converged: e.converged,
        }
    }
}

#[derive(Serialize)]
struct ValueOut {
    value: f64,
}

#[derive(Serialize)]
struct SimulateOut {
    paths: usize,
    steps_per_unit_time: u32,
    seed: u64,
    killed: bool,
    mean_endpoint: f64,
    mean_local_time: f64,
    hit_fraction: f64,
    absorbed_fraction: f64,
}

#[derive(Serialize)]
struct HistogramBinOut {
    bin_lo: f64,
    bin_hi: f64,
    density: f64,
    stderr: f64,
}

fn emit<T: Serialize>(value: &T) -> i32 {
    match serde_json::to_string(value) {
        Ok(line) => {
            println!("{line}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: cannot serialize result: {e}");
            EXIT_FAILURE
        }
    }
}

fn fail(err: &SbmError) -> i32 {
    eprintln!("error: {err}");
    match err {
        SbmError::InvalidInput(_) | SbmError::UndampedSingularity(_) => EXIT_USAGE,
        SbmError::Io(_) => EXIT_FAILURE,
    }
}

fn emit_estimate(est: Estimate) -> i32 {
    let code = emit(&EstimateOut::from(est));
    if code != EXIT_OK {
        return code;
    }
    if est.converged {
        EXIT_OK
    } else {
        eprintln!("error: quadrature did not converge (error estimate {})", est.error);
        EXIT_FAILURE
    }
}

/// Parse argv and dispatch; returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Classify { m1, m2 } => {
            // classification does not involve the skewness
            match DriftParams::new(m1, m2, 0.5) {
                Ok(params) => emit(&ClassifyOut {
                    kind: params.classify(),
                }),
                Err(e) => fail(&e),
            }
        }
        Command::Scale { model, x } => match model.params() {
            Ok(params) => emit(&ScaleOut {
                s: params.scale_function(x),
            }),
            Err(e) => fail(&e),
        },
        Command::ExitProb { model, a, x, b } => match model.params().and_then(|p| p.exit_probability(a, x, b)) {
            Ok(probability) => emit(&ProbabilityOut { probability }),
            Err(e) => fail(&e),
        },
        Command::Density(cmd) => run_density(cmd),
        Command::Hitting { model, x, s, total } => {
            let params = match model.params() {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            match (s, total) {
                (Some(s), false) => match hitting_density(&params, x, s) {
                    Ok(value) => emit(&ValueOut { value }),
                    Err(e) => fail(&e),
                },
                (None, true) => match hitting_total_mass(&params, x) {
                    Ok(value) => emit(&ValueOut { value }),
                    Err(e) => fail(&e),
                },
                _ => {
                    eprintln!("error: pass exactly one of --s <time> or --total");
                    EXIT_USAGE
                }
            }
        }
        Command::Simulate {
            model,
            t,
            x0,
            n,
            paths,
            seed,
            killed,
            out,
            bin_width,
        } => run_simulate(model, t, x0, n, paths, seed, killed, out, bin_width),
        Command::Verify { suite, seed, paths, n } => run_verify(suite, seed, paths, n),
    }
}

fn run_density(cmd: DensityCommand) -> i32 {
    match cmd {
        DensityCommand::Bounds { model, t, x, y } => {
            let result = model
                .params()
                .and_then(|p| SpaceTimePoint::new(t, x, y).and_then(|pt| density_bounds(&p, &pt)));
            match result {
                Ok(b) => emit(&BoundsOut {
                    lower: b.lower,
                    upper: b.upper,
                }),
                Err(e) => fail(&e),
            }
        }
        DensityCommand::Exact { model, t, x, y, tol } => {
            let result = model.params().and_then(|p| {
                let spec = tol.spec()?;
                let pt = SpaceTimePoint::new(t, x, y)?;
                exact_density(&p, &pt, &spec)
            });
            match result {
                Ok(est) => emit_estimate(est),
                Err(e) => fail(&e),
            }
        }
        DensityCommand::FromZero { model, t, x, l, tol } => {
            let result = model.params().and_then(|p| {
                let spec = tol.spec()?;
                match l {
                    Some(l) => joint_density_from_zero(&p, t, x, l, &spec),
                    None => marginal_density_from_zero(&p, t, x, &spec),
                }
            });
            match result {
                Ok(est) => emit_estimate(est),
                Err(e) => fail(&e),
            }
        }
        DensityCommand::Killed { model, t, x, y } => {
            match model.params().and_then(|p| killed_density(&p, t, x, y)) {
                Ok(value) => emit(&ValueOut { value }),
                Err(e) => fail(&e),
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    model: ModelArgs,
    t: f64,
    x0: f64,
    n: u32,
    paths: usize,
    seed: u64,
    killed: bool,
    out: Option<PathBuf>,
    bin_width: Option<f64>,
) -> i32 {
    let params = match model.params() {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let cfg = match WalkConfig::new(n, paths, seed) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let summaries = if killed {
        simulate_paths_killed(&params, t, x0, &cfg)
    } else {
        simulate_paths(&params, t, x0, &cfg)
    };
    let summaries = match summaries {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };

    let count = summaries.len() as f64;
    let mean_endpoint = summaries.iter().map(|s| s.endpoint).sum::<f64>() / count;
    let mean_local_time = summaries.iter().map(|s| s.local_time).sum::<f64>() / count;
    let hit_fraction =
        summaries.iter().filter(|s| s.first_hit_time.is_some()).count() as f64 / count;
    let absorbed_fraction = summaries.iter().filter(|s| s.absorbed).count() as f64 / count;
    let code = emit(&SimulateOut {
        paths,
        steps_per_unit_time: n,
        seed,
        killed,
        mean_endpoint,
        mean_local_time,
        hit_fraction,
        absorbed_fraction,
    });
    if code != EXIT_OK {
        return code;
    }

    if let Some(width) = bin_width {
        let hist = match endpoint_density(&summaries, width) {
            Ok(h) => h,
            Err(e) => return fail(&e),
        };
        let dens = hist.densities();
        let errs = hist.density_stderr();
        for i in 0..dens.len() {
            let code = emit(&HistogramBinOut {
                bin_lo: hist.bin_edges[i],
                bin_hi: hist.bin_edges[i + 1],
                density: dens[i],
                stderr: errs[i],
            });
            if code != EXIT_OK {
                return code;
            }
        }
    }

    if let Some(path) = out {
        if let Err(e) = write_summaries_csv_file(&summaries, &path) {
            return fail(&e);
        }
    }
    EXIT_OK
}

fn run_verify(suite: SuiteKind, seed: u64, paths: Option<usize>, n: Option<u32>) -> i32 {
    let spec = grid_spec();
    let mc_cfg = {
        let mut cfg = default_walk_config(seed);
        if let Some(p) = paths {
            cfg.paths = p;
        }
        if let Some(n) = n {
            cfg.steps_per_unit_time = n;
        }
        cfg
    };
    let reports: Vec<SuiteReport> = match suite {
        SuiteKind::Sandwich => vec![run_sandwich_suite(
            &default_sandwich_params(),
            &default_sandwich_points(),
            &spec,
        )],
        SuiteKind::Reduction => vec![run_reduction_suite(&spec)],
        SuiteKind::Ck => match run_ck_symmetry_suite(&default_ck_params(), &spec) {
            Ok(r) => vec![r],
            Err(e) => return fail(&e),
        },
        SuiteKind::Mc => vec![run_mc_suite(&mc_cfg, &spec)],
        SuiteKind::All => {
            let mut reports = vec![run_reduction_suite(&spec)];
            reports.push(run_sandwich_suite(
                &default_sandwich_params(),
                &default_sandwich_points(),
                &spec,
            ));
            match run_ck_symmetry_suite(&default_ck_params(), &spec) {
                Ok(r) => reports.push(r),
                Err(e) => return fail(&e),
            }
            reports.push(run_mc_suite(&mc_cfg, &spec));
            reports
        }
    };

    let mut all_passed = true;
    for report in &reports {
        if emit(report) != EXIT_OK {
            return EXIT_FAILURE;
        }
        all_passed &= report.passed;
    }
    if all_passed {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}
