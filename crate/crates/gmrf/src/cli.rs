//! The `gmrf` command line.
//!
//! Exit codes: 0 valid, 1 invalid, 2 unknown (for `check`; other commands
//! return 0 on success), 64 bad flags or parameters, 65 a computation that
//! did not produce a result (oracle non-convergence, acceptance too low),
//! 66 unwritable output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmrf_core::oracle::LanczosConfig;
use gmrf_core::sampler::{Budget, SampleBox, SamplerConfig};
use gmrf_core::spectrum::spectrum_rows;
use gmrf_core::study::{fit_loglog, quantile, select_study_thetas, Field};
use gmrf_core::validity::CheckOptions;
use gmrf_core::{build_bundle, build_precision, GridDims, Method, Tau, Theta, Validity};

use crate::bench::{bench_membership, BenchConfig};
use crate::io::{write_batch_csv, write_bench_csv, write_fit_csv, write_matrix_market, write_spectrum_csv, write_study_csv};
use crate::parallel::{resolve_threads, sample_parallel, sweep_parallel, timed_check};
use crate::svg;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gmrf_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
    #[error("write failed: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gmrf_core::Error as E;
        match self {
            CliError::Usage(_) => 64,
            CliError::Core(E::NotConverged { .. } | E::AcceptanceTooLow { .. }) => 65,
            CliError::Core(_) => 64,
            CliError::Output { .. } | CliError::Io(_) => 66,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gmrf", version, about = "Validity checks for bivariate lattice GMRF parameters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    #[value(alias = "diag_dominance")]
    Dd,
    Circulant,
    Certified,
    Limit,
    Exact,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dd => Method::DiagDominance,
            MethodArg::Circulant => Method::Circulant,
            MethodArg::Certified => Method::Certified,
            MethodArg::Limit => Method::Limit,
            MethodArg::Exact => Method::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    /// Inner precision `Q` (unit marginal scales).
    Q,
    /// Toroidal approximation `Q~`.
    QTilde,
    /// `Q~ - Q`.
    Delta,
    /// `Q` scaled by the marginal standard deviations.
    Scaled,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ThetaArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho11: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho12: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho21: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho22: f64,
}

impl ThetaArgs {
    fn theta(&self) -> CliResult<Theta> {
        Ok(Theta::new(self.phi, self.rho11, self.rho12, self.rho21, self.rho22)?)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub n1: usize,
    #[arg(long)]
    pub n2: usize,
}

impl GridArgs {
    fn dims(&self) -> CliResult<GridDims> {
        Ok(GridDims::new(self.n1, self.n2)?)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct OracleArgs {
    /// Lanczos residual tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub lanczos_tol: f64,
    #[arg(long, default_value_t = 3000)]
    pub max_iter: usize,
}

impl OracleArgs {
    fn config(&self, seed: u64) -> LanczosConfig {
        LanczosConfig {
            max_iter: self.max_iter,
            conv_tol: self.lanczos_tol,
            reorthogonalize: true,
            seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test one parameter value; prints a JSON verdict.
    Check {
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long)]
        n2: Option<usize>,
        #[command(flatten)]
        theta: ThetaArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Circulant)]
        method: MethodArg,
        /// Margin for the circulant test.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Dead zone of the limit test.
        #[arg(long, default_value_t = 1e-10)]
        limit_tol: f64,
        /// Threshold of the exact test (default: 0 dense, 1e-10 ||Q||_1 Lanczos).
        #[arg(long)]
        exact_tol: Option<f64>,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Uniform rejection sampling over a box.
    Sample {
        #[command(flatten)]
        grid: GridArgs,
        /// Number of accepted draws.
        #[arg(short = 'N', long = "n-draws")]
        n_draws: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Circulant)]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Half-width of the sampling cube.
        #[arg(long = "box", default_value_t = 1.0)]
        box_radius: f64,
        /// Also write rejected proposals.
        #[arg(long)]
        keep_rejected: bool,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Conditional slice over (rho12, rho21) with the other parameters fixed.
    Slice {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        rho11: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        rho22: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Number of proposals.
        #[arg(short = 'N', long = "n-draws", default_value_t = 10_000)]
        n_draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Convergence study of the smallest eigenvalue over a range of grids.
    Study {
        /// Square sides `start:end:step`, a comma list, or `n1xn2` items.
        #[arg(long, default_value = "20:80:2")]
        grids: String,
        /// Number of parameter values.
        #[arg(short = 'N', long = "n-thetas", default_value_t = 20)]
        n_thetas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        limit_tol: f64,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(short, long, default_value = "study.csv")]
        out: PathBuf,
        #[arg(long, default_value = "fit.csv")]
        fit_out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Time the closed-form check against assembly plus Lanczos (single thread).
    Bench {
        #[arg(long, default_value = "100,200,300")]
        grids: String,
        #[arg(long, default_value_t = 0)]
        n_valid: usize,
        #[arg(long, default_value_t = 50)]
        n_invalid: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Closed-form spectrum of the toroidal approximation, one row per mode.
    Spectrum {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        theta: ThetaArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write a precision matrix in MatrixMarket format.
    Matrix {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        theta: ThetaArgs,
        #[arg(long, value_enum, default_value_t = MatrixKind::Q)]
        which: MatrixKind,
        #[arg(long, default_value_t = 1.0)]
        tau1: f64,
        #[arg(long, default_value_t = 1.0)]
        tau2: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

/// Parses a grid list: `20:80:2`, `10,20,40`, `10x12` or any comma mix.
pub fn parse_grids(spec: &str) -> CliResult<Vec<GridDims>> {
    let bad = || CliError::Usage(format!("invalid grid list `{spec}`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let mut out = Vec::new();
    for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
        if let Some((a, b)) = item.split_once(['x', 'X']) {
            out.push(GridDims::new(num(a)?, num(b)?)?);
        } else if item.contains(':') {
            let parts: Vec<usize> = item.split(':').map(num).collect::<CliResult<_>>()?;
            let (start, end, step) = match parts[..] {
                [a, b] => (a, b, 1),
                [a, b, s] if s > 0 => (a, b, s),
                _ => return Err(bad()),
            };
            for side in (start..=end).step_by(step) {
                out.push(GridDims::square(side)?);
            }
        } else {
            out.push(GridDims::square(num(item)?)?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn open_file(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs `f` on the file at `path`, or on `stdout` when there is none.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut w = open_file(p)?;
            f(&mut w).and_then(|_| w.flush()).map_err(|source| CliError::Output {
                path: p.to_path_buf(),
                source,
            })
        }
        None => Ok(f(stdout)?),
    }
}

fn exit_for(v: Validity) -> i32 {
    match v {
        Validity::Valid => 0,
        Validity::Invalid => 1,
        Validity::Unknown => 2,
    }
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    match cmd {
        Command::Check {
            n1,
            n2,
            theta,
            method,
            margin,
            limit_tol,
            exact_tol,
            oracle,
            seed,
            out,
        } => {
            let method = Method::from(method);
            let theta = theta.theta()?;
            let dims = match (n1, n2) {
                (Some(a), Some(b)) => GridDims::new(a, b)?,
                // The limit test is grid-free; its verdict omits the grid.
                (None, None) if method == Method::Limit => GridDims::square(GridDims::MIN_SIDE)?,
                _ => return Err(CliError::Usage("--n1 and --n2 are required for this method".into())),
            };
            let opts = CheckOptions {
                margin,
                limit_tol,
                exact_tol,
                lanczos: oracle.config(seed),
            };
            let v = timed_check(method, &theta, dims, &opts)?;
            let json = crate::io::verdict_json(&v);
            emit(out.as_deref(), stdout, |w| writeln!(w, "{json}"))?;
            Ok(exit_for(v.valid))
        }
        Command::Sample {
            grid,
            n_draws,
            method,
            seed,
            box_radius,
            keep_rejected,
            threads,
            out,
        } => {
            if !(box_radius > 0.0) {
                return Err(CliError::Usage("--box must be positive".into()));
            }
            let mut cfg = SamplerConfig::new(grid.dims()?, method.into(), seed);
            cfg.bounds = SampleBox::cube(box_radius);
            cfg.keep_rejected = keep_rejected;
            let threads = resolve_threads(threads);
            let batch = sample_parallel(&cfg, Budget::Accepted(n_draws), threads)?;
            emit(out.as_deref(), stdout, |w| write_batch_csv(w, &batch))?;
            writeln!(
                stderr,
                "accepted {} of {} proposals (rate {:.6}); dd-valid among accepted: {} (ratio {:.4})",
                batch.accepted,
                batch.proposed,
                batch.acceptance_rate(),
                batch.accepted_dd,
                batch.dd_ratio()
            )?;
            Ok(0)
        }
        Command::Slice {
            phi,
            rho11,
            rho22,
            grid,
            n_draws,
            seed,
            threads,
            out,
            svg,
        } => {
            Theta::new(phi, rho11, 0.0, 0.0, rho22)?;
            let mut cfg = SamplerConfig::new(grid.dims()?, Method::Circulant, seed);
            cfg.bounds = SampleBox::slice(phi, rho11, rho22);
            let batch = sample_parallel(&cfg, Budget::Proposed(n_draws), resolve_threads(threads))?;
            emit(out.as_deref(), stdout, |w| write_batch_csv(w, &batch))?;
            if let Some(p) = svg {
                emit(Some(&p), stdout, |w| w.write_all(svg::slice_scatter(&batch).as_bytes()))?;
            }
            writeln!(
                stderr,
                "slice (phi={phi}, rho11={rho11}, rho22={rho22}): {} valid of {} proposals, {} diagonally dominant",
                batch.accepted, batch.proposed, batch.accepted_dd
            )?;
            Ok(0)
        }
        Command::Study {
            grids,
            n_thetas,
            seed,
            limit_tol,
            oracle,
            threads,
            out,
            fit_out,
            svg,
        } => {
            let grids = parse_grids(&grids)?;
            if n_thetas == 0 {
                return Err(CliError::Usage("-N must be at least 1".into()));
            }
            let largest = *grids.iter().max_by_key(|d| d.n()).expect("nonempty");
            let thetas = select_study_thetas(n_thetas, seed, largest.doubled(), limit_tol)?;
            let report = sweep_parallel(&thetas, &grids, &oracle.config(seed), limit_tol, resolve_threads(threads))?;
            let mut fits = Vec::new();
            for k in 0..thetas.len() {
                for field in [Field::Eps, Field::Delta] {
                    match fit_loglog(report.for_theta(k), field) {
                        Ok(f) => fits.push((k, field, f)),
                        Err(e) => writeln!(stderr, "theta {k}: no {} fit: {e}", field.name())?,
                    }
                }
            }
            emit(Some(&out), stdout, |w| write_study_csv(w, &report.records))?;
            emit(Some(&fit_out), stdout, |w| write_fit_csv(w, &fits))?;
            if let Some(p) = svg {
                let chart = svg::loglog_chart(&report.records, |r| r.delta, "log10(delta)");
                emit(Some(&p), stdout, |w| w.write_all(chart.as_bytes()))?;
            }
            for s in &report.skips {
                writeln!(stderr, "skipped theta {} at {}: {}", s.theta_idx, s.dims, s.error)?;
            }
            let mut slopes: Vec<f64> = fits.iter().filter(|f| f.1 == Field::Delta).map(|f| f.2.slope).collect();
            slopes.sort_by(f64::total_cmp);
            let min_r2 = fits.iter().filter(|f| f.1 == Field::Delta).map(|f| f.2.r_squared).fold(f64::INFINITY, f64::min);
            writeln!(
                stderr,
                "delta slope median {:.4} (quartiles {:.4} / {:.4}), min R^2 {:.5}, {} records, {} skipped",
                quantile(&slopes, 0.5),
                quantile(&slopes, 0.25),
                quantile(&slopes, 0.75),
                min_r2,
                report.records.len(),
                report.skips.len()
            )?;
            Ok(0)
        }
        Command::Bench {
            grids,
            n_valid,
            n_invalid,
            reps,
            seed,
            oracle,
            out,
        } => {
            let grids = parse_grids(&grids)?;
            let cfg = BenchConfig {
                n_valid,
                n_invalid,
                seed,
                reps,
                lanczos: oracle.config(seed),
            };
            let rows = bench_membership(&grids, &cfg)?;
            emit(out.as_deref(), stdout, |w| write_bench_csv(w, &rows))?;
            for r in rows.iter().filter(|r| r.method == crate::bench::Path::Baseline) {
                writeln!(stderr, "{} {}: baseline/fast median ratio {:.1}", r.dims, r.case.name(), r.ratio)?;
            }
            Ok(0)
        }
        Command::Spectrum { grid, theta, out } => {
            let rows = spectrum_rows(&theta.theta()?, grid.dims()?);
            emit(out.as_deref(), stdout, |w| write_spectrum_csv(w, &rows))?;
            Ok(0)
        }
        Command::Matrix {
            grid,
            theta,
            which,
            tau1,
            tau2,
            out,
        } => {
            let (theta, dims) = (theta.theta()?, grid.dims()?);
            let m = match which {
                MatrixKind::Scaled => build_precision(&theta, Tau::new(tau1, tau2)?, dims)?,
                kind => {
                    let b = build_bundle(&theta, dims)?;
                    match kind {
                        MatrixKind::Q => b.q,
                        MatrixKind::QTilde => b.q_tilde,
                        _ => b.delta_q,
                    }
                }
            };
            emit(out.as_deref(), stdout, |w| write_matrix_market(w, &m))?;
            Ok(0)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    64
                }
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main_exit_code() -> i32 {
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = run_with(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    code
}
