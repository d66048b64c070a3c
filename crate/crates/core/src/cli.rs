//! `cmot` command line.
//!
//! Exit codes: 0 converged (or a successful `validate`/`info`), 2 the
//! iteration budget ran out before the stopping rule fired, 1 any error
//! including usage errors. `CMOT_THREADS` caps the worker threads.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::io::{self, OutputKind, ProblemFile};
use crate::solver::{Algorithm, Solution, Solver};

#[derive(Debug, Parser)]
#[command(name = "cmot", version, about = "Constrained dynamic optimal transport solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and write frames, history and images.
    Solve {
        problem: PathBuf,
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Option<Algorithm>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value = "cmot-out")]
        out_dir: PathBuf,
        #[arg(long)]
        snapshots: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Load a problem file and report the step-size conditions.
    Validate {
        problem: PathBuf,
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Option<Algorithm>,
    },
    /// Print the header of a frame archive.
    Info { frames: PathBuf },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

/// Runs the command line `args` (program name first), writing to the
/// given streams. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve { problem, algorithm, max_iters, tol, out_dir, snapshots, quiet } => {
            let opts = SolveOptions { algorithm, max_iters, tol, out_dir, snapshots, quiet };
            solve(&problem, &opts, out)
        }
        Command::Validate { problem, algorithm } => validate(&problem, algorithm, out),
        Command::Info { frames } => info(&frames, out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main(args: Vec<String>) -> i32 {
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    run_cli(args, &mut out, &mut err)
}

struct SolveOptions {
    algorithm: Option<Algorithm>,
    max_iters: Option<usize>,
    tol: Option<f64>,
    out_dir: PathBuf,
    snapshots: Option<usize>,
    quiet: bool,
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CMOT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| format!("CMOT_THREADS must be a positive integer (got '{v}')"))?;
        if n == 0 {
            return Err("CMOT_THREADS must be a positive integer (got '0')".into());
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

fn solve(path: &Path, opts: &SolveOptions, out: &mut dyn std::io::Write) -> Result<i32, String> {
    let mut file = io::load_problem(path).map_err(|e| e.to_string())?;
    if let Some(a) = opts.algorithm {
        file.algorithm = a;
    }
    if let Some(m) = opts.max_iters {
        file.params.max_outer = m;
    }
    if let Some(t) = opts.tol {
        file.params.tol_density = t;
    }
    if let Some(n) = opts.snapshots {
        if n < 2 {
            return Err(format!("--snapshots must be at least 2 (got {n})"));
        }
        file.snapshots = n;
    }
    let solver = Solver::new(file.problem(), file.params).map_err(|e| e.to_string())?;
    let pool = thread_pool()?;
    let solution = pool.install(|| solver.run(file.algorithm)).map_err(|e| e.to_string())?;

    std::fs::create_dir_all(&opts.out_dir).map_err(|e| format!("{}: {e}", opts.out_dir.display()))?;
    write_outputs(&file, &solution, &opts.out_dir).map_err(|e| e.to_string())?;
    let summary = summary(&file, &solution);
    let meta = format!("{summary}elapsed_seconds = {:.3}\n", solution.elapsed.as_secs_f64());
    let summary_path = opts.out_dir.join("summary.txt");
    std::fs::write(&summary_path, &meta).map_err(|e| format!("{}: {e}", summary_path.display()))?;
    if !opts.quiet {
        let _ = write!(out, "{meta}");
    }
    Ok(if solution.converged { 0 } else { 2 })
}

fn write_outputs(file: &ProblemFile, solution: &Solution, dir: &Path) -> Result<(), crate::error::OutputError> {
    for kind in &file.outputs {
        match kind {
            OutputKind::Frames => io::write_frames(solution, dir.join("frames.cmot"))?,
            OutputKind::History => {
                io::write_history(&solution.history, dir.join("history.csv"))?;
                io::write_relative_history(&solution.history, dir.join("history_relative.csv"))?;
            }
            OutputKind::Images => {
                io::write_heatmaps(&solution.mu.scalar, dir, file.snapshots, &file.aux_fields())?;
            }
        }
    }
    Ok(())
}

/// Deterministic run summary (no timing).
fn summary(file: &ProblemFile, s: &Solution) -> String {
    let g = &file.grid;
    let mut t = String::new();
    let _ = writeln!(t, "algorithm = {}", s.algorithm.as_str());
    let _ = writeln!(t, "grid = {}x{}x{} ({})", g.nt, g.nx, g.ny, g.space_bc.as_str());
    let _ = writeln!(t, "converged = {}", s.converged);
    let _ = writeln!(t, "iterations = {}", s.iterations);
    let _ = writeln!(t, "energy = {:?}", s.energy);
    if let Some(r) = s.history.last() {
        let _ = writeln!(t, "density_change = {:?}", r.density_change);
        let _ = writeln!(t, "continuity_residual = {:?}", r.continuity_residual);
        let _ = writeln!(t, "mass_per_slice_max_dev = {:?}", r.mass_per_slice_max_dev);
    }
    let _ = writeln!(t, "step_sizes = {}", s.step_report.status());
    for w in &s.warnings {
        let _ = writeln!(t, "warning = {w}");
    }
    t
}

fn validate(path: &Path, algorithm: Option<Algorithm>, out: &mut dyn std::io::Write) -> Result<i32, String> {
    let file = io::load_problem(path).map_err(|e| e.to_string())?;
    let alg = algorithm.unwrap_or(file.algorithm);
    Solver::new(file.problem(), file.params).map_err(|e| e.to_string())?;
    let g = &file.grid;
    let mut t = String::new();
    let _ = writeln!(t, "grid {}x{}x{} ({}), dt={} dx={} dy={}", g.nt, g.nx, g.ny, g.space_bc.as_str(), g.dt, g.dx, g.dy);
    let _ = writeln!(t, "mass rho0={:.12e} rho1={:.12e}", file.rho0.integral(g), file.rho1.integral(g));
    let names: Vec<&str> = file.constraint.terms.iter().map(|c| c.name()).collect();
    let _ = writeln!(t, "constraint: {}", if names.is_empty() { "unconstrained".to_string() } else { names.join(", ") });
    let _ = writeln!(t, "algorithm {}: step sizes", alg.as_str());
    let _ = write!(t, "{}", file.params.step_report(alg));
    let _ = write!(out, "{t}");
    Ok(0)
}

fn info(path: &Path, out: &mut dyn std::io::Write) -> Result<i32, String> {
    let a = io::read_frames(path).map_err(|e| e.to_string())?;
    let g = &a.grid;
    let mut t = String::new();
    let _ = writeln!(t, "grid {}x{}x{} ({})", g.nt, g.nx, g.ny, g.space_bc.as_str());
    let _ = writeln!(t, "spacing dt={} dx={} dy={}", g.dt, g.dx, g.dy);
    let _ = writeln!(t, "fields {}", a.field_names.join(","));
    let _ = writeln!(t, "iterations {}", a.iterations);
    let _ = writeln!(t, "energy {:?}", a.energy);
    let _ = write!(out, "{t}");
    Ok(0)
}
