//! Command-line front end: LP files, the Van der Pol and bicycle demos, and
//! the benchmark workloads.
//!
//! Exit codes depend only on the solver status:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | parse, I/O or configuration error |
//! | 2 | infeasible |
//! | 3 | unbounded |
//! | 4 | not converged (iteration cap, nudge budget, truncated tube) |

pub mod lpfile;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use lpreach::bench::{run_lp_bench, run_reach_bench, BenchMode, BenchReport};
use lpreach::reach::{integrate_embedding, nudge, safety_check, Scenario};
use lpreach::{linprog_with, SolveStatus, SolverConfig};
use serde_json::json;

use lpfile::LpFile;
use output::{step_records, trajectory_csv, tube_svg, SolutionDoc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "lpreach", version, about = "Tableau simplex, LP-refined reachability and safety nudging")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an LP file and print (or write) the solution document.
    Solve {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pivot budget for the whole solve.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Refined reachable tube of the Van der Pol oscillator.
    Vdp {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.00628)]
        dt: f64,
        #[arg(long, default_value_t = 0.628)]
        tf: f64,
        /// Skip LP refinement (ablation).
        #[arg(long)]
        no_refine: bool,
        /// Output directory for trajectory.csv, tube.svg and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nudge a feedforward input until the tube avoids the obstacle.
    BicycleNudge {
        /// Scenario JSON; the built-in bicycle scenario when absent.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        tf: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        no_refine: bool,
        /// Output directory for the trajectory, plot, nudged input and history.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random LP benchmark.
    BenchLp {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 15)]
        m_ub: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Throughput mode: solve `--batch` problems per sample on all workers.
        #[arg(long)]
        parallel: bool,
        #[arg(long, default_value_t = 64)]
        batch: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Van der Pol refinement benchmark.
    BenchReach {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.628)]
        tf: f64,
        #[arg(long, default_value_t = 0.00628)]
        dt: f64,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Let each step's LPs use all workers.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type Failure = (i32, String);

fn error(msg: impl std::fmt::Display) -> Failure {
    (EXIT_ERROR, msg.to_string())
}

/// Exit code for a solver status.
pub fn status_code(s: &SolveStatus) -> i32 {
    if s.success {
        EXIT_OK
    } else if s.hit_iteration_cap {
        EXIT_NOT_CONVERGED
    } else if !s.feasible {
        EXIT_INFEASIBLE
    } else {
        EXIT_UNBOUNDED
    }
}

/// Runs `cli`, writing results to `stdout` and diagnostics to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Solve { path, out, max_iters } => cmd_solve(&path, out.as_deref(), max_iters, stdout),
        Command::Vdp { mu, dt, tf, no_refine, out } => cmd_vdp(mu, dt, tf, no_refine, out.as_deref(), stdout),
        Command::BicycleNudge { scenario, dt, tf, eta, max_iters, no_refine, out } => {
            let over = Overrides { dt, tf, eta, max_iters, no_refine };
            cmd_bicycle_nudge(scenario.as_deref(), &over, out.as_deref(), stdout, stderr)
        }
        Command::BenchLp { n, m_ub, samples, seed, parallel, batch, out } => {
            let mode = if parallel { BenchMode::Throughput { batch } } else { BenchMode::Latency };
            check_bench(samples, n.min(m_ub))
                .and_then(|_| run_lp_bench(n, m_ub, samples, seed, mode).map_err(error))
                .and_then(|r| emit_report(&r, out.as_deref(), stdout))
        }
        Command::BenchReach { mu, tf, dt, samples, parallel, out } => {
            let mode = if parallel { BenchMode::Throughput { batch: 1 } } else { BenchMode::Latency };
            check_bench(samples, 1)
                .and_then(|_| run_reach_bench(mu, tf, dt, samples, mode).map_err(error))
                .and_then(|r| emit_report(&r, out.as_deref(), stdout))
        }
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| error(format!("{}: {e}", path.display())))
}

fn out_dir(dir: Option<&Path>) -> Result<Option<&Path>, Failure> {
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| error(format!("{}: {e}", d.display())))?;
    }
    Ok(dir)
}

fn say(stdout: &mut dyn Write, text: &str) -> Result<(), Failure> {
    writeln!(stdout, "{text}").map_err(error)
}

pub fn cmd_solve(
    path: &Path,
    out: Option<&Path>,
    max_iters: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let text = fs::read_to_string(path).map_err(|e| error(format!("{}: {e}", path.display())))?;
    let file = LpFile::parse(&text).map_err(|e| error(format!("{}: {e}", path.display())))?;
    let problem = file.to_problem().map_err(|e| error(format!("{}: {e}", path.display())))?;
    let cfg = SolverConfig { max_iters, ..SolverConfig::default() };
    let outcome = linprog_with(&problem, &cfg).map_err(error)?;
    let doc = SolutionDoc::from_outcome(&outcome);
    match out {
        Some(p) => write_file(p, &doc.to_json())?,
        None => say(stdout, &doc.to_json())?,
    }
    Ok(status_code(&outcome.status))
}

pub fn cmd_vdp(
    mu: f64,
    dt: f64,
    tf: f64,
    no_refine: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(error("mu must be positive"));
    }
    let sc = Scenario::vanderpol(mu, tf, dt);
    let sys = sc.lifted_system().map_err(error)?.with_refinement(!no_refine);
    let s0 = sc.initial_state().map_err(error)?;
    let traj = integrate_embedding(&sys, &s0, &sc.u_ff, dt, tf).map_err(error)?;
    let n = sys.state_dim();
    let last = traj.last();
    let widths: Vec<f64> = (0..n).map(|i| last.y_hi[i] - last.y_lo[i]).collect();
    let summary = json!({
        "mu": mu,
        "dt": dt,
        "tf": tf,
        "refine": !no_refine,
        "states": traj.states.len(),
        "t_final": traj.times().last(),
        "order_violation": traj.order_violation,
        "lp_fallbacks": traj.lp_fallbacks,
        "bound_size": widths.iter().sum::<f64>(),
        "bound_area": widths.iter().product::<f64>(),
        "final_y_lo": last.y_lo,
        "final_y_hi": last.y_hi,
    });
    let summary = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Some(dir) = out_dir(out)? {
        let records = step_records(&traj, None);
        write_file(&dir.join("trajectory.csv"), &trajectory_csv(&records))?;
        write_file(&dir.join("tube.svg"), &tube_svg(&records, 0, 1, None))?;
        write_file(&dir.join("summary.json"), &summary)?;
    }
    say(stdout, &summary)?;
    Ok(if traj.order_violation.is_some() { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

/// Command-line values that replace scenario fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub tf: Option<f64>,
    pub eta: Option<f64>,
    pub max_iters: Option<usize>,
    pub no_refine: bool,
}

pub fn cmd_bicycle_nudge(
    scenario: Option<&Path>,
    over: &Overrides,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let mut sc = match scenario {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| error(format!("{}: {e}", p.display())))?;
            Scenario::from_json(&text).map_err(|e| error(format!("{}: {e}", p.display())))?
        }
        None => Scenario::bicycle(),
    };
    sc.dt = over.dt.unwrap_or(sc.dt);
    sc.horizon = over.tf.unwrap_or(sc.horizon);
    sc.eta = over.eta.unwrap_or(sc.eta);
    sc.max_outer_iters = over.max_iters.unwrap_or(sc.max_outer_iters);
    let obstacle = sc.obstacle.clone().ok_or_else(|| error("scenario has no obstacle"))?;
    let sys = sc.lifted_system().map_err(error)?.with_refinement(!over.no_refine);
    let s0 = sc.initial_state().map_err(error)?;
    let cfg = sc.nudge_config();

    let _ = writeln!(stderr, "nudging {} over {} s", sc.system.name(), cfg.horizon);
    let result = nudge(&sys, &s0, &sc.u_ff, &obstacle, &cfg).map_err(error)?;
    // recheck the returned input from scratch
    let report = safety_check(&sys, &s0, &result.u_ff, &obstacle, &cfg).map_err(error)?;
    let max_bound = report.bounds.iter().skip(1).copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "system": sc.system.name(),
        "converged": result.converged,
        "iterations": result.iterations,
        "history": result.history,
        "final_safety": report.value,
        "max_obstacle_bound": max_bound,
        "order_violation": report.trajectory.order_violation,
        "lp_fallbacks": report.trajectory.lp_fallbacks,
        "eta_final": result.eta,
        "refine": !over.no_refine,
    });
    let summary = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Some(dir) = out_dir(out)? {
        let records = step_records(&report.trajectory, Some(&report.bounds));
        let (cx, cy) = match obstacle.coords.as_slice() {
            [a, b] => (*a, *b),
            _ => (0, 1.min(sys.lifted_dim() - 1)),
        };
        write_file(&dir.join("trajectory.csv"), &trajectory_csv(&records))?;
        write_file(&dir.join("tube.svg"), &tube_svg(&records, cx, cy, Some(&obstacle)))?;
        write_file(&dir.join("u_ff.json"), &serde_json::to_string_pretty(&result.u_ff).expect("table serializes"))?;
        let history: String = std::iter::once("iteration,safety\n".to_string())
            .chain(result.history.iter().enumerate().map(|(i, v)| format!("{i},{v:?}\n")))
            .collect();
        write_file(&dir.join("history.csv"), &history)?;
        write_file(&dir.join("summary.json"), &summary)?;
    }
    say(stdout, &summary)?;
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn check_bench(samples: usize, dims: usize) -> Result<(), Failure> {
    if samples == 0 || dims == 0 {
        return Err(error("samples and problem dimensions must be at least 1"));
    }
    Ok(())
}

fn emit_report(r: &BenchReport, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let json = r.to_json();
    if let Some(p) = out {
        write_file(p, &json)?;
    }
    say(stdout, &r.table_header())?;
    say(stdout, &r.table_row())?;
    let mut extra = format!(
        "N = {}, median {:.4e} s, warmup {:.4e} s, threads {}",
        r.sample_size, r.median_seconds, r.warmup_seconds, r.threads
    );
    if let Some(t) = r.throughput_per_second {
        extra.push_str(&format!(", {t:.1} problems/s"));
    }
    if let Some(s) = r.successes {
        extra.push_str(&format!(", {s} successful solves"));
    }
    if let Some(a) = r.bound_area {
        extra.push_str(&format!(", bound area {a:.4e}"));
    }
    say(stdout, &extra)?;
    Ok(EXIT_OK)
}
