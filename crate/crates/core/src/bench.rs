//! Benchmark workloads and reporting.
//!
//! Two workloads: one seeded random LP solved repeatedly, and the Van der Pol
//! refined-tube computation. Each run does one untimed warmup and then `N`
//! timed repetitions of the identical workload. Generation and serialization
//! stay outside the timed region.
//!
//! Latency mode pins the library's batch layer to one worker. Throughput mode
//! solves a batch of distinct problems per sample on the global pool and
//! reports problems per second on top of the per-sample times.

use std::cell::Cell;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lp_core::{GeneralLP, LpError};
use crate::par;
use crate::reach::{integrate_embedding, ReachError, Scenario};
use crate::simplex::{linprog_with, solve_batch, SolverConfig};

thread_local! {
    static GENERATED: Cell<usize> = const { Cell::new(0) };
    static SERIALIZED: Cell<usize> = const { Cell::new(0) };
}

/// Per-thread counts of generated problems and serialized reports.
pub fn counters() -> (usize, usize) {
    (GENERATED.with(Cell::get), SERIALIZED.with(Cell::get))
}

/// Random LP with `n` variables, `x ≥ 0`, and `m_ub + 1` inequality rows.
///
/// `A_ub` entries are uniform on `[−1, 1]` and `b_ub = A_ub x₀ + s` with
/// `x₀, s` uniform on `[0, 1]`, so `x₀` is feasible. The last row
/// `1ᵀx ≤ 2n` bounds the feasible set. `c` is uniform on `[−1, 1]`.
pub fn gen_random_lp(n: usize, m_ub: usize, seed: u64) -> GeneralLP {
    assert!(n >= 1 && m_ub >= 1, "gen_random_lp needs n, m_ub >= 1");
    GENERATED.with(|g| g.set(g.get() + 1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Array2::from_shape_fn((m_ub, n), |_| rng.gen_range(-1.0..=1.0));
    let x0 = Array1::from_shape_fn(n, |_| rng.gen_range(0.0..=1.0));
    let s = Array1::from_shape_fn(m_ub, |_| rng.gen_range(0.0..=1.0));
    let b = a.dot(&x0) + s;
    let c = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..=1.0));

    let mut a_ub = Array2::ones((m_ub + 1, n));
    a_ub.slice_mut(ndarray::s![..m_ub, ..]).assign(&a);
    let mut b_ub = Array1::from_elem(m_ub + 1, 2.0 * n as f64);
    b_ub.slice_mut(ndarray::s![..m_ub]).assign(&b);
    GeneralLP::new(c).with_ub(a_ub, b_ub)
}

pub trait Clock {
    fn now_ns(&mut self) -> u64;
}

/// Monotonic wall clock.
pub struct WallClock(Instant);

impl Default for WallClock {
    fn default() -> Self {
        Self(Instant::now())
    }
}

impl Clock for WallClock {
    fn now_ns(&mut self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timings {
    pub warmup_ns: u64,
    pub samples_ns: Vec<u64>,
}

/// One warmup call, kept out of the statistics, then `n` timed calls of
/// `run`. The clock is read right before and right after every call. Outputs
/// are returned, not dropped, so their destruction is not timed either.
pub fn measure<C: Clock, R>(clock: &mut C, n: usize, mut run: impl FnMut() -> R) -> (Timings, Vec<R>) {
    let mut once = |clock: &mut C| {
        let t0 = clock.now_ns();
        let out = std::hint::black_box(run());
        let t1 = clock.now_ns();
        (t1.saturating_sub(t0), out)
    };
    let (warmup_ns, warm) = once(clock);
    drop(warm);
    let mut samples_ns = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    for _ in 0..n {
        let (dt, out) = once(clock);
        samples_ns.push(dt);
        outputs.push(out);
    }
    (Timings { warmup_ns, samples_ns }, outputs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    /// One problem per sample, one worker.
    Latency,
    /// `batch` distinct problems per sample on the global pool.
    Throughput { batch: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub name: String,
    pub mode: BenchMode,
    pub threads: usize,
    pub sample_size: usize,
    pub mean_seconds: f64,
    /// Sample standard deviation, 0 for a single sample.
    pub std_seconds: f64,
    pub median_seconds: f64,
    pub min_seconds: f64,
    pub max_seconds: f64,
    pub warmup_seconds: f64,
    pub samples_ns: Vec<u64>,
    /// Problems solved per second, throughput mode only.
    #[serde(default)]
    pub throughput_per_second: Option<f64>,
    /// Successful solves over all timed repetitions (LP bench).
    #[serde(default)]
    pub successes: Option<usize>,
    /// `Σ (y_hi − y_lo)` over the state coordinates at `t_f` (reach bench).
    #[serde(default)]
    pub bound_size: Option<f64>,
    /// Product of the state-coordinate widths at `t_f` (reach bench).
    #[serde(default)]
    pub bound_area: Option<f64>,
}

impl BenchReport {
    pub fn from_timings(name: impl Into<String>, mode: BenchMode, threads: usize, t: &Timings) -> Self {
        assert!(!t.samples_ns.is_empty(), "a report needs at least one sample");
        let secs: Vec<f64> = t.samples_ns.iter().map(|&ns| ns as f64 * 1e-9).collect();
        let n = secs.len() as f64;
        let mean = secs.iter().sum::<f64>() / n;
        let std = if secs.len() > 1 {
            (secs.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = secs.clone();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
        let throughput = match mode {
            BenchMode::Throughput { batch } => Some(batch as f64 / mean),
            BenchMode::Latency => None,
        };
        Self {
            name: name.into(),
            mode,
            threads,
            sample_size: secs.len(),
            mean_seconds: mean,
            std_seconds: std,
            median_seconds: median,
            min_seconds: sorted[0],
            max_seconds: sorted[sorted.len() - 1],
            warmup_seconds: t.warmup_ns as f64 * 1e-9,
            samples_ns: t.samples_ns.clone(),
            throughput_per_second: throughput,
            successes: None,
            bound_size: None,
            bound_area: None,
        }
    }

    pub fn to_json(&self) -> String {
        SERIALIZED.with(|s| s.set(s.get() + 1));
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Column header for [`Self::table_row`].
    pub fn table_header(&self) -> String {
        let mut h = "| Method | jit (sec) | Time (sec) |".to_string();
        if self.bound_size.is_some() {
            h.push_str(" Bound Size |");
        }
        let cols = h.matches('|').count() - 1;
        h.push('\n');
        h.push_str(&"|---".repeat(cols));
        h.push('|');
        h
    }

    /// `Method | jit | mean ± std [| bound size]`. There is no compile step
    /// at run time, so the jit column is `-`.
    pub fn table_row(&self) -> String {
        let mut row = format!("| {} | - | {:.4e} ± {:.4e} |", self.name, self.mean_seconds, self.std_seconds);
        if let Some(b) = self.bound_size {
            row.push_str(&format!(" {b:.4e} |"));
        }
        row
    }
}

fn threads_of(mode: BenchMode) -> Option<usize> {
    match mode {
        BenchMode::Latency => Some(1),
        BenchMode::Throughput { .. } => None,
    }
}

/// Solves `gen_random_lp(n, m_ub, seed)` `samples` times. In throughput mode
/// each sample solves `batch` problems with seeds `seed, seed + 1, …`.
pub fn run_lp_bench(n: usize, m_ub: usize, samples: usize, seed: u64, mode: BenchMode) -> Result<BenchReport, LpError> {
    run_lp_bench_with(&mut WallClock::default(), n, m_ub, samples, seed, mode)
}

pub fn run_lp_bench_with<C: Clock + Send>(
    clock: &mut C,
    n: usize,
    m_ub: usize,
    samples: usize,
    seed: u64,
    mode: BenchMode,
) -> Result<BenchReport, LpError> {
    assert!(samples >= 1, "need at least one sample");
    let cfg = SolverConfig::default();
    par::with_threads(threads_of(mode), || {
        let threads = par::workers();
        match mode {
            BenchMode::Latency => {
                let p = gen_random_lp(n, m_ub, seed);
                let (t, outs) = measure(clock, samples, || linprog_with(&p, &cfg));
                let ok = outs.into_iter().collect::<Result<Vec<_>, _>>()?;
                let mut r = BenchReport::from_timings(format!("random_lp n={n} m_ub={m_ub}"), mode, threads, &t);
                r.successes = Some(ok.iter().filter(|o| o.status.success).count());
                Ok(r)
            }
            BenchMode::Throughput { batch } => {
                let ps: Vec<GeneralLP> = (0..batch as u64).map(|k| gen_random_lp(n, m_ub, seed + k)).collect();
                let (t, outs) = measure(clock, samples, || solve_batch(&ps, &cfg));
                let ok = outs.into_iter().collect::<Result<Vec<_>, _>>()?;
                let mut r =
                    BenchReport::from_timings(format!("random_lp n={n} m_ub={m_ub} batch={batch}"), mode, threads, &t);
                r.successes = Some(ok.iter().flatten().filter(|o| o.status.success).count());
                Ok(r)
            }
        }
    })
}

/// Van der Pol refined tube over `[0, t_f]` with step `dt`, `samples` times.
/// Throughput mode lets the refinement LPs of each step spread over the
/// global pool; `batch` is ignored.
pub fn run_reach_bench(mu: f64, t_f: f64, dt: f64, samples: usize, mode: BenchMode) -> Result<BenchReport, ReachError> {
    run_reach_bench_with(&mut WallClock::default(), mu, t_f, dt, samples, mode)
}

pub fn run_reach_bench_with<C: Clock + Send>(
    clock: &mut C,
    mu: f64,
    t_f: f64,
    dt: f64,
    samples: usize,
    mode: BenchMode,
) -> Result<BenchReport, ReachError> {
    assert!(samples >= 1, "need at least one sample");
    let sc = Scenario::vanderpol(mu, t_f, dt);
    let sys = sc.lifted_system()?;
    let s0 = sc.initial_state()?;
    let n = sys.state_dim();
    par::with_threads(threads_of(mode), || {
        let threads = par::workers();
        let (t, outs) = measure(clock, samples, || integrate_embedding(&sys, &s0, &sc.u_ff, dt, t_f));
        let trajs = outs.into_iter().collect::<Result<Vec<_>, _>>()?;
        let last = trajs[0].last();
        let widths: Vec<f64> = (0..n).map(|i| last.y_hi[i] - last.y_lo[i]).collect();
        if let Some(k) = trajs.iter().position(|tr| tr.last() != last) {
            return Err(ReachError::InvalidConfig(format!("repetition {k} produced a different tube")));
        }
        let mode_name = match mode {
            BenchMode::Latency => BenchMode::Latency,
            BenchMode::Throughput { .. } => BenchMode::Throughput { batch: 1 },
        };
        let mut r = BenchReport::from_timings(format!("vanderpol mu={mu} t_f={t_f}"), mode_name, threads, &t);
        r.bound_size = Some(widths.iter().sum());
        r.bound_area = Some(widths.iter().product());
        Ok(r)
    })
}
