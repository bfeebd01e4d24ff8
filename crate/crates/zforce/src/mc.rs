//! Monte Carlo experiment driver.
//!
//! Runs the greedy algorithms over freshly sampled random regular graphs
//! and aggregates forcing-set sizes, optionally keeping scaled traces for
//! comparison against the fluid-limit solution. Sample `i` of a run with
//! base seed `s` always uses seed `s + i`, so reports are deterministic for
//! any thread count and any recorded sample can be replayed in isolation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::RunStatus;
use crate::graph::{sample_simple, SampleStats};
use crate::greedy::{
    degree_greedy, smart_degree_greedy, trace_to_scaled_series, GreedyOptions, GreedyRun,
    ScaledSeries, SmartPolicy,
};
use crate::ode::{run_plain, run_smart_d3, AlgoKind, PhasePortrait, SolverConfig};
use crate::rng::derive_seed;

/// Sub-seed streams of one sample's seed.
const GRAPH_STREAM: u64 = 1;
const ALGO_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    pub algo: AlgoKind,
    pub base_seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
    pub policy: SmartPolicy,
    /// Keep scaled traces for sample indices below this count.
    pub trace_samples: usize,
    /// Attach the fluid-limit bound for `(d, algo)` to the report.
    pub predict: bool,
    /// Rejection budget per graph; `None` uses the degree-dependent default.
    pub max_attempts: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(n: usize, d: usize, samples: usize, algo: AlgoKind, base_seed: u64) -> Self {
        ExperimentConfig {
            n,
            d,
            samples,
            algo,
            base_seed,
            threads: 0,
            policy: SmartPolicy::Uniform,
            trace_samples: 0,
            predict: false,
            max_attempts: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("an experiment needs at least one sample"));
        }
        if self.d == 0 || self.n == 0 {
            return Err(Error::invalid("n and d must be positive"));
        }
        if self.n * self.d % 2 != 0 {
            return Err(Error::invalid(format!(
                "no d-regular graph with d*n odd (d={}, n={})",
                self.d, self.n
            )));
        }
        if self.d >= self.n {
            return Err(Error::invalid(format!(
                "simple graphs need d < n (d={}, n={})",
                self.d, self.n
            )));
        }
        Ok(())
    }
}

/// One sample's outcome. Everything except `runtime_ms` is a deterministic
/// function of `(n, d, algo, policy, seed)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub seed: u64,
    pub b_size: usize,
    pub b_frac: f64,
    pub status: RunStatus,
    pub multi_component: bool,
    pub graph_attempts: usize,
    pub runtime_ms: f64,
}

/// Samples the graph for sample `index` and runs the configured greedy on
/// it, returning the full run with its certificate.
///
/// Restarts are enabled, so disconnected graphs complete with one restart
/// per extra component instead of stalling.
pub fn run_sample_full(
    cfg: &ExperimentConfig,
    index: usize,
) -> Result<(GreedyRun, SampleStats)> {
    let seed = cfg.base_seed.wrapping_add(index as u64);
    let (g, stats) = sample_simple(cfg.n, cfg.d, derive_seed(seed, GRAPH_STREAM), cfg.max_attempts)?;
    let opts = GreedyOptions {
        restart_components: true,
        policy: cfg.policy,
        record_trace: index < cfg.trace_samples,
    };
    let algo_seed = derive_seed(seed, ALGO_STREAM);
    let run = match cfg.algo {
        AlgoKind::Plain => degree_greedy(&g, algo_seed, &opts)?,
        AlgoKind::Smart => smart_degree_greedy(&g, algo_seed, &opts)?,
    };
    Ok((run, stats))
}

/// Runs sample `index` of `cfg` and condenses it to a record.
pub fn run_sample(
    cfg: &ExperimentConfig,
    index: usize,
) -> Result<(SampleRecord, Option<ScaledSeries>)> {
    let started = Instant::now();
    let (run, stats) = run_sample_full(cfg, index)?;
    let record = SampleRecord {
        index,
        seed: cfg.base_seed.wrapping_add(index as u64),
        b_size: run.b_size(),
        b_frac: run.b_frac(),
        status: run.status(),
        multi_component: run.multi_component,
        graph_attempts: stats.attempts,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok((record, run.trace.as_ref().map(trace_to_scaled_series)))
}

/// Aggregated experiment outcome. `traces` holds the scaled series of the
/// leading samples when requested; it is omitted from serialized summaries
/// (trace grids go to their own files).
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<SampleRecord>,
    /// Samples whose graph generation exhausted its budget.
    pub failures: usize,
    pub mean_b_frac: f64,
    pub stddev_b_frac: f64,
    /// Fluid-limit bound for this `(d, algo)` when available and requested.
    pub prediction: Option<f64>,
    #[serde(skip_serializing)]
    pub traces: Vec<(usize, ScaledSeries)>,
}

fn mean_and_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the whole experiment. Deterministic given the base seed: work is
/// distributed by sample index and merged back in index order, so the
/// thread count never changes the records.
pub fn mc_run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let work = |index: usize| run_sample(cfg, index);
    let outcomes: Vec<Result<(SampleRecord, Option<ScaledSeries>)>> = if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::numerical(format!("thread pool: {e}")))?;
        pool.install(|| (0..cfg.samples).into_par_iter().map(work).collect())
    } else {
        (0..cfg.samples).into_par_iter().map(work).collect()
    };

    let mut records = Vec::with_capacity(cfg.samples);
    let mut traces = Vec::new();
    let mut failures = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok((record, series)) => {
                if let Some(s) = series {
                    traces.push((record.index, s));
                }
                records.push(record);
            }
            Err(e) if e.is_precondition() => return Err(e),
            Err(_) => failures += 1,
        }
    }
    if 2 * failures > cfg.samples {
        return Err(Error::numerical(format!(
            "{failures} of {} samples failed graph generation; aborting",
            cfg.samples
        )));
    }
    records.sort_unstable_by_key(|r| r.index);
    traces.sort_unstable_by_key(|&(i, _)| i);

    let fracs: Vec<f64> = records.iter().map(|r| r.b_frac).collect();
    let (mean_b_frac, stddev_b_frac) = mean_and_stddev(&fracs);
    let prediction = if cfg.predict {
        match (cfg.algo, cfg.d) {
            (AlgoKind::Plain, d) if d >= 3 => {
                Some(run_plain(d, &SolverConfig::default())?.upper_bound)
            }
            (AlgoKind::Smart, 3) => Some(run_smart_d3(&SolverConfig::default())?.upper_bound),
            _ => None,
        }
    } else {
        None
    };

    Ok(ExperimentReport {
        config: *cfg,
        records,
        failures,
        mean_b_frac,
        stddev_b_frac,
        prediction,
        traces,
    })
}

fn portrait_type_totals(portrait: &PhasePortrait, y: Vec<f64>) -> Vec<f64> {
    match portrait.algo {
        AlgoKind::Plain => y,
        AlgoKind::Smart => (0..3).map(|i| y[i] + y[i + 3]).collect(),
    }
}

/// Sup-distance per type between an empirical scaled trace and the
/// fluid-limit solution, over trace points with `x` in `[x_lo, x_hi]`.
pub fn compare_trajectory_range(
    series: &ScaledSeries,
    portrait: &PhasePortrait,
    x_lo: f64,
    x_hi: f64,
) -> Result<Vec<f64>> {
    if series.d != portrait.d {
        return Err(Error::invalid(format!(
            "trace has d={}, solution has d={}",
            series.d, portrait.d
        )));
    }
    let mut sup = vec![0.0f64; series.d];
    for (row, &x) in series.xs.iter().enumerate() {
        if x < x_lo || x > x_hi {
            continue;
        }
        let (y, _) = portrait.eval(x);
        let y = portrait_type_totals(portrait, y);
        for (s, (&emp, &ode)) in sup.iter_mut().zip(series.ys[row].iter().zip(&y)) {
            *s = s.max((emp - ode).abs());
        }
    }
    Ok(sup)
}

/// Sup-distance per type over the whole trace.
pub fn compare_trajectory(series: &ScaledSeries, portrait: &PhasePortrait) -> Result<Vec<f64>> {
    compare_trajectory_range(series, portrait, f64::NEG_INFINITY, f64::INFINITY)
}
