//! `zforce`: zero forcing bounds on random regular graphs from the shell.
//!
//! Each subcommand wraps one library entry point and speaks the library's
//! file formats: edge-list text for graphs, JSON for summaries and
//! certificates, JSON lines for per-sample experiment records, CSV for
//! anything tabular. Exit codes: 0 on success, 2 when the request was
//! rejected, 3 when a computation failed numerically, 64 on usage errors.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zforce::error::{Error, Result};
use zforce::forcing::closure;
use zforce::graph::{read_edge_list, sample_simple, Graph, RegularGraph};
use zforce::greedy::{degree_greedy, smart_degree_greedy, GreedyOptions, GreedyRun, SmartPolicy};
use zforce::hole::{table_csv, threshold_table};
use zforce::mc::{compare_trajectory_range, mc_run, run_sample_full, ExperimentConfig};
use zforce::ode::{run_plain, run_smart_d3, AlgoKind, PhasePortrait, SolverConfig};
use zforce::spectral::{
    edge_guarantee_threshold, find_bipartite_hole, find_bipartite_hole_sampled, friedman_lambda,
    second_eigenvalue, spectral_forcing_bound,
};

#[derive(Parser)]
#[command(name = "zforce", version, about = "Zero forcing bounds on random regular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Plain,
    Smart,
}

impl From<Algo> for AlgoKind {
    fn from(a: Algo) -> AlgoKind {
        match a {
            Algo::Plain => AlgoKind::Plain,
            Algo::Smart => AlgoKind::Smart,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    Uniform,
    PreferT1,
    PreferT2,
}

impl From<Policy> for SmartPolicy {
    fn from(p: Policy) -> SmartPolicy {
        match p {
            Policy::Uniform => SmartPolicy::Uniform,
            Policy::PreferT1 => SmartPolicy::PreferT1,
            Policy::PreferT2 => SmartPolicy::PreferT2,
        }
    }
}

#[derive(Args)]
struct McArgs {
    /// Number of vertices per sampled graph.
    #[arg(long)]
    n: usize,
    /// Degree.
    #[arg(long)]
    d: usize,
    /// Number of independent samples.
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Greedy variant to run.
    #[arg(long, value_enum, default_value_t = Algo::Plain)]
    algo: Algo,
    /// Base seed; sample i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = library default pool).
    #[arg(long, env = "ZFORCE_THREADS", default_value_t = 0)]
    threads: usize,
    /// Tie-breaking policy of the smart variant.
    #[arg(long, value_enum, default_value_t = Policy::Uniform)]
    policy: Policy,
}

impl McArgs {
    fn config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.n, self.d, self.samples, self.algo.into(), self.seed);
        cfg.threads = self.threads;
        cfg.policy = self.policy.into();
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random d-regular simple graph and write it as an edge list.
    Gen {
        /// Number of vertices.
        #[arg(long)]
        n: usize,
        /// Degree.
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rejection budget (default scales with the degree).
        #[arg(long)]
        max_attempts: Option<usize>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the forcing process from a given initial set.
    Force {
        /// Edge-list file.
        #[arg(long)]
        graph: PathBuf,
        /// Initial black vertices, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a forcing set greedily on one graph (read or freshly sampled).
    Greedy {
        /// Edge-list file; mutually exclusive with --n/--d.
        #[arg(long, conflicts_with_all = ["n", "d"])]
        graph: Option<PathBuf>,
        #[arg(long, required_unless_present = "graph")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "graph")]
        d: Option<usize>,
        #[arg(long, value_enum, default_value_t = Algo::Plain)]
        algo: Algo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Policy::Uniform)]
        policy: Policy,
        /// Write the full certificate (sequence, witnesses, forcing set) here.
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force the zero forcing number of a small graph.
    Exact {
        /// Edge-list file.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the fluid-limit phase system for one degree.
    Ode {
        /// Degree (3 or larger; the smart variant needs exactly 3).
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = Algo::Plain)]
        algo: Algo,
        /// Directory for per-phase trajectory CSVs.
        #[arg(long)]
        traj_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-moment lower bounds: threshold a and 1-2a per degree.
    LowerBound {
        /// Degrees: single value, a:b range, or comma list (e.g. 3:14).
        #[arg(long)]
        d: String,
        /// Threshold solver tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalue-based forcing bound and bipartite-hole search.
    Spectral {
        /// Edge-list file; eigenvalue and sizes are taken from the graph.
        #[arg(long, conflicts_with_all = ["n", "d"])]
        graph: Option<PathBuf>,
        #[arg(long, required_unless_present = "graph")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "graph")]
        d: Option<usize>,
        /// Eigenvalue bound to use instead of computing or assuming one.
        #[arg(long)]
        lambda: Option<f64>,
        /// Slack over 2*sqrt(d-1) when no graph or lambda is given.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Power-iteration tolerance when the eigenvalue is computed.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also search for a q:q bipartite hole in the graph.
        #[arg(long, requires = "graph")]
        q: Option<usize>,
        /// Seed for the sampled hole search on graphs past the exhaustive cap.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo: many samples, aggregate statistics, optional traces.
    Mc {
        #[command(flatten)]
        common: McArgs,
        /// Keep scaled traces for this many leading samples.
        #[arg(long, default_value_t = 0)]
        trace_samples: usize,
        /// Attach the fluid-limit bound to the summary.
        #[arg(long)]
        predict: bool,
        /// Write one JSON record per sample here.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Directory for per-sample trace CSVs.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup-distance between empirical traces and the fluid-limit solution.
    Compare {
        #[command(flatten)]
        common: McArgs,
        /// Restrict the comparison to x >= x-lo.
        #[arg(long)]
        x_lo: Option<f64>,
        /// Restrict the comparison to x <= x-hi.
        #[arg(long)]
        x_hi: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_precondition() { 2 } else { 3 })
        }
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content)?;
            Ok(())
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            let mut res = stdout.write_all(content.as_bytes());
            if res.is_ok() && !content.ends_with('\n') {
                res = stdout.write_all(b"\n");
            }
            match res {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
                other => Ok(other?),
            }
        }
    }
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::numerical(format!("serialize: {e}")))?;
    emit(out, &text)
}

fn load_graph(path: &Path) -> Result<Graph> {
    let file = fs::File::open(path)?;
    read_edge_list(BufReader::new(file))?.to_graph()
}

fn load_regular(path: &Path) -> Result<RegularGraph> {
    let file = fs::File::open(path)?;
    read_edge_list(BufReader::new(file))?.to_regular()
}

/// Parses a degree list: `5`, `3:14`, or comma-separated pieces of either.
fn parse_degrees(expr: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for token in expr.split(',') {
        let token = token.trim();
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad degree '{s}' in '{expr}'")))
        };
        match token.split_once(':') {
            Some((lo, hi)) => {
                let (lo, hi) = (parse(lo)?, parse(hi)?);
                if hi < lo {
                    return Err(Error::invalid(format!("empty degree range '{token}'")));
                }
                out.extend(lo..=hi);
            }
            None => out.push(parse(token)?),
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("no degrees given"));
    }
    Ok(out)
}

fn greedy_summary(run: &GreedyRun, algo: Algo, seed: u64) -> serde_json::Value {
    serde_json::json!({
        "n": run.n,
        "d": run.d,
        "algo": AlgoKind::from(algo),
        "seed": seed,
        "b_size": run.b_size(),
        "b_frac": run.b_frac(),
        "status": run.status(),
        "multi_component": run.multi_component,
    })
}

fn write_phase_csvs(portrait: &PhasePortrait, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for i in 0..portrait.phases.len() {
        let csv = portrait.phase_csv(i)?;
        fs::write(dir.join(format!("phase{}.csv", i + 1)), csv)?;
    }
    Ok(())
}

fn solve_portrait(d: usize, algo: Algo) -> Result<PhasePortrait> {
    let cfg = SolverConfig::default();
    match algo {
        Algo::Plain => run_plain(d, &cfg),
        Algo::Smart => {
            if d != 3 {
                return Err(Error::invalid(format!(
                    "the smart phase system is only worked out for d=3, got d={d}"
                )));
            }
            run_smart_d3(&cfg)
        }
    }
}

fn series_csv(s: &zforce::greedy::ScaledSeries) -> String {
    let mut out = String::from("x");
    for i in 0..s.d {
        out.push_str(&format!(",y{i}"));
    }
    out.push_str(",u\n");
    for (row, &x) in s.xs.iter().enumerate() {
        out.push_str(&format!("{x:.9}"));
        for v in &s.ys[row] {
            out.push_str(&format!(",{v:.9}"));
        }
        out.push_str(&format!(",{:.9}\n", s.us[row]));
    }
    out
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen {
            n,
            d,
            seed,
            max_attempts,
            out,
        } => {
            let (g, _) = sample_simple(n, d, seed, max_attempts)?;
            emit(out.as_deref(), &g.to_edge_list_string())
        }
        Command::Force { graph, set, out } => {
            let g = load_graph(&graph)?;
            let outcome = closure(&g, &set)?;
            emit_json(
                out.as_deref(),
                &serde_json::json!({
                    "n": g.n(),
                    "initial": set,
                    "forces": outcome.forces,
                    "final_black": outcome.final_black,
                    "stalled": outcome.stalled,
                }),
            )
        }
        Command::Greedy {
            graph,
            n,
            d,
            algo,
            seed,
            policy,
            record,
            out,
        } => {
            let run = match graph {
                Some(path) => {
                    let g = load_regular(&path)?;
                    let opts = GreedyOptions {
                        restart_components: true,
                        policy: policy.into(),
                        record_trace: false,
                    };
                    match algo {
                        Algo::Plain => degree_greedy(&g, seed, &opts)?,
                        Algo::Smart => smart_degree_greedy(&g, seed, &opts)?,
                    }
                }
                None => {
                    let (n, d) = (n.expect("clap enforces"), d.expect("clap enforces"));
                    let mut cfg = ExperimentConfig::new(n, d, 1, algo.into(), seed);
                    cfg.policy = policy.into();
                    run_sample_full(&cfg, 0)?.0
                }
            };
            if let Some(path) = record {
                let text = serde_json::to_string_pretty(&run.record)
                    .map_err(|e| Error::numerical(format!("serialize: {e}")))?;
                fs::write(path, text)?;
            }
            emit_json(out.as_deref(), &greedy_summary(&run, algo, seed))
        }
        Command::Exact { graph, out } => {
            let g = load_graph(&graph)?;
            let z = zforce::exact::brute_force_z(&g)?;
            let grundy = zforce::exact::brute_force_grundy(&g)?;
            emit_json(
                out.as_deref(),
                &serde_json::json!({
                    "n": g.n(),
                    "zero_forcing_number": z,
                    "grundy_domination_number": grundy,
                    "sum": z + grundy,
                }),
            )
        }
        Command::Ode {
            d,
            algo,
            traj_dir,
            out,
        } => {
            let portrait = solve_portrait(d, algo)?;
            if let Some(dir) = traj_dir {
                write_phase_csvs(&portrait, &dir)?;
            }
            emit(out.as_deref(), &portrait.summary_json())
        }
        Command::LowerBound { d, tol, out } => {
            let degrees = parse_degrees(&d)?;
            let rows = threshold_table(&degrees, tol)?;
            emit(out.as_deref(), &table_csv(&rows))
        }
        Command::Spectral {
            graph,
            n,
            d,
            lambda,
            eps,
            tol,
            q,
            seed,
            out,
        } => {
            let loaded = graph.as_deref().map(load_regular).transpose()?;
            let (n, d) = match &loaded {
                Some(g) => (g.n(), g.d()),
                None => (n.expect("clap enforces"), d.expect("clap enforces")),
            };
            let (lambda, source) = match (lambda, &loaded) {
                (Some(l), _) => (l, "user"),
                (None, Some(g)) => (second_eigenvalue(g, tol)?, "computed"),
                (None, None) => (friedman_lambda(d, eps)?, "friedman"),
            };
            let bound = spectral_forcing_bound(n as f64, d as f64, lambda)?;
            let threshold = edge_guarantee_threshold(n, d, lambda)?;
            let holes_found = match (q, &loaded) {
                (Some(q), Some(g)) => {
                    let hole = if g.n() <= 24 {
                        find_bipartite_hole(g, q)?
                    } else {
                        find_bipartite_hole_sampled(g, q, 2000, seed)?
                    };
                    Some(match hole {
                        Some((u, w)) => serde_json::json!({"found": true, "u": u, "w": w}),
                        None => serde_json::json!({"found": false}),
                    })
                }
                _ => None,
            };
            emit_json(
                out.as_deref(),
                &serde_json::json!({
                    "n": n,
                    "d": d,
                    "lambda": lambda,
                    "lambda_source": source,
                    "bound_exact": bound.exact,
                    "bound_asymptotic": bound.asymptotic,
                    "threshold": threshold,
                    "holes_found": holes_found,
                }),
            )
        }
        Command::Mc {
            common,
            trace_samples,
            predict,
            records,
            trace_dir,
            out,
        } => {
            let mut cfg = common.config();
            cfg.trace_samples = trace_samples;
            cfg.predict = predict;
            let report = mc_run(&cfg)?;
            if let Some(path) = records {
                let mut text = String::new();
                for r in &report.records {
                    text.push_str(
                        &serde_json::to_string(r)
                            .map_err(|e| Error::numerical(format!("serialize: {e}")))?,
                    );
                    text.push('\n');
                }
                fs::write(path, text)?;
            }
            if let Some(dir) = trace_dir {
                fs::create_dir_all(&dir)?;
                for (index, series) in &report.traces {
                    fs::write(dir.join(format!("trace{index}.csv")), series_csv(series))?;
                }
            }
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::numerical(format!("serialize: {e}")))?;
            emit(out.as_deref(), &text)
        }
        Command::Compare {
            common,
            x_lo,
            x_hi,
            out,
        } => {
            let mut cfg = common.config();
            cfg.trace_samples = cfg.samples;
            cfg.predict = true;
            let portrait = solve_portrait(cfg.d, common.algo)?;
            let report = mc_run(&cfg)?;
            let (lo, hi) = (x_lo.unwrap_or(f64::NEG_INFINITY), x_hi.unwrap_or(f64::INFINITY));
            let mut per_sample = Vec::new();
            let mut max_sup = vec![0.0f64; cfg.d];
            for (index, series) in &report.traces {
                let sup = compare_trajectory_range(series, &portrait, lo, hi)?;
                for (m, &s) in max_sup.iter_mut().zip(&sup) {
                    *m = m.max(s);
                }
                per_sample.push(serde_json::json!({"index": index, "sup": sup}));
            }
            emit_json(
                out.as_deref(),
                &serde_json::json!({
                    "n": cfg.n,
                    "d": cfg.d,
                    "algo": cfg.algo,
                    "samples": cfg.samples,
                    "seed": cfg.base_seed,
                    "x_lo": x_lo,
                    "x_hi": x_hi,
                    "upper_bound": portrait.upper_bound,
                    "mean_b_frac": report.mean_b_frac,
                    "per_sample": per_sample,
                    "max_sup": max_sup,
                }),
            )
        }
    }
}
