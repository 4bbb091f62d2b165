//! Repeated solve + cluster + evaluate runs and their serialized results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use simvc_core::ingest::{generate_mask, load_dataset, read_mask, DatasetManifest};
use simvc_core::{
    cluster, evaluate, solve, IterationRecord, MultiViewDataset, PresenceMask, SolverConfig,
};

use crate::error::{CliError, Result};
use crate::output::{write_atomic, write_json};

/// Alignment trade-offs swept by `--grid`.
pub const GRID_LAMBDA: [f64; 5] = [1e-4, 1e-2, 1.0, 1e2, 1e4];
/// Regularization weights swept by `--grid`.
pub const GRID_MU: [f64; 6] = [0.0, 1e-4, 1e-2, 1.0, 1e2, 1e4];
/// Anchor counts swept by `--grid`.
pub const GRID_ANCHORS: [AnchorCount; 3] = [
    AnchorCount::PerCluster(1),
    AnchorCount::PerCluster(2),
    AnchorCount::PerCluster(5),
];

/// Anchor count, either absolute or a multiple of the cluster count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorCount {
    PerCluster(usize),
    Exact(usize),
}

impl AnchorCount {
    pub fn resolve(self, k: usize) -> usize {
        match self {
            AnchorCount::PerCluster(f) => f * k,
            AnchorCount::Exact(m) => m,
        }
    }
}

impl FromStr for AnchorCount {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let bad = || format!("expected k, 2k, 5k (any multiple of k) or an integer, got {s:?}");
        if let Some(factor) = s.strip_suffix('k') {
            if factor.is_empty() {
                return Ok(AnchorCount::PerCluster(1));
            }
            let f: usize = factor.parse().map_err(|_| bad())?;
            if f == 0 {
                return Err(bad());
            }
            return Ok(AnchorCount::PerCluster(f));
        }
        match s.parse::<usize>() {
            Ok(m) if m > 0 => Ok(AnchorCount::Exact(m)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for AnchorCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnchorCount::PerCluster(1) => write!(f, "k"),
            AnchorCount::PerCluster(n) => write!(f, "{n}k"),
            AnchorCount::Exact(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum MaskSource {
    File(PathBuf),
    Ratio(f64),
}

#[derive(Debug, Clone)]
pub struct ExperimentArgs {
    pub manifest: PathBuf,
    pub mask: MaskSource,
    pub anchors: AnchorCount,
    pub lambda: f64,
    pub mu: f64,
    pub seed: u64,
    pub repeats: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub align: bool,
    pub learn_anchors: bool,
    pub kmeans_restarts: usize,
    /// Draw a fresh mask (seed + repeat index) for every repeat.
    pub remask: bool,
    /// Run repeats and intra-solve work on the rayon pool.
    pub parallel: bool,
    pub grid: bool,
}

impl ExperimentArgs {
    pub fn new(manifest: impl Into<PathBuf>, mask: MaskSource) -> Self {
        Self {
            manifest: manifest.into(),
            mask,
            anchors: AnchorCount::PerCluster(2),
            lambda: 1.0,
            mu: 1e-2,
            seed: 0,
            repeats: 10,
            max_iters: 50,
            tol: 1e-6,
            align: true,
            learn_anchors: true,
            kmeans_restarts: 10,
            remask: false,
            parallel: true,
            grid: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub dataset: String,
    pub n: usize,
    pub views: usize,
    pub dims: Vec<usize>,
    pub k: usize,
    pub anchors: String,
    pub m: usize,
    pub lambda: f64,
    pub mu: f64,
    pub seed: u64,
    pub repeats: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub align: bool,
    pub learn_anchors: bool,
    pub kmeans_restarts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<PathBuf>,
    pub remask: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population standard deviation, so a single repeat has `std = 0`.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub acc: MeanStd,
    pub nmi: MeanStd,
    pub purity: MeanStd,
    pub fscore: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatOutcome {
    pub seed: u64,
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub fscore: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskStats {
    /// Achieved fraction of missing (view, sample) cells, averaged over masks.
    pub ratio: f64,
    /// Observed samples per view (first mask when masks are redrawn).
    pub observed_per_view: Vec<usize>,
    pub missing_cells: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub load_ms: f64,
    pub mask_ms: f64,
    pub solve_ms: Vec<f64>,
    pub cluster_ms: Vec<f64>,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ConfigEcho,
    pub metrics: MetricSummary,
    pub repeats: Vec<RepeatOutcome>,
    pub traces: Vec<Vec<IterationRecord>>,
    pub mask_stats: MaskStats,
    /// Wall-clock measurements; the only non-reproducible part of a result.
    pub timing: Timing,
}

impl ExperimentResult {
    pub fn summary_line(&self) -> String {
        let m = &self.metrics;
        format!(
            "{} m={} lambda={} mu={} repeats={}: ACC {:.2}±{:.2} NMI {:.2}±{:.2} Purity {:.2}±{:.2} Fscore {:.2}±{:.2}",
            self.config.dataset,
            self.config.m,
            self.config.lambda,
            self.config.mu,
            self.config.repeats,
            100.0 * m.acc.mean,
            100.0 * m.acc.std,
            100.0 * m.nmi.mean,
            100.0 * m.nmi.std,
            100.0 * m.purity.mean,
            100.0 * m.purity.std,
            100.0 * m.fscore.mean,
            100.0 * m.fscore.std,
        )
    }

    /// Convergence traces as CSV, one row per (repeat, iteration).
    pub fn trace_csv(&self) -> String {
        let mut out =
            String::from("repeat,iter,objective,term_reconstruction,term_alignment,term_regularization,wall_time_ms\n");
        for (r, trace) in self.traces.iter().enumerate() {
            for rec in trace {
                writeln!(
                    out,
                    "{r},{},{},{},{},{},{}",
                    rec.iter,
                    rec.objective,
                    rec.term_reconstruction,
                    rec.term_alignment,
                    rec.term_regularization,
                    rec.wall_time_ms
                )
                .expect("write to string");
            }
        }
        out
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// One (lambda, mu, anchors) setting.
#[derive(Debug, Clone, Copy)]
struct Cell {
    lambda: f64,
    mu: f64,
    anchors: AnchorCount,
}

fn cells(args: &ExperimentArgs) -> Vec<Cell> {
    if !args.grid {
        return vec![Cell {
            lambda: args.lambda,
            mu: args.mu,
            anchors: args.anchors,
        }];
    }
    let mut out = Vec::new();
    for anchors in GRID_ANCHORS {
        for lambda in GRID_LAMBDA {
            for mu in GRID_MU {
                out.push(Cell {
                    lambda,
                    mu,
                    anchors,
                });
            }
        }
    }
    out
}

fn masks_for(
    args: &ExperimentArgs,
    data: &MultiViewDataset,
    delimiter: char,
) -> Result<Vec<PresenceMask>> {
    let (n, views) = (data.n_samples(), data.n_views());
    match &args.mask {
        MaskSource::File(path) => {
            let mask = read_mask(path, delimiter)?;
            if mask.n_samples() != n || mask.n_views() != views {
                return Err(CliError::Config(format!(
                    "{}: mask is {} samples x {} views, dataset is {n} x {views}",
                    path.display(),
                    mask.n_samples(),
                    mask.n_views()
                )));
            }
            Ok(vec![mask])
        }
        MaskSource::Ratio(ratio) if args.remask => (0..args.repeats)
            .map(|r| {
                Ok(generate_mask(
                    n,
                    views,
                    *ratio,
                    args.seed.wrapping_add(r as u64),
                )?)
            })
            .collect(),
        MaskSource::Ratio(ratio) => Ok(vec![generate_mask(n, views, *ratio, args.seed)?]),
    }
}

/// Runs every configured cell. Repeat `r` uses seed `seed + r`.
pub fn run_experiment(args: &ExperimentArgs) -> Result<Vec<ExperimentResult>> {
    if args.repeats == 0 {
        return Err(CliError::Config("--repeats must be at least 1".into()));
    }
    let t_load = Instant::now();
    let manifest = DatasetManifest::read(&args.manifest)?;
    let (data, _mapping) = load_dataset(&manifest)?;
    let load_ms = ms_since(t_load);
    let truth = data
        .labels()
        .ok_or_else(|| {
            CliError::Config(format!(
                "{}: manifest has no labels_path",
                args.manifest.display()
            ))
        })?
        .to_vec();
    let k = data.n_classes().unwrap_or(0);

    let t_mask = Instant::now();
    let masks = masks_for(args, &data, manifest.delimiter_char()?)?;
    let mask_ms = ms_since(t_mask);
    let mask_stats = MaskStats {
        ratio: masks.iter().map(|m| m.missing_ratio()).sum::<f64>() / masks.len() as f64,
        observed_per_view: (0..data.n_views())
            .map(|v| masks[0].observed_count(v))
            .collect(),
        missing_cells: masks[0].missing_cells(),
    };

    cells(args)
        .into_iter()
        .map(|cell| {
            let t_total = Instant::now();
            let mut config = SolverConfig::new(cell.anchors.resolve(k), k);
            config.lambda = cell.lambda;
            config.mu = cell.mu;
            config.max_iters = args.max_iters;
            config.tol = args.tol;
            config.align_enabled = args.align;
            config.learn_anchors = args.learn_anchors;
            config.kmeans_restarts = args.kmeans_restarts;
            config.parallel = args.parallel;
            config.seed = args.seed;
            config.validate()?;

            let run_one = |r: usize| -> Result<(RepeatOutcome, Vec<IterationRecord>, f64, f64)> {
                let mut cfg = config.clone();
                cfg.seed = args.seed.wrapping_add(r as u64);
                let mask = &masks[r.min(masks.len() - 1)];
                let t_solve = Instant::now();
                let solution = solve(&data, mask, &cfg)?;
                let solve_ms = ms_since(t_solve);
                let t_cluster = Instant::now();
                let pred = cluster(&solution.state, &cfg)?;
                let cluster_ms = ms_since(t_cluster);
                let scores = evaluate(&pred, &truth)?;
                let outcome = RepeatOutcome {
                    seed: cfg.seed,
                    acc: scores.acc,
                    nmi: scores.nmi,
                    purity: scores.purity,
                    fscore: scores.fscore,
                    iterations: solution.trace.len(),
                    converged: solution.converged,
                    final_objective: solution
                        .trace
                        .last()
                        .map_or(solution.initial_objective, |t| t.objective),
                };
                Ok((outcome, solution.trace, solve_ms, cluster_ms))
            };
            let runs: Vec<_> = if args.parallel {
                (0..args.repeats)
                    .into_par_iter()
                    .map(run_one)
                    .collect::<Result<_>>()?
            } else {
                (0..args.repeats).map(run_one).collect::<Result<_>>()?
            };

            let pick = |f: fn(&RepeatOutcome) -> f64| {
                MeanStd::of(&runs.iter().map(|r| f(&r.0)).collect::<Vec<_>>())
            };
            let metrics = MetricSummary {
                acc: pick(|r| r.acc),
                nmi: pick(|r| r.nmi),
                purity: pick(|r| r.purity),
                fscore: pick(|r| r.fscore),
            };
            let timing = Timing {
                load_ms,
                mask_ms,
                solve_ms: runs.iter().map(|r| r.2).collect(),
                cluster_ms: runs.iter().map(|r| r.3).collect(),
                total_ms: ms_since(t_total),
            };
            let (repeats, traces) = runs.into_iter().map(|r| (r.0, r.1)).unzip();
            Ok(ExperimentResult {
                config: ConfigEcho {
                    dataset: data.name.clone(),
                    n: data.n_samples(),
                    views: data.n_views(),
                    dims: data.dims(),
                    k,
                    anchors: cell.anchors.to_string(),
                    m: config.m,
                    lambda: cell.lambda,
                    mu: cell.mu,
                    seed: args.seed,
                    repeats: args.repeats,
                    max_iters: args.max_iters,
                    tol: args.tol,
                    align: args.align,
                    learn_anchors: args.learn_anchors,
                    kmeans_restarts: args.kmeans_restarts,
                    ratio: match args.mask {
                        MaskSource::Ratio(r) => Some(r),
                        MaskSource::File(_) => None,
                    },
                    mask_path: match &args.mask {
                        MaskSource::File(p) => Some(p.clone()),
                        MaskSource::Ratio(_) => None,
                    },
                    remask: args.remask,
                },
                metrics,
                repeats,
                traces,
                mask_stats: mask_stats.clone(),
                timing,
            })
        })
        .collect()
}

/// Writes results to `out` (a single object, or an array for a grid) and
/// optional trace CSVs. Grid traces go to `<stem>-cell<i>.<ext>`.
pub fn write_results(
    results: &[ExperimentResult],
    grid: bool,
    out: Option<&Path>,
    trace: Option<&Path>,
) -> Result<()> {
    if let Some(out) = out {
        if grid {
            write_json(out, &results)?;
        } else {
            write_json(out, &results[0])?;
        }
    }
    if let Some(trace) = trace {
        if grid {
            for (i, r) in results.iter().enumerate() {
                write_atomic(&cell_path(trace, i), r.trace_csv().as_bytes())?;
            }
        } else {
            write_atomic(trace, results[0].trace_csv().as_bytes())?;
        }
    }
    Ok(())
}

pub fn cell_path(base: &Path, cell: usize) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-cell{cell}.{ext}"),
        None => format!("{stem}-cell{cell}"),
    };
    base.with_file_name(name)
}
