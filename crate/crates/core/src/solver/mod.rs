//! Alternating minimization of the anchor-graph clustering objective.
//!
//! Each iteration updates anchors, consensus, anchor graphs, alignments and
//! view weights in that order. Every block update is an exact minimizer, so
//! the objective never increases.

mod simplex;
mod updates;

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use simplex::{project_in_place, simplex_project, simplex_shift};
pub use updates::{
    update_alignment, update_anchors, update_consensus, update_graphs, update_weights,
    weights_from_residuals, ConsensusUpdate, WEIGHT_EPS,
};

use crate::config::{AlignmentInit, SolverConfig};
use crate::dataset::MultiViewDataset;
use crate::embed::kmeans;
use crate::error::{Error, Result};
use crate::linalg::random_orthonormal;
use crate::mask::PresenceMask;
use crate::objective::{objective_terms, ObjectiveTerms};
use crate::state::ModelState;

/// Objective value after one full pass over the five blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub iter: usize,
    pub objective: f64,
    pub term_reconstruction: f64,
    pub term_alignment: f64,
    pub term_regularization: f64,
    /// Excluded from serialized traces so results stay reproducible.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl IterationRecord {
    fn new(iter: usize, terms: ObjectiveTerms, wall_time_ms: f64) -> Self {
        Self {
            iter,
            objective: terms.total(),
            term_reconstruction: terms.reconstruction,
            term_alignment: terms.alignment,
            term_regularization: terms.regularization,
            wall_time_ms,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub state: ModelState,
    pub trace: Vec<IterationRecord>,
    /// Objective of the initial state, before the first iteration.
    pub initial_objective: f64,
    pub converged: bool,
}

/// Checks everything about `(data, mask, config)` that would make the
/// problem ill-posed.
pub fn validate_problem(
    data: &MultiViewDataset,
    mask: &PresenceMask,
    config: &SolverConfig,
) -> Result<()> {
    config.validate()?;
    if mask.n_views() != data.n_views() || mask.n_samples() != data.n_samples() {
        return Err(Error::Config(format!(
            "mask is {}x{} but the dataset has {} views of {} samples",
            mask.n_views(),
            mask.n_samples(),
            data.n_views(),
            data.n_samples()
        )));
    }
    let min_dim = data.dims().into_iter().min().unwrap_or(0);
    if config.m > min_dim || config.m > data.n_samples() {
        return Err(Error::Config(format!(
            "m = {} anchors needs m <= min view dimension ({min_dim}) and m <= n ({})",
            config.m,
            data.n_samples()
        )));
    }
    if config.lambda == 0.0 && config.mu == 0.0 && !mask.is_complete() {
        return Err(Error::Config(
            "lambda = mu = 0 leaves the anchor graphs of missing samples undetermined".into(),
        ));
    }
    if !config.learn_anchors {
        for v in 0..data.n_views() {
            if mask.observed_count(v) < config.m {
                return Err(Error::Config(format!(
                    "view {v} observes {} samples, fewer than the {} k-means anchors",
                    mask.observed_count(v),
                    config.m
                )));
            }
        }
    }
    Ok(())
}

/// Initial state: uniform anchor graphs, equal weights, alignments from
/// `config.alignment_init`, anchors from one anchor update (or k-means on the
/// observed samples when anchors are fixed) and the matching consensus.
pub fn initialize(
    data: &MultiViewDataset,
    mask: &PresenceMask,
    config: &SolverConfig,
) -> Result<ModelState> {
    let (m, n, views) = (config.m, data.n_samples(), data.n_views());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let alignments = (0..views)
        .map(|_| match config.alignment_init {
            AlignmentInit::Identity => DMatrix::identity(m, m),
            AlignmentInit::RandomOrthogonal => random_orthonormal(m, m, &mut rng),
        })
        .collect();
    let mut state = ModelState {
        anchors: data
            .dims()
            .iter()
            .map(|&d| DMatrix::identity(d, m))
            .collect(),
        graphs: vec![DMatrix::from_element(m, n, 1.0 / m as f64); views],
        alignments,
        consensus: DMatrix::identity(m, n),
        weights: vec![1.0 / views as f64; views],
        consensus_basis: None,
    };
    state.anchors = if config.learn_anchors {
        update_anchors(&state, data, mask)?
    } else {
        kmeans_anchors(data, mask, config)?
    };
    let consensus = update_consensus(&state)?;
    state.consensus = consensus.consensus;
    state.consensus_basis = Some(consensus.basis);
    Ok(state)
}

/// Orthonormalized k-means centers of each view's observed samples.
fn kmeans_anchors(
    data: &MultiViewDataset,
    mask: &PresenceMask,
    config: &SolverConfig,
) -> Result<Vec<DMatrix<f64>>> {
    (0..data.n_views())
        .map(|v| {
            let x = data.view(v).as_inner();
            let observed = mask.observed_indices(v);
            let points = DMatrix::from_fn(observed.len(), x.nrows(), |i, f| x[(f, observed[i])]);
            let run = kmeans(&points, config.m, config.seed.wrapping_add(v as u64), 1)?;
            Ok(run.centers.transpose().qr().q())
        })
        .collect()
}

/// Runs one full iteration in place.
pub fn step(
    state: &mut ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
    config: &SolverConfig,
) -> Result<()> {
    if config.learn_anchors {
        state.anchors = update_anchors(state, data, mask)?;
    }
    let consensus = update_consensus(state)?;
    state.consensus = consensus.consensus;
    state.consensus_basis = Some(consensus.basis);
    state.graphs = update_graphs(state, data, mask, config.lambda, config.mu)?;
    if config.align_enabled {
        state.alignments = update_alignment(state)?;
    }
    state.weights = update_weights(state, data, mask)?;
    Ok(())
}

/// Minimizes the objective from the default initialization.
///
/// Stops once the relative change of the objective between two consecutive
/// iterations falls below `config.tol`, or after `config.max_iters`
/// iterations. With `config.parallel == false` all work runs on one thread.
pub fn solve(
    data: &MultiViewDataset,
    mask: &PresenceMask,
    config: &SolverConfig,
) -> Result<Solution> {
    validate_problem(data, mask, config)?;
    if config.parallel {
        solve_inner(data, mask, config)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| solve_inner(data, mask, config))
    }
}

fn solve_inner(
    data: &MultiViewDataset,
    mask: &PresenceMask,
    config: &SolverConfig,
) -> Result<Solution> {
    let mut state = initialize(data, mask, config)?;
    let initial_objective = objective_terms(&state, data, mask, config.lambda, config.mu)
        .map_err(|_| Error::NumericalAbort { iteration: 0 })?
        .total();

    let mut trace = Vec::with_capacity(config.max_iters);
    let mut previous = initial_objective;
    let mut converged = false;
    for iter in 1..=config.max_iters {
        let started = Instant::now();
        step(&mut state, data, mask, config).map_err(|e| match e {
            Error::DegenerateDenominator { .. } | Error::Config(_) => e,
            _ => Error::NumericalAbort { iteration: iter },
        })?;
        let elapsed = started.elapsed().as_secs_f64() * 1e3;
        let terms = objective_terms(&state, data, mask, config.lambda, config.mu)
            .map_err(|_| Error::NumericalAbort { iteration: iter })?;
        let current = terms.total();
        trace.push(IterationRecord::new(iter, terms, elapsed));

        let scale = previous.abs().max(f64::MIN_POSITIVE);
        if (previous - current).abs() / scale < config.tol {
            converged = true;
            break;
        }
        previous = current;
    }
    Ok(Solution {
        state,
        trace,
        initial_objective,
        converged,
    })
}
