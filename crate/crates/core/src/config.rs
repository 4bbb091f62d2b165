use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ORTHONORMALITY_TOL: f64 = 1e-8;
pub const STOCHASTIC_SUM_TOL: f64 = 1e-9;
pub const NONNEGATIVITY_TOL: f64 = 1e-12;
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Feasibility tolerances used by the constraint checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-abs deviation of `A^T A`, `P^T P` and `F F^T` from identity.
    pub orthonormality: f64,
    /// Max deviation of each anchor-graph column sum from one.
    pub stochastic_sum: f64,
    /// Most negative entry allowed in an anchor graph.
    pub nonnegativity: f64,
    /// Max deviation of the view weights' sum from one.
    pub weight_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orthonormality: ORTHONORMALITY_TOL,
            stochastic_sum: STOCHASTIC_SUM_TOL,
            nonnegativity: NONNEGATIVITY_TOL,
            weight_sum: WEIGHT_SUM_TOL,
        }
    }
}

/// Starting value of the alignment matrices. With alignment disabled this is
/// also the value they stay frozen at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentInit {
    #[default]
    Identity,
    /// Seeded random orthogonal matrices, one per view.
    RandomOrthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Anchors per view.
    pub m: usize,
    /// Clusters.
    pub k: usize,
    pub lambda: f64,
    pub mu: f64,
    pub max_iters: usize,
    /// Stop when the relative objective change drops below this.
    pub tol: f64,
    pub seed: u64,
    /// `false` freezes the alignment matrices at their initial value.
    pub align_enabled: bool,
    /// `false` keeps the k-means anchors from initialization.
    pub learn_anchors: bool,
    pub kmeans_restarts: usize,
    pub alignment_init: AlignmentInit,
    /// Row-normalize the spectral embedding before k-means.
    pub normalize_embedding: bool,
    /// Run per-view and per-column work on the rayon pool.
    pub parallel: bool,
    pub tolerances: Tolerances,
}

impl SolverConfig {
    pub fn new(m: usize, k: usize) -> Self {
        Self {
            m,
            k,
            lambda: 1.0,
            mu: 1e-2,
            max_iters: 50,
            tol: 1e-6,
            seed: 0,
            align_enabled: true,
            learn_anchors: true,
            kmeans_restarts: 10,
            alignment_init: AlignmentInit::Identity,
            normalize_embedding: false,
            parallel: true,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!(
                "k = {} but at least 2 clusters are required",
                self.k
            )));
        }
        if self.m < self.k {
            return Err(Error::Config(format!(
                "m = {} anchors is fewer than k = {} clusters",
                self.m, self.k
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::Config(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config(format!(
                "lambda = {} must be >= 0",
                self.lambda
            )));
        }
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::Config(format!("mu = {} must be >= 0", self.mu)));
        }
        if self.kmeans_restarts == 0 {
            return Err(Error::Config("kmeans_restarts must be at least 1".into()));
        }
        Ok(())
    }
}
