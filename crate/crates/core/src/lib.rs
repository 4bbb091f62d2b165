//! Scalable incomplete multi-view clustering with anchor-graph structure
//! alignment.
//!
//! Every view `v` is summarized by `m` orthonormal anchors `A_v` and an
//! anchor graph `Z_v` whose columns are convex weights over those anchors.
//! Orthogonal alignment matrices `P_v` map each view's anchor space onto a
//! shared consensus `F`, whose spectral embedding is clustered by k-means.
//! Missing samples contribute nothing to reconstruction and have their graph
//! columns imputed through the alignment term.

pub mod config;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod mask;
pub mod matrix;
pub mod metrics;
pub mod objective;
pub mod solver;
pub mod state;

pub use config::{AlignmentInit, SolverConfig, Tolerances};
pub use dataset::MultiViewDataset;
pub use embed::{cluster, embed_samples, kmeans, Embedding, KMeansRun};
pub use error::{Error, Result};
pub use mask::PresenceMask;
pub use matrix::DenseMatrix;
pub use metrics::{accuracy, evaluate, fscore, hungarian, nmi, purity, Scores};
pub use objective::{objective, objective_terms, ObjectiveTerms};
pub use solver::{solve, IterationRecord, Solution};
pub use state::ModelState;
