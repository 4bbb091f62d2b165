//! The five block updates. Each one minimizes the objective exactly over its
//! own block with every other block held fixed.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::simplex::project_in_place;
use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::linalg::{polar_factor, thin_svd};
use crate::mask::PresenceMask;
use crate::objective::{check_inputs, view_residual};
use crate::state::ModelState;

/// Guards the inverse residuals in the weight update.
pub const WEIGHT_EPS: f64 = 1e-12;

/// Columns per rayon task in the graph update.
const COLUMN_GRAIN: usize = 256;

fn masked_graph(z: &DMatrix<f64>, presence: &[bool]) -> DMatrix<f64> {
    let mut out = z.clone();
    for (j, &observed) in presence.iter().enumerate() {
        if !observed {
            out.column_mut(j).fill(0.0);
        }
    }
    out
}

/// Anchor update: `A_v = polar((X_v . R_v) Z_v^T)` for every view.
pub fn update_anchors(
    state: &ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
) -> Result<Vec<DMatrix<f64>>> {
    check_inputs(state, data, mask)?;
    (0..data.n_views())
        .into_par_iter()
        .map(|v| {
            // X (Z . R)^T equals (X . R) Z^T and only masks the smaller factor.
            let m =
                data.view(v).as_inner() * masked_graph(&state.graphs[v], mask.row(v)).transpose();
            polar_factor(&m)
        })
        .collect()
}

/// Result of the consensus update.
#[derive(Debug, Clone)]
pub struct ConsensusUpdate {
    /// `m x n` with orthonormal rows.
    pub consensus: DMatrix<f64>,
    /// `n x m` sample-side singular vectors of `sum_v P_v Z_v`, descending.
    pub basis: DMatrix<f64>,
}

/// Consensus update: maximizes `Tr(F Q)` with `Q = sum_v Z_v^T P_v^T` over
/// row-orthonormal `F`.
pub fn update_consensus(state: &ModelState) -> Result<ConsensusUpdate> {
    let (m, n) = state.consensus.shape();
    if m > n {
        return Err(Error::Shape(format!("{m} anchors exceed {n} samples")));
    }
    // Q^T, accumulated in view order.
    let mut target = DMatrix::zeros(m, n);
    for (p, z) in state.alignments.iter().zip(&state.graphs) {
        target.gemm(1.0, p, z, 1.0);
    }
    let svd = thin_svd(&target)?;
    Ok(ConsensusUpdate {
        consensus: &svd.u * svd.v.transpose(),
        basis: svd.v,
    })
}

/// Anchor-graph update. Column `j` of `Z_v` is the simplex projection of
///
/// `(gamma_v^2 r_j [A_v^T X_v]_j + lambda [P_v^T F]_j) / (gamma_v^2 r_j + lambda + mu)`.
///
/// For a sample missing from view `v` only the alignment term remains, so the
/// consensus imputes that column.
pub fn update_graphs(
    state: &ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
    lambda: f64,
    mu: f64,
) -> Result<Vec<DMatrix<f64>>> {
    check_inputs(state, data, mask)?;
    let (m, n) = state.consensus.shape();
    (0..data.n_views())
        .into_par_iter()
        .map(|v| {
            let gamma_sq = state.weights[v] * state.weights[v];
            let presence = mask.row(v);
            if let Some(j) = (0..n).find(|&j| {
                let r = if presence[j] { 1.0 } else { 0.0 };
                gamma_sq * r + lambda + mu <= 0.0 || gamma_sq.is_nan()
            }) {
                return Err(Error::DegenerateDenominator { view: v, sample: j });
            }
            let data_term = state.anchors[v].tr_mul(data.view(v).as_inner());
            let align_term = state.alignments[v].tr_mul(&state.consensus);
            let mut z = DMatrix::zeros(m, n);
            z.as_mut_slice()
                .par_chunks_mut(m)
                .with_min_len(COLUMN_GRAIN)
                .enumerate()
                .for_each_init(Vec::new, |scratch, (j, col)| {
                    let r = if presence[j] { 1.0 } else { 0.0 };
                    let denom = gamma_sq * r + lambda + mu;
                    for (i, out) in col.iter_mut().enumerate() {
                        *out = (gamma_sq * r * data_term[(i, j)] + lambda * align_term[(i, j)])
                            / denom;
                    }
                    project_in_place(col, scratch);
                });
            Ok(z)
        })
        .collect()
}

/// Alignment update: `P_v = polar(F Z_v^T)`.
pub fn update_alignment(state: &ModelState) -> Result<Vec<DMatrix<f64>>> {
    state
        .graphs
        .par_iter()
        .map(|z| polar_factor(&(&state.consensus * z.transpose())))
        .collect()
}

/// View weights inversely proportional to the masked residuals.
pub fn weights_from_residuals(taus: &[f64]) -> Vec<f64> {
    let inv: Vec<f64> = taus.iter().map(|t| 1.0 / (t + WEIGHT_EPS)).collect();
    let total: f64 = inv.iter().sum();
    inv.iter().map(|x| x / total).collect()
}

/// Weight update: `gamma_v = (1/tau_v) / sum_u (1/tau_u)`.
pub fn update_weights(
    state: &ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
) -> Result<Vec<f64>> {
    check_inputs(state, data, mask)?;
    let taus: Vec<f64> = (0..data.n_views())
        .into_par_iter()
        .map(|v| view_residual(state, data, mask, v))
        .collect();
    if let Some(v) = taus.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFinite(format!("residual of view {v}")));
    }
    Ok(weights_from_residuals(&taus))
}
