use serde::{Deserialize, Serialize};

use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::mask::PresenceMask;
use crate::state::ModelState;

/// The three weighted terms of the clustering objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    /// `sum_v gamma_v^2 ||(X_v - A_v Z_v) . R_v||_F^2`
    pub reconstruction: f64,
    /// `lambda sum_v ||P_v Z_v - F||_F^2`
    pub alignment: f64,
    /// `mu sum_v ||Z_v||_F^2`
    pub regularization: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.reconstruction + self.alignment + self.regularization
    }
}

pub(crate) fn check_inputs(
    state: &ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
) -> Result<()> {
    if mask.n_views() != data.n_views() || mask.n_samples() != data.n_samples() {
        return Err(Error::Shape(format!(
            "mask is {}x{}, dataset has {} views of {} samples",
            mask.n_views(),
            mask.n_samples(),
            data.n_views(),
            data.n_samples()
        )));
    }
    if state.n_samples() != data.n_samples() {
        return Err(Error::Shape(format!(
            "state covers {} samples, dataset has {}",
            state.n_samples(),
            data.n_samples()
        )));
    }
    state.check_shapes(&data.dims())
}

/// Squared reconstruction error of view `v` over its observed samples only.
pub(crate) fn view_residual(
    state: &ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
    v: usize,
) -> f64 {
    let x = data.view(v).as_inner();
    let recon = &state.anchors[v] * &state.graphs[v];
    mask.row(v)
        .iter()
        .enumerate()
        .filter(|(_, &observed)| observed)
        .map(|(j, _)| (x.column(j) - recon.column(j)).norm_squared())
        .sum()
}

/// Per-view masked residuals `tau_v = ||(X_v - A_v Z_v) . R_v||_F^2`.
pub fn masked_residuals(
    state: &ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
) -> Result<Vec<f64>> {
    check_inputs(state, data, mask)?;
    let taus: Vec<f64> = (0..data.n_views())
        .map(|v| view_residual(state, data, mask, v))
        .collect();
    if let Some(v) = taus.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFinite(format!("residual of view {v}")));
    }
    Ok(taus)
}

pub fn objective_terms(
    state: &ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
    lambda: f64,
    mu: f64,
) -> Result<ObjectiveTerms> {
    let taus = masked_residuals(state, data, mask)?;
    let reconstruction = taus
        .iter()
        .zip(&state.weights)
        .map(|(tau, g)| g * g * tau)
        .sum();
    let alignment = lambda
        * state
            .graphs
            .iter()
            .zip(&state.alignments)
            .map(|(z, p)| (p * z - &state.consensus).norm_squared())
            .sum::<f64>();
    let regularization = mu * state.graphs.iter().map(|z| z.norm_squared()).sum::<f64>();
    let terms = ObjectiveTerms {
        reconstruction,
        alignment,
        regularization,
    };
    if !terms.total().is_finite() {
        return Err(Error::NonFinite("objective".into()));
    }
    Ok(terms)
}

/// Value of the full clustering objective at `state`.
pub fn objective(
    state: &ModelState,
    data: &MultiViewDataset,
    mask: &PresenceMask,
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    objective_terms(state, data, mask, lambda, mu).map(|t| t.total())
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::matrix::DenseMatrix;

    fn perfect_fit() -> (ModelState, MultiViewDataset) {
        let a = DMatrix::identity(3, 2);
        let z = DMatrix::from_row_slice(2, 3, &[1.0, 0.25, 0.0, 0.0, 0.75, 1.0]);
        let x = &a * &z;
        let state = ModelState {
            anchors: vec![a],
            graphs: vec![z.clone()],
            alignments: vec![DMatrix::identity(2, 2)],
            consensus: z,
            weights: vec![1.0],
            consensus_basis: None,
        };
        let data = MultiViewDataset::new("fit", vec![DenseMatrix::new(x).unwrap()], None).unwrap();
        (state, data)
    }

    #[test]
    fn perfect_fit_has_zero_objective() {
        let (state, data) = perfect_fit();
        let mask = PresenceMask::complete(1, 3).unwrap();
        assert_eq!(objective(&state, &data, &mask, 1.0, 0.0).unwrap(), 0.0);
        // Only the regularizer remains.
        let reg = objective(&state, &data, &mask, 1.0, 2.0).unwrap();
        let z_norm: f64 = state.graphs[0].norm_squared();
        assert!((reg - 2.0 * z_norm).abs() < 1e-15);
    }

    #[test]
    fn missing_column_is_excluded_from_residual() {
        let (mut state, data) = perfect_fit();
        state.graphs[0][(0, 1)] = 0.5;
        state.graphs[0][(1, 1)] = 0.5;
        state.graphs[0][(0, 2)] = 0.5;
        state.graphs[0][(1, 2)] = 0.5;
        let mask =
            PresenceMask::new(vec![vec![true, false, true], vec![true, true, true]]).unwrap();
        let two_views = MultiViewDataset::new(
            "fit",
            vec![data.view(0).clone(), data.view(0).clone()],
            None,
        )
        .unwrap();
        state.anchors.push(state.anchors[0].clone());
        state.graphs.push(state.graphs[0].clone());
        state.alignments.push(state.alignments[0].clone());
        state.weights = vec![0.5, 0.5];

        let masked = objective(&state, &two_views, &mask, 0.0, 0.0).unwrap();
        // Dense residual of view 0 with column 1 zeroed, plus all of view 1.
        let x = data.view(0).as_inner();
        let mut r0 = x - &state.anchors[0] * &state.graphs[0];
        r0.column_mut(1).fill(0.0);
        let r1 = x - &state.anchors[1] * &state.graphs[1];
        let dense = 0.25 * r0.norm_squared() + 0.25 * r1.norm_squared();
        assert!((masked - dense).abs() < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let (state, data) = perfect_fit();
        let mask = PresenceMask::complete(1, 4).unwrap();
        assert!(matches!(
            objective(&state, &data, &mask, 1.0, 0.0),
            Err(Error::Shape(_))
        ));
        let mask = PresenceMask::complete(2, 3).unwrap();
        assert!(objective(&state, &data, &mask, 1.0, 0.0).is_err());
    }
}
