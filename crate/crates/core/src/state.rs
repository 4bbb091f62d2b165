use nalgebra::DMatrix;

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// All solver variables.
///
/// * `anchors[v]`: `d_v x m`, orthonormal columns.
/// * `graphs[v]`: `m x n`, nonnegative with unit column sums.
/// * `alignments[v]`: `m x m`, orthogonal.
/// * `consensus`: `m x n`, orthonormal rows.
/// * `weights`: one per view, nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub anchors: Vec<DMatrix<f64>>,
    pub graphs: Vec<DMatrix<f64>>,
    pub alignments: Vec<DMatrix<f64>>,
    pub consensus: DMatrix<f64>,
    pub weights: Vec<f64>,
    /// Sample-side singular vectors (`n x m`, descending singular value) of
    /// the matrix whose polar factor produced `consensus`. Together with the
    /// matching left factor this is an SVD of `consensus`.
    pub consensus_basis: Option<DMatrix<f64>>,
}

impl ModelState {
    pub fn n_views(&self) -> usize {
        self.graphs.len()
    }

    pub fn n_anchors(&self) -> usize {
        self.consensus.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.consensus.ncols()
    }

    /// Checks that every variable has a shape consistent with `m`, `n` and
    /// the given view dimensions.
    pub fn check_shapes(&self, dims: &[usize]) -> Result<()> {
        let (m, n) = self.consensus.shape();
        let views = dims.len();
        if self.anchors.len() != views
            || self.graphs.len() != views
            || self.alignments.len() != views
            || self.weights.len() != views
        {
            return Err(Error::Shape(format!(
                "state holds {}/{}/{}/{} anchors/graphs/alignments/weights for {views} views",
                self.anchors.len(),
                self.graphs.len(),
                self.alignments.len(),
                self.weights.len()
            )));
        }
        for (v, &d) in dims.iter().enumerate() {
            if self.anchors[v].shape() != (d, m) {
                return Err(Error::Shape(format!(
                    "anchors[{v}] is {:?}, expected ({d}, {m})",
                    self.anchors[v].shape()
                )));
            }
            if self.graphs[v].shape() != (m, n) {
                return Err(Error::Shape(format!(
                    "graphs[{v}] is {:?}, expected ({m}, {n})",
                    self.graphs[v].shape()
                )));
            }
            if self.alignments[v].shape() != (m, m) {
                return Err(Error::Shape(format!(
                    "alignments[{v}] is {:?}, expected ({m}, {m})",
                    self.alignments[v].shape()
                )));
            }
        }
        Ok(())
    }

    /// Checks every feasibility constraint of the model.
    pub fn check_invariants(&self, tol: &Tolerances) -> Result<()> {
        for (v, a) in self.anchors.iter().enumerate() {
            check_orthonormal_columns(a, tol.orthonormality)
                .map_err(|e| Error::Invariant(format!("anchors[{v}]: {e}")))?;
        }
        for (v, p) in self.alignments.iter().enumerate() {
            check_orthonormal_columns(p, tol.orthonormality)
                .map_err(|e| Error::Invariant(format!("alignments[{v}]: {e}")))?;
        }
        check_orthonormal_rows(&self.consensus, tol.orthonormality)
            .map_err(|e| Error::Invariant(format!("consensus: {e}")))?;
        for (v, z) in self.graphs.iter().enumerate() {
            check_column_stochastic(z, tol.nonnegativity, tol.stochastic_sum)
                .map_err(|e| Error::Invariant(format!("graphs[{v}]: {e}")))?;
        }
        check_weights(&self.weights, tol.weight_sum)
            .map_err(|e| Error::Invariant(format!("weights: {e}")))
    }
}

type Check = std::result::Result<(), String>;

fn max_abs_identity_gap(gram: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for ((i, j), &g) in gram
        .iter()
        .enumerate()
        .map(|(idx, g)| ((idx % gram.nrows(), idx / gram.nrows()), g))
    {
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((g - target).abs());
    }
    worst
}

/// `||M^T M - I||_max <= tol`.
pub fn check_orthonormal_columns(m: &DMatrix<f64>, tol: f64) -> Check {
    let gap = max_abs_identity_gap(&m.tr_mul(m));
    if gap <= tol {
        Ok(())
    } else {
        Err(format!("columns not orthonormal (max gap {gap:.3e})"))
    }
}

/// `||M M^T - I||_max <= tol`.
pub fn check_orthonormal_rows(m: &DMatrix<f64>, tol: f64) -> Check {
    let gap = max_abs_identity_gap(&(m * m.transpose()));
    if gap <= tol {
        Ok(())
    } else {
        Err(format!("rows not orthonormal (max gap {gap:.3e})"))
    }
}

pub fn check_column_stochastic(z: &DMatrix<f64>, neg_tol: f64, sum_tol: f64) -> Check {
    for (j, col) in z.column_iter().enumerate() {
        if let Some(x) = col.iter().find(|&&x| x < -neg_tol) {
            return Err(format!("column {j} has negative entry {x:.3e}"));
        }
        let s: f64 = col.iter().sum();
        if (s - 1.0).abs() > sum_tol {
            return Err(format!("column {j} sums to {s}"));
        }
    }
    Ok(())
}

pub fn check_weights(w: &[f64], sum_tol: f64) -> Check {
    if let Some(x) = w.iter().find(|&&x| x.is_nan() || x < 0.0) {
        return Err(format!("negative or NaN weight {x}"));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > sum_tol {
        return Err(format!("weights sum to {s}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feasible() -> ModelState {
        ModelState {
            anchors: vec![DMatrix::identity(3, 2)],
            graphs: vec![DMatrix::from_row_slice(
                2,
                3,
                &[1.0, 0.5, 0.0, 0.0, 0.5, 1.0],
            )],
            alignments: vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])],
            consensus: DMatrix::identity(2, 3),
            weights: vec![1.0],
            consensus_basis: None,
        }
    }

    #[test]
    fn feasible_state_passes() {
        let s = feasible();
        s.check_shapes(&[3]).unwrap();
        s.check_invariants(&Tolerances::default()).unwrap();
    }

    #[test]
    fn each_violation_is_reported() {
        let tol = Tolerances::default();
        let mut s = feasible();
        s.anchors[0][(0, 0)] = 1.1;
        assert!(s.check_invariants(&tol).is_err());

        let mut s = feasible();
        s.graphs[0][(0, 1)] = -0.1;
        s.graphs[0][(1, 1)] = 1.1;
        assert!(s.check_invariants(&tol).is_err());

        let mut s = feasible();
        s.graphs[0][(0, 1)] = 0.6;
        assert!(s.check_invariants(&tol).is_err());

        let mut s = feasible();
        s.alignments[0] *= 2.0;
        assert!(s.check_invariants(&tol).is_err());

        let mut s = feasible();
        s.consensus[(0, 2)] = 0.1;
        assert!(s.check_invariants(&tol).is_err());

        let mut s = feasible();
        s.weights = vec![0.9];
        assert!(s.check_invariants(&tol).is_err());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let s = feasible();
        assert!(s.check_shapes(&[4]).is_err());
        assert!(s.check_shapes(&[3, 3]).is_err());
    }
}
