//! SVD helpers shared by the orthogonal-constraint updates and the embedding.

use nalgebra::{DMatrix, DVector, SVD};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Singular values below `RANK_RTOL * sigma_max` are treated as zero.
pub const RANK_RTOL: f64 = 1e-12;

const SVD_MAX_ITERS: usize = 10_000;

/// Thin SVD `M = U diag(s) V^T` with `r = min(p, q)` factors.
///
/// Singular values are sorted in descending order. Each right singular vector
/// is signed so its largest-magnitude entry is positive (ties go to the lowest
/// index), and its left partner is flipped with it. Directions belonging to
/// numerically zero singular values are replaced by a deterministic
/// completion to full orthonormal bases.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
    /// Number of singular values above the rank threshold.
    pub rank: usize,
}

pub fn thin_svd(m: &DMatrix<f64>) -> Result<ThinSvd> {
    let (p, q) = m.shape();
    let r = p.min(q);
    if r == 0 {
        return Err(Error::Shape(format!("cannot factor a {p}x{q} matrix")));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("SVD input".into()));
    }
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or_else(|| Error::Svd(format!("{p}x{q} matrix")))?;
    let u_full = svd.u.expect("requested U");
    let v_full = svd.v_t.expect("requested V^T").transpose();
    let s_full = svd.singular_values;

    let sigma_max = s_full.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = RANK_RTOL * sigma_max;
    let rank = if sigma_max > 0.0 {
        s_full.iter().filter(|&&s| s > cutoff).count()
    } else {
        0
    };

    let mut u = DMatrix::zeros(p, rank);
    let mut v = DMatrix::zeros(q, rank);
    let mut s = DVector::zeros(r);
    for i in 0..rank {
        let mut ui = u_full.column(i).into_owned();
        let mut vi = v_full.column(i).into_owned();
        if dominant_entry_sign(vi.as_slice()) < 0.0 {
            ui.neg_mut();
            vi.neg_mut();
        }
        u.set_column(i, &ui);
        v.set_column(i, &vi);
        s[i] = s_full[i];
    }
    let u = complete_orthonormal(u, r);
    let v = complete_orthonormal(v, r);
    Ok(ThinSvd {
        u,
        singular_values: s,
        v,
        rank,
    })
}

fn dominant_entry_sign(x: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    for &e in x {
        // Strict comparison keeps the lowest index on ties.
        if e.abs() > best.abs() {
            best = e;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Extends the orthonormal columns of `basis` to `target` orthonormal columns
/// by Gram-Schmidt over the standard basis vectors, in index order.
pub fn complete_orthonormal(basis: DMatrix<f64>, target: usize) -> DMatrix<f64> {
    let p = basis.nrows();
    assert!(
        target <= p,
        "cannot fit {target} orthonormal columns in R^{p}"
    );
    let mut cols: Vec<DVector<f64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while cols.len() < target && e < p {
        let mut cand = DVector::zeros(p);
        cand[e] = 1.0;
        e += 1;
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dot(&cand);
                cand.axpy(-proj, c, 1.0);
            }
        }
        let norm = cand.norm();
        if norm > 1e-6 {
            cols.push(cand / norm);
        }
    }
    debug_assert_eq!(cols.len(), target);
    DMatrix::from_columns(&cols)
}

/// Maximizer of `Tr(X^T M)` over `X` with the shape of `M` and orthonormal
/// columns (tall `M`) or rows (wide `M`): the polar factor `U V^T`.
pub fn polar_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = thin_svd(m)?;
    Ok(&svd.u * svd.v.transpose())
}

/// Seeded matrix with orthonormal columns (`rows >= cols`), drawn from the
/// Haar measure via QR of a Gaussian matrix.
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(rows >= cols);
    let g = DMatrix::from_fn(rows, rows, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..rows {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    q.columns(0, cols).into_owned()
}
