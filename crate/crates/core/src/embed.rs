//! Spectral embedding of the consensus and k-means on the embedded samples.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::state::ModelState;

pub const KMEANS_MAX_ITERS: usize = 300;

/// One row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub points: DMatrix<f64>,
    pub k: usize,
}

/// The first `k` sample-side (right) singular vectors of `f` (`m x n`).
pub fn embed_samples(f: &DMatrix<f64>, k: usize) -> Result<Embedding> {
    let m = f.nrows();
    if k == 0 || k > m {
        return Err(Error::Config(format!(
            "cannot embed into {k} of {m} dimensions"
        )));
    }
    let svd = thin_svd(f)?;
    Ok(Embedding {
        points: svd.v.columns(0, k).into_owned(),
        k,
    })
}

fn normalize_rows(points: &mut DMatrix<f64>) {
    for mut row in points.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
}

/// Outcome of the best k-means restart.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub labels: Vec<usize>,
    /// `k x dim`, one center per row.
    pub centers: DMatrix<f64>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
    /// Inertia after every assignment step.
    pub history: Vec<f64>,
    pub restart: usize,
}

/// Lloyd's algorithm with k-means++ seeding on the rows of `points`.
///
/// Restart `r` is seeded with `seed + r`; the run with the lowest inertia
/// wins, ties going to the lower restart index.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64, restarts: usize) -> Result<KMeansRun> {
    let n = points.nrows();
    if k == 0 || n < k {
        return Err(Error::Config(format!("k-means with k = {k} on {n} points")));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    // Column per point keeps distance loops contiguous.
    let cols = points.transpose();
    let runs: Vec<KMeansRun> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| lloyd(&cols, k, seed.wrapping_add(r as u64), r))
        .collect();
    Ok(runs
        .into_iter()
        .reduce(|best, run| {
            if run.inertia < best.inertia {
                run
            } else {
                best
            }
        })
        .expect("at least one restart"))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_plus_plus(cols: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (dim, n) = cols.shape();
    let mut centers = DMatrix::zeros(dim, k);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    centers.set_column(0, &cols.column(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|j| sq_dist(cols.column(j).as_slice(), cols.column(first).as_slice()))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (j, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc >= target {
                    pick = Some(j);
                    break;
                }
            }
            // Rounding can leave `target` just above the final sum.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // Every point coincides with a center already.
            (0..n).find(|&j| !chosen[j]).unwrap_or(0)
        };
        chosen[pick] = true;
        centers.set_column(c, &cols.column(pick));
        for (j, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(
                cols.column(j).as_slice(),
                cols.column(pick).as_slice(),
            ));
        }
    }
    centers
}

/// Nearest center of every point and the resulting inertia.
fn assign(
    cols: &DMatrix<f64>,
    centers: &DMatrix<f64>,
    labels: &mut [usize],
    dists: &mut [f64],
) -> f64 {
    let k = centers.ncols();
    for (j, point) in cols.column_iter().enumerate() {
        let mut best = (0, f64::INFINITY);
        for c in 0..k {
            let d = sq_dist(point.as_slice(), centers.column(c).as_slice());
            if d < best.1 {
                best = (c, d);
            }
        }
        labels[j] = best.0;
        dists[j] = best.1;
    }
    dists.iter().sum()
}

fn lloyd(cols: &DMatrix<f64>, k: usize, seed: u64, restart: usize) -> KMeansRun {
    let (dim, n) = cols.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_plus_plus(cols, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut next = vec![0; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();

    for _ in 0..KMEANS_MAX_ITERS {
        let mut inertia = assign(cols, &centers, &mut next, &mut dists);
        // Give each empty cluster the point farthest from its center.
        let mut counts = vec![0usize; k];
        for &l in &next {
            counts[l] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&j| counts[next[j]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            if let Some(j) = far {
                counts[next[j]] -= 1;
                counts[c] = 1;
                next[j] = c;
                inertia -= dists[j];
                dists[j] = 0.0;
                centers.set_column(c, &cols.column(j));
            }
        }
        history.push(inertia);
        if next == labels {
            break;
        }
        labels.copy_from_slice(&next);

        let mut sums = DMatrix::zeros(dim, k);
        for (j, &l) in labels.iter().enumerate() {
            let mut col = sums.column_mut(l);
            col += cols.column(j);
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let mean: DVector<f64> = sums.column(c) / count as f64;
                centers.set_column(c, &mean);
            }
        }
    }
    let inertia = *history.last().unwrap_or(&0.0);
    KMeansRun {
        labels,
        centers: centers.transpose(),
        inertia,
        history,
        restart,
    }
}

/// Spectral embedding of the solver's consensus.
///
/// Every singular value of a row-orthonormal consensus equals one, so its
/// singular vectors are only determined up to rotation. When the state still
/// carries the factorization its consensus was built from, that factor (which
/// is a valid SVD of the consensus, ordered by the spectrum of the consensus
/// target) provides the embedding; otherwise the consensus is factored anew.
pub fn embed_state(state: &ModelState, k: usize) -> Result<Embedding> {
    match &state.consensus_basis {
        Some(basis) if basis.nrows() == state.n_samples() && k <= basis.ncols() && k > 0 => {
            Ok(Embedding {
                points: basis.columns(0, k).into_owned(),
                k,
            })
        }
        _ => embed_samples(&state.consensus, k),
    }
}

/// Discrete labels from a solved state: embedding followed by k-means.
pub fn cluster(state: &ModelState, config: &SolverConfig) -> Result<Vec<usize>> {
    let mut embedding = embed_state(state, config.k)?;
    if config.normalize_embedding {
        normalize_rows(&mut embedding.points);
    }
    Ok(kmeans(
        &embedding.points,
        config.k,
        config.seed,
        config.kmeans_restarts,
    )?
    .labels)
}
