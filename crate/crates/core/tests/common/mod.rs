//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use simvc_core::{DenseMatrix, ModelState, MultiViewDataset, PresenceMask};

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed `rows x cols` matrix with orthonormal columns.
pub fn haar_columns(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian(rows, cols, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..cols {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    q
}

pub fn random_stochastic(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut z = DMatrix::from_fn(m, n, |_, _| -rng.random::<f64>().max(1e-300).ln());
    for mut col in z.column_iter_mut() {
        let s = col.sum();
        col /= s;
    }
    z
}

pub fn random_simplex(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    random_stochastic(len, 1, rng).as_slice().to_vec()
}

/// Mask with roughly `missing` of the cells removed; every sample keeps a
/// view and every view keeps a sample.
pub fn random_mask(views: usize, n: usize, missing: f64, rng: &mut ChaCha8Rng) -> PresenceMask {
    let mut rows: Vec<Vec<bool>> = (0..views)
        .map(|_| (0..n).map(|_| rng.random::<f64>() >= missing).collect())
        .collect();
    for j in 0..n {
        if !rows.iter().any(|r| r[j]) {
            rows[rng.random_range(0..views)][j] = true;
        }
    }
    for row in rows.iter_mut() {
        if !row.iter().any(|&b| b) {
            row[rng.random_range(0..n)] = true;
        }
    }
    PresenceMask::new(rows).unwrap()
}

pub struct Instance {
    pub data: MultiViewDataset,
    pub mask: PresenceMask,
    pub state: ModelState,
    pub lambda: f64,
    pub mu: f64,
}

/// A random feasible problem: Gaussian data, a random mask and a random
/// point of the constraint set.
pub fn random_instance(
    views: usize,
    n: usize,
    dims: &[usize],
    m: usize,
    missing: f64,
    rng: &mut ChaCha8Rng,
) -> Instance {
    let data = MultiViewDataset::new(
        "random",
        dims.iter()
            .map(|&d| DenseMatrix::new(gaussian(d, n, rng)).unwrap())
            .collect(),
        None,
    )
    .unwrap();
    let mask = random_mask(views, n, missing, rng);
    let state = ModelState {
        anchors: dims.iter().map(|&d| haar_columns(d, m, rng)).collect(),
        graphs: (0..views).map(|_| random_stochastic(m, n, rng)).collect(),
        alignments: (0..views).map(|_| haar_columns(m, m, rng)).collect(),
        consensus: haar_columns(n, m, rng).transpose(),
        weights: random_simplex(views, rng),
        consensus_basis: None,
    };
    let lambda = 10f64.powf(rng.random_range(-2.0..2.0));
    let mu = if rng.random_bool(0.2) {
        0.0
    } else {
        10f64.powf(rng.random_range(-3.0..1.0))
    };
    Instance {
        data,
        mask,
        state,
        lambda,
        mu,
    }
}

/// Objective evaluated with explicit column-selection matrices `H_v`
/// (`n x n_v`) instead of elementwise masking.
pub fn objective_with_selection(inst: &Instance) -> f64 {
    let s = &inst.state;
    let n = inst.data.n_samples();
    let mut total = 0.0;
    for v in 0..inst.data.n_views() {
        let observed = inst.mask.observed_indices(v);
        let mut h = DMatrix::zeros(n, observed.len());
        for (c, &j) in observed.iter().enumerate() {
            h[(j, c)] = 1.0;
        }
        let x = inst.data.view(v).as_inner();
        let residual = x * &h - &s.anchors[v] * &s.graphs[v] * &h;
        let g = s.weights[v];
        total += g * g * residual.norm_squared();
        total += inst.lambda * (&s.alignments[v] * &s.graphs[v] - &s.consensus).norm_squared();
        total += inst.mu * s.graphs[v].norm_squared();
    }
    total
}

/// `argmin 0.5 z^T H z - b^T z` over the probability simplex, by solving the
/// equality-constrained problem on every support and keeping the best
/// nonnegative candidate. `H` must be positive definite.
pub fn simplex_qp(h: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let m = b.len();
    let value = |z: &[f64]| {
        let mut q = 0.0;
        for i in 0..m {
            for j in 0..m {
                q += 0.5 * z[i] * h[(i, j)] * z[j];
            }
            q -= b[i] * z[i];
        }
        q
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for support in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| support & (1 << i) != 0).collect();
        let s = idx.len();
        let mut kkt = DMatrix::zeros(s + 1, s + 1);
        let mut rhs = nalgebra::DVector::zeros(s + 1);
        for (a, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                kkt[(a, c)] = h[(i, j)];
            }
            kkt[(a, s)] = 1.0;
            kkt[(s, a)] = 1.0;
            rhs[a] = b[i];
        }
        rhs[s] = 1.0;
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        if (0..s).any(|a| sol[a] < -1e-13) {
            continue;
        }
        let mut z = vec![0.0; m];
        for (a, &i) in idx.iter().enumerate() {
            z[i] = sol[a].max(0.0);
        }
        let val = value(&z);
        if best.as_ref().is_none_or(|(bv, _)| val < *bv) {
            best = Some((val, z));
        }
    }
    best.expect("some support is feasible").1
}

/// Euclidean projection onto the simplex via [`simplex_qp`] with `H = I`.
pub fn simplex_oracle(f: &[f64]) -> Vec<f64> {
    simplex_qp(&DMatrix::identity(f.len(), f.len()), f)
}

/// All `2^m m!` signed permutation matrices.
pub fn signed_permutations(m: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for perm in permutations(m) {
        for signs in 0u32..(1 << m) {
            let mut p = DMatrix::zeros(m, m);
            for (i, &j) in perm.iter().enumerate() {
                p[(i, j)] = if signs & (1 << i) != 0 { -1.0 } else { 1.0 };
            }
            out.push(p);
        }
    }
    out
}

pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Best matched fraction over all relabelings of `pred`, by enumeration.
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred.iter().chain(truth).max().map_or(0, |&x| x + 1);
    permutations(k)
        .iter()
        .map(|perm| {
            pred.iter()
                .zip(truth)
                .filter(|(p, t)| perm[**p] == **t)
                .count()
        })
        .max()
        .unwrap_or(0) as f64
        / pred.len() as f64
}

/// Pairwise F1 by enumerating every sample pair.
pub fn brute_force_fscore(pred: &[usize], truth: &[usize]) -> f64 {
    let (mut both, mut same_pred, mut same_truth) = (0.0, 0.0, 0.0);
    for i in 0..pred.len() {
        for j in i + 1..pred.len() {
            let p = pred[i] == pred[j];
            let t = truth[i] == truth[j];
            same_pred += p as u8 as f64;
            same_truth += t as u8 as f64;
            both += (p && t) as u8 as f64;
        }
    }
    let precision = if same_pred > 0.0 {
        both / same_pred
    } else {
        0.0
    };
    let recall = if same_truth > 0.0 {
        both / same_truth
    } else {
        0.0
    };
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}
