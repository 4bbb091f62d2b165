//! Clustering accuracy, NMI, purity and pairwise F-score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of samples per (predicted cluster, true class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `k_pred x k_true`, row-major.
    counts: Vec<usize>,
    k_pred: usize,
    k_true: usize,
    n: usize,
}

/// Maps arbitrary labels to `0..k` in order of first appearance.
pub fn recode(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let coded = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (coded, map.len())
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Labels(format!(
                "{} predicted labels vs {} true labels",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::Labels("no labels".into()));
        }
        let (pred, k_pred) = recode(pred);
        let (truth, k_true) = recode(truth);
        let mut counts = vec![0; k_pred * k_true];
        for (&p, &t) in pred.iter().zip(&truth) {
            counts[p * k_true + t] += 1;
        }
        Ok(Self {
            counts,
            k_pred,
            k_true,
            n: pred.len(),
        })
    }

    pub fn get(&self, p: usize, t: usize) -> usize {
        self.counts[p * self.k_true + t]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.k_pred, self.k_true)
    }

    fn row_sums(&self) -> Vec<usize> {
        (0..self.k_pred)
            .map(|p| (0..self.k_true).map(|t| self.get(p, t)).sum())
            .collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        (0..self.k_true)
            .map(|t| (0..self.k_pred).map(|p| self.get(p, t)).sum())
            .collect()
    }
}

/// Assignment maximizing the total weight of a square matrix given as rows.
/// Returns `assignment[row] = column`.
pub fn hungarian(weight: &[Vec<f64>]) -> Vec<usize> {
    let k = weight.len();
    if k == 0 {
        return Vec::new();
    }
    assert!(
        weight.iter().all(|r| r.len() == k),
        "weight matrix must be square"
    );
    let max = weight
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    // Minimize cost = max - weight with the potentials method; 1-based
    // indices with column 0 as the virtual start.
    let cost = |i: usize, j: usize| max - weight[i - 1][j - 1];
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut row_of = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; k];
    for j in 1..=k {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}

/// Best-match accuracy over all one-to-one relabelings of `pred`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let (kp, kt) = table.shape();
    let k = kp.max(kt);
    let weight: Vec<Vec<f64>> = (0..k)
        .map(|p| {
            (0..k)
                .map(|t| {
                    if p < kp && t < kt {
                        table.get(p, t) as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let matched: f64 = hungarian(&weight)
        .iter()
        .enumerate()
        .map(|(p, &t)| weight[p][t])
        .sum();
    Ok(matched / table.n() as f64)
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by the geometric mean of the entropies.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let n = table.n() as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let (hp, ht) = (entropy(&rows, n), entropy(&cols, n));
    if hp == 0.0 || ht == 0.0 {
        // A single-cluster partition only matches another single cluster.
        return Ok(if hp == 0.0 && ht == 0.0 { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for (p, &rp) in rows.iter().enumerate() {
        for (t, &ct) in cols.iter().enumerate() {
            let c = table.get(p, t);
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (rp as f64 * ct as f64)).ln();
            }
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

/// Fraction of samples that belong to the majority class of their cluster.
pub fn purity(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let (kp, kt) = table.shape();
    let majority: usize = (0..kp)
        .map(|p| (0..kt).map(|t| table.get(p, t)).max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / table.n() as f64)
}

fn pairs(c: usize) -> f64 {
    (c as f64) * (c as f64 - 1.0) / 2.0
}

/// Pairwise F1: precision and recall of "same cluster" decisions over all
/// sample pairs.
pub fn fscore(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let (kp, kt) = table.shape();
    let mut both = 0.0;
    for p in 0..kp {
        for t in 0..kt {
            both += pairs(table.get(p, t));
        }
    }
    let same_pred: f64 = table.row_sums().into_iter().map(pairs).sum();
    let same_truth: f64 = table.col_sums().into_iter().map(pairs).sum();
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
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub fscore: f64,
}

pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<Scores> {
    Ok(Scores {
        acc: accuracy(pred, truth)?,
        nmi: nmi(pred, truth)?,
        purity: purity(pred, truth)?,
        fscore: fscore(pred, truth)?,
    })
}
