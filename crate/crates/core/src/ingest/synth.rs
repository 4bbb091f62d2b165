use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Gaussian clusters placed on the coordinate axes of every view.
///
/// Cluster `c` of view `v` is centered at `s * e_{perm_v[c]}` with
/// `s = separation * noise_std / sqrt(2)`, so any two centers are
/// `separation` noise standard deviations apart (plain `separation` when
/// `noise_std` is zero). Without permutations every view puts cluster `c` on
/// axis `c`; distinct permutations per view scramble which axis (and hence
/// which learned anchor) carries each cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub k: usize,
    pub views: usize,
    pub dims: Vec<usize>,
    pub cluster_separation: f64,
    pub noise_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_permutations: Option<Vec<Vec<usize>>>,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k = {} must be at least 2", self.k)));
        }
        if self.n < self.k {
            return Err(Error::Config(format!(
                "n = {} is smaller than k = {}",
                self.n, self.k
            )));
        }
        if self.views == 0 || self.dims.len() != self.views {
            return Err(Error::Config(format!(
                "{} dims given for {} views",
                self.dims.len(),
                self.views
            )));
        }
        if !self.cluster_separation.is_finite() || self.cluster_separation <= 0.0 {
            return Err(Error::Config("cluster_separation must be positive".into()));
        }
        if !self.noise_std.is_finite() || self.noise_std < 0.0 {
            return Err(Error::Config("noise_std must be nonnegative".into()));
        }
        if let Some(perms) = &self.anchor_permutations {
            if perms.len() != self.views {
                return Err(Error::Config(format!(
                    "{} anchor permutations for {} views",
                    perms.len(),
                    self.views
                )));
            }
            for (v, p) in perms.iter().enumerate() {
                let mut sorted = p.clone();
                sorted.sort_unstable();
                if p.len() < self.k || sorted != (0..p.len()).collect::<Vec<_>>() {
                    return Err(Error::Config(format!(
                        "anchor permutation of view {v} is not a permutation of 0..L with L >= k"
                    )));
                }
            }
        }
        for (v, &d) in self.dims.iter().enumerate() {
            let axes = self.axes(v).iter().max().map_or(0, |&a| a + 1);
            if d < axes {
                return Err(Error::Config(format!(
                    "view {v} has {d} dimensions but its cluster means need {axes} orthogonal axes"
                )));
            }
        }
        Ok(())
    }

    /// Axis carrying each cluster in view `v`.
    pub fn axes(&self, v: usize) -> Vec<usize> {
        match &self.anchor_permutations {
            Some(perms) => perms[v][..self.k].to_vec(),
            None => (0..self.k).collect(),
        }
    }
}

/// Draws a labelled dataset from `spec`. Clusters are balanced to within one
/// sample and labels are the latent cluster ids.
pub fn synth_dataset(spec: &SynthSpec) -> Result<(MultiViewDataset, Vec<usize>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<usize> = (0..spec.n).map(|j| j % spec.k).collect();
    labels.shuffle(&mut rng);

    let unit = if spec.noise_std > 0.0 {
        spec.noise_std
    } else {
        1.0
    };
    let scale = spec.cluster_separation * unit / std::f64::consts::SQRT_2;
    let noise =
        Normal::new(0.0, spec.noise_std).map_err(|e| Error::Config(format!("noise_std: {e}")))?;

    let views = spec
        .dims
        .iter()
        .enumerate()
        .map(|(v, &d)| {
            let axes = spec.axes(v);
            let mut x = DMatrix::zeros(d, spec.n);
            for (j, &label) in labels.iter().enumerate() {
                let mut col = x.column_mut(j);
                for f in 0..d {
                    col[f] = noise.sample(&mut rng);
                }
                col[axes[label]] += scale;
            }
            DenseMatrix::new(x)
        })
        .collect::<Result<Vec<_>>>()?;
    let name = format!(
        "synth-n{}-k{}-v{}-s{}",
        spec.n, spec.k, spec.views, spec.seed
    );
    let data = MultiViewDataset::new(name, views, Some(labels.clone()))?;
    Ok((data, labels))
}
