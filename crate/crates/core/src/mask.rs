use crate::error::{Error, Result};

/// Which samples are observed in which views (`V x n`, row-major).
///
/// Row `v` is the presence vector of view `v`: the diagonal of `H_v H_v^T`
/// for the index matrix `H_v` that selects the observed samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresenceMask {
    n_views: usize,
    n_samples: usize,
    bits: Vec<bool>,
}

impl PresenceMask {
    /// Builds a mask from one row per view.
    ///
    /// Fails if a sample is observed nowhere or a view observes nothing.
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self> {
        let n_views = rows.len();
        if n_views == 0 {
            return Err(Error::Mask("mask has no views".into()));
        }
        let n_samples = rows[0].len();
        if n_samples == 0 {
            return Err(Error::Mask("mask has no samples".into()));
        }
        if let Some(v) = rows.iter().position(|r| r.len() != n_samples) {
            return Err(Error::Mask(format!(
                "row {v} has {} entries, expected {n_samples}",
                rows[v].len()
            )));
        }
        let mask = Self {
            n_views,
            n_samples,
            bits: rows.into_iter().flatten().collect(),
        };
        mask.validate()?;
        Ok(mask)
    }

    pub fn complete(n_views: usize, n_samples: usize) -> Result<Self> {
        Self::new(vec![vec![true; n_samples]; n_views])
    }

    fn validate(&self) -> Result<()> {
        for v in 0..self.n_views {
            if !self.row(v).iter().any(|&b| b) {
                return Err(Error::Mask(format!("view {v} observes no samples")));
            }
        }
        for j in 0..self.n_samples {
            if !(0..self.n_views).any(|v| self.is_observed(v, j)) {
                return Err(Error::Mask(format!("sample {j} is observed in no view")));
            }
        }
        Ok(())
    }

    pub fn n_views(&self) -> usize {
        self.n_views
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn row(&self, v: usize) -> &[bool] {
        &self.bits[v * self.n_samples..(v + 1) * self.n_samples]
    }

    pub fn is_observed(&self, v: usize, j: usize) -> bool {
        self.bits[v * self.n_samples + j]
    }

    /// Presence vector `r^(v)` as 0/1 floats.
    pub fn presence_vector(&self, v: usize) -> Result<Vec<f64>> {
        if v >= self.n_views {
            return Err(Error::OutOfRange {
                index: v,
                len: self.n_views,
            });
        }
        Ok(self
            .row(v)
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect())
    }

    pub fn observed_count(&self, v: usize) -> usize {
        self.row(v).iter().filter(|&&b| b).count()
    }

    /// Indices of the samples observed in view `v`.
    pub fn observed_indices(&self, v: usize) -> Vec<usize> {
        self.row(v)
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
            .collect()
    }

    pub fn missing_cells(&self) -> usize {
        self.bits.iter().filter(|&&b| !b).count()
    }

    pub fn missing_ratio(&self) -> f64 {
        self.missing_cells() as f64 / self.bits.len() as f64
    }

    pub fn is_complete(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    /// The same mask with samples reordered: sample `j` of the result is
    /// sample `order[j]` of `self`.
    pub fn permute_samples(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_samples {
            return Err(Error::Shape(format!(
                "permutation of length {} for {} samples",
                order.len(),
                self.n_samples
            )));
        }
        Self::new(
            (0..self.n_views)
                .map(|v| order.iter().map(|&j| self.is_observed(v, j)).collect())
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_observed_view_is_all_ones() {
        let mask = PresenceMask::complete(2, 3).unwrap();
        assert_eq!(mask.presence_vector(0).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn presence_vector_copies_the_row() {
        let mask =
            PresenceMask::new(vec![vec![true, false, true], vec![true, true, false]]).unwrap();
        assert_eq!(mask.presence_vector(0).unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(mask.presence_vector(1).unwrap(), vec![1.0, 1.0, 0.0]);
        assert_eq!(mask.missing_cells(), 2);
    }

    #[test]
    fn view_index_out_of_range() {
        let mask = PresenceMask::complete(2, 3).unwrap();
        assert!(matches!(
            mask.presence_vector(2),
            Err(Error::OutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn rejects_unobserved_sample_and_empty_view() {
        assert!(PresenceMask::new(vec![vec![true, false], vec![true, false]]).is_err());
        assert!(PresenceMask::new(vec![vec![false, false], vec![true, true]]).is_err());
        assert!(PresenceMask::new(vec![vec![true, true], vec![true]]).is_err());
    }
}
