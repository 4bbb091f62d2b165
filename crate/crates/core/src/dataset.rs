use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Feature matrices of every view, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    pub name: String,
    views: Vec<DenseMatrix>,
    labels: Option<Vec<usize>>,
}

impl MultiViewDataset {
    /// Each view is `d_v x n`. Labels, when given, must have length `n`.
    pub fn new(
        name: impl Into<String>,
        views: Vec<DenseMatrix>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::Shape("dataset has no views".into()))?;
        let n = first.ncols();
        for (v, x) in views.iter().enumerate() {
            if x.nrows() == 0 {
                return Err(Error::Shape(format!("view {v} has zero features")));
            }
            if x.ncols() != n {
                return Err(Error::Shape(format!(
                    "view {v} has {} samples, view 0 has {n}",
                    x.ncols()
                )));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::Shape(format!(
                    "{} labels for {n} samples",
                    labels.len()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            views,
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].ncols()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn view(&self, v: usize) -> &DenseMatrix {
        &self.views[v]
    }

    pub fn views(&self) -> &[DenseMatrix] {
        &self.views
    }

    pub fn dims(&self) -> Vec<usize> {
        self.views.iter().map(|x| x.nrows()).collect()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n_samples() {
            return Err(Error::Shape(format!(
                "{} labels for {} samples",
                labels.len(),
                self.n_samples()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Distinct label count, if labels are present.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().max().map_or(0, |&m| m + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(d: usize, n: usize) -> DenseMatrix {
        DenseMatrix::zeros(d, n)
    }

    #[test]
    fn requires_matching_sample_counts() {
        assert!(MultiViewDataset::new("x", vec![view(3, 4), view(2, 4)], None).is_ok());
        assert!(MultiViewDataset::new("x", vec![view(3, 4), view(2, 5)], None).is_err());
        assert!(MultiViewDataset::new("x", vec![], None).is_err());
        assert!(MultiViewDataset::new("x", vec![view(0, 4)], None).is_err());
        assert!(MultiViewDataset::new("x", vec![view(3, 4)], Some(vec![0, 1])).is_err());
    }
}
