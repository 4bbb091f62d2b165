use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mask::PresenceMask;

/// Removes exactly `floor(ratio * n * views)` (view, sample) cells.
///
/// Cells are visited in a seeded random order and removed unless that would
/// leave a sample with no view or a view with no sample.
pub fn generate_mask(n: usize, views: usize, ratio: f64, seed: u64) -> Result<PresenceMask> {
    if n == 0 || views == 0 {
        return Err(Error::Config(format!(
            "cannot mask {views} views of {n} samples"
        )));
    }
    let max_ratio = (views - 1) as f64 / views as f64;
    if !(0.0..=max_ratio + 1e-12).contains(&ratio) {
        return Err(Error::Config(format!(
            "missing ratio {ratio} outside [0, {max_ratio}] for {views} views"
        )));
    }
    let cells = n * views;
    let quota = ((ratio * cells as f64) + 1e-9).floor() as usize;

    let mut order: Vec<(usize, usize)> = (0..views)
        .flat_map(|v| (0..n).map(move |j| (v, j)))
        .collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut present = vec![vec![true; n]; views];
    let mut per_sample = vec![views; n];
    let mut per_view = vec![n; views];
    let mut removed = 0;
    for (v, j) in order {
        if removed == quota {
            break;
        }
        if per_sample[j] <= 1 || per_view[v] <= 1 {
            continue;
        }
        present[v][j] = false;
        per_sample[j] -= 1;
        per_view[v] -= 1;
        removed += 1;
    }
    if removed < quota {
        return Err(Error::Config(format!(
            "only {removed} of {quota} cells could be removed without emptying a sample or view"
        )));
    }
    PresenceMask::new(present)
}
