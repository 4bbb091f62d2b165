/// Euclidean projection of `f` onto the probability simplex
/// `{z : z >= 0, sum(z) = 1}`.
///
/// The projection is `max(f + alpha, 0)` where `alpha` is the root of
/// `sum_i max(f_i + alpha, 0) = 1`; the root is found exactly by sorting.
pub fn simplex_project(f: &[f64]) -> Vec<f64> {
    let mut z = f.to_vec();
    let mut scratch = Vec::with_capacity(f.len());
    project_in_place(&mut z, &mut scratch);
    z
}

/// In-place variant of [`simplex_project`]; `scratch` is reused between calls.
pub fn project_in_place(z: &mut [f64], scratch: &mut Vec<f64>) {
    let alpha = simplex_shift(z, scratch);
    for x in z.iter_mut() {
        *x = (*x + alpha).max(0.0);
    }
}

/// The shift `alpha` such that `max(f + alpha, 0)` lies on the simplex.
pub fn simplex_shift(f: &[f64], scratch: &mut Vec<f64>) -> f64 {
    assert!(!f.is_empty(), "cannot project an empty vector");
    scratch.clear();
    scratch.extend_from_slice(f);
    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut alpha = 1.0 - scratch[0];
    for (i, &u) in scratch.iter().enumerate() {
        cumsum += u;
        let candidate = (1.0 - cumsum) / (i + 1) as f64;
        if u + candidate > 0.0 {
            alpha = candidate;
        } else {
            break;
        }
    }
    alpha
}
