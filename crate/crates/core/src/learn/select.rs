//! Univariate feature ranking by the pooled two-sample t-statistic.

use ndarray::{ArrayView2, Axis};

use super::LearnError;

/// Pooled-variance t-statistic of one column between the two classes.
///
/// A constant column scores 0. A column with zero within-class variance but
/// different class means scores +/- infinity.
pub fn t_statistic(col: impl IntoIterator<Item = f64>, y: &[bool]) -> f64 {
    let mut sum = [0.0f64; 2];
    let mut cnt = [0usize; 2];
    let values: Vec<f64> = col.into_iter().collect();
    for (&v, &l) in values.iter().zip(y) {
        sum[usize::from(l)] += v;
        cnt[usize::from(l)] += 1;
    }
    if cnt[0] == 0 || cnt[1] == 0 {
        return 0.0;
    }
    let mean = [sum[0] / cnt[0] as f64, sum[1] / cnt[1] as f64];
    let mut ss = 0.0;
    for (&v, &l) in values.iter().zip(y) {
        let d = v - mean[usize::from(l)];
        ss += d * d;
    }
    let diff = mean[1] - mean[0];
    if diff == 0.0 {
        return 0.0;
    }
    let df = (cnt[0] + cnt[1]).saturating_sub(2);
    if ss == 0.0 || df == 0 {
        return diff.signum() * f64::INFINITY;
    }
    let pooled = ss / df as f64;
    diff / (pooled * (1.0 / cnt[0] as f64 + 1.0 / cnt[1] as f64)).sqrt()
}

/// All column indices, most discriminative first; ties keep index order.
pub fn rank_features(x: ArrayView2<'_, f64>, y: &[bool]) -> Vec<usize> {
    let scores: Vec<f64> = x
        .axis_iter(Axis(1))
        .map(|c| t_statistic(c.iter().copied(), y).abs())
        .collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// The `m` best columns by |t|, returned in ascending column order.
pub fn select_features(x: ArrayView2<'_, f64>, y: &[bool], m: usize) -> Result<Vec<usize>, LearnError> {
    if m == 0 || m > x.ncols() {
        return Err(LearnError::SelectOutOfRange { m, features: x.ncols() });
    }
    let mut chosen: Vec<usize> = rank_features(x, y).into_iter().take(m).collect();
    chosen.sort_unstable();
    Ok(chosen)
}
