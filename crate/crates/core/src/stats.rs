//! Wilcoxon signed-rank and exact binomial tests.

use serde::Serialize;
use statrs::distribution::{Binomial, Discrete};
use statrs::function::erf::erfc;
use thiserror::Error;

/// Samples with at most this many nonzero differences get the exact null distribution.
pub const EXACT_MAX_N: usize = 25;

/// Outcomes whose probability is within this relative distance of P(k) count as equally extreme.
const BINOMIAL_REL_TOL: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("degenerate sample: every difference is zero")]
    DegenerateSample,
    #[error("empty sample")]
    EmptySample,
    #[error("non-finite difference at position {0}")]
    NonFinite(usize),
    #[error("successes {k} outside 0..={n}")]
    SuccessesOutOfRange { k: u64, n: u64 },
    #[error("null probability {0} outside (0, 1)")]
    InvalidProbability(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Nonzero differences that were ranked.
    pub n: usize,
    pub zeros_dropped: usize,
    /// min(W+, W-)
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_two_sided: f64,
    /// Alternative: differences tend to be positive.
    pub p_greater: f64,
    /// Alternative: differences tend to be negative.
    pub p_less: f64,
    pub method: Method,
}

/// Average ranks of `values`, doubled so that they are integers.
fn doubled_ranks(values: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share (i+1 + j+1)/2; doubled that is i+j+2
        for &idx in &order[i..=j] {
            ranks[idx] = (i + j + 2) as u64;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    (ranks, tie_sizes)
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Paired signed-rank test on differences. Zeros are dropped and tied
/// magnitudes share average ranks.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> Result<WilcoxonResult, StatsError> {
    if diffs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if let Some(i) = diffs.iter().position(|d| !d.is_finite()) {
        return Err(StatsError::NonFinite(i));
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(StatsError::DegenerateSample);
    }
    let n = nonzero.len();
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = doubled_ranks(&magnitudes);
    let total2: u64 = ranks.iter().sum();
    let plus2: u64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let minus2 = total2 - plus2;
    let w_plus = plus2 as f64 / 2.0;
    let w_minus = minus2 as f64 / 2.0;
    let stat2 = plus2.min(minus2);

    let (p_two_sided, p_greater, p_less, method) = if n <= EXACT_MAX_N {
        // counts[s] = number of sign assignments whose positive doubled-rank sum is s
        let mut counts = vec![0f64; total2 as usize + 1];
        counts[0] = 1.0;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] != 0.0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let all = 2f64.powi(n as i32);
        let mut two = 0.0;
        let mut greater = 0.0;
        let mut less = 0.0;
        for (s, &c) in counts.iter().enumerate() {
            let s = s as u64;
            if s.min(total2 - s) <= stat2 {
                two += c;
            }
            if s >= plus2 {
                greater += c;
            }
            if s <= plus2 {
                less += c;
            }
        }
        (two / all, greater / all, less / all, Method::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term).sqrt();
        let dev = w_plus - mean;
        let two = if dev.abs() <= 0.5 {
            1.0
        } else {
            2.0 * (1.0 - normal_cdf((dev.abs() - 0.5) / sd))
        };
        let greater = 1.0 - normal_cdf((dev - 0.5) / sd);
        let less = normal_cdf((dev + 0.5) / sd);
        (two, greater, less, Method::NormalApproximation)
    };

    Ok(WilcoxonResult {
        n,
        zeros_dropped: diffs.len() - n,
        statistic: stat2 as f64 / 2.0,
        w_plus,
        w_minus,
        p_two_sided: p_two_sided.clamp(0.0, 1.0),
        p_greater: p_greater.clamp(0.0, 1.0),
        p_less: p_less.clamp(0.0, 1.0),
        method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinomialResult {
    pub k: u64,
    pub n: u64,
    pub p0: f64,
    pub p_two_sided: f64,
    /// P(X >= k)
    pub p_greater: f64,
}

/// Exact two-sided p: total probability of outcomes no more likely than `k`.
pub fn binomial_test(k: u64, n: u64, p0: f64) -> Result<f64, StatsError> {
    binomial_test_full(k, n, p0).map(|r| r.p_two_sided)
}

pub fn binomial_test_full(k: u64, n: u64, p0: f64) -> Result<BinomialResult, StatsError> {
    if k > n {
        return Err(StatsError::SuccessesOutOfRange { k, n });
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(StatsError::InvalidProbability(p0));
    }
    let dist = Binomial::new(p0, n).expect("parameters checked");
    let pmf: Vec<f64> = (0..=n).map(|i| dist.pmf(i)).collect();
    let cutoff = pmf[k as usize] * (1.0 + BINOMIAL_REL_TOL);
    let two: f64 = pmf.iter().filter(|&&p| p <= cutoff).sum();
    let greater: f64 = pmf[k as usize..].iter().sum();
    Ok(BinomialResult {
        k,
        n,
        p0,
        p_two_sided: two.min(1.0),
        p_greater: greater.min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_positive_extreme() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.w_plus, 15.0);
        assert_eq!(r.p_two_sided, 0.0625);
        assert_eq!(r.p_greater, 1.0 / 32.0);
        assert_eq!(r.p_less, 1.0);
        assert_eq!(r.method, Method::Exact);
    }

    #[test]
    fn sign_flip_symmetry() {
        let d = [0.3, -1.2, 2.5, 0.0, 4.0, -0.7, 1.1];
        let flipped: Vec<f64> = d.iter().map(|x| -x).collect();
        let a = wilcoxon_signed_rank(&d).unwrap();
        let b = wilcoxon_signed_rank(&flipped).unwrap();
        assert_eq!(a.statistic, b.statistic);
        assert_eq!(a.p_two_sided, b.p_two_sided);
        assert_eq!(a.p_greater, b.p_less);
        assert_eq!(a.zeros_dropped, 1);
    }

    #[test]
    fn degenerate_and_invalid() {
        assert_eq!(wilcoxon_signed_rank(&[0.0, 0.0]), Err(StatsError::DegenerateSample));
        assert_eq!(wilcoxon_signed_rank(&[]), Err(StatsError::EmptySample));
        assert_eq!(wilcoxon_signed_rank(&[1.0, f64::NAN]), Err(StatsError::NonFinite(1)));
    }

    #[test]
    fn ties_share_ranks() {
        let (r, ties) = doubled_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, [7, 2, 7, 4]);
        assert_eq!(ties, [1, 1, 2]);
    }

    #[test]
    fn normal_branch_beyond_crossover() {
        // 30 diffs, values 1..=30 alternating sign with every third flipped
        let d: Vec<f64> = (1..=30).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 }).collect();
        let r = wilcoxon_signed_rank(&d).unwrap();
        assert_eq!(r.method, Method::NormalApproximation);
        assert_eq!(r.w_minus, 165.0);
        assert_eq!(r.w_plus, 300.0);
        // mean 232.5, sd sqrt(30*31*61/24) = 48.6184...; z = (67.5 - 0.5)/sd
        let sd = (30.0f64 * 31.0 * 61.0 / 24.0).sqrt();
        let expected = 2.0 * (1.0 - normal_cdf(67.0 / sd));
        assert!((r.p_two_sided - expected).abs() < 1e-15);
        assert!((r.p_two_sided - 0.168_1).abs() < 1e-3, "{}", r.p_two_sided);
    }

    #[test]
    fn binomial_anchors() {
        assert_eq!(binomial_test(5, 10, 0.5).unwrap(), 1.0);
        assert!((binomial_test(10, 10, 0.5).unwrap() - 0.001_953_125).abs() < 1e-12);
        assert!(binomial_test(66, 105, 0.5).unwrap() < 0.05);
        assert!(binomial_test(11, 10, 0.5).is_err());
        assert!(binomial_test(1, 10, 1.0).is_err());
        assert!(binomial_test(1, 10, 0.0).is_err());
        let r = binomial_test_full(0, 0, 0.5).unwrap();
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn binomial_asymmetric_null() {
        // n = 5, p0 = 0.2: pmf = .32768 .4096 .2048 .0512 .0064 .00032
        let p = binomial_test(3, 5, 0.2).unwrap();
        assert!((p - (0.0512 + 0.0064 + 0.00032)).abs() < 1e-12, "{p}");
    }

    proptest! {
        #[test]
        fn wilcoxon_scale_invariant(d in proptest::collection::vec(-50i32..50, 1..40), scale in 0.01f64..100.0) {
            let a: Vec<f64> = d.iter().map(|&x| x as f64).collect();
            prop_assume!(a.iter().any(|&x| x != 0.0));
            let b: Vec<f64> = a.iter().map(|x| x * scale).collect();
            let ra = wilcoxon_signed_rank(&a).unwrap();
            let rb = wilcoxon_signed_rank(&b).unwrap();
            prop_assert_eq!(ra.statistic, rb.statistic);
            prop_assert_eq!(ra.p_two_sided, rb.p_two_sided);
            for p in [ra.p_two_sided, ra.p_greater, ra.p_less] {
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }

        #[test]
        fn binomial_symmetric_at_half(n in 0u64..200, frac in 0.0f64..=1.0) {
            let k = (frac * n as f64).round() as u64;
            let a = binomial_test(k, n, 0.5).unwrap();
            let b = binomial_test(n - k, n, 0.5).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
