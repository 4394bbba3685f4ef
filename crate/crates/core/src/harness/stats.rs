//! Estimators and goodness-of-fit statistics used by the experiments.

/// Binomial standard error `√(p̂(1-p̂)/N)`; zero when `N = 0`.
pub fn binomial_se(p_hat: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p_hat * (1.0 - p_hat) / n as f64).max(0.0).sqrt()
}

/// Proportion with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proportion {
    pub hits: usize,
    pub total: usize,
    pub estimate: f64,
    pub se: f64,
}

impl Proportion {
    pub fn new(hits: usize, total: usize) -> Self {
        let estimate = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        Proportion { hits, total, estimate, se: binomial_se(estimate, total) }
    }

    /// One-sided upper-bound test `p̂ - 3·SE <= bound`.
    pub fn below(&self, bound: f64) -> bool {
        self.estimate - 3.0 * self.se <= bound
    }
}

/// Sample mean and standard error of the mean; `se` is `None` below two observations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: Option<f64>,
    pub count: usize,
}

pub fn mean_and_se(values: &[f64]) -> MeanEstimate {
    let count = values.len();
    if count == 0 {
        return MeanEstimate { mean: f64::NAN, se: None, count };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    if count < 2 {
        return MeanEstimate { mean, se: None, count };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
    MeanEstimate { mean, se: Some((var / count as f64).sqrt()), count }
}

/// Critical value of the two-sided KS statistic at the 1% level, times `√N`.
pub const KS_CRITICAL_1PCT: f64 = 1.63;

/// One-sample KS statistic `sup |F_N - F|` given the model CDF at the sorted sample.
pub fn ks_statistic_sorted(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(j, &f)| ((j as f64 + 1.0) / n - f).max(f - j as f64 / n))
        .fold(0.0, f64::max)
}

/// One-sample KS statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let f: Vec<f64> = s.iter().map(|&x| cdf(x)).collect();
    ks_statistic_sorted(&f)
}

/// Two-sample KS statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// 1% acceptance threshold for a one-sample KS statistic.
pub fn ks_threshold(n: usize) -> f64 {
    KS_CRITICAL_1PCT / (n as f64).sqrt()
}

/// 1% acceptance threshold for a two-sample KS statistic.
pub fn ks_threshold_two_sample(n1: usize, n2: usize) -> f64 {
    KS_CRITICAL_1PCT * (1.0 / n1 as f64 + 1.0 / n2 as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn se_formula() {
        assert_eq!(binomial_se(0.5, 100), 0.05);
        assert_eq!(binomial_se(0.0, 100), 0.0);
        let p = Proportion::new(3, 4);
        assert_eq!(p.estimate, 0.75);
        assert!(p.below(0.75) && !p.below(0.0));
    }

    #[test]
    fn mean_estimates() {
        let m = mean_and_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.se.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_and_se(&[4.0]).se.is_none());
    }

    #[test]
    fn ks_of_perfect_grid_is_half_step() {
        let n = 100;
        let s: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&s, |x| x) - 0.5 / n as f64).abs() < 1e-12);
        assert_eq!(ks_two_sample(&s, &s), 0.0);
        let disjoint: Vec<f64> = s.iter().map(|x| x + 10.0).collect();
        assert_eq!(ks_two_sample(&s, &disjoint), 1.0);
        let half: Vec<f64> = s.iter().map(|x| if *x < 0.5 { x + 10.0 } else { *x }).collect();
        assert!((ks_two_sample(&s, &half) - 0.5).abs() < 1e-12);
    }
}
