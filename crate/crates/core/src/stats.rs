//! Small statistics helpers: bit-stable reductions, self-normalized
//! importance-sampling moments, and a least-squares line fit.

/// Pairwise (tree) summation over a fixed-order slice. Deterministic for a
/// given input order, so parallel producers that collect by index give
/// bit-identical statistics regardless of worker count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Self-normalized importance-sampling estimate of E[φ] with its
/// delta-method standard error.
///
/// mean = Σ wφ / Σ w,  se² = Σ w²(φ-mean)² / (Σ w)².
pub fn weighted_mean_stderr(weights: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(weights.len(), values.len());
    let wsum = pairwise_sum(weights);
    if wsum <= 0.0 {
        return None;
    }
    let wv: Vec<f64> = weights.iter().zip(values).map(|(w, v)| w * v).collect();
    let mean = pairwise_sum(&wv) / wsum;
    let dev: Vec<f64> = weights
        .iter()
        .zip(values)
        .map(|(w, v)| (w * (v - mean)).powi(2))
        .collect();
    let se = pairwise_sum(&dev).sqrt() / wsum;
    Some((mean, se))
}

/// z-score for the difference of two estimates with independent-variance
/// combination. Zero stderr with equal means counts as z = 0.
pub fn z_score(mean_a: f64, se_a: f64, mean_b: f64, se_b: f64) -> f64 {
    let denom = (se_a * se_a + se_b * se_b).sqrt();
    let diff = mean_b - mean_a;
    if denom == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / denom
    }
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pairwise_sum(x) / nf;
    let my = pairwise_sum(y) / nf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert_relative_eq!(pairwise_sum(&xs), naive, epsilon = 1e-10);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn constant_observable_has_zero_stderr() {
        let w = vec![0.3, 1.7, 0.9];
        let v = vec![4.2; 3];
        let (m, se) = weighted_mean_stderr(&w, &v).unwrap();
        assert_relative_eq!(m, 4.2);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn rescaling_weights_changes_nothing() {
        let w = vec![0.5, 2.0, 1.0, 0.25];
        let v = vec![1.0, -1.0, 3.0, 0.5];
        let (m1, s1) = weighted_mean_stderr(&w, &v).unwrap();
        let w2: Vec<f64> = w.iter().map(|x| 2.0 * x).collect();
        let (m2, s2) = weighted_mean_stderr(&w2, &v).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn degenerate_weights_rejected() {
        assert!(weighted_mean_stderr(&[0.0, 0.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|xi| -2.5 * xi + 1.0).collect();
        let (slope, intercept) = linear_fit(&x, &y).unwrap();
        assert_relative_eq!(slope, -2.5, epsilon = 1e-12);
        assert_relative_eq!(intercept, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn z_score_conventions() {
        assert_eq!(z_score(1.0, 0.0, 1.0, 0.0), 0.0);
        assert!(z_score(1.0, 0.0, 2.0, 0.0).is_infinite());
        assert_relative_eq!(z_score(0.0, 3.0, 5.0, 4.0), 1.0);
    }
}
