//! Small numeric helpers shared across modules.

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
///
/// The mean is accumulated relative to the first sample, so a constant
/// sample returns that constant bit-for-bit.
pub(crate) fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let anchor = samples[0];
    let shift = compensated_sum(samples.iter().map(|&x| x - anchor)) / n as f64;
    let mean = anchor + shift;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(samples.iter().map(|&x| {
        let d = x - mean;
        d * d
    }));
    let var = ss / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Ordinary least squares slope and its standard error.
pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / n;
    let my = compensated_sum(ys.iter().copied()) / n;
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    if xs.len() < 3 {
        return (slope, 0.0);
    }
    let intercept = my - slope * mx;
    let rss = compensated_sum(xs.iter().zip(ys).map(|(x, y)| {
        let r = y - intercept - slope * x;
        r * r
    }));
    let se = (rss / (n - 2.0) / sxx).sqrt();
    (slope, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_mean_is_exact() {
        let xs = vec![0.1; 1001];
        let (m, se) = mean_and_stderr(&xs);
        assert_eq!(m, 0.1);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn ols_on_a_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let (s, se) = ols_slope(&xs, &ys);
        assert!((s - 3.0).abs() < 1e-12);
        assert!(se < 1e-10);
    }
}
