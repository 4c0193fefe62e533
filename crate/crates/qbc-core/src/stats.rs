//! Small statistics helpers for Monte Carlo acceptance tests: binomial
//! sigma bounds, Wilson score intervals, and a chi-square statistic for
//! uniformity checks.

/// z-value used for every Monte Carlo tolerance in this crate.
pub const FIVE_SIGMA: f64 = 5.0;

/// Standard deviation of an empirical rate for a true probability `p` over
/// `n` trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `z`-sigma acceptance margin around a bound `p` for `n` trials.
pub fn sigma_margin(p: f64, n: u64, z: f64) -> f64 {
    z * binomial_sigma(p, n)
}

/// Wilson score interval for `successes` out of `trials` at `z` sigmas.
/// Returns `(center, half_width)`. Well-behaved near rates of 0 and 1,
/// which is where cheating-probability estimates live.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.5, 0.5);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (center, half)
}

/// Half-width of the Wilson interval.
pub fn wilson_half_width(successes: u64, trials: u64, z: f64) -> f64 {
    wilson_interval(successes, trials, z).1
}

/// Pearson chi-square statistic of observed counts against a uniform
/// distribution over the bins.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    if expected == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Acceptance threshold for [`chi_square_uniform`] with `bins` bins at `z`
/// sigmas: the statistic is asymptotically χ²(k) with `k = bins − 1`, which
/// has mean `k` and variance `2k`.
pub fn chi_square_threshold(bins: usize, z: f64) -> f64 {
    let k = (bins.saturating_sub(1)) as f64;
    k + z * (2.0 * k).sqrt()
}
