//! Binomial proportion statistics for Monte Carlo checks.

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// Closed interval of rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Wilson score interval for a proportion with (possibly fractional)
/// success count `successes` out of `n` draws.
pub fn wilson_interval(successes: f64, n: f64, z: f64) -> Interval {
    assert!(n > 0.0, "Wilson interval needs at least one draw");
    let p_hat = successes / n;
    let z2 = z * z;
    let denominator = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denominator;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denominator;
    // The exact bounds at degenerate counts are 0 and 1; keep them there
    // rather than a rounding ulp away.
    let lo = if successes <= 0.0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes >= n { 1.0 } else { (center + half).min(1.0) };
    Interval { lo, hi }
}

/// Wilson 95% interval centered on a known exact rate at sample size `n`:
/// the acceptance band an empirical rate must fall into.
pub fn wilson_band_around(rate: f64, n: f64) -> Interval {
    wilson_interval(rate * n, n, Z_95)
}
