//! Interval estimates for proportions and for means of integer observations.

/// Two-sided normal quantiles.
pub const Z_95: f64 = 1.959_963_984_540_054;
pub const Z_999: f64 = 3.290_526_731_491_925_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    P95,
    P999,
}

impl Level {
    pub fn z(self) -> f64 {
        match self {
            Level::P95 => Z_95,
            Level::P999 => Z_999,
        }
    }
}

/// Wilson score interval for `successes` out of `n` trials.
///
/// # Panics
/// If `n == 0` or `successes > n`.
pub fn confidence_interval(successes: u64, n: u64, level: Level) -> (f64, f64) {
    assert!(n >= 1 && successes <= n, "need 0 <= successes <= n and n >= 1");
    let z = level.z();
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0).min(p) };
    let high = if successes == n { 1.0 } else { (center + half).min(1.0).max(p) };
    (low, high)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Proportion {
    pub successes: u64,
    pub n: u64,
}

impl Proportion {
    pub fn estimate(&self) -> f64 {
        self.successes as f64 / self.n as f64
    }

    pub fn stderr(&self) -> f64 {
        let p = self.estimate();
        (p * (1.0 - p) / self.n as f64).sqrt()
    }

    pub fn interval(&self) -> (f64, f64) {
        confidence_interval(self.successes, self.n, Level::P95)
    }
}

/// Sums of an integer observation and its square; exact, so order of
/// accumulation does not matter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntegerMoments {
    pub n: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl IntegerMoments {
    pub fn push(&mut self, value: u64) {
        self.n += 1;
        self.sum += u128::from(value);
        self.sum_sq += u128::from(value) * u128::from(value);
    }

    pub fn merge(self, other: IntegerMoments) -> IntegerMoments {
        IntegerMoments { n: self.n + other.n, sum: self.sum + other.sum, sum_sq: self.sum_sq + other.sum_sq }
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.n as f64
    }

    /// Unbiased sample variance, computed from exact integer sums.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let centered = self.sum_sq as f64 - (self.sum as f64) * (self.sum as f64) / n;
        (centered / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Normal-approximation 95% interval for the mean.
    pub fn interval(&self) -> (f64, f64) {
        let (m, h) = (self.mean(), Z_95 * self.stderr());
        (m - h, m + h)
    }
}
