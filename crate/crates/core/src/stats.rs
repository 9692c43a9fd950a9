//! Sample aggregation for Monte Carlo estimates.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
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

/// Mean with its standard error and the seed that produced the samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateCI {
    pub mean: f64,
    /// Standard error of the mean; infinite when fewer than two samples.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub stream_id: u64,
}

impl EstimateCI {
    pub fn from_samples(values: &[f64], seed: u64, stream_id: u64) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::INFINITY, samples: 0, seed, stream_id };
        }
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        let stderr = if n < 2 {
            f64::INFINITY
        } else {
            let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
            (ss / (n - 1) as f64 / n as f64).sqrt()
        };
        Self { mean, stderr, samples: n, seed, stream_id }
    }

    /// An exactly known value (zero spread).
    pub fn exact(value: f64, samples: usize, seed: u64, stream_id: u64) -> Self {
        Self { mean: value, stderr: 0.0, samples, seed, stream_id }
    }

    pub fn upper(&self, k: f64) -> f64 {
        self.mean + k * self.stderr
    }

    pub fn lower(&self, k: f64) -> f64 {
        self.mean - k * self.stderr
    }

    /// `|mean − value| ≤ k·stderr`.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}
