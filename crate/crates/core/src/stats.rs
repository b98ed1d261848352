//! Sample moments and normal confidence intervals.

/// Running sums for a sample mean and its standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Mean and standard error of a value distributed as `counts` over integer
/// support points `value(i)`, computed in two passes.
pub fn histogram_mean_se(counts: &[u64], value: impl Fn(usize) -> f64) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mean = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * value(i))
        .sum::<f64>()
        / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * (value(i) - mean).powi(2))
        .sum();
    (mean, (ss / (nf - 1.0) / nf).sqrt())
}
