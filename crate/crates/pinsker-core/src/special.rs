//! Small numeric helpers: log-gamma, exact binomials, compensated summation.

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    libm::lgamma(x)
}

/// ln Γ(n+1) = ln n!, valid for any n representable as f64.
pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Exact binomial coefficient C(n, r) in u128, or None on overflow.
///
/// Multiplies and divides incrementally so every intermediate value is an
/// exact integer: c * (n-r+i) is always divisible by i at step i.
pub fn binomial_u128(n: u128, r: u128) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut c: u128 = 1;
    for i in 1..=r {
        c = c.checked_mul(n - r + i)?;
        c /= i;
    }
    Some(c)
}

/// Neumaier-compensated accumulator for long floating-point sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n >= 2, "mean_stderr needs at least two samples");
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    let mean = acc.value() / n as f64;
    let mut var = KahanSum::new();
    for &v in values {
        let d = v - mean;
        var.add(d * d);
    }
    let sample_var = var.value() / (n as f64 - 1.0);
    (mean, (sample_var / n as f64).sqrt())
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
        assert!((ln_gamma(1.0)).abs() < 1e-14);
    }

    #[test]
    fn binomial_exact() {
        assert_eq!(binomial_u128(10, 3), Some(120));
        assert_eq!(binomial_u128(3006, 6), binomial_u128(3006, 3000));
        assert_eq!(binomial_u128(5, 9), Some(0));
        // C(200, 100) overflows u128? It is about 9e58, fits. C(1000,500) does not.
        assert!(binomial_u128(1000, 500).is_none());
    }

    #[test]
    fn kahan_beats_naive_on_adversarial_sum() {
        let mut acc = KahanSum::new();
        acc.add(1e16);
        for _ in 0..10_000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 10_000.0);
    }

    #[test]
    fn slope_of_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert!((ls_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
