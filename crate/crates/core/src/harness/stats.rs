/// Sample mean and standard error of a per-trial quantity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Tally {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: Tally) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum / self.n as f64
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Ratio estimator `Σ errors / Σ trials` over slots, e.g. bit errors over
/// bits, with a delta-method standard error from the per-slot pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RatioTally {
    pub slots: u64,
    pub num: f64,
    pub den: f64,
    num_sq: f64,
    den_sq: f64,
    cross: f64,
}

impl RatioTally {
    pub fn push(&mut self, num: f64, den: f64) {
        if den == 0.0 {
            return;
        }
        self.slots += 1;
        self.num += num;
        self.den += den;
        self.num_sq += num * num;
        self.den_sq += den * den;
        self.cross += num * den;
    }

    pub fn merge(&mut self, o: RatioTally) {
        self.slots += o.slots;
        self.num += o.num;
        self.den += o.den;
        self.num_sq += o.num_sq;
        self.den_sq += o.den_sq;
        self.cross += o.cross;
    }

    pub fn ratio(&self) -> f64 {
        if self.den == 0.0 {
            return f64::NAN;
        }
        self.num / self.den
    }

    pub fn stderr(&self) -> f64 {
        if self.slots < 2 {
            return f64::NAN;
        }
        let p = self.ratio();
        let n = self.slots as f64;
        let resid = (self.num_sq - 2.0 * p * self.cross + p * p * self.den_sq).max(0.0);
        (resid * n / (n - 1.0)).sqrt() / self.den
    }
}

/// Binomial standard error `√(p(1-p)/n)`.
pub fn binomial_stderr(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}
