//! Exact transition kernel of the rate-`2d` simple random walk on `Z^d`.
//!
//! Coordinates move independently at rate 2 (rate 1 each way), so the
//! kernel is a product of one-dimensional kernels. Each one is computed by
//! uniformization on `[-R, R]` with absorbing ends: `e^{-2t} Σ (2t)^n/n! K^n δ_0`
//! where `K` moves half the mass each way and drops what leaves the box.

pub struct Kernel1d {
    pub radius: i64,
    pub probs: Vec<f64>,
    /// Mass lost through the boundary plus the uniformization tail.
    pub truncation: f64,
}

impl Kernel1d {
    pub fn new(t: f64, radius: i64) -> Kernel1d {
        let width = (2 * radius + 1) as usize;
        let mut v = vec![0.0; width];
        v[radius as usize] = 1.0;
        let mut out = vec![0.0; width];
        let lambda = 2.0 * t;
        let mut log_w = -lambda;
        let mut weight_sum = 0.0;
        let n_max = (lambda + 12.0 * lambda.sqrt() + 50.0) as usize;
        for n in 0..=n_max {
            if n > 0 {
                log_w += lambda.ln() - (n as f64).ln();
                let mut next = vec![0.0; width];
                for (i, &m) in v.iter().enumerate() {
                    if i > 0 {
                        next[i - 1] += 0.5 * m;
                    }
                    if i + 1 < width {
                        next[i + 1] += 0.5 * m;
                    }
                }
                v = next;
            }
            let w = log_w.exp();
            weight_sum += w;
            for (o, &m) in out.iter_mut().zip(&v) {
                *o += w * m;
            }
        }
        let kept: f64 = out.iter().sum();
        Kernel1d {
            radius,
            probs: out,
            truncation: (1.0 - kept).max(0.0) + (1.0 - weight_sum).max(0.0),
        }
    }

    /// `ceil(6 √t)`, at least 4.
    pub fn default_radius(t: f64) -> i64 {
        ((6.0 * t.sqrt()).ceil() as i64).max(4)
    }

    pub fn at(&self, x: i64) -> f64 {
        if x.abs() > self.radius {
            0.0
        } else {
            self.probs[(x + self.radius) as usize]
        }
    }

    /// `P(W(t) = u)` in `d` dimensions.
    pub fn product(&self, u: &[i64]) -> f64 {
        u.iter().map(|&x| self.at(x)).product()
    }
}
