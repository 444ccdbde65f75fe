//! Gauss–Hermite quadrature and log-sum-exp accumulation.

/// Nodes and weights for `∫ f(x) exp(-x²) dx ≈ Σ w_k f(x_k)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `ln(w_k) + x_k²`, finite even where `w_k` underflows.
    ln_scaled: Vec<f64>,
}

impl GaussHermite {
    /// Largest order for which the root-finding starting guesses are reliable.
    pub const MAX_ORDER: usize = 160;

    /// Rule with `n <= MAX_ORDER` nodes, found by Newton iteration on the
    /// recurrence of the normalised Hermite functions (polynomials times
    /// `exp(-x²/2)`).
    pub fn new(n: usize) -> Self {
        assert!(
            (1..=Self::MAX_ORDER).contains(&n),
            "Gauss-Hermite order must lie in 1..={}",
            Self::MAX_ORDER
        );
        const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut lw = vec![0.0; n];
        let m = n.div_ceil(2);
        let mut z = 0.0;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = PIM4 * (-0.5 * z * z).exp();
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            lw[i] = std::f64::consts::LN_2 - 2.0 * pp.abs().ln();
            lw[n - 1 - i] = lw[i];
        }
        let weights = x.iter().zip(&lw).map(|(x, l)| (l - x * x).exp()).collect();
        Self {
            nodes: x,
            weights,
            ln_scaled: lw,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Pairs `(x_k, ln(w_k) + x_k²)`, for rules applied to `f(x) exp(x²)`.
    pub fn iter_ln_scaled(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.ln_scaled.iter().copied())
    }
}

/// Streaming `log Σ exp(a_i)`, tolerant of `-inf` terms.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn add(&mut self, a: f64) {
        if a == f64::NEG_INFINITY || a.is_nan() {
            return;
        }
        if a > self.max {
            self.sum = self.sum * (self.max - a).exp() + 1.0;
            self.max = a;
        } else {
            self.sum += (a - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}
