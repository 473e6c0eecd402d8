use crate::sparse::Triplets;

/// Powell-damped BFGS approximation of the Hessian of the Lagrangian, used
/// when a problem supplies no second derivatives.
#[derive(Debug, Clone)]
pub struct DampedBfgs {
    n: usize,
    b: Vec<f64>,
    scaled: bool,
}

impl DampedBfgs {
    pub fn new(n: usize) -> Self {
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            b[i * n + i] = 1.0;
        }
        Self { n, b, scaled: false }
    }

    /// Updates with step `s` and gradient change `y`.
    pub fn update(&mut self, s: &[f64], y: &[f64]) {
        let n = self.n;
        let ss: f64 = s.iter().map(|v| v * v).sum();
        if ss <= 1e-300 {
            return;
        }
        let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
        if !self.scaled && sy > 0.0 {
            // Initial scaling yᵀy / sᵀy on the identity.
            let yy: f64 = y.iter().map(|v| v * v).sum();
            let gamma = yy / sy;
            for i in 0..n {
                self.b[i * n + i] = gamma;
            }
            self.scaled = true;
        }
        let bs: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| self.b[i * n + j] * s[j]).sum())
            .collect();
        let sbs: f64 = s.iter().zip(&bs).map(|(a, b)| a * b).sum();
        if sbs <= 0.0 {
            return;
        }
        let theta = if sy >= 0.2 * sbs { 1.0 } else { 0.8 * sbs / (sbs - sy) };
        let r: Vec<f64> = (0..n).map(|i| theta * y[i] + (1.0 - theta) * bs[i]).collect();
        let sr: f64 = s.iter().zip(&r).map(|(a, b)| a * b).sum();
        if sr <= 0.0 {
            return;
        }
        for i in 0..n {
            for j in 0..n {
                self.b[i * n + j] += -bs[i] * bs[j] / sbs + r[i] * r[j] / sr;
            }
        }
    }

    pub fn lower_triangle(&self) -> Triplets {
        let n = self.n;
        let mut t = Triplets::with_capacity(n, n, n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                let v = self.b[i * n + j];
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_quadratic_curvature_along_steps() {
        // f = x² + 3 y², gradient change y = H s exactly.
        let mut b = DampedBfgs::new(2);
        let h = |s: &[f64]| vec![2.0 * s[0], 6.0 * s[1]];
        for s in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, -1.0]] {
            b.update(&s, &h(&s));
        }
        let d = b.lower_triangle().symmetric_to_dense();
        // Secant condition holds for the last step.
        let s = [0.5, -1.0];
        let bs = [d[0][0] * s[0] + d[0][1] * s[1], d[1][0] * s[0] + d[1][1] * s[1]];
        let y = h(&s);
        assert!((bs[0] - y[0]).abs() < 1e-10 && (bs[1] - y[1]).abs() < 1e-10);
    }
}
