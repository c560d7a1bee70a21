use serde::{Deserialize, Serialize};

/// Bias-corrected Adam over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(num_params: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            beta1,
            beta2,
            epsilon,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        assert_eq!(params.len(), self.m.len(), "parameter count changed");
        assert_eq!(grads.len(), self.m.len(), "gradient length mismatch");
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Polynomial decay `base · (1 - step/total)^power`; zero once `step ≥ total`.
pub fn poly_lr(base_lr: f64, step: usize, total: usize, power: f64) -> f64 {
    if total == 0 || step >= total {
        return 0.0;
    }
    base_lr * (1.0 - step as f64 / total as f64).powf(power)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut adam = Adam::new(3, 0.9, 0.999, 1e-8);
        let mut p = vec![1.0, -2.0, 0.5];
        for _ in 0..10 {
            adam.step(&mut p, &[0.0; 3], 1e-3);
        }
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn constant_gradient_moves_by_lr_sign() {
        let mut adam = Adam::new(2, 0.9, 0.999, 1e-8);
        let mut p = vec![0.0, 0.0];
        let lr = 1e-2;
        for _ in 0..500 {
            let before = p.clone();
            adam.step(&mut p, &[3.7, -0.02], lr);
            let d0 = p[0] - before[0];
            let d1 = p[1] - before[1];
            assert!((d0 + lr).abs() < 1e-6 * lr.max(1.0));
            assert!((d1 - lr).abs() < 1e-5);
        }
    }

    #[test]
    fn identical_runs_are_bitwise_equal() {
        let run = || {
            let mut adam = Adam::new(2, 0.9, 0.999, 1e-8);
            let mut p = vec![0.3, -0.1];
            for k in 0..50 {
                let g = [(k as f64).sin(), p[0] * p[1]];
                adam.step(&mut p, &g, 1e-3);
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn poly_schedule() {
        assert_eq!(poly_lr(1e-4, 0, 100, 0.9), 1e-4);
        assert_eq!(poly_lr(1e-4, 100, 100, 0.9), 0.0);
        assert_eq!(poly_lr(1e-4, 150, 100, 0.9), 0.0);
        assert!((poly_lr(1e-4, 50, 100, 1.0) - 5e-5).abs() < 1e-20);
        let mut last = f64::INFINITY;
        for s in 0..=100 {
            let lr = poly_lr(1.0, s, 100, 0.9);
            assert!(lr <= last);
            last = lr;
        }
    }
}
