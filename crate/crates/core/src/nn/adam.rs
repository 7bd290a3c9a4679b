//! Adaptive-moment optimizer with bias correction.

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        AdamConfig {
            learning_rate,
            ..Default::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug)]
pub struct Adam {
    cfg: AdamConfig,
    step_count: u64,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl Adam {
    pub fn new(cfg: AdamConfig, shapes: &[(usize, usize)]) -> Self {
        Adam {
            cfg,
            step_count: 0,
            m: shapes.iter().map(|&s| Array2::zeros(s)).collect(),
            v: shapes.iter().map(|&s| Array2::zeros(s)).collect(),
        }
    }

    /// One update over all parameters. A non-finite gradient aborts before
    /// any parameter is touched.
    pub fn step(&mut self, params: &mut [&mut Array2<f64>], grads: &[Array2<f64>]) -> Result<()> {
        assert_eq!(params.len(), self.m.len(), "parameter count");
        assert_eq!(grads.len(), self.m.len(), "gradient count");
        for (idx, g) in grads.iter().enumerate() {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NanGradient { param: idx });
            }
        }

        self.step_count += 1;
        let t = self.step_count as f64;
        let b1 = self.cfg.beta1;
        let b2 = self.cfg.beta2;
        let correction1 = 1.0 - b1.powf(t);
        let correction2 = 1.0 - b2.powf(t);

        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            m.zip_mut_with(grad, |m, &g| *m = b1 * *m + (1.0 - b1) * g);
            v.zip_mut_with(grad, |v, &g| *v = b2 * *v + (1.0 - b2) * g * g);
            ndarray::Zip::from(&mut **param)
                .and(&*m)
                .and(&*v)
                .for_each(|p, &m, &v| {
                    let m_hat = m / correction1;
                    let v_hat = v / correction2;
                    *p -= self.cfg.learning_rate * m_hat / (v_hat.sqrt() + self.cfg.epsilon);
                });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut w = Array2::from_elem((2, 2), 1.5);
        let mut adam = Adam::new(AdamConfig::with_lr(0.1), &[(2, 2)]);
        adam.step(&mut [&mut w], &[Array2::zeros((2, 2))]).unwrap();
        assert!(w.iter().all(|&v| v == 1.5));
    }

    #[test]
    fn quadratic_bowl_converges() {
        // Oracle recurrence for f(w) = w^2, gradient 2w.
        let mut w = Array2::from_elem((1, 1), 1.0);
        let mut adam = Adam::new(AdamConfig::with_lr(0.05), &[(1, 1)]);
        for _ in 0..200 {
            let grad = w.mapv(|v| 2.0 * v);
            adam.step(&mut [&mut w], &[grad]).unwrap();
        }
        assert!(w[(0, 0)].abs() < 1e-2, "w = {}", w[(0, 0)]);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        // With a constant gradient g, bias correction makes the first step
        // exactly lr * g / (|g| + eps), which is lr up to epsilon.
        let mut w = Array2::from_elem((1, 1), 3.0);
        let lr = 0.07;
        let mut adam = Adam::new(AdamConfig::with_lr(lr), &[(1, 1)]);
        adam.step(&mut [&mut w], &[Array2::from_elem((1, 1), 0.5)])
            .unwrap();
        let moved = 3.0 - w[(0, 0)];
        assert!((moved - lr).abs() < 1e-6, "moved {}", moved);
    }

    #[test]
    fn nan_gradient_aborts() {
        let mut w = Array2::zeros((1, 1));
        let mut adam = Adam::new(AdamConfig::default(), &[(1, 1)]);
        let err = adam
            .step(&mut [&mut w], &[Array2::from_elem((1, 1), f64::NAN)])
            .unwrap_err();
        assert!(matches!(err, Error::NanGradient { param: 0 }));
    }
}
