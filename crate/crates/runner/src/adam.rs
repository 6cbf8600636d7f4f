use crate::config::OptimizerSpec;

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    spec: OptimizerSpec,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(spec: OptimizerSpec, dim: usize) -> Self {
        Adam { spec, m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    /// In-place descent step on `theta` along `grad`.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        let s = self.spec;
        self.t += 1;
        let c1 = 1.0 - s.beta1.powi(self.t);
        let c2 = 1.0 - s.beta2.powi(self.t);
        for i in 0..theta.len() {
            self.m[i] = s.beta1 * self.m[i] + (1.0 - s.beta1) * grad[i];
            self.v[i] = s.beta2 * self.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
            theta[i] -= s.learning_rate * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + s.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_steps_by_hand() {
        let spec = OptimizerSpec { learning_rate: 0.1, beta1: 0.5, beta2: 0.75, epsilon: 0.0, ..Default::default() };
        let mut opt = Adam::new(spec, 1);
        let mut x = [1.0];
        // m1 = 1, v1 = 1, corrected to 2 and 4: step = lr * 2 / 2
        opt.step(&mut x, &[2.0]);
        assert!((x[0] - 0.9).abs() < 1e-15);
        // m2 = 0.5*1 + 0.5*(-1) = 0, so the second step is zero
        opt.step(&mut x, &[-1.0]);
        assert!((x[0] - 0.9).abs() < 1e-15);
        let mut opt = Adam::new(spec, 1);
        let mut y = [0.0];
        opt.step(&mut y, &[1.0]);
        opt.step(&mut y, &[3.0]);
        // m2 = 0.5*0.5 + 0.5*3 = 1.75, mhat = 1.75/0.75; v2 = 0.75*0.25 + 0.25*9 = 2.4375, vhat = 2.4375/0.4375
        let expected = -0.1 - 0.1 * (1.75 / 0.75) / (2.4375f64 / 0.4375).sqrt();
        assert!((y[0] - expected).abs() < 1e-15);
    }
}
