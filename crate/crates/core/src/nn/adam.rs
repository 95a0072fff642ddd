use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::layer::ParamSet;

/// Adam with decoupled weight decay.
///
/// `p ← p − lr·(m̂/(√v̂ + ε) + wd·p)`
#[derive(Debug, Clone)]
pub struct AdamState<S> {
    pub beta1: S,
    pub beta2: S,
    pub eps: S,
    first: Vec<Vec<S>>,
    second: Vec<Vec<S>>,
    step: u64,
}

impl<S: Scalar> AdamState<S> {
    pub fn new<P: ParamSet<S> + ?Sized>(params: &P) -> Self {
        Self::with_shapes(params.params().iter().map(|p| p.len()))
    }

    pub fn with_shapes(lens: impl IntoIterator<Item = usize>) -> Self {
        let lens: Vec<usize> = lens.into_iter().collect();
        AdamState {
            beta1: S::of(0.9),
            beta2: S::of(0.999),
            eps: S::of(1e-8),
            first: lens.iter().map(|&n| vec![S::zero(); n]).collect(),
            second: lens.iter().map(|&n| vec![S::zero(); n]).collect(),
            step: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update. A non-finite gradient rejects the whole step and
    /// leaves both the parameters and the moments untouched.
    pub fn step(&mut self, params: Vec<&mut [S]>, grads: &[Vec<S>], lr: S, weight_decay: S) -> Result<()> {
        if lr.is_nan() || lr <= S::zero() {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if params.len() != grads.len() || params.len() != self.first.len() {
            return Err(Error::shape(
                "adam",
                format!("{} params, {} grads, {} moments", params.len(), grads.len(), self.first.len()),
            ));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first) {
            if p.len() != g.len() || p.len() != m.len() {
                return Err(Error::shape("adam", "parameter and gradient lengths differ"));
            }
        }
        if grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }

        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = S::one() - b1.powi(t);
        let c2 = S::one() - b2.powi(t);
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.first).zip(&mut self.second) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (S::one() - b1) * g[i];
                v[i] = b2 * v[i] + (S::one() - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] = p[i] - lr * (m_hat / (v_hat.sqrt() + self.eps) + weight_decay * p[i]);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_grad_no_decay_is_a_no_op() {
        let mut p = vec![0.3_f64, -1.2];
        let mut adam = AdamState::with_shapes([2]);
        adam.step(vec![&mut p], &[vec![0.0, 0.0]], 1e-3, 0.0).unwrap();
        assert_eq!(p, vec![0.3, -1.2]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = vec![0.0_f64];
        let mut adam = AdamState::with_shapes([1]);
        adam.step(vec![&mut p], &[vec![1.0]], 1e-4, 0.0).unwrap();
        // m̂ = 1, v̂ = 1, so Δ = −lr / (1 + ε)
        assert!((p[0] + 1e-4).abs() < 1e-11);
    }

    #[test]
    fn decoupled_decay() {
        let mut p = vec![1.0_f64];
        let mut adam = AdamState::with_shapes([1]);
        adam.step(vec![&mut p], &[vec![0.0]], 1e-4, 1e-4).unwrap();
        assert!((p[0] - (1.0 - 1e-8)).abs() < 1e-16);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut p = vec![1.0_f64, 2.0];
        let mut adam = AdamState::with_shapes([2]);
        let err = adam.step(vec![&mut p], &[vec![f64::NAN, 0.0]], 1e-3, 0.0);
        assert!(matches!(err, Err(Error::NonFinite(_))));
        assert_eq!(p, vec![1.0, 2.0]);
        assert_eq!(adam.steps_taken(), 0);
    }
}
