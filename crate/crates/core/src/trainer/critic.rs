use ndarray::{Array2, ArrayView2, Zip};
use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{soft_update, Activation, Mlp};

/// `state → 256 Mish → 256 Mish → actions`.
pub fn critic_network<R: Rng + ?Sized>(state_dim: usize, actions: usize, hidden: usize, rng: &mut R) -> Mlp<f64> {
    Mlp::new(
        &[state_dim, hidden, hidden, actions],
        &[Activation::Mish, Activation::Mish, Activation::None],
        rng,
    )
}

/// Element-wise minimum of two critic outputs.
pub fn q_values(a: &Mlp<f64>, b: &Mlp<f64>, states: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (qa, qb) = (a.infer(states)?, b.infer(states)?);
    if qa.dim() != qb.dim() {
        return Err(Error::shape("q_values", "critic output shapes differ"));
    }
    let mut out = qa;
    Zip::from(&mut out).and(&qb).for_each(|x, &y| *x = x.min(y));
    Ok(out)
}

/// Two online critics with their target copies.
#[derive(Debug, Clone)]
pub struct CriticPair {
    pub online: [Mlp<f64>; 2],
    pub target: [Mlp<f64>; 2],
}

impl CriticPair {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, actions: usize, hidden: usize, rng: &mut R) -> Self {
        let a = critic_network(state_dim, actions, hidden, rng);
        let b = critic_network(state_dim, actions, hidden, rng);
        CriticPair {
            target: [a.clone(), b.clone()],
            online: [a, b],
        }
    }

    pub fn q(&self, states: ArrayView2<f64>) -> Result<Array2<f64>> {
        q_values(&self.online[0], &self.online[1], states)
    }

    pub fn target_q(&self, states: ArrayView2<f64>) -> Result<Array2<f64>> {
        q_values(&self.target[0], &self.target[1], states)
    }

    pub fn soft_update(&mut self, tau: f64) {
        for (o, t) in self.online.iter().zip(self.target.iter_mut()) {
            soft_update(o, t, tau);
        }
    }

    pub fn swapped(&self) -> Self {
        CriticPair {
            online: [self.online[1].clone(), self.online[0].clone()],
            target: [self.target[1].clone(), self.target[0].clone()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::DenseLayer;
    use ndarray::array;

    fn constant_critic(out: [f64; 2]) -> Mlp<f64> {
        let mut l = DenseLayer::zeros(1, 2, Activation::None);
        l.biases = array![out[0], out[1]];
        Mlp::from_layers(vec![l]).unwrap()
    }

    #[test]
    fn elementwise_min() {
        let s = array![[0.5]];
        let q = q_values(&constant_critic([1.0, 2.0]), &constant_critic([2.0, 1.0]), s.view()).unwrap();
        assert_eq!(q, array![[1.0, 1.0]]);
        let same = q_values(&constant_critic([3.0, -1.0]), &constant_critic([3.0, -1.0]), s.view()).unwrap();
        assert_eq!(same, array![[3.0, -1.0]]);
    }
}
