use ndarray::{Array2, ArrayView2};
use rand::{Rng, RngCore};

use super::{DecisionView, Policy};
use crate::error::{Error, Result};
use crate::nn::{Activation, BoundMlp, ComputeGraph, DenseLayer, Gradients, Mlp, NodeId, ParamSet};
use crate::policy::{select_action, softmax_rows, ActionDistribution, SelectMode};
use crate::trainer::DiscreteActor;

/// Plain feed-forward actor for the ablation: `state → 256 Mish → 256 Mish → I`,
/// softmax on top.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpActor {
    pub net: Mlp<f64>,
}

impl MlpActor {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, actions: usize, hidden: usize, rng: &mut R) -> Self {
        MlpActor {
            net: Mlp::new(
                &[state_dim, hidden, hidden, actions],
                &[Activation::Mish, Activation::Mish, Activation::None],
                rng,
            ),
        }
    }

    pub fn from_layers(layers: Vec<DenseLayer<f64>>) -> Result<Self> {
        Ok(MlpActor {
            net: Mlp::from_layers(layers)?,
        })
    }
}

impl ParamSet<f64> for MlpActor {
    fn params(&self) -> Vec<&[f64]> {
        self.net.params()
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.net.params_mut()
    }
}

impl DiscreteActor for MlpActor {
    type Bound = BoundMlp;

    fn kind(&self) -> &'static str {
        "sac_mlp"
    }

    fn actions(&self) -> usize {
        self.net.output_dim()
    }

    fn state_dim(&self) -> usize {
        self.net.input_dim()
    }

    fn probs<R: Rng + ?Sized>(&self, states: ArrayView2<f64>, _rng: &mut R) -> Result<Array2<f64>> {
        Ok(softmax_rows(&self.net.infer(states)?))
    }

    fn record_logits<R: Rng + ?Sized>(
        &self,
        g: &mut ComputeGraph<f64>,
        states: NodeId,
        _rng: &mut R,
    ) -> Result<(NodeId, BoundMlp)> {
        let bound = self.net.bind(g);
        let logits = bound.forward(g, states)?;
        Ok((logits, bound))
    }

    fn bound_grads(&self, bound: &BoundMlp, grads: &Gradients<f64>) -> Result<Vec<Vec<f64>>> {
        bound.grads(grads)
    }

    fn layers(&self) -> Vec<DenseLayer<f64>> {
        self.net.layers.clone()
    }
}

/// Runs a trained actor behind the [`Policy`] interface.
#[derive(Debug, Clone)]
pub struct ActorPolicy<A> {
    pub actor: A,
    pub mode: SelectMode,
}

impl<A: DiscreteActor> ActorPolicy<A> {
    pub fn greedy(actor: A) -> Self {
        ActorPolicy {
            actor,
            mode: SelectMode::Greedy,
        }
    }

    pub fn distribution(&self, observation: &[f64], rng: &mut dyn RngCore) -> Result<ActionDistribution> {
        if observation.len() != self.actor.state_dim() {
            return Err(Error::shape("actor policy", "observation width differs from actor input"));
        }
        let s = Array2::from_shape_vec((1, observation.len()), observation.to_vec()).expect("row vector");
        let probs = self.actor.probs(s.view(), rng)?;
        Ok(ActionDistribution {
            x0: Vec::new(),
            probs: probs.into_iter().collect(),
            trace: None,
        })
    }
}

impl<A: DiscreteActor> Policy for ActorPolicy<A> {
    fn name(&self) -> &'static str {
        self.actor.kind()
    }

    fn act(&mut self, view: &DecisionView<'_>, rng: &mut dyn RngCore) -> Result<usize> {
        let dist = self.distribution(view.observation, rng)?;
        Ok(select_action(&dist, self.mode, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn outputs_valid_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = MlpActor::new(42, 20, 256, &mut rng);
        let s = Array2::from_elem((3, 42), 0.3);
        let p = a.probs(s.view(), &mut rng).unwrap();
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| v > 0.0));
        }
        assert_eq!(a.layers().len(), 3);
    }
}
