use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::Result;
use crate::nn::{ComputeGraph, DenseLayer, Gradients, NodeId, ParamSet};
use crate::policy::{sample_action_distribution, ActorNetwork, Agod, BoundActor};

/// A trainable actor over a discrete action set. The trainer only needs a
/// batch probability head and a differentiable recording of the logits.
pub trait DiscreteActor: ParamSet<f64> + Clone {
    type Bound;

    fn kind(&self) -> &'static str;
    fn actions(&self) -> usize;
    fn state_dim(&self) -> usize;

    /// Action probabilities per row, nothing recorded.
    fn probs<R: Rng + ?Sized>(&self, states: ArrayView2<f64>, rng: &mut R) -> Result<Array2<f64>>;

    /// Records pre-softmax logits (rows × actions) with trainable parameters.
    fn record_logits<R: Rng + ?Sized>(
        &self,
        g: &mut ComputeGraph<f64>,
        states: NodeId,
        rng: &mut R,
    ) -> Result<(NodeId, Self::Bound)>;

    /// Gradients in [`ParamSet::params`] order.
    fn bound_grads(&self, bound: &Self::Bound, grads: &Gradients<f64>) -> Result<Vec<Vec<f64>>>;

    fn layers(&self) -> Vec<DenseLayer<f64>>;

    /// Intermediate samples `x_T, …, x_0` for one observation, if the actor
    /// has a chain at all.
    fn trace<R: Rng + ?Sized>(&self, _state: &[f64], _rng: &mut R) -> Result<Option<Vec<Vec<f64>>>> {
        Ok(None)
    }
}

impl ParamSet<f64> for Agod<f64> {
    fn params(&self) -> Vec<&[f64]> {
        self.actor.params()
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.actor.params_mut()
    }
}

impl DiscreteActor for Agod<f64> {
    type Bound = BoundActor;

    fn kind(&self) -> &'static str {
        "d2sac"
    }

    fn actions(&self) -> usize {
        self.actor.actions()
    }

    fn state_dim(&self) -> usize {
        self.actor.state_dim()
    }

    fn probs<R: Rng + ?Sized>(&self, states: ArrayView2<f64>, rng: &mut R) -> Result<Array2<f64>> {
        self.probs_batch(states, rng)
    }

    fn record_logits<R: Rng + ?Sized>(
        &self,
        g: &mut ComputeGraph<f64>,
        states: NodeId,
        rng: &mut R,
    ) -> Result<(NodeId, BoundActor)> {
        let bound = self.actor.bind(g);
        let x0 = self.record_chain(g, &bound, states, rng)?;
        Ok((x0, bound))
    }

    fn bound_grads(&self, bound: &BoundActor, grads: &Gradients<f64>) -> Result<Vec<Vec<f64>>> {
        bound.grads(grads)
    }

    fn layers(&self) -> Vec<DenseLayer<f64>> {
        self.actor.layers()
    }

    fn trace<R: Rng + ?Sized>(&self, state: &[f64], rng: &mut R) -> Result<Option<Vec<Vec<f64>>>> {
        Ok(sample_action_distribution(state, self, rng, true)?.trace)
    }
}

impl Agod<f64> {
    pub fn with_layers(&self, layers: Vec<DenseLayer<f64>>) -> Result<Self> {
        Ok(Agod::new(ActorNetwork::from_layers(layers)?, self.schedule.clone(), self.mode))
    }
}
