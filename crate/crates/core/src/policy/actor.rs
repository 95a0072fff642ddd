use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{sinusoidal_pos_emb, Activation, BoundMlp, ComputeGraph, DenseLayer, Mlp, NodeId, ParamSet};
use crate::scalar::Scalar;

/// Widths of the noise-prediction network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActorShape {
    pub actions: usize,
    pub state_dim: usize,
    pub hidden: usize,
    pub time_dim: usize,
    pub time_hidden: usize,
}

impl ActorShape {
    /// Step embedding 16 → 32 Mish → 16, trunk 256 Mish → 256 Mish → actions Tanh.
    pub fn standard(actions: usize, state_dim: usize) -> Self {
        ActorShape {
            actions,
            state_dim,
            hidden: 256,
            time_dim: 16,
            time_hidden: 32,
        }
    }
}

/// Noise predictor `ε_θ(x_t, t, s)` conditioned on the observation.
///
/// The trunk's final Tanh is the squashing applied to the predicted noise,
/// so the network output already lies in `(−1, 1)^I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorNetwork<S> {
    shape: ActorShape,
    time: Mlp<S>,
    trunk: Mlp<S>,
}

/// Actor parameters registered on a graph.
#[derive(Debug, Clone)]
pub struct BoundActor {
    time: BoundMlp,
    trunk: BoundMlp,
    time_dim: usize,
}

impl<S: Scalar> ActorNetwork<S> {
    pub fn new<R: Rng + ?Sized>(shape: ActorShape, rng: &mut R) -> Self {
        let time = Mlp::new(
            &[shape.time_dim, shape.time_hidden, shape.time_dim],
            &[Activation::Mish, Activation::None],
            rng,
        );
        let trunk_in = shape.actions + shape.state_dim + shape.time_dim;
        let trunk = Mlp::new(
            &[trunk_in, shape.hidden, shape.hidden, shape.actions],
            &[Activation::Mish, Activation::Mish, Activation::Tanh],
            rng,
        );
        ActorNetwork { shape, time, trunk }
    }

    pub fn shape(&self) -> ActorShape {
        self.shape
    }

    pub fn actions(&self) -> usize {
        self.shape.actions
    }

    pub fn state_dim(&self) -> usize {
        self.shape.state_dim
    }

    /// Zeroes the output layer so the predicted noise is identically zero.
    pub fn zero_output(&mut self) {
        let last = self.trunk.layers.last_mut().expect("trunk has layers");
        last.weights.fill(S::zero());
        last.biases.fill(S::zero());
    }

    /// Layer list used by checkpoints: step-embedding path, then trunk.
    pub fn layers(&self) -> Vec<DenseLayer<S>> {
        self.time.layers.iter().chain(&self.trunk.layers).cloned().collect()
    }

    pub fn from_layers(layers: Vec<DenseLayer<S>>) -> Result<Self> {
        if layers.len() != 5 {
            return Err(Error::Checkpoint(format!("actor needs 5 layers, found {}", layers.len())));
        }
        let mut layers = layers;
        let trunk = Mlp::from_layers(layers.split_off(2))?;
        let time = Mlp::from_layers(layers)?;
        let time_dim = time.input_dim();
        let actions = trunk.output_dim();
        let state_dim = trunk
            .input_dim()
            .checked_sub(actions + time_dim)
            .ok_or_else(|| Error::Checkpoint("trunk input narrower than action + step widths".into()))?;
        let shape = ActorShape {
            actions,
            state_dim,
            hidden: trunk.layers[0].outputs(),
            time_dim,
            time_hidden: time.layers[0].outputs(),
        };
        Ok(ActorNetwork { shape, time, trunk })
    }

    fn time_features(&self, t: usize) -> Result<Array2<S>> {
        let e = sinusoidal_pos_emb::<S>(t, self.shape.time_dim)?;
        let e = Array2::from_shape_vec((1, e.len()), e).expect("row vector");
        self.time.infer(e.view())
    }

    /// Squashed noise prediction for a batch, nothing recorded.
    pub fn predict_noise(&self, x_t: ArrayView2<S>, t: usize, states: ArrayView2<S>) -> Result<Array2<S>> {
        if x_t.ncols() != self.shape.actions || states.ncols() != self.shape.state_dim || x_t.nrows() != states.nrows() {
            return Err(Error::shape(
                "actor",
                format!(
                    "x_t {:?} / state {:?} for {} actions and state width {}",
                    x_t.dim(),
                    states.dim(),
                    self.shape.actions,
                    self.shape.state_dim
                ),
            ));
        }
        let temb = self.time_features(t)?;
        let temb = temb.broadcast((x_t.nrows(), temb.ncols())).expect("single row");
        let input = concatenate(Axis(1), &[x_t, states, temb]).expect("row counts match");
        self.trunk.infer(input.view())
    }

    pub fn bind(&self, g: &mut ComputeGraph<S>) -> BoundActor {
        BoundActor {
            time: self.time.bind(g),
            trunk: self.trunk.bind(g),
            time_dim: self.shape.time_dim,
        }
    }

    pub fn bind_frozen(&self, g: &mut ComputeGraph<S>) -> BoundActor {
        BoundActor {
            time: self.time.bind_frozen(g),
            trunk: self.trunk.bind_frozen(g),
            time_dim: self.shape.time_dim,
        }
    }
}

impl BoundActor {
    /// Records the squashed noise prediction for `x_t` (rows × actions).
    pub fn predict_noise<S: Scalar>(
        &self,
        g: &mut ComputeGraph<S>,
        x_t: NodeId,
        t: usize,
        states: NodeId,
    ) -> Result<NodeId> {
        let rows = g.value(x_t)?.nrows();
        let e = sinusoidal_pos_emb::<S>(t, self.time_dim)?;
        let e = g.constant(Array2::from_shape_vec((1, e.len()), e).expect("row vector"));
        let temb = self.time.forward(g, e)?;
        let temb = g.broadcast_rows(temb, rows)?;
        let input = g.concat(&[x_t, states, temb])?;
        self.trunk.forward(g, input)
    }

    pub fn grads<S: Scalar>(&self, grads: &crate::nn::Gradients<S>) -> Result<Vec<Vec<S>>> {
        let mut out = self.time.grads(grads)?;
        out.extend(self.trunk.grads(grads)?);
        Ok(out)
    }
}

impl<S: Scalar> ParamSet<S> for ActorNetwork<S> {
    fn params(&self) -> Vec<&[S]> {
        let mut p = self.time.params();
        p.extend(self.trunk.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut [S]> {
        let mut p = self.time.params_mut();
        p.extend(self.trunk.params_mut());
        p
    }
}
