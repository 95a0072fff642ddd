use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::activation::Activation;
use super::graph::{ComputeGraph, Gradients, NodeId};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fully connected layer, `y = act(W x + b)` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<S> {
    pub weights: Array2<S>,
    pub biases: Array1<S>,
    pub activation: Activation,
}

impl<S: Scalar> DenseLayer<S> {
    /// Weights `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`, zero biases.
    pub fn init<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = (1.0 / inputs as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        let weights = Array2::from_shape_simple_fn((outputs, inputs), || S::of(dist.sample(rng)));
        DenseLayer {
            weights,
            biases: Array1::zeros(outputs),
            activation,
        }
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        DenseLayer {
            weights: Array2::zeros((outputs, inputs)),
            biases: Array1::zeros(outputs),
            activation,
        }
    }

    pub fn identity(n: usize) -> Self {
        DenseLayer {
            weights: Array2::eye(n),
            biases: Array1::zeros(n),
            activation: Activation::None,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn infer(&self, x: ArrayView2<S>) -> Result<Array2<S>> {
        if x.ncols() != self.inputs() {
            return Err(Error::shape(
                "dense",
                format!("input width {} but layer expects {}", x.ncols(), self.inputs()),
            ));
        }
        let mut y = if x.nrows() <= 4 {
            // gemm packs the whole weight matrix per call; mat-vec is far cheaper here.
            let mut y = Array2::zeros((x.nrows(), self.outputs()));
            for (mut out, row) in y.rows_mut().into_iter().zip(x.rows()) {
                out.assign(&self.weights.dot(&row));
            }
            y
        } else {
            x.dot(&self.weights.t())
        };
        y += &self.biases.view().insert_axis(Axis(0));
        if self.activation != Activation::None {
            let act = self.activation;
            y.mapv_inplace(|v| act.apply(v));
        }
        Ok(y)
    }
}

/// Layer parameters registered on a graph.
#[derive(Debug, Clone, Copy)]
pub struct BoundLayer {
    pub weights: NodeId,
    pub biases: NodeId,
    activation: Activation,
}

impl BoundLayer {
    pub fn forward<S: Scalar>(&self, g: &mut ComputeGraph<S>, x: NodeId) -> Result<NodeId> {
        let z = g.matmul_t(x, self.weights)?;
        let z = g.add_row(z, self.biases)?;
        g.activate(z, self.activation)
    }
}

/// Sequential stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<S> {
    pub layers: Vec<DenseLayer<S>>,
}

/// An [`Mlp`] whose parameters live on a graph.
#[derive(Debug, Clone)]
pub struct BoundMlp {
    pub layers: Vec<BoundLayer>,
}

impl<S: Scalar> Mlp<S> {
    /// `widths` lists input width then every layer's output width.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], activations: &[Activation], rng: &mut R) -> Self {
        assert_eq!(widths.len(), activations.len() + 1, "one activation per layer");
        let layers = widths
            .windows(2)
            .zip(activations)
            .map(|(w, &a)| DenseLayer::init(w[0], w[1], a, rng))
            .collect();
        Mlp { layers }
    }

    pub fn from_layers(layers: Vec<DenseLayer<S>>) -> Result<Self> {
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::shape(
                    "mlp",
                    format!("layer widths {} -> {} do not chain", pair[0].outputs(), pair[1].inputs()),
                ));
            }
        }
        Ok(Mlp { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs())
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs())
    }

    /// Plain evaluation, nothing recorded.
    pub fn infer(&self, x: ArrayView2<S>) -> Result<Array2<S>> {
        let mut layers = self.layers.iter();
        let first = layers.next().ok_or_else(|| Error::shape("mlp", "no layers"))?;
        let mut y = first.infer(x)?;
        for l in layers {
            y = l.infer(y.view())?;
        }
        Ok(y)
    }

    pub fn bind(&self, g: &mut ComputeGraph<S>) -> BoundMlp {
        let layers = self
            .layers
            .iter()
            .map(|l| BoundLayer {
                weights: g.param(l.weights.clone()),
                biases: g.param(l.biases.view().insert_axis(Axis(0)).to_owned()),
                activation: l.activation,
            })
            .collect();
        BoundMlp { layers }
    }

    /// Registers the parameters as constants: outputs depend on them but
    /// they receive no gradient.
    pub fn bind_frozen(&self, g: &mut ComputeGraph<S>) -> BoundMlp {
        let layers = self
            .layers
            .iter()
            .map(|l| BoundLayer {
                weights: g.constant(l.weights.clone()),
                biases: g.constant(l.biases.view().insert_axis(Axis(0)).to_owned()),
                activation: l.activation,
            })
            .collect();
        BoundMlp { layers }
    }
}

impl BoundMlp {
    pub fn forward<S: Scalar>(&self, g: &mut ComputeGraph<S>, x: NodeId) -> Result<NodeId> {
        self.layers.iter().try_fold(x, |h, l| l.forward(g, h))
    }

    /// Gradients in the same order as [`ParamSet::params`].
    pub fn grads<S: Scalar>(&self, grads: &Gradients<S>) -> Result<Vec<Vec<S>>> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &self.layers {
            out.push(grads.wrt(l.weights)?.into_iter().collect());
            out.push(grads.wrt(l.biases)?.into_iter().collect());
        }
        Ok(out)
    }
}

/// Records `layers` applied to `input` on `graph`, returning the output node.
pub fn forward<S: Scalar>(
    graph: &mut ComputeGraph<S>,
    layers: &[DenseLayer<S>],
    input: &Tensor<S>,
) -> Result<NodeId> {
    let mlp = Mlp::from_layers(layers.to_vec())?;
    let x = graph.input(input);
    let bound = mlp.bind(graph);
    bound.forward(graph, x)
}

/// Anything that exposes an ordered list of parameter buffers.
pub trait ParamSet<S> {
    fn params(&self) -> Vec<&[S]>;
    fn params_mut(&mut self) -> Vec<&mut [S]>;

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}

impl<S: Scalar> ParamSet<S> for Mlp<S> {
    fn params(&self) -> Vec<&[S]> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.weights.as_slice().expect("standard layout"),
                    l.biases.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    fn params_mut(&mut self) -> Vec<&mut [S]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [
                    l.weights.as_slice_mut().expect("standard layout"),
                    l.biases.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }
}

/// `target ← tau·online + (1 − tau)·target`, parameter by parameter.
pub fn soft_update<S: Scalar, P: ParamSet<S>>(online: &P, target: &mut P, tau: S) {
    let keep = S::one() - tau;
    for (t, o) in target.params_mut().into_iter().zip(online.params()) {
        for (tv, &ov) in t.iter_mut().zip(o) {
            *tv = tau * ov + keep * *tv;
        }
    }
}

/// Euclidean distance between two parameter sets of the same topology.
pub fn param_distance<S: Scalar, P: ParamSet<S>>(a: &P, b: &P) -> f64 {
    a.params()
        .into_iter()
        .zip(b.params())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| (u - v).to_f64_lossy().powi(2)))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_layer_passes_input() {
        let mut g = ComputeGraph::<f64>::new();
        let input = Tensor::vector(vec![1.5, -2.0, 0.25]);
        let out = forward(&mut g, &[DenseLayer::identity(3)], &input).unwrap();
        assert_eq!(g.value(out).unwrap(), &array![[1.5, -2.0, 0.25]]);
    }

    #[test]
    fn zero_weights_emit_activated_bias() {
        let mut layer = DenseLayer::<f64>::zeros(4, 2, Activation::Tanh);
        layer.biases = array![0.5, -1.0];
        let y = layer.infer(array![[3.0, 1.0, -7.0, 2.0]].view()).unwrap();
        assert_eq!(y, array![[0.5_f64.tanh(), (-1.0_f64).tanh()]]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let layer = DenseLayer::<f64>::zeros(4, 2, Activation::None);
        assert!(layer.infer(array![[1.0, 2.0]].view()).is_err());
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = DenseLayer::<f64>::init(64, 8, Activation::Mish, &mut rng);
        let b = 1.0 / 8.0;
        assert!(l.weights.iter().all(|w| w.abs() <= b));
        assert!(l.biases.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn graph_and_plain_forward_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mlp = Mlp::<f64>::new(&[5, 7, 3], &[Activation::Mish, Activation::Tanh], &mut rng);
        let x = array![[0.1, -0.3, 0.7, 2.0, -1.0], [0.0, 0.0, 1.0, 0.5, 0.5]];
        let plain = mlp.infer(x.view()).unwrap();
        let mut g = ComputeGraph::new();
        let b = mlp.bind(&mut g);
        let xi = g.constant(x);
        let y = b.forward(&mut g, xi).unwrap();
        let recorded = g.value(y).unwrap();
        assert!(recorded.iter().zip(&plain).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn soft_update_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let online = Mlp::<f64>::new(&[2, 3], &[Activation::None], &mut rng);
        let mut target = Mlp::<f64>::new(&[2, 3], &[Activation::None], &mut rng);
        soft_update(&online, &mut target, 1.0);
        assert_eq!(online, target);
    }
}
