//! Dense network substrate: tensors, a reverse-mode tape, layers,
//! embeddings, Adam and checkpoints.

pub mod activation;
pub mod adam;
pub mod checkpoint;
pub mod embedding;
pub mod graph;
pub mod layer;
pub mod tensor;

pub use activation::{mish, Activation};
pub use adam::AdamState;
pub use embedding::sinusoidal_pos_emb;
pub use graph::{ComputeGraph, Gradients, NodeId};
pub use layer::{forward, param_distance, soft_update, BoundMlp, DenseLayer, Mlp, ParamSet};
pub use tensor::Tensor;
