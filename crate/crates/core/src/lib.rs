pub mod baselines;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod policy;
pub mod scalar;
pub mod seeds;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete double-precision instantiations.
pub type Agod64 = policy::Agod<f64>;
pub type ActorNetwork64 = policy::ActorNetwork<f64>;
pub type Mlp64 = nn::Mlp<f64>;
