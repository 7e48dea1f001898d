pub mod gme;
pub mod objective;
pub mod optim;
pub mod triv;

pub use gme::*;
pub use optim::{minimize, GmeEstimate, Method, Objective, OptimizerConfig};
