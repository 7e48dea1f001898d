pub mod criteria;
pub mod relax;
pub mod solver;

pub use criteria::*;
pub use relax::*;
pub use solver::{solve_sdp, solve_sdp_with, Sense, SdpProblem, SdpSolution, SolverOptions, Status};
