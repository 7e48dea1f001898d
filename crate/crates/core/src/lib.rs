pub mod error;
pub mod haar;
pub mod linalg;
pub mod measures;
pub mod state;
pub mod zoo;

pub use error::{QError, Result};
pub use linalg::{CMat, CVec, C64};
pub use state::*;
