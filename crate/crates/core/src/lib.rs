pub mod algebra;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod isomap;
pub mod qcore;
pub mod verify;

pub use error::{QError, Result};
pub use fock::{FockOperator, FockState, LambdaIndex, ModelParams};
