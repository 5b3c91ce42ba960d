//! Cheeger deformations of metrics on manifolds with a Lie group action.

pub mod cheeger;
pub mod config;
pub mod error;
pub mod exec;
pub mod lie;
pub mod linalg;
pub mod manifold;
pub mod rng;
pub mod runner;
pub mod tensor;
pub mod verify;

pub use error::{GeomError, Result};
