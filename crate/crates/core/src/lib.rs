pub mod admm;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod lut;
pub mod noise;
pub mod recl;
pub mod training;
pub mod transpiler;

pub use error::{Error, Result};
