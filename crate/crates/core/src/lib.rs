pub mod corpus;
pub mod error;
pub mod eval;
pub mod kv;
pub mod model;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
