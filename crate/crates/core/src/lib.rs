pub mod algebra;
pub mod bogoliubov;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod sweep;
pub mod thermal;

pub use error::{Error, Result};
