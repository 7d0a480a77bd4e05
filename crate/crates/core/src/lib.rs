pub mod bath;
pub mod error;
pub mod fdt;
pub mod linear;
pub mod markovian;
pub mod microbath;
pub mod quadrature;
pub mod response;
pub mod rwa;
pub mod stats;
pub mod thermal;
pub mod thermo;

pub use error::{Error, Result};
