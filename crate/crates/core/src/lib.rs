//! Lévy Laplacians on transported frames over Yang-Mills connections in four
//! dimensions: charts, so(4) algebra, connections, parallel transport,
//! modified Lévy traces and holonomy classification.

pub mod algebra;
pub mod coeff;
pub mod connection;
pub mod error;
pub mod field;
pub mod geometry;
pub mod holonomy;
pub mod jet;
pub mod levy;
pub mod linalg;
pub mod quadrature;
pub mod selftest;
pub mod transport;

pub type Mat4 = nalgebra::Matrix4<f64>;
pub type Vec4 = nalgebra::Vector4<f64>;

pub use error::{Error, Result};
