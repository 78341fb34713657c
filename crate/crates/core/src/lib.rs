//! Sharp constants, extremal elements and best-approximation errors for a
//! family of mean-squared and multiplicative operator inequalities over
//! spectral weight models: torus and rank-one symmetric space catalogs, a
//! continuous R^d model, Stechkin-type budget problems, and interpolation
//! inequality verification for trigonometric polynomials.

pub mod catalog;
pub mod config;
pub mod error;
pub mod hull;
pub mod mean_squared;
pub mod multiplicative;
pub mod optimize;
pub mod quad;
pub mod report;
pub mod solyar;
pub mod spectral;
pub mod special;
pub mod stechkin;

pub use error::{Error, Result};
pub use spectral::{ExtendedSum, IndexSet, SeriesSum, SpectralModel, TailPolicy, WeightVector};
