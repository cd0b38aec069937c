//! Vector-valued extensions of operators between finite Banach function
//! spaces.
//!
//! Everything lives on finite measure spaces with strictly positive atoms:
//! weighted `L^p` spaces, Köthe–Bochner spaces `E(Y)` for coordinate `ℓ^p`
//! spaces `Y`, matrix operators with their least dominants and regular norms,
//! the tensor, basis and adjoint constructions of `Y`-valued extensions,
//! square-function estimates, conditional expectations and Cesàro
//! approximations of Banach limits.

pub mod condexp;
pub mod duality;
pub mod error;
pub mod extension;
pub mod funcspace;
pub mod limits;
pub mod measure;
pub mod operator;
pub mod rng;
pub mod sqfn;
pub mod suite;

pub use duality::{bochner_norm, bochner_pairing, y_norm, Basis, DualPair, FiniteBanachSpace, VectorFunction};
pub use error::{Error, Result};
pub use funcspace::{pairing, Exponent, FunctionSpace, ScalarFunction};
pub use measure::{MeasureSpace, Partition};
pub use operator::{MatrixOperator, NormEstimate, NormMethod, NormOptions};
