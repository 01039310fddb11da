pub mod counting;
pub mod error;
pub mod expsum;
pub mod manifold;
pub mod nondegen;
pub mod scalar;
pub mod series;
pub mod symspace;
pub mod typicality;

pub use error::{Error, Result};
pub use scalar::{PolyScalar, Scalar};
pub use manifold::{builtin, eval_all, ManifoldSpec, PolyMap, Rectangle};
pub use symspace::{Signature, SymMatrix, SymPencil};

pub type Rational = num_rational::BigRational;
pub type SymMatrixF64 = SymMatrix<f64>;
pub type SymPencilF64 = SymPencil<f64>;
pub type SymMatrixQ = SymMatrix<Rational>;
