//! Toeplitz operators on weighted Bergman spaces `A²_λ(B^n)` of the unit ball:
//! truncated matrices, the level decomposition under quasi-radial symmetry,
//! Berezin transforms and spectral probes.

pub mod berezin;
pub mod decomposition;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod symbol;
pub mod toeplitz;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, SuiteReport};
pub use geometry::{enumerate_basis, BallGeometry, Level, MultiIndex, TruncatedBasis, WeightedSpace};
pub use linalg::CMatrix;
pub use quadrature::{QuadratureSpec, Scheme};
pub use spectral::MatrixSymbol;
pub use symbol::{BoundSymbol, Domain, ProductSymbol, Symbol};
pub use toeplitz::{toeplitz_matrix, Assembly, GammaSequence, OperatorMatrix};

pub use num_complex::Complex64;
