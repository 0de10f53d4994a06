//! Dense linear algebra over complex floats and exact Gaussian rationals.

pub mod linsolve;
pub mod matrix;
pub mod scalar;
pub mod spectral;

pub use linsolve::{exact_inverse, inverse, null_space, rank, rref, Lu};
pub use matrix::{
    dot, superop_left, superop_right, superop_sandwich, trace_functional, unvectorize, vectorize, Matrix,
    VectorizedOperator,
};
pub use scalar::{format_rational, parse_rational, ExactComplex, Field, Param, C64};
pub use spectral::{
    eig, eigenvalues, hermitian_eigenvalues, min_eigenvalue, null_vector, range_basis, singular_values,
    trace_distance, SpectralData, Tolerances,
};
