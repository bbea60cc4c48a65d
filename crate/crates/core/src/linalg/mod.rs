//! Dense and banded real linear algebra: storage, LU and triangular solves,
//! power-iteration norm estimates, Matrix Market I/O.

mod lu;
mod matrix;
pub mod mtx;
mod norm;
pub mod vector;

pub use lu::{lu_factor, lu_solve, triangular_solve, LuFactors, Triangle, PIVOT_THRESHOLD};
pub use matrix::{Matrix, Storage};
pub use norm::{
    operator_two_norm, spectral_radius_nonneg, two_norm, two_norm_of_product, Inverse, LinearOperator, Product,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use vector::{abs_vector, vec_norm2};
