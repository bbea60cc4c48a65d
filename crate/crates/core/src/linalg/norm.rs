//! Power-iteration estimates of the spectral norm and of the Perron root.
//!
//! Quantities like `‖M⁻¹N‖` are evaluated through [`LinearOperator`] chains so
//! that no inverse or product is ever formed explicitly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lu::LuFactors;
use super::matrix::Matrix;
use super::vector::vec_norm2;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 5000;
const START_SEED: u64 = 0x5eed_0f_9a7e;

/// Something that can apply itself and its transpose to a vector.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl LinearOperator for Matrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.mat_vec(x)
    }
    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.mat_vec_transpose(x)
    }
}

/// The inverse of a factored matrix, applied by solves.
pub struct Inverse<'a>(pub &'a LuFactors);

impl LinearOperator for Inverse<'_> {
    fn nrows(&self) -> usize {
        self.0.dim()
    }
    fn ncols(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.solve(x)
    }
    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.solve_transpose(x)
    }
}

/// Product `F_0 F_1 … F_k` of operators, applied right to left.
pub struct Product<'a>(pub Vec<&'a dyn LinearOperator>);

impl LinearOperator for Product<'_> {
    fn nrows(&self) -> usize {
        self.0.first().map_or(0, |f| f.nrows())
    }
    fn ncols(&self) -> usize {
        self.0.last().map_or(0, |f| f.ncols())
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = x.to_vec();
        for f in self.0.iter().rev() {
            v = f.apply(&v)?;
        }
        Ok(v)
    }
    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = x.to_vec();
        for f in &self.0 {
            v = f.apply_transpose(&v)?;
        }
        Ok(v)
    }
}

/// Deterministic, strictly positive start vector.
pub(crate) fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED ^ n as u64);
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let s = vec_norm2(&v);
    v.into_iter().map(|x| x / s).collect()
}

fn check_params(tol: f64, max_iter: usize) -> Result<()> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter(format!(
            "power iteration needs tol > 0 and max_iter > 0 (got {tol}, {max_iter})"
        )));
    }
    Ok(())
}

/// Largest singular value of `op`, by power iteration on `opᵀ op`.
///
/// Stops when two consecutive estimates agree to relative `tol`. If that never
/// happens within `max_iter` steps, [`Error::NoConvergence`] carries the best
/// estimate seen.
pub fn operator_two_norm(op: &dyn LinearOperator, tol: f64, max_iter: usize) -> Result<f64> {
    check_params(tol, max_iter)?;
    let n = op.ncols();
    if n == 0 || op.nrows() == 0 {
        return Ok(0.0);
    }
    let mut v = start_vector(n);
    let mut prev = f64::NAN;
    for iter in 0..max_iter {
        let w = op.apply(&v)?;
        let est = vec_norm2(&w);
        if !est.is_finite() {
            return Err(Error::NonFinite { what: "norm estimate" });
        }
        if est == 0.0 {
            // v lies in the null space; a positive start rules that out unless op = 0
            return Ok(0.0);
        }
        if (est - prev).abs() <= tol * est {
            return Ok(est);
        }
        prev = est;
        let z = op.apply_transpose(&w)?;
        let zn = vec_norm2(&z);
        if zn == 0.0 {
            return Ok(est);
        }
        v = z.into_iter().map(|x| x / zn).collect();
        if iter + 1 == max_iter {
            break;
        }
    }
    Err(Error::NoConvergence {
        what: "two-norm".into(),
        best_estimate: prev,
        iterations: max_iter,
    })
}

/// `‖m‖₂`.
pub fn two_norm(m: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    operator_two_norm(m, tol, max_iter)
}

/// `‖F⁻¹ R‖₂` where `F` is given by its factors.
pub fn two_norm_of_product(solve_with: &LuFactors, right: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    if right.rows() != solve_with.dim() {
        return Err(Error::DimensionMismatch {
            expected: solve_with.dim(),
            found: right.rows(),
        });
    }
    let inv = Inverse(solve_with);
    operator_two_norm(&Product(vec![&inv, right]), tol, max_iter)
}

/// Perron root of an entrywise nonnegative matrix.
///
/// Iterates with `m + I`, which has the same Perron vector and is primitive
/// whenever `m` is irreducible, so periodic matrices still converge.
pub fn spectral_radius_nonneg(m: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    check_params(tol, max_iter)?;
    let n = m.ensure_square()?;
    if m.stored_entries().any(|(_, _, v)| v < 0.0) {
        return Err(Error::InvalidParameter("matrix has negative entries".into()));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut v = start_vector(n);
    let mut prev = f64::NAN;
    for _ in 0..max_iter {
        let mut w = m.mat_vec(&v)?;
        w.iter_mut().zip(&v).for_each(|(wi, vi)| *wi += vi);
        let shifted = vec_norm2(&w);
        let est = shifted - 1.0;
        if (est - prev).abs() <= tol * est.abs().max(tol) {
            return Ok(est.max(0.0));
        }
        prev = est;
        v = w.into_iter().map(|x| x / shifted).collect();
    }
    Err(Error::NoConvergence {
        what: "spectral radius".into(),
        best_estimate: prev.max(0.0),
        iterations: max_iter,
    })
}
