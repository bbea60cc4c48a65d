//! Exact reference solutions for small instances by sign-pattern enumeration.
//!
//! If `sign(x) = s` then `|x| = diag(s)x`, so every solution solves the linear
//! system `(A − B·diag(s))x = c` for some `s ∈ {±1}ⁿ` whose signs it respects.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::vector::dist2;
use crate::linalg::{abs_vector, lu_factor, vec_norm2, Matrix};

pub const DEFAULT_N_MAX: usize = 16;
/// Components this small count as either sign.
pub const SIGN_TOL: f64 = 1e-12;
/// Solutions closer than this are the same solution.
pub const DEDUP_TOL: f64 = 1e-9;

/// All solutions of `Ax − B|x| = c`, in lexicographic sign-pattern order.
pub fn enumerate_solutions(a: &Matrix, b: &Matrix, c: &[f64]) -> Result<Vec<Vec<f64>>> {
    enumerate_solutions_with(a, b, c, DEFAULT_N_MAX)
}

pub fn enumerate_solutions_with(a: &Matrix, b: &Matrix, c: &[f64], n_max: usize) -> Result<Vec<Vec<f64>>> {
    let n = a.ensure_square()?;
    for len in [b.rows(), b.cols(), c.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    if n > n_max || n >= usize::BITS as usize {
        return Err(Error::TooLarge { n, max: n_max });
    }
    let a = a.to_dense();
    let b = b.to_dense();
    let candidates: Vec<Option<Vec<f64>>> = (0..1usize << n)
        .into_par_iter()
        .map(|pattern| solve_pattern(&a, &b, c, pattern))
        .collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for x in candidates.into_iter().flatten() {
        if out.iter().all(|y| dist2(&x, y).map_or(true, |d| d > DEDUP_TOL)) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Bit `i` of `pattern` set means `sᵢ = −1`.
fn sign(pattern: usize, i: usize) -> f64 {
    if pattern >> i & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn solve_pattern(a: &Matrix, b: &Matrix, c: &[f64], pattern: usize) -> Option<Vec<f64>> {
    let n = c.len();
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, a.get(i, j) - b.get(i, j) * sign(pattern, j));
        }
    }
    let x = lu_factor(&m).ok()?.solve(c).ok()?;
    let consistent = x
        .iter()
        .enumerate()
        .all(|(i, xi)| sign(pattern, i) * xi >= 0.0 || xi.abs() <= SIGN_TOL);
    consistent.then_some(x)
}

/// `‖Ax − B|x| − c‖ ≤ tol · max(1, ‖c‖)`.
pub fn verify_solution(a: &Matrix, b: &Matrix, c: &[f64], x: &[f64], tol: f64) -> Result<bool> {
    let n = a.ensure_square()?;
    for len in [b.rows(), b.cols(), c.len(), x.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let mut r = a.mat_vec(x)?;
    let bx = b.mat_vec(&abs_vector(x))?;
    for ((ri, bi), ci) in r.iter_mut().zip(&bx).zip(c) {
        *ri -= bi + ci;
    }
    Ok(vec_norm2(&r) <= tol * vec_norm2(c).max(1.0))
}
