//! Band LU factorization with partial pivoting and triangular solves.
//!
//! Dense matrices go through the same band code with the band taken from the
//! nonzero pattern, so dense and banded storage of the same matrix factor
//! identically.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Pivots smaller than this times `max |a_ij|` declare the matrix singular.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Factors `L_{n-1} P_{n-1} ... L_0 P_0 A = U` of a square matrix.
///
/// `U` has upper bandwidth `kl + ku`; the Gauss transforms `L_k` are kept as
/// `kl` multipliers per column together with the row interchange of each step.
#[derive(Clone, Debug)]
pub struct LuFactors {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i - kl ..= i + kl + ku` of the working matrix.
    work: Vec<f64>,
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl LuFactors {
    #[inline]
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.work[i * self.width() + (j + self.kl - i)]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Solves `A z = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut z = b.to_vec();
        self.solve_in_place(&mut z)?;
        Ok(z)
    }

    pub fn solve_in_place(&self, z: &mut [f64]) -> Result<()> {
        let n = self.n;
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: z.len(),
            });
        }
        let kl = self.kl;
        for k in 0..n {
            z.swap(k, self.pivots[k]);
            let zk = z[k];
            if zk != 0.0 {
                let last = (k + kl).min(n - 1);
                for i in k + 1..=last {
                    z[i] -= self.multipliers[k * kl + (i - k - 1)] * zk;
                }
            }
        }
        let w = self.width();
        let reach = self.kl + self.ku;
        for i in (0..n).rev() {
            let last = (i + reach).min(n - 1);
            let row = &self.work[i * w + kl..i * w + kl + (last - i) + 1];
            let mut s = z[i];
            for (u, zj) in row[1..].iter().zip(&z[i + 1..=last]) {
                s -= u * zj;
            }
            z[i] = s / row[0];
        }
        Ok(())
    }

    /// Solves `Aᵀ z = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut z = b.to_vec();
        let reach = self.kl + self.ku;
        // Uᵀ w = b
        for i in 0..n {
            z[i] /= self.at(i, i);
            let zi = z[i];
            if zi != 0.0 {
                for j in i + 1..=(i + reach).min(n - 1) {
                    z[j] -= self.at(i, j) * zi;
                }
            }
        }
        // apply L_kᵀ then P_kᵀ, last step first
        let kl = self.kl;
        for k in (0..n).rev() {
            let last = (k + kl).min(n - 1);
            let mut s = z[k];
            for i in k + 1..=last {
                s -= self.multipliers[k * kl + (i - k - 1)] * z[i];
            }
            z[k] = s;
            z.swap(k, self.pivots[k]);
        }
        Ok(z)
    }
}

/// Factors a square matrix.
///
/// Fails with [`Error::SingularMatrix`] when the largest available pivot in a
/// column falls below [`PIVOT_THRESHOLD`] times the largest entry magnitude.
pub fn lu_factor(a: &Matrix) -> Result<LuFactors> {
    let n = a.ensure_square()?;
    if n == 0 {
        return Err(Error::TooSmall("cannot factor an empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "matrix entries" });
    }
    let (kl, ku) = a.nonzero_bandwidth();
    let w = 2 * kl + ku + 1;
    let mut work = vec![0.0; n * w];
    for i in 0..n {
        let lo = i.saturating_sub(kl);
        let hi = (i + ku).min(n - 1);
        for j in lo..=hi {
            work[i * w + (j + kl - i)] = a.get(i, j);
        }
    }
    let scale = a.max_abs();
    let threshold = PIVOT_THRESHOLD * scale;
    let mut multipliers = vec![0.0; n * kl];
    let mut pivots = vec![0usize; n];

    for k in 0..n {
        let last_row = (k + kl).min(n - 1);
        let mut p = k;
        let mut best = work[k * w + kl].abs();
        for i in k + 1..=last_row {
            let v = work[i * w + (k + kl - i)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= threshold || best == 0.0 {
            return Err(Error::SingularMatrix { index: k, pivot: best });
        }
        pivots[k] = p;
        let last_col = (k + kl + ku).min(n - 1);
        if p != k {
            for j in k..=last_col {
                work.swap(k * w + (j + kl - k), p * w + (j + kl - p));
            }
        }
        let pivot = work[k * w + kl];
        for i in k + 1..=last_row {
            let idx = i * w + (k + kl - i);
            let l = work[idx] / pivot;
            work[idx] = 0.0;
            multipliers[k * kl + (i - k - 1)] = l;
            if l != 0.0 {
                for j in k + 1..=last_col {
                    let ukj = work[k * w + (j + kl - k)];
                    work[i * w + (j + kl - i)] -= l * ukj;
                }
            }
        }
    }
    Ok(LuFactors {
        n,
        kl,
        ku,
        work,
        multipliers,
        pivots,
    })
}

/// Convenience wrapper: factor then solve once.
pub fn lu_solve(factors: &LuFactors, b: &[f64]) -> Result<Vec<f64>> {
    factors.solve(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triangle {
    Lower,
    Upper,
}

/// Substitution solve with a lower or upper triangular matrix.
///
/// Entries on the other side of the diagonal are ignored.
pub fn triangular_solve(m: &Matrix, b: &[f64], shape: Triangle) -> Result<Vec<f64>> {
    let n = m.ensure_square()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut z = b.to_vec();
    let solve_row = |i: usize, z: &mut [f64]| -> Result<()> {
        let d = m.get(i, i);
        if d == 0.0 {
            return Err(Error::ZeroDiagonal { index: i });
        }
        let (start, end) = m.row_span(i);
        let row = m.row_values(i);
        let s = match shape {
            Triangle::Lower => row[..i - start].iter().zip(&z[start..i]).fold(z[i], |s, (a, x)| s - a * x),
            Triangle::Upper => row[i + 1 - start..].iter().zip(&z[i + 1..end]).fold(z[i], |s, (a, x)| s - a * x),
        };
        z[i] = s / d;
        Ok(())
    };
    match shape {
        Triangle::Lower => {
            for i in 0..n {
                solve_row(i, &mut z)?;
            }
        }
        Triangle::Upper => {
            for i in (0..n).rev() {
                solve_row(i, &mut z)?;
            }
        }
    }
    Ok(z)
}
