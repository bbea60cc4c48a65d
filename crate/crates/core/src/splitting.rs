//! Matrix splittings `U = M − N` with `M` nonsingular.
//!
//! The diagonal/strict-triangle convention is `A = D − L − U`: `L` and `U` are
//! the *negated* strictly lower and upper parts of `A`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, triangular_solve, LinearOperator, LuFactors, Matrix, Triangle};

/// Weight on `L` in the default triangular splitting `M = D − ¾L`.
pub const DEFAULT_LOWER_WEIGHT: f64 = 0.75;

/// `A = D − L − U`.
#[derive(Clone, Debug)]
pub struct Dlu {
    pub d: Matrix,
    pub l: Matrix,
    pub u: Matrix,
}

pub fn dlu(a: &Matrix) -> Result<Dlu> {
    a.ensure_square()?;
    let d = a.band_part(0, 0);
    let l = a.band_part(isize::MIN / 2, -1).scale(-1.0);
    let u = a.band_part(1, isize::MAX / 2).scale(-1.0);
    Ok(Dlu { d, l, u })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveKind {
    Diagonal,
    Lower,
    Upper,
    Lu,
}

#[derive(Clone)]
enum Solver {
    Diagonal(Vec<f64>),
    Triangular { m: Matrix, mt: Matrix, shape: Triangle },
    Lu(LuFactors),
}

/// A splitting `M − N` whose `M` carries a prepared solve.
#[derive(Clone)]
pub struct Splitting {
    m_part: Matrix,
    n_part: Matrix,
    solver: Solver,
    direct: bool,
}

impl fmt::Debug for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Splitting")
            .field("n", &self.dim())
            .field("solve", &self.solve_kind())
            .field("direct", &self.direct)
            .finish()
    }
}

impl Splitting {
    /// Builds a splitting from its two parts and validates `M`.
    ///
    /// `direct` records whether `M − N` is meant to equal the split matrix; the
    /// only non-direct pair in the library is the literal shift-splitting pivot.
    pub fn new(m_part: Matrix, n_part: Matrix, direct: bool) -> Result<Self> {
        let n = m_part.ensure_square()?;
        if n_part.rows() != n || n_part.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: n_part.rows(),
            });
        }
        if !m_part.is_finite() || !n_part.is_finite() {
            return Err(Error::NonFinite { what: "splitting parts" });
        }
        let (lo, up) = m_part.nonzero_bandwidth();
        let triangular = (lo == 0) != (up == 0);
        if triangular {
            if let Some(index) = m_part.diagonal().iter().position(|d| *d == 0.0) {
                return Err(Error::ZeroDiagonal { index });
            }
        }
        // factorization decides nonsingularity for every strategy
        let factors = lu_factor(&m_part)?;
        let solver = match (lo, up) {
            (0, 0) => Solver::Diagonal(m_part.diagonal()),
            (_, 0) | (0, _) => {
                let shape = if up == 0 { Triangle::Lower } else { Triangle::Upper };
                let m = m_part.compact()?;
                let mt = m.transpose();
                Solver::Triangular { m, mt, shape }
            }
            _ => Solver::Lu(factors),
        };
        Ok(Splitting {
            m_part,
            n_part,
            solver,
            direct,
        })
    }

    /// `A = M − N` with `N = M − A`.
    pub fn from_m_part(a: &Matrix, m_part: Matrix) -> Result<Self> {
        let n_part = m_part.sub(a)?;
        Self::new(m_part, n_part, true)
    }

    pub fn dim(&self) -> usize {
        self.m_part.rows()
    }

    pub fn m_part(&self) -> &Matrix {
        &self.m_part
    }

    pub fn n_part(&self) -> &Matrix {
        &self.n_part
    }

    pub fn is_direct_splitting(&self) -> bool {
        self.direct
    }

    /// `M − N`.
    pub fn split_matrix(&self) -> Matrix {
        self.m_part.sub(&self.n_part).expect("parts share dimensions")
    }

    pub fn solve_kind(&self) -> SolveKind {
        match &self.solver {
            Solver::Diagonal(_) => SolveKind::Diagonal,
            Solver::Triangular { shape: Triangle::Lower, .. } => SolveKind::Lower,
            Solver::Triangular { shape: Triangle::Upper, .. } => SolveKind::Upper,
            Solver::Lu(_) => SolveKind::Lu,
        }
    }

    /// `M⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.len(),
            });
        }
        match &self.solver {
            Solver::Diagonal(d) => Ok(b.iter().zip(d).map(|(x, di)| x / di).collect()),
            Solver::Triangular { m, shape, .. } => triangular_solve(m, b, *shape),
            Solver::Lu(f) => f.solve(b),
        }
    }

    /// `M⁻ᵀ b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        match &self.solver {
            Solver::Diagonal(_) => self.solve(b),
            Solver::Triangular { mt, shape, .. } => {
                let flipped = match shape {
                    Triangle::Lower => Triangle::Upper,
                    Triangle::Upper => Triangle::Lower,
                };
                triangular_solve(mt, b, flipped)
            }
            Solver::Lu(f) => f.solve_transpose(b),
        }
    }

    /// `M⁻¹` as an operator, for norm estimates.
    pub fn m_inverse(&self) -> MInverse<'_> {
        MInverse(self)
    }
}

pub struct MInverse<'a>(&'a Splitting);

impl LinearOperator for MInverse<'_> {
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

/// `M = D − wL`, `N = (1 − w)L + U`.
pub fn triangular_splitting(a: &Matrix, lower_weight: f64) -> Result<Splitting> {
    let parts = dlu(a)?;
    if let Some(index) = parts.d.diagonal().iter().position(|d| *d == 0.0) {
        return Err(Error::ZeroDiagonal { index });
    }
    let m_part = parts.d.lin_comb(1.0, &parts.l, -lower_weight)?;
    let n_part = parts.l.lin_comb(1.0 - lower_weight, &parts.u, 1.0)?;
    Splitting::new(m_part, n_part, true)
}

/// The splitting used by the benchmark's GNMS and RMS runs: `M = D − ¾L`, `N = ¼L + U`.
pub fn default_triangular_splitting(a: &Matrix) -> Result<Splitting> {
    triangular_splitting(a, DEFAULT_LOWER_WEIGHT)
}

/// Gauss–Seidel: `M = D − L`, `N = U`.
pub fn gauss_seidel_splitting(a: &Matrix) -> Result<Splitting> {
    triangular_splitting(a, 1.0)
}

/// `M = A`, `N = 0`.
pub fn trivial_splitting(a: &Matrix) -> Result<Splitting> {
    let n = a.ensure_square()?;
    Splitting::new(a.clone(), Matrix::banded_zeros(n, 0, 0), true)
}

/// `M = (A + Ω)/2`, `N = (Ω − A)/2`.
pub fn shift_splitting(a: &Matrix, omega: &Matrix) -> Result<Splitting> {
    let m_part = a.lin_comb(0.5, omega, 0.5)?;
    let n_part = omega.lin_comb(0.5, a, -0.5)?;
    Splitting::new(m_part, n_part, true)
}

/// The literal shift-splitting pivot pair `(A + Ω, Ω − A)`; its difference is `2A`.
pub fn shift_pivot_pair(a: &Matrix, omega: &Matrix) -> Result<Splitting> {
    let m_part = a.add(omega)?;
    let n_part = omega.sub(a)?;
    Splitting::new(m_part, n_part, false)
}

/// `M = M̄ + Ω`, `N = N̄ + Ω`.
pub fn nms_splitting(inner: &Splitting, omega: &Matrix) -> Result<Splitting> {
    let m_part = inner.m_part().add(omega)?;
    let n_part = inner.n_part().add(omega)?;
    Splitting::new(m_part, n_part, inner.is_direct_splitting())
}

/// `M = θA + Ω`, `N = Ω + (θ − 1)A`.
pub fn relaxed_splitting(a: &Matrix, theta: f64, omega: &Matrix) -> Result<Splitting> {
    check_theta(theta)?;
    let m_part = a.lin_comb(theta, omega, 1.0)?;
    let n_part = omega.lin_comb(1.0, a, theta - 1.0)?;
    Splitting::new(m_part, n_part, true)
}

/// `M = θM̂ + Ω̂`, `N = Ω̂ + (θ − 1)M̂ + N̂` for an inner splitting `A = M̂ − N̂`.
pub fn relaxed_inner_splitting(inner: &Splitting, theta: f64, omega_hat: &Matrix) -> Result<Splitting> {
    check_theta(theta)?;
    let m_part = inner.m_part().lin_comb(theta, omega_hat, 1.0)?;
    let n_part = omega_hat
        .lin_comb(1.0, inner.m_part(), theta - 1.0)?
        .add(inner.n_part())?;
    Splitting::new(m_part, n_part, inner.is_direct_splitting())
}

/// `Q1 = q1·I`, `Q2 = q2·I`.
pub fn scaled_identity_splitting(n: usize, q1: f64, q2: f64) -> Result<Splitting> {
    Splitting::new(
        Matrix::from_diagonal(&vec![q1; n]),
        Matrix::from_diagonal(&vec![q2; n]),
        true,
    )
}

/// `Q1 = I`, `Q2 = 0`.
pub fn identity_splitting(n: usize) -> Result<Splitting> {
    scaled_identity_splitting(n, 1.0, 0.0)
}

/// `factor · diag(A)`, the Ω choices of the benchmark (`2·diag(A)`, `½·diag(A)`).
pub fn diag_multiple(a: &Matrix, factor: f64) -> Matrix {
    a.diagonal_part().scale(factor)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta < 0.0 || !theta.is_finite() {
        Err(Error::NegativeTheta(theta))
    } else {
        Ok(())
    }
}
