//! Iteration schemes for `Ax − B|x| − c = 0` and the residual-driven solve loop.
//!
//! Every named method is a [`MethodPreset`]: a problem matrix plus a [`Scheme`].
//! The two-variable scheme ([`GnmsConfig`]) covers MN, Picard, NMS, NGS, RMN and
//! RNMS by parameter choice; FPI and RMS update `x` before `y` and SSMN runs its
//! doubled right-hand side literally, so those have their own variants.

mod presets;
mod registry;

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::vector::all_finite;
use crate::linalg::{abs_vector, lu_factor, vec_norm2, Matrix};
use crate::problem::default_start;
use crate::splitting::Splitting;

pub use presets::*;
pub use registry::{Method, MethodParams, MethodRegistry, DEFAULT_OMEGA_FACTOR, DEFAULT_THETA};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// A run is declared divergent once RES exceeds this.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// RES of every iterate, starting with `x⁰`.
    pub residual_history: Vec<f64>,
    pub x_final: Vec<f64>,
    pub y_final: Option<Vec<f64>>,
    pub termination: Termination,
    pub wall_time_seconds: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history holds the initial residual")
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// `RES = ‖Ax − B|x| − c‖ / ‖c‖`.
pub fn residual(a: &Matrix, b: &Matrix, c: &[f64], x: &[f64]) -> Result<f64> {
    let absolute = absolute_residual(a, b, c, x)?;
    let nc = vec_norm2(c);
    if nc == 0.0 {
        return Err(Error::ZeroRightHandSide { absolute });
    }
    Ok(absolute / nc)
}

/// `‖Ax − B|x| − c‖`.
pub fn absolute_residual(a: &Matrix, b: &Matrix, c: &[f64], x: &[f64]) -> Result<f64> {
    let n = a.ensure_square()?;
    for len in [b.rows(), b.cols(), c.len(), x.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let mut r = a.mat_vec(x)?;
    let bx = b.mat_vec(&abs_vector(x))?;
    for ((ri, bi), ci) in r.iter_mut().zip(&bx).zip(c) {
        *ri = *ri - bi - ci;
    }
    Ok(vec_norm2(&r))
}

/// Full parameterization of the two-variable scheme: `A = M − N`, `Q = Q1 − Q2`, relaxation `τ`.
#[derive(Clone, Debug)]
pub struct GnmsConfig {
    pub a_split: Arc<Splitting>,
    pub q_split: Arc<Splitting>,
    q: Arc<Matrix>,
    pub tau: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl GnmsConfig {
    pub fn new(a_split: Arc<Splitting>, q_split: Arc<Splitting>, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        if a_split.dim() != q_split.dim() {
            return Err(Error::DimensionMismatch {
                expected: a_split.dim(),
                found: q_split.dim(),
            });
        }
        let q = q_split.split_matrix();
        lu_factor(&q)?;
        Ok(GnmsConfig {
            a_split,
            q_split,
            q: Arc::new(q),
            tau,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        })
    }

    /// `Q = Q1 − Q2`.
    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(GnmsConfig { tau, ..self.clone() })
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    /// `y ← (1−τ)y + τQ1⁻¹(Q2 y + |x|)`.
    fn next_y(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut t = self.q_split.n_part().mat_vec(y)?;
        for (ti, xi) in t.iter_mut().zip(x) {
            *ti += xi.abs();
        }
        let z = self.q_split.solve(&t)?;
        Ok(relax(self.tau, y, &z))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tau must be positive and finite, got {tau}")))
    }
}

/// `(1−τ)y + τz`.
fn relax(tau: f64, y: &[f64], z: &[f64]) -> Vec<f64> {
    y.iter().zip(z).map(|(yi, zi)| (1.0 - tau) * yi + tau * zi).collect()
}

/// How one iteration maps `(x, y)` to the next pair.
#[derive(Clone, Debug)]
pub enum Scheme {
    /// `y` first, then `x = M⁻¹(Nx + BQ1y⁺ − BQ2y + c)`.
    Gnms(GnmsConfig),
    /// The same iteration with `x = M⁻¹(Nx + (1−τ)BQy + τB|x| + c)`.
    GnmsReformulated(GnmsConfig),
    /// `x = M⁻¹(Nx + s·B|x| + s·c)`, no `y`.
    Scaled { split: Arc<Splitting>, scale: f64, stop: StopRule },
    /// `x = S⁻¹(Tx + By + c)` first, then `y = (1−τ)y + τ|x⁺|`.
    Lagged { split: Arc<Splitting>, tau: f64, stop: StopRule },
}

impl Scheme {
    pub fn uses_y(&self) -> bool {
        !matches!(self, Scheme::Scaled { .. })
    }

    pub fn tau(&self) -> Option<f64> {
        match self {
            Scheme::Gnms(cfg) | Scheme::GnmsReformulated(cfg) => Some(cfg.tau),
            Scheme::Lagged { tau, .. } => Some(*tau),
            Scheme::Scaled { .. } => None,
        }
    }

    pub fn stop_rule(&self) -> StopRule {
        match self {
            Scheme::Gnms(cfg) | Scheme::GnmsReformulated(cfg) => cfg.stop_rule(),
            Scheme::Scaled { stop, .. } | Scheme::Lagged { stop, .. } => *stop,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Scheme::Gnms(cfg) | Scheme::GnmsReformulated(cfg) => cfg.a_split.dim(),
            Scheme::Scaled { split, .. } | Scheme::Lagged { split, .. } => split.dim(),
        }
    }

    pub fn with_tau(&self, tau: f64) -> Result<Scheme> {
        check_tau(tau)?;
        Ok(match self {
            Scheme::Gnms(cfg) => Scheme::Gnms(cfg.with_tau(tau)?),
            Scheme::GnmsReformulated(cfg) => Scheme::GnmsReformulated(cfg.with_tau(tau)?),
            Scheme::Lagged { split, stop, .. } => Scheme::Lagged {
                split: split.clone(),
                tau,
                stop: *stop,
            },
            Scheme::Scaled { .. } => {
                return Err(Error::InvalidParameter("this method has no tau parameter".into()));
            }
        })
    }

    pub fn with_stop(&self, stop: StopRule) -> Scheme {
        let mut out = self.clone();
        match &mut out {
            Scheme::Gnms(cfg) | Scheme::GnmsReformulated(cfg) => {
                cfg.tol = stop.tol;
                cfg.max_iter = stop.max_iter;
            }
            Scheme::Scaled { stop: s, .. } | Scheme::Lagged { stop: s, .. } => *s = stop,
        }
        out
    }

    /// Advances `(x, y)` by one iteration in place.
    pub fn step(&self, b: &Matrix, c: &[f64], x: &mut Vec<f64>, y: &mut Vec<f64>) -> Result<()> {
        match self {
            Scheme::Gnms(cfg) => {
                let y_next = cfg.next_y(x, y)?;
                let q1y = cfg.q_split.m_part().mat_vec(&y_next)?;
                let q2y = cfg.q_split.n_part().mat_vec(y)?;
                let w: Vec<f64> = q1y.iter().zip(&q2y).map(|(p, q)| p - q).collect();
                *x = splitting_update(&cfg.a_split, b, c, x, &w, 1.0)?;
                *y = y_next;
            }
            Scheme::GnmsReformulated(cfg) => {
                let qy = cfg.q.mat_vec(y)?;
                let tau = cfg.tau;
                let v: Vec<f64> = qy.iter().zip(x.iter()).map(|(q, xi)| (1.0 - tau) * q + tau * xi.abs()).collect();
                let y_next = cfg.next_y(x, y)?;
                *x = splitting_update(&cfg.a_split, b, c, x, &v, 1.0)?;
                *y = y_next;
            }
            Scheme::Scaled { split, scale, .. } => {
                let ax = abs_vector(x);
                *x = splitting_update(split, b, c, x, &ax, *scale)?;
            }
            Scheme::Lagged { split, tau, .. } => {
                *x = splitting_update(split, b, c, x, y, 1.0)?;
                *y = relax(*tau, y, &abs_vector(x));
            }
        }
        Ok(())
    }
}

/// `M⁻¹(Nx + s·Bw + s·c)`.
fn splitting_update(split: &Splitting, b: &Matrix, c: &[f64], x: &[f64], w: &[f64], s: f64) -> Result<Vec<f64>> {
    let mut rhs = split.n_part().mat_vec(x)?;
    let bw = b.mat_vec(w)?;
    if s == 1.0 {
        for ((r, p), ci) in rhs.iter_mut().zip(&bw).zip(c) {
            *r += p + ci;
        }
    } else {
        for ((r, p), ci) in rhs.iter_mut().zip(&bw).zip(c) {
            *r += s * p + s * ci;
        }
    }
    split.solve(&rhs)
}

/// Runs `scheme` from `(x0, y0)` until RES ≤ tol, RES > 10¹², or the iteration cap.
pub fn run_scheme(
    scheme: &Scheme,
    a: &Matrix,
    b: &Matrix,
    c: &[f64],
    x0: &[f64],
    y0: &[f64],
) -> Result<SolveReport> {
    let start = Instant::now();
    let n = a.ensure_square()?;
    for len in [scheme.dim(), b.rows(), b.cols(), c.len(), x0.len(), y0.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    if !all_finite(x0) || !all_finite(y0) || !all_finite(c) {
        return Err(Error::NonFinite { what: "starting point or right-hand side" });
    }
    let stop = scheme.stop_rule();
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let mut history = vec![residual(a, b, c, &x)?];
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;
    loop {
        let res = *history.last().unwrap();
        if res <= stop.tol {
            termination = Termination::Converged;
            break;
        }
        if res > DIVERGENCE_THRESHOLD {
            termination = Termination::Diverged;
            break;
        }
        if iterations >= stop.max_iter {
            break;
        }
        scheme.step(b, c, &mut x, &mut y)?;
        iterations += 1;
        if !all_finite(&x) || !all_finite(&y) {
            return Err(Error::NonFiniteIterate { iteration: iterations });
        }
        history.push(residual(a, b, c, &x)?);
    }
    Ok(SolveReport {
        iterations,
        residual_history: history,
        x_final: x,
        y_final: scheme.uses_y().then_some(y),
        termination,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// The two-variable iteration, `y` updated before `x`.
pub fn gnms_solve(cfg: &GnmsConfig, a: &Matrix, b: &Matrix, c: &[f64], x0: &[f64], y0: &[f64]) -> Result<SolveReport> {
    run_scheme(&Scheme::Gnms(cfg.clone()), a, b, c, x0, y0)
}

/// The same iteration through `x = M⁻¹(Nx + (1−τ)BQy + τB|x| + c)`.
pub fn gnms_solve_reformulated(
    cfg: &GnmsConfig,
    a: &Matrix,
    b: &Matrix,
    c: &[f64],
    x0: &[f64],
    y0: &[f64],
) -> Result<SolveReport> {
    run_scheme(&Scheme::GnmsReformulated(cfg.clone()), a, b, c, x0, y0)
}

/// `x = A⁻¹(By + c)`, then `y = (1−τ)y + τ|x|`.
#[allow(clippy::too_many_arguments)]
pub fn fpi_solve(a: &Matrix, b: &Matrix, c: &[f64], tau: f64, x0: &[f64], y0: &[f64], tol: f64, max_iter: usize) -> Result<SolveReport> {
    let preset = preset_fpi(a, tau)?.with_stop(StopRule { tol, max_iter });
    preset.solve(b, c, Some(x0), Some(y0))
}

/// `x = S⁻¹(Tx + By + c)`, then `y = (1−τ)y + τ|x|`, with `A = S − T`.
#[allow(clippy::too_many_arguments)]
pub fn rms_solve(
    a_split: &Splitting,
    a: &Matrix,
    b: &Matrix,
    c: &[f64],
    tau: f64,
    x0: &[f64],
    y0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    check_tau(tau)?;
    let scheme = Scheme::Lagged {
        split: Arc::new(a_split.clone()),
        tau,
        stop: StopRule { tol, max_iter },
    };
    run_scheme(&scheme, a, b, c, x0, y0)
}

/// A named method bound to a coefficient matrix.
#[derive(Clone, Debug)]
pub struct MethodPreset {
    pub name: String,
    /// Human-readable parameter summary, e.g. `omega=2diag(A)`.
    pub params: String,
    pub a: Arc<Matrix>,
    pub scheme: Scheme,
}

impl MethodPreset {
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Ok(MethodPreset {
            scheme: self.scheme.with_tau(tau)?,
            ..self.clone()
        })
    }

    pub fn with_stop(&self, stop: StopRule) -> Self {
        MethodPreset {
            scheme: self.scheme.with_stop(stop),
            ..self.clone()
        }
    }

    pub fn tau(&self) -> Option<f64> {
        self.scheme.tau()
    }

    /// Solves from the given start, defaulting to `x⁰ = (−1, 0, −1, 0, …)` and `y⁰ = c`.
    pub fn solve(&self, b: &Matrix, c: &[f64], x0: Option<&[f64]>, y0: Option<&[f64]>) -> Result<SolveReport> {
        let default_x;
        let x0 = match x0 {
            Some(x) => x,
            None => {
                default_x = default_start(c.len());
                &default_x
            }
        };
        let y0 = y0.unwrap_or(c);
        run_scheme(&self.scheme, &self.a, b, c, x0, y0)
    }

    /// The first `steps` iterates `x¹, …, xᵏ` without any stopping test.
    pub fn trajectory(&self, b: &Matrix, c: &[f64], x0: &[f64], y0: &[f64], steps: usize) -> Result<Vec<Vec<f64>>> {
        let mut x = x0.to_vec();
        let mut y = y0.to_vec();
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            self.scheme.step(b, c, &mut x, &mut y)?;
            out.push(x.clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
