//! Sufficient convergence conditions and their certificates.
//!
//! Everything is built from five operator 2-norms of a configuration
//! (`A = M − N`, `Q = Q1 − Q2`, relaxation `τ`):
//! `α = ‖Q1⁻¹Q2‖`, `β = ‖Q1⁻¹‖`, `γ = ‖M⁻¹N‖`, `μ = ‖M⁻¹BQ1‖`, `ν = ‖M⁻¹BQ2‖`.
//! They bound the error recursion by the nonnegative 2×2 matrix
//! `W = [[f, g], [fμ + ν, gμ + γ]]` with `f = |1−τ| + τα`, `g = τβ`, and the
//! two-variable scheme converges to the unique solution when `ρ(W) < 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    lu_factor, operator_two_norm, spectral_radius_nonneg, LinearOperator, Matrix, Product, DEFAULT_TOL,
};
use crate::solver::GnmsConfig;
use crate::splitting::{nms_splitting, relaxed_inner_splitting, trivial_splitting, Splitting};

/// Power-iteration cap for the norm estimates behind every certificate.
pub const NORM_MAX_ITER: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceScalars {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub nu: f64,
    pub tau: f64,
}

impl ConvergenceScalars {
    pub fn validate(&self) -> Result<()> {
        let s = [self.alpha, self.beta, self.gamma, self.mu, self.nu];
        if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!("norm bounds must be finite and nonnegative: {self:?}")));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }

    /// `f = |1−τ| + τα`.
    pub fn f(&self) -> f64 {
        (1.0 - self.tau).abs() + self.tau * self.alpha
    }

    /// `g = τβ`.
    pub fn g(&self) -> f64 {
        self.tau * self.beta
    }
}

fn named(what: &'static str, r: Result<f64>) -> Result<f64> {
    r.map_err(|e| match e {
        Error::NoConvergence {
            best_estimate,
            iterations,
            ..
        } => Error::NoConvergence {
            what: what.to_string(),
            best_estimate,
            iterations,
        },
        other => other,
    })
}

fn norm(what: &'static str, ops: Vec<&dyn LinearOperator>) -> Result<f64> {
    named(what, operator_two_norm(&Product(ops), DEFAULT_TOL, NORM_MAX_ITER))
}

/// The five norm bounds of a configuration.
pub fn compute_scalars(a_split: &Splitting, q_split: &Splitting, b: &Matrix, tau: f64) -> Result<ConvergenceScalars> {
    let n = a_split.dim();
    for len in [q_split.dim(), b.rows(), b.cols()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let q1_inv = q_split.m_inverse();
    let m_inv = a_split.m_inverse();
    let q1 = q_split.m_part();
    let q2 = q_split.n_part();
    let s = ConvergenceScalars {
        alpha: norm("alpha = |Q1^-1 Q2|", vec![&q1_inv, q2])?,
        beta: norm("beta = |Q1^-1|", vec![&q1_inv])?,
        gamma: norm("gamma = |M^-1 N|", vec![&m_inv, a_split.n_part()])?,
        mu: norm("mu = |M^-1 B Q1|", vec![&m_inv, b, q1])?,
        nu: norm("nu = |M^-1 B Q2|", vec![&m_inv, b, q2])?,
        tau,
    };
    s.validate()?;
    Ok(s)
}

pub fn compute_scalars_for(cfg: &GnmsConfig, b: &Matrix) -> Result<ConvergenceScalars> {
    compute_scalars(&cfg.a_split, &cfg.q_split, b, cfg.tau)
}

/// `W = [[f, g], [fμ + ν, gμ + γ]]`.
pub fn build_w(s: &ConvergenceScalars) -> Matrix {
    let (f, g) = (s.f(), s.g());
    Matrix::from_rows(&[[f, g], [f * s.mu + s.nu, g * s.mu + s.gamma]])
}

/// Largest root modulus of `λ² − sλ + q`.
pub fn quadratic_root_modulus(s: f64, q: f64) -> f64 {
    let disc = s * s - 4.0 * q;
    if disc >= 0.0 {
        let r = disc.sqrt();
        (s + r).abs().max((s - r).abs()) / 2.0
    } else {
        q.abs().sqrt()
    }
}

/// `ρ(W)` in closed form from `λ² − (f + μg + γ)λ + (γf − gν)`.
pub fn spectral_radius_w(s: &ConvergenceScalars) -> f64 {
    let (f, g) = (s.f(), s.g());
    quadratic_root_modulus(f + s.mu * g + s.gamma, s.gamma * f - g * s.nu)
}

/// Both roots of `x² − sx + q` lie strictly inside the unit circle iff `|q| < 1` and `|s| < 1 + q`.
pub fn youngs_root_test(s: f64, q: f64) -> bool {
    q.abs() < 1.0 && s.abs() < 1.0 + q
}

/// One strict inequality `lhs < rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Inequality {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub holds: bool,
}

impl Inequality {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Inequality {
            label: label.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: lhs < rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub condition: String,
    pub holds: bool,
    /// Smallest margin over the constituent inequalities.
    pub margin: f64,
    pub details: Vec<Inequality>,
}

impl Certificate {
    pub fn from_inequalities(condition: impl Into<String>, details: Vec<Inequality>) -> Self {
        let holds = details.iter().all(|d| d.holds);
        let margin = details.iter().map(|d| d.margin).fold(f64::INFINITY, f64::min);
        Certificate {
            condition: condition.into(),
            holds,
            margin,
            details,
        }
    }

    /// Left-hand side of the first inequality; for the single-quantity
    /// conditions this is the quantity compared against 1.
    pub fn value(&self) -> f64 {
        self.details.first().map_or(f64::NAN, |d| d.lhs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// `|γ|1−τ| + τ(γα − βν)| < 1` and `τ(μβ + βν) < (γ − 1)(|1−τ| + τα − 1)`; equivalent to `ρ(W) < 1`.
pub fn check_gnms(s: &ConvergenceScalars) -> Certificate {
    let t = s.tau;
    let first = (s.gamma * (1.0 - t).abs() + t * (s.gamma * s.alpha - s.beta * s.nu)).abs();
    let second_lhs = t * (s.mu * s.beta + s.beta * s.nu);
    let second_rhs = (s.gamma - 1.0) * ((1.0 - t).abs() + t * s.alpha - 1.0);
    Certificate::from_inequalities(
        "gnms",
        vec![
            Inequality::new("|gamma|1-tau| + tau(gamma alpha - beta nu)| < 1", first, 1.0),
            Inequality::new("tau(mu beta + beta nu) < (gamma-1)(|1-tau| + tau alpha - 1)", second_lhs, second_rhs),
        ],
    )
}

/// The simplified sufficient condition with an explicit `τ` window:
/// `|γα − βν| < γ < 1`, `β(μ+ν) < (γ−1)(α−1)`, `0 < τ < 2(1−γ)/(β(μ+ν) − (γ−1)(α+1))`.
pub fn check_gnms_tau_window(s: &ConvergenceScalars) -> Certificate {
    let bmn = s.beta * (s.mu + s.nu);
    let upper = 2.0 * (1.0 - s.gamma) / (bmn - (s.gamma - 1.0) * (s.alpha + 1.0));
    Certificate::from_inequalities(
        "gnms-tau-window",
        vec![
            Inequality::new("|gamma alpha - beta nu| < gamma", (s.gamma * s.alpha - s.beta * s.nu).abs(), s.gamma),
            Inequality::new("gamma < 1", s.gamma, 1.0),
            Inequality::new("beta(mu + nu) < (gamma-1)(alpha-1)", bmn, (s.gamma - 1.0) * (s.alpha - 1.0)),
            Inequality::new("0 < tau", 0.0, s.tau),
            Inequality::new("tau < 2(1-gamma)/(beta(mu+nu) - (gamma-1)(alpha+1))", s.tau, upper),
        ],
    )
}

/// `‖M⁻¹N‖ + ‖M⁻¹B‖ < 1` for a one-variable iteration `x = M⁻¹(Nx + B|x| + c)`.
pub fn check_splitting(condition: &str, split: &Splitting, b: &Matrix) -> Result<Certificate> {
    let m_inv = split.m_inverse();
    let mn = norm("|M^-1 N|", vec![&m_inv, split.n_part()])?;
    let mb = norm("|M^-1 B|", vec![&m_inv, b])?;
    Ok(Certificate::from_inequalities(
        condition,
        vec![Inequality::new("|M^-1 N| + |M^-1 B| < 1", mn + mb, 1.0)],
    ))
}

/// `‖M⁻¹‖(‖N‖ + ‖B‖) < 1`, the older and stronger form of [`check_splitting`].
pub fn check_splitting_classic(condition: &str, split: &Splitting, b: &Matrix) -> Result<Certificate> {
    let m_inv = split.m_inverse();
    let mi = norm("|M^-1|", vec![&m_inv])?;
    let nn = norm("|N|", vec![split.n_part()])?;
    let bn = norm("|B|", vec![b])?;
    Ok(Certificate::from_inequalities(
        condition,
        vec![Inequality::new("|M^-1| (|N| + |B|) < 1", mi * (nn + bn), 1.0)],
    ))
}

/// `‖(A+Ω)⁻¹Ω‖ + ‖(A+Ω)⁻¹B‖ < 1`.
pub fn check_mn(a: &Matrix, b: &Matrix, omega: &Matrix) -> Result<Certificate> {
    check_splitting("mn", &nms_splitting(&trivial_splitting(a)?, omega)?, b)
}

/// `‖(A+Ω)⁻¹‖(‖Ω‖ + ‖B‖) < 1`.
pub fn check_mn_classic(a: &Matrix, b: &Matrix, omega: &Matrix) -> Result<Certificate> {
    check_splitting_classic("mn-classic", &nms_splitting(&trivial_splitting(a)?, omega)?, b)
}

/// `‖A⁻¹B‖ < 1`.
pub fn check_picard(a: &Matrix, b: &Matrix) -> Result<Certificate> {
    let split = trivial_splitting(a)?;
    let m_inv = split.m_inverse();
    let v = norm("|A^-1 B|", vec![&m_inv, b])?;
    Ok(Certificate::from_inequalities(
        "picard-norm",
        vec![Inequality::new("|A^-1 B| < 1", v, 1.0)],
    ))
}

/// `|A⁻¹B|` formed column by column.
pub fn abs_inverse_product(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.ensure_square()?;
    if b.rows() != n || b.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.rows() });
    }
    let f = lu_factor(a)?;
    let bt = b.transpose();
    let mut out = Matrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        let (start, end) = bt.row_span(j);
        col.iter_mut().for_each(|v| *v = 0.0);
        for i in start..end {
            col[i] = bt.get(j, i);
        }
        let z = f.solve(&col)?;
        for (i, v) in z.iter().enumerate() {
            out.set(i, j, v.abs());
        }
    }
    Ok(out)
}

/// `ρ(|A⁻¹B|) < 1`.
pub fn check_picard_rho(a: &Matrix, b: &Matrix) -> Result<Certificate> {
    let m = abs_inverse_product(a, b)?;
    let rho = named("rho(|A^-1 B|)", spectral_radius_nonneg(&m, DEFAULT_TOL, NORM_MAX_ITER))?;
    Ok(Certificate::from_inequalities(
        "picard-rho",
        vec![Inequality::new("rho(|A^-1 B|) < 1", rho, 1.0)],
    ))
}

/// `‖(M̄+Ω)⁻¹(N̄+Ω)‖ + ‖(M̄+Ω)⁻¹B‖ < 1`.
pub fn check_nms(inner: &Splitting, b: &Matrix, omega: &Matrix) -> Result<Certificate> {
    check_splitting("nms", &nms_splitting(inner, omega)?, b)
}

/// `‖(M̄+Ω)⁻¹‖(‖N̄+Ω‖ + ‖B‖) < 1`.
pub fn check_nms_classic(inner: &Splitting, b: &Matrix, omega: &Matrix) -> Result<Certificate> {
    check_splitting_classic("nms-classic", &nms_splitting(inner, omega)?, b)
}

/// `‖(θM̂+Ω̂)⁻¹(Ω̂+(θ−1)M̂+N̂)‖ + ‖(θM̂+Ω̂)⁻¹B‖ < 1`.
pub fn check_rnms(inner: &Splitting, theta: f64, omega_hat: &Matrix, b: &Matrix) -> Result<Certificate> {
    check_splitting("rnms", &relaxed_inner_splitting(inner, theta, omega_hat)?, b)
}

/// `‖(θM̂+Ω̂)⁻¹‖(‖Ω̂+(θ−1)M̂+N̂‖ + ‖B‖) < 1`.
pub fn check_rnms_classic(inner: &Splitting, theta: f64, omega_hat: &Matrix, b: &Matrix) -> Result<Certificate> {
    check_splitting_classic("rnms-classic", &relaxed_inner_splitting(inner, theta, omega_hat)?, b)
}
