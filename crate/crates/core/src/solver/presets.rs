//! Constructors for every named method.

use std::sync::Arc;

use super::{check_tau, GnmsConfig, MethodPreset, Scheme, StopRule};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::splitting::{
    gauss_seidel_splitting, default_triangular_splitting, identity_splitting, nms_splitting, relaxed_inner_splitting,
    relaxed_splitting, scaled_identity_splitting, shift_pivot_pair, trivial_splitting, Splitting,
};

/// `Q1` and `Q2` multiples of the identity used by the benchmark's GNMS run.
pub const BENCH_Q1: f64 = 10.0;
pub const BENCH_Q2: f64 = 0.5;

fn preset(name: &str, params: impl Into<String>, a: &Matrix, scheme: Scheme) -> MethodPreset {
    MethodPreset {
        name: name.to_string(),
        params: params.into(),
        a: Arc::new(a.clone()),
        scheme,
    }
}

/// A one-variable method `x = M⁻¹(Nx + B|x| + c)` expressed in the two-variable
/// scheme with `Q = Q1 = I`, `Q2 = 0`, `τ = 1`.
pub fn collapsed_config(split: Splitting) -> Result<GnmsConfig> {
    let n = split.dim();
    GnmsConfig::new(Arc::new(split), Arc::new(identity_splitting(n)?), 1.0)
}

/// The benchmark configuration: `M = D − ¾L`, `N = ¼L + U`, `Q1 = 10I`, `Q2 = ½I`.
pub fn preset_gnms(a: &Matrix, tau: f64) -> Result<MethodPreset> {
    let split = default_triangular_splitting(a)?;
    let q = scaled_identity_splitting(a.rows(), BENCH_Q1, BENCH_Q2)?;
    let cfg = GnmsConfig::new(Arc::new(split), Arc::new(q), tau)?;
    Ok(preset("GNMS", "M=D-0.75L,Q1=10I,Q2=0.5I", a, Scheme::Gnms(cfg)))
}

/// The two-variable scheme with caller-chosen splittings.
pub fn preset_gnms_with(a: &Matrix, a_split: Splitting, q_split: Splitting, tau: f64) -> Result<MethodPreset> {
    let cfg = GnmsConfig::new(Arc::new(a_split), Arc::new(q_split), tau)?;
    Ok(preset("GNMS", "custom", a, Scheme::Gnms(cfg)))
}

/// `x = (A + Ω)⁻¹(Ωx + B|x| + c)`.
pub fn preset_mn(a: &Matrix, omega: &Matrix) -> Result<MethodPreset> {
    let split = nms_splitting(&trivial_splitting(a)?, omega)?;
    Ok(preset("MN", "", a, Scheme::Gnms(collapsed_config(split)?)))
}

/// `x = A⁻¹(B|x| + c)`.
pub fn preset_picard(a: &Matrix) -> Result<MethodPreset> {
    let split = trivial_splitting(a)?;
    Ok(preset("Picard", "", a, Scheme::Gnms(collapsed_config(split)?)))
}

/// `x = (M̄ + Ω)⁻¹((N̄ + Ω)x + B|x| + c)` for an inner splitting `A = M̄ − N̄`.
pub fn preset_nms(a: &Matrix, inner: &Splitting, omega: &Matrix) -> Result<MethodPreset> {
    let split = nms_splitting(inner, omega)?;
    Ok(preset("NMS", "", a, Scheme::Gnms(collapsed_config(split)?)))
}

/// NMS with the Gauss–Seidel inner splitting `M̄ = D − L`, `N̄ = U`.
pub fn preset_ngs(a: &Matrix, omega: &Matrix) -> Result<MethodPreset> {
    let split = nms_splitting(&gauss_seidel_splitting(a)?, omega)?;
    Ok(preset("NGS", "", a, Scheme::Gnms(collapsed_config(split)?)))
}

/// `x = (A + Ω̃)⁻¹((Ω̃ − A)x + 2B|x| + 2c)`, run as written.
pub fn preset_ssmn(a: &Matrix, omega_tilde: &Matrix) -> Result<MethodPreset> {
    let split = shift_pivot_pair(a, omega_tilde)?;
    let scheme = Scheme::Scaled {
        split: Arc::new(split),
        scale: 2.0,
        stop: StopRule::default(),
    };
    Ok(preset("SSMN", "", a, scheme))
}

/// `x = (θA + Ω)⁻¹((Ω + (θ−1)A)x + B|x| + c)`.
pub fn preset_rmn(a: &Matrix, theta: f64, omega: &Matrix) -> Result<MethodPreset> {
    let split = relaxed_splitting(a, theta, omega)?;
    Ok(preset("RMN", format!("theta={theta}"), a, Scheme::Gnms(collapsed_config(split)?)))
}

/// `x = (θM̂ + Ω̂)⁻¹((Ω̂ + (θ−1)M̂ + N̂)x + B|x| + c)`.
pub fn preset_rnms(a: &Matrix, inner: &Splitting, theta: f64, omega_hat: &Matrix) -> Result<MethodPreset> {
    let split = relaxed_inner_splitting(inner, theta, omega_hat)?;
    Ok(preset("RNMS", format!("theta={theta}"), a, Scheme::Gnms(collapsed_config(split)?)))
}

/// `x = A⁻¹(By + c)`, then `y = (1−τ)y + τ|x|`.
pub fn preset_fpi(a: &Matrix, tau: f64) -> Result<MethodPreset> {
    check_tau(tau)?;
    let scheme = Scheme::Lagged {
        split: Arc::new(trivial_splitting(a)?),
        tau,
        stop: StopRule::default(),
    };
    Ok(preset("FPI", "", a, scheme))
}

/// `x = S⁻¹(Tx + By + c)`, then `y = (1−τ)y + τ|x|`; `S − T = A`.
pub fn preset_rms(a: &Matrix, split: Splitting, tau: f64) -> Result<MethodPreset> {
    check_tau(tau)?;
    let scheme = Scheme::Lagged {
        split: Arc::new(split),
        tau,
        stop: StopRule::default(),
    };
    Ok(preset("RMS", "S=D-0.75L", a, scheme))
}

/// RMS with the benchmark splitting `S = D − ¾L`, `T = ¼L + U`.
pub fn preset_rms_default(a: &Matrix, tau: f64) -> Result<MethodPreset> {
    preset_rms(a, default_triangular_splitting(a)?, tau)
}
