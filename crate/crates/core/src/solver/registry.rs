//! Name-based lookup of methods, for the CLI and the benchmark.

use std::fmt;

use super::presets::*;
use super::MethodPreset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::splitting::{diag_multiple, triangular_splitting, DEFAULT_LOWER_WEIGHT};

/// Optional knobs; each method reads the ones it understands and falls back to its default.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MethodParams {
    pub tau: Option<f64>,
    /// Ω (or Ω̃, Ω̂) as a multiple of `diag(A)`.
    pub omega_factor: Option<f64>,
    pub theta: Option<f64>,
    /// `w` in the inner splitting `M̄ = D − wL`.
    pub lower_weight: Option<f64>,
}

pub const DEFAULT_OMEGA_FACTOR: f64 = 2.0;
pub const DEFAULT_THETA: f64 = 1.0;

impl MethodParams {
    fn omega(&self) -> f64 {
        self.omega_factor.unwrap_or(DEFAULT_OMEGA_FACTOR)
    }
    fn theta(&self) -> f64 {
        self.theta.unwrap_or(DEFAULT_THETA)
    }
    fn weight(&self) -> f64 {
        self.lower_weight.unwrap_or(DEFAULT_LOWER_WEIGHT)
    }
}

pub trait Method: Send + Sync {
    /// Lower-case registry key.
    fn name(&self) -> &str;
    fn summary(&self) -> &str;
    /// Default relaxation, or `None` when the method has no `τ`.
    fn default_tau(&self) -> Option<f64>;
    fn build(&self, a: &Matrix, params: &MethodParams) -> Result<MethodPreset>;
}

type BuildFn = fn(&Matrix, &MethodParams) -> Result<MethodPreset>;

struct Builtin {
    name: &'static str,
    summary: &'static str,
    default_tau: Option<f64>,
    build: BuildFn,
}

impl Method for Builtin {
    fn name(&self) -> &str {
        self.name
    }
    fn summary(&self) -> &str {
        self.summary
    }
    fn default_tau(&self) -> Option<f64> {
        self.default_tau
    }
    fn build(&self, a: &Matrix, params: &MethodParams) -> Result<MethodPreset> {
        if params.tau.is_some() && self.default_tau.is_none() {
            return Err(Error::InvalidParameter(format!("method `{}` takes no tau", self.name)));
        }
        (self.build)(a, params)
    }
}

fn omega_label(symbol: &str, f: f64) -> String {
    format!("{symbol}={}diag(A)", fmt_factor(f))
}

fn fmt_factor(f: f64) -> String {
    if f == 0.5 {
        "1/2".into()
    } else {
        format!("{f}")
    }
}

fn labelled(mut p: MethodPreset, params: String) -> MethodPreset {
    p.params = params;
    p
}

fn build_gnms(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    preset_gnms(a, p.tau.unwrap_or(1.0))
}

fn build_mn(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    let f = p.omega();
    Ok(labelled(preset_mn(a, &diag_multiple(a, f))?, omega_label("omega", f)))
}

fn build_picard(a: &Matrix, _: &MethodParams) -> Result<MethodPreset> {
    preset_picard(a)
}

fn build_fpi(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    preset_fpi(a, p.tau.unwrap_or(0.8))
}

fn build_nms(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    let f = p.omega();
    let inner = triangular_splitting(a, p.weight())?;
    let label = format!("{},Mbar=D-{}L", omega_label("omega", f), p.weight());
    Ok(labelled(preset_nms(a, &inner, &diag_multiple(a, f))?, label))
}

fn build_ngs(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    let f = p.omega();
    Ok(labelled(preset_ngs(a, &diag_multiple(a, f))?, omega_label("omega", f)))
}

fn build_rms(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    let split = triangular_splitting(a, p.weight())?;
    let label = format!("S=D-{}L", p.weight());
    Ok(labelled(preset_rms(a, split, p.tau.unwrap_or(0.99))?, label))
}

fn build_ssmn(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    let f = p.omega();
    Ok(labelled(preset_ssmn(a, &diag_multiple(a, f))?, omega_label("omega_tilde", f)))
}

fn build_rmn(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    let (f, theta) = (p.omega(), p.theta());
    let label = format!("{},theta={theta}", omega_label("omega", f));
    Ok(labelled(preset_rmn(a, theta, &diag_multiple(a, f))?, label))
}

fn build_rnms(a: &Matrix, p: &MethodParams) -> Result<MethodPreset> {
    let (f, theta) = (p.omega(), p.theta());
    let inner = triangular_splitting(a, p.weight())?;
    let label = format!("{},theta={theta},Mhat=D-{}L", omega_label("omega_hat", f), p.weight());
    Ok(labelled(preset_rnms(a, &inner, theta, &diag_multiple(a, f))?, label))
}

const BUILTINS: [(&str, &str, Option<f64>, BuildFn); 10] = [
    ("gnms", "two-variable splitting iteration (M=D-wL, Q1=10I, Q2=I/2)", Some(1.0), build_gnms),
    ("mn", "modified Newton-type: (A+Ω)x = Ωx + B|x| + c", None, build_mn),
    ("picard", "Picard: Ax = B|x| + c", None, build_picard),
    ("fpi", "fixed point: Ax = By + c, y relaxed toward |x|", Some(0.8), build_fpi),
    ("nms", "Newton-based splitting with M̄ = D - wL", None, build_nms),
    ("ngs", "Newton-based Gauss-Seidel (M̄ = D - L)", None, build_ngs),
    ("rms", "relaxed splitting: Sx = Tx + By + c, y relaxed toward |x|", Some(0.99), build_rms),
    ("ssmn", "shift-splitting modified Newton-type", None, build_ssmn),
    ("rmn", "relaxed modified Newton-type (θ)", None, build_rmn),
    ("rnms", "relaxed Newton-based splitting (θ)", None, build_rnms),
];

/// Methods keyed by lower-case name, in registration order.
pub struct MethodRegistry {
    methods: Vec<Box<dyn Method>>,
}

impl fmt::Debug for MethodRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl MethodRegistry {
    pub fn empty() -> Self {
        MethodRegistry { methods: Vec::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        for (name, summary, default_tau, build) in BUILTINS {
            r.register(Box::new(Builtin {
                name,
                summary,
                default_tau,
                build,
            }));
        }
        r
    }

    /// Adds a method, replacing any existing one with the same name.
    pub fn register(&mut self, method: Box<dyn Method>) {
        let key = method.name().to_ascii_lowercase();
        self.methods.retain(|m| m.name() != key);
        self.methods.push(method);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Method> {
        let key = name.to_ascii_lowercase();
        self.methods
            .iter()
            .find(|m| m.name() == key)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.methods.iter().map(|m| m.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Method> {
        self.methods.iter().map(|m| m.as_ref())
    }

    pub fn build(&self, name: &str, a: &Matrix, params: &MethodParams) -> Result<MethodPreset> {
        self.get(name)?.build(a, params)
    }
}
