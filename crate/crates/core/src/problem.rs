//! Problem instances: the block-banded benchmark family, seeded random
//! instances, and on-disk problem directories.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::mtx::{read_matrix, read_vector, write_matrix, write_vector};
use crate::linalg::{abs_vector, lu_factor, two_norm_of_product, Matrix, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// One instance of `Ax − B|x| − c = 0`.
#[derive(Clone, Debug)]
pub struct GaveProblem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Vec<f64>,
    /// A known solution, when the instance was built from one.
    pub x_star: Option<Vec<f64>>,
    pub label: String,
}

impl GaveProblem {
    /// Assembles a problem whose right-hand side is `A x* − B|x*|`.
    pub fn from_solution(a: Matrix, b: Matrix, x_star: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let n = a.ensure_square()?;
        if b.rows() != n || b.cols() != n || x_star.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x_star.len().min(b.rows()),
            });
        }
        let ax = a.mat_vec(&x_star)?;
        let bx = b.mat_vec(&abs_vector(&x_star))?;
        let c = ax.iter().zip(&bx).map(|(p, q)| p - q).collect();
        Ok(GaveProblem {
            a,
            b,
            c,
            x_star: Some(x_star),
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Checks dimensions and finiteness of every part.
    pub fn validate(&self) -> Result<()> {
        let n = self.a.ensure_square()?;
        for (len, _what) in [(self.b.rows(), "B"), (self.b.cols(), "B"), (self.c.len(), "c")] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        if !self.a.is_finite() || !self.b.is_finite() || !self.c.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { what: "problem data" });
        }
        if let Some(x) = &self.x_star {
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: x.len() });
            }
        }
        Ok(())
    }
}

/// `x* = (½, 1, ½, 1, …)`.
pub fn alternating_solution(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { 0.5 } else { 1.0 }).collect()
}

/// `x₀ = (−1, 0, −1, 0, …)`, the benchmark's starting iterate.
pub fn default_start(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { -1.0 } else { 0.0 }).collect()
}

const S1_DIAG: f64 = 36.0;
const S1_BAND: [f64; 3] = [-1.5, -0.5, -1.5];
const S2_DIAG: f64 = 3.0;
const S2_BAND: [f64; 3] = [-1.0, -1.0, -1.0];
/// Off-diagonal block coefficients of Ã at block offsets 1..=4 (times I).
const A_BLOCK_BAND: [f64; 4] = [-1.5, -0.5, -1.5, -0.5];
/// Off-diagonal block coefficients of B at block offsets 1..=4 (times I).
const B_BLOCK_BAND: [f64; 4] = [-1.0, -1.0, -1.0, -1.0];
const A_SHIFT: f64 = 0.2;

fn block_banded(m: usize, blocks: usize, diag: f64, inner: &[f64], outer: &[f64], shift: f64) -> Matrix {
    let n = m * blocks;
    let inner_reach = inner.len().min(m - 1);
    let outer_reach = outer.len().min(blocks - 1) * m;
    let bw = inner_reach.max(outer_reach);
    let mut out = Matrix::banded_zeros(n, bw, bw);
    for p in 0..blocks {
        for i in 0..m {
            let row = p * m + i;
            out.set(row, row, diag + shift);
            for (k, v) in inner.iter().enumerate().take(inner_reach) {
                let d = k + 1;
                if i >= d {
                    out.set(row, row - d, *v);
                }
                if i + d < m {
                    out.set(row, row + d, *v);
                }
            }
            for (k, v) in outer.iter().enumerate() {
                let d = k + 1;
                if p >= d {
                    out.set(row, row - d * m, *v);
                }
                if p + d < blocks {
                    out.set(row, row + d * m, *v);
                }
            }
        }
    }
    out
}

/// The block-banded benchmark instance of dimension `m · block_rows`.
///
/// Diagonal blocks of `A` are `S1 + ⅕I` (`36` on the diagonal, `−1.5, −0.5, −1.5`
/// at offsets 1–3); off-diagonal blocks at block offsets 1–4 are
/// `−1.5I, −0.5I, −1.5I, −0.5I`. `B` has diagonal blocks `S2` (`3`, with `−1`
/// at offsets 1–3) and `−I` at block offsets 1–4. Stencils are truncated at the
/// boundary. The right-hand side comes from `x* = (½, 1, ½, 1, …)`.
pub fn block_problem(m: usize, block_rows: usize) -> Result<GaveProblem> {
    if m == 0 || block_rows == 0 {
        return Err(Error::TooSmall(format!("m = {m}, block_rows = {block_rows}; both must be positive")));
    }
    let a = block_banded(m, block_rows, S1_DIAG, &S1_BAND, &A_BLOCK_BAND, A_SHIFT);
    let b = block_banded(m, block_rows, S2_DIAG, &S2_BAND, &B_BLOCK_BAND, 0.0);
    let x_star = alternating_solution(m * block_rows);
    GaveProblem::from_solution(a, b, x_star, format!("example m={m} block_rows={block_rows}"))
}

/// A seeded random instance with `‖A⁻¹B‖₂ = contraction` (so Picard iteration is certified
/// whenever `contraction < 1`).
///
/// `A` is strictly diagonally dominant with bandwidth up to 2; `B` is a random
/// band matrix rescaled to hit the requested contraction.
pub fn random_problem(n: usize, seed: u64, contraction: f64) -> Result<GaveProblem> {
    if n == 0 {
        return Err(Error::TooSmall("random problem needs n >= 1".into()));
    }
    if !(contraction > 0.0) || !contraction.is_finite() {
        return Err(Error::InvalidParameter(format!("contraction must be positive, got {contraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bw = 2.min(n - 1);
    let mut a = Matrix::banded_zeros(n, bw, bw);
    let mut b = Matrix::banded_zeros(n, bw, bw);
    for i in 0..n {
        let (start, end) = a.row_span(i);
        let mut off = 0.0;
        for j in start..end {
            if j != i {
                let v = rng.gen_range(-1.0..1.0);
                a.set(i, j, v);
                off += f64::abs(v);
            }
            b.set(i, j, rng.gen_range(-1.0..1.0));
        }
        let sign = if rng.gen_bool(0.8) { 1.0 } else { -1.0 };
        a.set(i, i, sign * (off + rng.gen_range(1.0..3.0)));
    }
    let f = lu_factor(&a)?;
    let current = match two_norm_of_product(&f, &b, DEFAULT_TOL, DEFAULT_MAX_ITER) {
        Ok(v) => v,
        Err(Error::NoConvergence { best_estimate, .. }) => best_estimate,
        Err(e) => return Err(e),
    };
    if current > 0.0 {
        b = b.scale(contraction / current);
    }
    let x_star: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    GaveProblem::from_solution(a, b, x_star, format!("random n={n} seed={seed}"))
}

pub const MANIFEST_NAME: &str = "manifest.txt";
const KEYS: [&str; 5] = ["A", "B", "c", "x_star", "label"];

/// Writes `manifest.txt` plus Matrix Market parts into `dir`.
pub fn save_problem(problem: &GaveProblem, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix(&problem.a, dir.join("A.mtx"))?;
    write_matrix(&problem.b, dir.join("B.mtx"))?;
    write_vector(&problem.c, dir.join("c.mtx"))?;
    let mut manifest = String::from("A = A.mtx\nB = B.mtx\nc = c.mtx\n");
    if let Some(x) = &problem.x_star {
        write_vector(x, dir.join("x_star.mtx"))?;
        manifest.push_str("x_star = x_star.mtx\n");
    }
    manifest.push_str(&format!("label = {}\n", problem.label.replace('\n', " ")));
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Loads a problem from a manifest file, or from a directory containing `manifest.txt`.
pub fn load_problem(path: impl AsRef<Path>) -> Result<GaveProblem> {
    let mut path = path.as_ref().to_path_buf();
    if path.is_dir() {
        path = path.join(MANIFEST_NAME);
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut entries: Vec<(String, String)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Parse {
                path: path.clone(),
                line: no + 1,
                column: 1,
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                path: path.clone(),
                line: no + 1,
                column: line.find(key).unwrap_or(0) + 1,
                message: format!("unknown key `{key}`"),
            });
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    let get = |k: &str| entries.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.clone());
    let part = |k: &str| get(k).ok_or_else(|| Error::MissingPart(k.to_string()));
    let a = read_matrix(base.join(part("A")?))?;
    let b = read_matrix(base.join(part("B")?))?;
    let c = read_vector(base.join(part("c")?))?;
    let x_star = match get("x_star") {
        Some(p) => Some(read_vector(base.join(p))?),
        None => None,
    };
    let problem = GaveProblem {
        a,
        b,
        c,
        x_star,
        label: get("label").unwrap_or_default(),
    };
    problem.validate()?;
    Ok(problem)
}
