use std::fmt;

use crate::error::{Error, Result};

/// How a [`Matrix`] keeps its entries.
///
/// Banded storage holds, for every row `i`, the columns `i - lower ..= i + upper`
/// (clipped to the matrix); everything outside the band reads as zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Storage {
    Dense,
    Banded { lower: usize, upper: usize },
}

/// Real matrix with dense row-major or banded row-major storage.
///
/// Every operation accepts either storage kind; results of binary operations
/// are banded when both operands are.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    storage: Storage,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} {:?}", self.rows, self.cols, self.storage)?;
        if self.rows <= 8 && self.cols <= 8 {
            for i in 0..self.rows {
                let row: Vec<String> = (0..self.cols).map(|j| format!("{:>10.4}", self.get(i, j))).collect();
                writeln!(f, "  [{}]", row.join(" "))?;
            }
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            storage: Storage::Dense,
            data: vec![0.0; rows * cols],
        }
    }

    /// Square banded matrix of zeros.
    pub fn banded_zeros(n: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(n.saturating_sub(1));
        let upper = upper.min(n.saturating_sub(1));
        Matrix {
            rows: n,
            cols: n,
            storage: Storage::Banded { lower, upper },
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::banded_zeros(diag.len(), 0, 0);
        m.data.copy_from_slice(diag);
        m
    }

    /// Dense matrix from row-major values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "matrix entries" });
        }
        Ok(Matrix {
            rows,
            cols,
            storage: Storage::Dense,
            data,
        })
    }

    /// Dense matrix from nested rows. Panics on ragged input; intended for literals.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), n_cols, "ragged matrix literal");
            data.extend_from_slice(r.as_ref());
        }
        Matrix {
            rows: n_rows,
            cols: n_cols,
            storage: Storage::Dense,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn storage(&self) -> Storage {
        self.storage
    }

    pub fn is_banded(&self) -> bool {
        matches!(self.storage, Storage::Banded { .. })
    }

    pub(crate) fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Lower and upper bandwidth of the storage (not of the nonzero pattern).
    pub fn storage_bandwidth(&self) -> (usize, usize) {
        match self.storage {
            Storage::Dense => (self.rows.saturating_sub(1), self.cols.saturating_sub(1)),
            Storage::Banded { lower, upper } => (lower, upper),
        }
    }

    /// Smallest `(lower, upper)` band containing every nonzero entry.
    pub fn nonzero_bandwidth(&self) -> (usize, usize) {
        let (mut lo, mut up) = (0usize, 0usize);
        for i in 0..self.rows {
            let (start, end) = self.row_span(i);
            for j in start..end {
                if self.get(i, j) != 0.0 {
                    if j < i {
                        lo = lo.max(i - j);
                    } else {
                        up = up.max(j - i);
                    }
                }
            }
        }
        (lo, up)
    }

    /// Half-open column range that may hold nonzeros in row `i`.
    #[inline]
    pub fn row_span(&self, i: usize) -> (usize, usize) {
        match self.storage {
            Storage::Dense => (0, self.cols),
            Storage::Banded { lower, upper } => (i.saturating_sub(lower), (i + upper + 1).min(self.cols)),
        }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        match self.storage {
            Storage::Dense => Some(i * self.cols + j),
            Storage::Banded { lower, upper } => {
                if j + lower < i || j > i + upper {
                    None
                } else {
                    Some(i * (lower + upper + 1) + (j + lower - i))
                }
            }
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.offset(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Sets an entry. Writing a nonzero outside a banded matrix's band panics.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        match self.offset(i, j) {
            Some(k) => self.data[k] = value,
            None => assert!(value == 0.0, "entry ({i},{j}) lies outside the band"),
        }
    }

    /// Contiguous stored values of row `i` over [`Matrix::row_span`].
    #[inline]
    pub(crate) fn row_values(&self, i: usize) -> &[f64] {
        let (start, end) = self.row_span(i);
        let base = self.offset(i, start).unwrap_or(0);
        &self.data[base..base + (end - start)]
    }

    pub fn to_dense(&self) -> Matrix {
        if self.storage == Storage::Dense {
            return self.clone();
        }
        let mut out = Matrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (start, _) = self.row_span(i);
            for (k, v) in self.row_values(i).iter().enumerate() {
                out.data[i * self.cols + start + k] = *v;
            }
        }
        out
    }

    /// Re-stores the matrix in a band. Fails if a nonzero falls outside it.
    pub fn to_banded(&self, lower: usize, upper: usize) -> Result<Matrix> {
        let n = self.ensure_square()?;
        let (lo, up) = self.nonzero_bandwidth();
        if lo > lower || up > upper {
            return Err(Error::InvalidParameter(format!(
                "nonzeros reach bandwidth ({lo},{up}) beyond requested ({lower},{upper})"
            )));
        }
        let mut out = Matrix::banded_zeros(n, lower, upper);
        for i in 0..n {
            let (start, end) = out.row_span(i);
            for j in start..end {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Banded copy with the tightest band around the nonzeros.
    pub fn compact(&self) -> Result<Matrix> {
        let (lo, up) = self.nonzero_bandwidth();
        self.to_banded(lo, up)
    }

    pub fn transpose(&self) -> Matrix {
        match self.storage {
            Storage::Dense => {
                let mut out = Matrix::zeros(self.cols, self.rows);
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        out.data[j * self.rows + i] = self.data[i * self.cols + j];
                    }
                }
                out
            }
            Storage::Banded { lower, upper } => {
                let mut out = Matrix::banded_zeros(self.rows, upper, lower);
                for i in 0..self.rows {
                    let (start, end) = self.row_span(i);
                    for j in start..end {
                        out.set(j, i, self.get(i, j));
                    }
                }
                out
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> Matrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = v.abs());
        out
    }

    pub fn scale(&self, alpha: f64) -> Matrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `alpha * self + beta * other`, keeping banded storage when both operands are banded.
    pub fn lin_comb(&self, alpha: f64, other: &Matrix, beta: f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let mut out = match (self.storage, other.storage) {
            (Storage::Banded { lower: l1, upper: u1 }, Storage::Banded { lower: l2, upper: u2 }) if self.is_square() => {
                Matrix::banded_zeros(self.rows, l1.max(l2), u1.max(u2))
            }
            _ => Matrix::zeros(self.rows, self.cols),
        };
        for i in 0..self.rows {
            let (start, end) = out.row_span(i);
            for j in start..end {
                let v = alpha * self.get(i, j) + beta * other.get(i, j);
                if let Some(k) = out.offset(i, j) {
                    out.data[k] = v;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.lin_comb(1.0, other, -1.0)
    }

    /// Diagonal matrix holding this matrix's diagonal.
    pub fn diagonal_part(&self) -> Matrix {
        Matrix::from_diagonal(&self.diagonal())
    }

    /// Copy keeping only entries with `lo <= j - i <= hi` (as signed offsets).
    pub(crate) fn band_part(&self, lo: isize, hi: isize) -> Matrix {
        let (l, u) = self.storage_bandwidth();
        let lower = if lo < 0 { (-lo) as usize } else { 0 }.min(l);
        let upper = if hi > 0 { hi as usize } else { 0 }.min(u);
        let mut out = match self.storage {
            Storage::Dense => Matrix::zeros(self.rows, self.cols),
            Storage::Banded { .. } => Matrix::banded_zeros(self.rows, lower, upper),
        };
        for i in 0..self.rows {
            let (start, end) = self.row_span(i);
            for j in start..end {
                let d = j as isize - i as isize;
                if d >= lo && d <= hi {
                    out.set(i, j, self.get(i, j));
                }
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        self.nonzero_bandwidth() == (0, 0)
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.nonzero_bandwidth().1 == 0
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.nonzero_bandwidth().0 == 0
    }

    /// `y = self * x`.
    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.rows];
        self.mat_vec_into(x, &mut y)?;
        Ok(y)
    }

    /// Writes `self * x` into `y` without allocating.
    pub fn mat_vec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (start, end) = self.row_span(i);
            *yi = self
                .row_values(i)
                .iter()
                .zip(&x[start..end])
                .map(|(a, b)| a * b)
                .sum();
        }
        Ok(())
    }

    /// `y = selfᵀ * x`.
    pub fn mat_vec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            let (start, end) = self.row_span(i);
            for (yj, a) in y[start..end].iter_mut().zip(self.row_values(i)) {
                *yj += a * xi;
            }
        }
        Ok(y)
    }

    /// Matrix product. Banded inputs give a banded result.
    pub fn mat_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = match (self.storage, other.storage) {
            (Storage::Banded { lower: l1, upper: u1 }, Storage::Banded { lower: l2, upper: u2 })
                if self.is_square() && other.is_square() =>
            {
                Matrix::banded_zeros(self.rows, l1 + l2, u1 + u2)
            }
            _ => Matrix::zeros(self.rows, other.cols),
        };
        for i in 0..self.rows {
            let (start, end) = self.row_span(i);
            for k in start..end {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let (s2, e2) = other.row_span(k);
                for j in s2..e2 {
                    let b = other.get(k, j);
                    if b != 0.0 {
                        let idx = out.offset(i, j).expect("product band covers operands");
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Iterates `(i, j, value)` over stored entries in row-major order.
    pub fn stored_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (start, _) = self.row_span(i);
            self.row_values(i).iter().enumerate().map(move |(k, v)| (i, start + k, *v))
        })
    }
}
