//! Dense least squares by Householder QR.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Column-major `rows × cols` matrix of regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Panics unless every column has the same length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        assert!(
            columns.iter().all(|c| c.len() == rows),
            "design columns must have equal length"
        );
        Self {
            rows,
            cols: columns.len(),
            data: columns.concat(),
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for k in 0..cols {
                m.data[k * rows + i] = values[i * cols + k];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[k * self.rows + i]
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.cols).map(move |k| self.get(i, k))
    }

    /// `X f`.
    pub fn mul_vec(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (k, &fk) in f.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(self.column(k)) {
                *o += x * fk;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LstsqError {
    /// Fewer observations than regressors plus one.
    Underdetermined { n: usize, k: usize },
    /// Columns (by index) lying in the span of the columns before them.
    RankDeficient(Vec<usize>),
    Dimension { rows: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Relative size below which a column's component orthogonal to the earlier
/// columns is treated as zero.
const RANK_TOLERANCE: f64 = 1e-10;

/// Minimizes `|y - X f|²` via Householder reflections applied to `[X | y]`.
///
/// Requires `n >= k + 1`. A column whose residual norm after reflecting out
/// the earlier columns falls under `RANK_TOLERANCE` times its own norm is
/// reported as dependent; all such columns are listed in the error.
pub fn least_squares(x: &DesignMatrix, y: &[f64]) -> Result<LeastSquares, LstsqError> {
    let (n, k) = (x.rows, x.cols);
    if y.len() != n {
        return Err(LstsqError::Dimension { rows: n, len: y.len() });
    }
    if n <= k {
        return Err(LstsqError::Underdetermined { n, k });
    }

    let mut a = x.data.clone();
    let mut b = y.to_vec();
    // pivot row of each accepted column
    let mut rank = 0;
    let mut dependent = Vec::new();
    for c in 0..k {
        let original = norm(&x.data[c * n..(c + 1) * n]);
        let col = &a[c * n + rank..(c + 1) * n];
        let tail = norm(col);
        if original == 0.0 || tail <= RANK_TOLERANCE * original {
            dependent.push(c);
            continue;
        }
        let alpha = if col[0] > 0.0 { -tail } else { tail };
        let mut v = col.to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        for c2 in c..k {
            reflect(&v, vv, &mut a[c2 * n + rank..(c2 + 1) * n]);
        }
        reflect(&v, vv, &mut b[rank..]);
        rank += 1;
    }
    if !dependent.is_empty() {
        return Err(LstsqError::RankDeficient(dependent));
    }

    // back substitution on the upper triangle R (row r lives at a[c * n + r])
    let mut f = vec![0.0; k];
    for r in (0..k).rev() {
        let mut acc = b[r];
        for c in r + 1..k {
            acc -= a[c * n + r] * f[c];
        }
        f[r] = acc / a[r * n + r];
    }

    let fitted = x.mul_vec(&f);
    let residuals = y.iter().zip(&fitted).map(|(y, h)| y - h).collect();
    Ok(LeastSquares {
        coefficients: f,
        fitted,
        residuals,
    })
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large loadings
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * math::sqrt(v.iter().map(|x| (x / scale) * (x / scale)).sum())
}

/// `w <- (I - 2 v vᵀ / vᵀv) w`
fn reflect(v: &[f64], vv: f64, w: &mut [f64]) {
    let dot: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
    let t = 2.0 * dot / vv;
    for (wi, vi) in w.iter_mut().zip(v) {
        *wi -= t * vi;
    }
}
