//! Exact normal-equations least squares over big rationals.

#![allow(dead_code, clippy::needless_range_loop)]

use cryptofactor_core::linalg::DesignMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};

/// `sign * mantissa` and binary exponent of a finite f64.
fn decode(x: f64) -> (BigInt, i16) {
    let (m, e, sign) = Float::integer_decode(x);
    (BigInt::from(m) * i64::from(sign), e)
}

/// Solves `X'X b = X'y` exactly; `None` when `X'X` is singular.
///
/// Every input is scaled by a common power of two into an integer, the
/// normal equations are formed and reduced by fraction-free (Bareiss)
/// elimination over big integers, and only the final back substitution uses
/// rationals.
pub fn exact_ols(x: &DesignMatrix, y: &[f64]) -> Option<Vec<f64>> {
    let (n, k) = (x.rows(), x.cols());
    let mut cells: Vec<Vec<(BigInt, i16)>> = (0..k).map(|c| x.column(c).iter().map(|&v| decode(v)).collect()).collect();
    cells.push(y.iter().map(|&v| decode(v)).collect());
    let low = cells.iter().flatten().filter(|(m, _)| !m.is_zero()).map(|&(_, e)| e).min().unwrap_or(0);
    let ints: Vec<Vec<BigInt>> = cells
        .into_iter()
        .map(|col| col.into_iter().map(|(m, e)| m << (e - low) as usize).collect())
        .collect();
    let dot = |a: &[BigInt], b: &[BigInt]| (0..n).fold(BigInt::zero(), |acc, i| acc + &a[i] * &b[i]);
    let mut a: Vec<Vec<BigInt>> = (0..k).map(|r| (0..=k).map(|c| dot(&ints[r], &ints[c])).collect()).collect();

    let mut prev = BigInt::one();
    for p in 0..k {
        let pivot = (p..k).find(|&r| !a[r][p].is_zero())?;
        a.swap(p, pivot);
        for i in p + 1..k {
            for j in p + 1..=k {
                let v = (&a[i][j] * &a[p][p] - &a[i][p] * &a[p][j]) / &prev;
                a[i][j] = v;
            }
            a[i][p] = BigInt::zero();
        }
        prev = a[p][p].clone();
    }
    let mut b = vec![BigRational::zero(); k];
    for r in (0..k).rev() {
        let mut acc = BigRational::from_integer(a[r][k].clone());
        for c in r + 1..k {
            acc -= BigRational::from_integer(a[r][c].clone()) * &b[c];
        }
        b[r] = acc / BigRational::from_integer(a[r][r].clone());
    }
    Some(b.iter().map(|v| v.to_f64().expect("representable")).collect())
}

/// Diagonal of `(X'X)^{-1}` by f64 Gauss-Jordan with partial pivoting.
pub fn normal_inverse_diagonal(x: &DesignMatrix) -> Vec<f64> {
    let (n, k) = (x.rows(), x.cols());
    let mut a = vec![vec![0.0; 2 * k]; k];
    for r in 0..k {
        for c in 0..k {
            a[r][c] = (0..n).map(|i| x.get(i, r) * x.get(i, c)).sum();
        }
        a[r][k + r] = 1.0;
    }
    for p in 0..k {
        let pivot = (p..k)
            .max_by(|&u, &v| a[u][p].abs().total_cmp(&a[v][p].abs()))
            .unwrap();
        a.swap(p, pivot);
        let d = a[p][p];
        for v in a[p].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != p {
                let m = a[r][p];
                for c in 0..2 * k {
                    a[r][c] -= m * a[p][c];
                }
            }
        }
    }
    (0..k).map(|r| a[r][k + r]).collect()
}

/// `sqrt(365) * mean / sd` with the sample sd, evaluated term by term.
pub fn direct_tstat(values: &[f64]) -> f64 {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    365f64.sqrt() * mean / var.sqrt()
}
