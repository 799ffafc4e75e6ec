//! Small dense linear-algebra helpers shared by the geometry and SDE code.

use crate::{Matrix, Vector};
#[allow(unused_imports)]
use num_traits::Float;

/// Orthonormal basis of the column span of `m` (thin QR), with column signs
/// chosen so that the `i`-th basis vector has a positive inner product with
/// the `i`-th column of `m`.
pub fn orthonormal_columns(m: &Matrix) -> Matrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Matrix::zeros(rows, 0);
    }
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..cols.min(q.ncols()) {
        if r[(i, i)] < 0.0 {
            let mut col = q.column_mut(i);
            col.neg_mut();
        }
    }
    q
}

/// Ratio of the smallest to the largest singular value (0 for a zero matrix).
pub fn singular_value_ratio(m: &Matrix) -> f64 {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Moore-Penrose left inverse `(JᵀJ)⁻¹Jᵀ` of a full-column-rank matrix.
pub fn left_inverse(j: &Matrix) -> Option<Matrix> {
    let jt = j.transpose();
    let gram = &jt * j;
    let inv = gram.try_inverse()?;
    Some(inv * jt)
}

/// Least-squares solution of `j·x ≈ b` through the SVD (tolerates rank loss).
pub fn least_squares(j: &Matrix, b: &Vector) -> Vector {
    let svd = j.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = max * 1e-14;
    svd.solve(b, eps).unwrap_or_else(|_| Vector::zeros(j.ncols()))
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a * scale;
    let mut result = Matrix::identity(n, n);
    let mut term = Matrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        result += &term;
        if term.norm() <= f64::EPSILON * result.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Central finite-difference Jacobian of `f` at `x` with per-coordinate step
/// `cbrt(eps)·max(1, |x_i|)`.
pub fn fd_jacobian<F>(f: F, x: &Vector) -> Matrix
where
    F: Fn(&Vector) -> Vector,
{
    let base = f(x);
    let mut jac = Matrix::zeros(base.len(), x.len());
    for i in 0..x.len() {
        let h = f64::EPSILON.cbrt() * x[i].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let col = (f(&xp) - f(&xm)) / (2.0 * h);
        jac.set_column(i, &col);
    }
    jac
}

/// SplitMix64 finaliser; used to derive independent per-path seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` derived from a master seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}
