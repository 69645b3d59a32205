//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by implicit-shift QL iteration, eigenvalues only.
//!
//! The reduction works on the lower triangle with row-contiguous access so
//! the inner loops stay vectorizable; no eigenvectors are accumulated.

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("QL iteration failed to converge for eigenvalue index {index}")]
    NoConvergence { index: usize },
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Only the lower triangle of `a` is read.
pub(crate) fn symmetric_eigenvalues(a: &Array2<f64>) -> Result<Vec<f64>, EigenError> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let mut flat = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            flat[i * n + j] = a[(i, j)];
        }
    }
    let (mut d, mut e) = tridiagonalize(&mut flat, n);
    tridiagonal_eigenvalues(&mut d, &mut e)?;
    d.sort_unstable_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(d)
}

/// Householder reduction of the lower triangle of `a` (flat row-major,
/// dimension `n`) to tridiagonal form. Returns the diagonal `d` and the
/// subdiagonal `e` (with `e[0] = 0`).
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut p = vec![0.0; n];

    for i in (1..n).rev() {
        let l = i - 1;
        let row_i = i * n;
        if l == 0 {
            e[i] = a[row_i];
            continue;
        }
        let scale: f64 = a[row_i..row_i + i].iter().map(|v| v.abs()).sum();
        if scale == 0.0 {
            e[i] = 0.0;
            continue;
        }
        // Scaled Householder vector for row i.
        let mut h = 0.0;
        for k in 0..i {
            u[k] = a[row_i + k] / scale;
            h += u[k] * u[k];
        }
        let f = u[l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        u[l] = f - g;

        // p = A u on the leading block, using rows of the lower triangle
        // twice: once as a dot product, once as an axpy.
        p[..i].fill(0.0);
        for j in 0..i {
            let row = j * n;
            let uj = u[j];
            let mut dot = a[row + j] * uj;
            for k in 0..j {
                dot += a[row + k] * u[k];
                p[k] += a[row + k] * uj;
            }
            p[j] += dot;
        }

        // w = (p - (u'p / 2h) u) / h, stored in p.
        let mut f_acc = 0.0;
        for j in 0..i {
            p[j] /= h;
            f_acc += p[j] * u[j];
        }
        let hh = f_acc / (2.0 * h);
        for j in 0..i {
            p[j] -= hh * u[j];
        }

        // Symmetric rank-2 update A <- A - u w' - w u' on the lower triangle.
        for j in 0..i {
            let row = j * n;
            let (uj, wj) = (u[j], p[j]);
            for k in 0..=j {
                a[row + k] -= uj * p[k] + wj * u[k];
            }
        }
        // Row i is untouched above; store the final value for its diagonal
        // neighbor implicitly via e[i] computed earlier.
    }

    let d: Vec<f64> = (0..n).map(|j| a[j * n + j]).collect();
    (d, e)
}

/// Implicit-shift QL iteration on a tridiagonal matrix, in place.
///
/// `d` holds the diagonal, `e[1..]` the subdiagonal (`e[0]` ignored). On
/// success `d` contains the eigenvalues, unsorted.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<(), EigenError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    // Absolute deflation floor: with exact zeros on the diagonal (traceless
    // matrices produce them) a purely relative test never fires. Setting a
    // subdiagonal of size eps * scale to zero perturbs eigenvalues by at
    // most that amount.
    let scale = d
        .iter()
        .zip(e.iter())
        .map(|(a, b)| a.abs() + b.abs())
        .fold(0.0f64, f64::max);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * (dd + scale) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(EigenError::NoConvergence { index: l });
            }

            // Wilkinson-style shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Deflate: the rotation chain collapsed early.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
