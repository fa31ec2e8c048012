//! Symmetric tridiagonal eigensolver.
//!
//! The main routine is the implicit-shift QL iteration of Bowdler, Martin,
//! Reinsch and Wilkinson (EISPACK `tql2`), accumulating the full set of
//! eigenvectors. A second, independent routine counts eigenvalues of a
//! positive definite matrix given as `L D L^T` and bisects on that count,
//! which resolves tiny eigenvalues to full *relative* precision where the
//! QL result is only accurate to `eps * ||J||` in absolute terms.

use crate::error::{Error, Result};

/// QL iterations allowed per eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 50;

/// Eigenvalues of a symmetric tridiagonal matrix with their eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `|v_i[0]|` for the unit eigenvector `v_i` of `eigenvalues[i]`.
    pub first_components: Vec<f64>,
    /// Unit eigenvectors, `vectors[i]` belongs to `eigenvalues[i]`; signs
    /// chosen so the first component is non-negative.
    pub vectors: Vec<Vec<f64>>,
}

fn validate(diag: &[f64], offdiag: &[f64]) -> Result<()> {
    if diag.is_empty() {
        return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
    }
    if offdiag.len() + 1 != diag.len() {
        return Err(Error::InvalidArgument(format!(
            "offdiag length {} does not match diag length {}",
            offdiag.len(),
            diag.len()
        )));
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "tridiagonal entries must be finite".into(),
        ));
    }
    Ok(())
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with main
/// diagonal `diag` and sub/super-diagonal `offdiag`.
pub fn tridiag_eigen(diag: &[f64], offdiag: &[f64]) -> Result<TridiagEigen> {
    validate(diag, offdiag)?;
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(offdiag);
    // z[row * n + col], column `col` is the eigenvector for d[col].
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    let eps = f64::EPSILON;
    let mut shift = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::EigenNonConvergence {
                        index: l,
                        sweeps: MAX_SWEEPS,
                    });
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        let zk = k * n;
                        let t = z[zk + i + 1];
                        z[zk + i + 1] = s * z[zk + i] + c * t;
                        z[zk + i] = c * z[zk + i] - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += shift;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut first_components = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &col in &order {
        let mut v: Vec<f64> = (0..n).map(|row| z[row * n + col]).collect();
        if v[0] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvalues.push(d[col]);
        first_components.push(v[0]);
        vectors.push(v);
    }
    Ok(TridiagEigen {
        eigenvalues,
        first_components,
        vectors,
    })
}

/// Pivots `d` of `J = L D L^T` by plain elimination, or `None` if the
/// matrix is not numerically positive definite.
pub fn cholesky_pivots(diag: &[f64], offdiag: &[f64]) -> Option<Vec<f64>> {
    let mut pivots = Vec::with_capacity(diag.len());
    for (i, &a) in diag.iter().enumerate() {
        let p = if i == 0 {
            a
        } else {
            a - offdiag[i - 1] * offdiag[i - 1] / pivots[i - 1]
        };
        if !(p.is_finite() && p > 0.0) {
            return None;
        }
        pivots.push(p);
    }
    Some(pivots)
}

/// Number of eigenvalues of `L D L^T` below `sigma`.
///
/// Computes `L+ D+ L+^T = L D L^T - sigma I` with the differential
/// stationary qd transform and counts negative pivots in `D+`.
fn count_below(pivots: &[f64], multipliers: &[f64], sigma: f64) -> usize {
    let n = pivots.len();
    let mut count = 0;
    let mut t = -sigma;
    for i in 0..n - 1 {
        let mut dplus = pivots[i] + t;
        if dplus == 0.0 {
            dplus = -f64::MIN_POSITIVE;
        }
        if dplus < 0.0 {
            count += 1;
        }
        t = (t / dplus) * multipliers[i] * multipliers[i] * pivots[i] - sigma;
    }
    if pivots[n - 1] + t < 0.0 {
        count += 1;
    }
    count
}

/// Refine approximate eigenvalues of the positive definite tridiagonal
/// matrix `J = L D L^T` (with `D = diag(pivots)` and `(L D)_{i+1,i} =
/// offdiag[i]`) to high relative accuracy by bisection.
///
/// `estimates` must be ascending and accurate to roughly `eps * ||J||`.
/// Returns `None` if any pivot is not positive.
pub fn refine_positive_definite(
    pivots: &[f64],
    offdiag: &[f64],
    estimates: &[f64],
    norm: f64,
) -> Option<Vec<f64>> {
    let n = pivots.len();
    if n != estimates.len()
        || offdiag.len() + 1 != n
        || pivots.iter().any(|&p| !(p.is_finite() && p > 0.0))
    {
        return None;
    }
    let multipliers: Vec<f64> = offdiag.iter().zip(pivots).map(|(b, d)| b / d).collect();
    let base = 32.0 * n as f64 * f64::EPSILON * norm.max(f64::MIN_POSITIVE);

    let refined = estimates
        .iter()
        .enumerate()
        .map(|(k, &est)| {
            let est = est.max(0.0);
            let mut delta = base;
            let mut hi = est + delta;
            for _ in 0..200 {
                if count_below(pivots, &multipliers, hi) > k {
                    break;
                }
                hi += delta;
                delta *= 2.0;
            }
            let mut delta = base;
            let mut lo = (est - delta).max(0.0);
            while lo > 0.0 && count_below(pivots, &multipliers, lo) > k {
                delta *= 2.0;
                lo = (est - delta).max(0.0);
            }
            for _ in 0..1000 {
                if hi - lo <= 2.0 * f64::EPSILON * hi {
                    break;
                }
                let mid = if lo == 0.0 {
                    hi / 1024.0
                } else if hi > 2.0 * lo {
                    (lo * hi).sqrt()
                } else {
                    0.5 * (lo + hi)
                };
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(pivots, &multipliers, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    Some(refined)
}
