//! Dense linear-algebra kernels used across the crate: cyclic Jacobi
//! symmetric eigendecomposition, implicit-QL tridiagonal eigendecomposition,
//! one-sided Jacobi SVD, LU solves, and orthonormalization utilities.
//!
//! All routines are deterministic and allocation-honest (inputs are never
//! mutated). Jacobi methods are chosen for accuracy: one-sided Jacobi
//! computes small singular values with high relative accuracy, which the
//! rank-deficiency contracts downstream rely on.

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};

/// Machine-epsilon-scale threshold for Jacobi convergence tests.
const JACOBI_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 60;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues ascending, eigenvectors as columns)`. The input is
/// symmetrized as `(A + Aᵀ)/2` before iterating, so tiny asymmetries from
/// upstream arithmetic are absorbed rather than amplified.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "symmetric_eigen needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = 0.5 * (a[[i, j]] + a[[j, i]]);
        }
    }
    let mut v = Array2::eye(n);
    let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if (2.0 * off).sqrt() <= JACOBI_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_rot = t * c;
                // update rows/columns p and q
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s_rot * mkq;
                    m[[k, q]] = s_rot * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s_rot * mqk;
                    m[[q, k]] = s_rot * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s_rot * vkq;
                    v[[k, q]] = s_rot * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok((eigenvalues, vectors))
}

/// Eigendecomposition of a symmetric tridiagonal matrix (implicit QL with
/// Wilkinson-style shifts). `d` holds the diagonal, `e` the subdiagonal
/// (`e[i]` couples rows i and i+1; `e[n-1]` is ignored). `z` accumulates the
/// rotations: pass the identity for eigenvectors of T, or a basis matrix to
/// get Ritz vectors directly.
///
/// On return `d` holds eigenvalues ascending and the columns of `z` are
/// reordered to match.
pub fn tridiagonal_eigen(d: &mut [f64], e: &mut [f64], z: &mut Array2<f64>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    if e.len() < n || z.ncols() != n {
        return Err(Error::DimensionMismatch(
            "tridiagonal_eigen: inconsistent d/e/z sizes".into(),
        ));
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            // locate a negligible subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNoConvergence {
                    residual: e[l].abs(),
                    iterations: iter,
                });
            }
            // form shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s_rot = 1.0;
            let mut c_rot = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s_rot * e[i];
                let b = c_rot * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // rotation annihilated early; drop the shift and restart
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s_rot = f / r;
                c_rot = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s_rot + 2.0 * c_rot * b;
                p = s_rot * r;
                d[i + 1] = g + p;
                g = c_rot * r - b;
                for k in 0..z.nrows() {
                    f = z[[k, i + 1]];
                    z[[k, i + 1]] = s_rot * z[[k, i]] + c_rot * f;
                    z[[k, i]] = c_rot * z[[k, i]] - s_rot * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // sort ascending, permuting columns of z alongside
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let sorted_d: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut sorted_z = Array2::zeros(z.dim());
    for (dst, &src) in order.iter().enumerate() {
        sorted_z.column_mut(dst).assign(&z.column(src));
    }
    d.copy_from_slice(&sorted_d);
    *z = sorted_z;
    Ok(())
}

/// Eigendecomposition of a symmetric matrix by Householder tridiagonalization
/// followed by implicit-QL iteration. Returns `(eigenvalues ascending,
/// eigenvectors as columns)`, like [`symmetric_eigen`], but in O(n³) with a
/// small constant — preferred for n beyond a few hundred where cyclic Jacobi
/// becomes slow. The input is symmetrized as `(A + Aᵀ)/2` first.
pub fn symmetric_eigen_qr(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "symmetric_eigen_qr needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }

    let mut z = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            z[[i, j]] = 0.5 * (a[[i, j]] + a[[j, i]]);
        }
    }
    let mut d = vec![0.0_f64; n];
    let mut e = vec![0.0_f64; n];

    // Householder reduction to tridiagonal form, accumulating the
    // transformation in `z` (classic tred2 scheme).
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += z[[i, k]].abs();
            }
            if scale == 0.0 {
                e[i] = z[[i, l]];
            } else {
                for k in 0..=l {
                    z[[i, k]] /= scale;
                    h += z[[i, k]] * z[[i, k]];
                }
                let f = z[[i, l]];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[[i, l]] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    z[[j, i]] = z[[i, j]] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += z[[j, k]] * z[[i, k]];
                    }
                    for k in (j + 1)..=l {
                        g_acc += z[[k, j]] * z[[i, k]];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * z[[i, j]];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let fj = z[[i, j]];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        let delta = fj * e[k] + gj * z[[i, k]];
                        z[[j, k]] -= delta;
                    }
                }
            }
        } else {
            e[i] = z[[i, l]];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[[i, k]] * z[[k, j]];
                }
                for k in 0..i {
                    let upd = g * z[[k, i]];
                    z[[k, j]] -= upd;
                }
            }
        }
        d[i] = z[[i, i]];
        z[[i, i]] = 1.0;
        for j in 0..i {
            z[[j, i]] = 0.0;
            z[[i, j]] = 0.0;
        }
    }

    // Re-index the off-diagonal so e[i] couples rows i and i+1.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    tridiagonal_eigen(&mut d, &mut e, &mut z)?;
    Ok((Array1::from(d), z))
}

/// Flips the sign of each column so its largest-magnitude entry is positive
/// (the first such entry on ties). Zero columns are left untouched. Used to
/// make eigenvector and singular-vector bases deterministic.
pub fn canonicalize_column_signs(m: &mut Array2<f64>) {
    for mut col in m.columns_mut() {
        let mut best = 0usize;
        let mut best_abs = 0.0_f64;
        for (idx, &v) in col.iter().enumerate() {
            let a = v.abs();
            if a > best_abs {
                best_abs = a;
                best = idx;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

/// Thin SVD of a tall matrix (rows ≥ cols) by one-sided Jacobi column
/// orthogonalization: `a = u · diag(sigma) · vᵀ` with `u` n×m, `v` m×m
/// orthonormal and `sigma` descending.
///
/// Columns with numerically zero singular value get deterministic
/// orthonormal filler vectors in `u` (Gram-Schmidt against the rest), so
/// `u` always has orthonormal columns.
pub struct ThinSvd {
    pub u: Array2<f64>,
    pub sigma: Array1<f64>,
    pub v: Array2<f64>,
}

pub fn thin_svd(a: &Array2<f64>) -> Result<ThinSvd> {
    let (n, m) = a.dim();
    if n < m {
        return Err(Error::DimensionMismatch(format!(
            "thin_svd expects a tall matrix, got {n}x{m}"
        )));
    }
    let mut work = a.clone();
    let mut v = Array2::eye(m);

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..n {
                    let wp = work[[k, p]];
                    let wq = work[[k, q]];
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_rot = c * t;
                for k in 0..n {
                    let wp = work[[k, p]];
                    let wq = work[[k, q]];
                    work[[k, p]] = c * wp - s_rot * wq;
                    work[[k, q]] = s_rot * wp + c * wq;
                }
                for k in 0..m {
                    let vp = v[[k, p]];
                    let vq = v[[k, q]];
                    v[[k, p]] = c * vp - s_rot * vq;
                    v[[k, q]] = s_rot * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        // One-sided Jacobi converges in well under MAX_SWEEPS sweeps for any
        // conditioning we produce; reaching this means pathological input.
        return Err(Error::EigenNoConvergence {
            residual: f64::NAN,
            iterations: MAX_SWEEPS,
        });
    }

    let mut sigma: Vec<f64> = (0..m)
        .map(|j| work.column(j).dot(&work.column(j)).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));
    let mut u = Array2::zeros((n, m));
    let mut v_sorted = Array2::zeros((m, m));
    let mut sigma_sorted = Array1::zeros(m);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = smax * (n.max(m) as f64) * f64::EPSILON;
    for (dst, &src) in order.iter().enumerate() {
        sigma_sorted[dst] = sigma[src];
        v_sorted.column_mut(dst).assign(&v.column(src));
        if sigma[src] > cutoff && sigma[src] > 0.0 {
            let col = work.column(src).mapv(|x| x / sigma[src]);
            u.column_mut(dst).assign(&col);
        }
        // zero/negligible columns are filled below
    }
    sigma = sigma_sorted.to_vec();

    // deterministic completion of u for null directions
    for j in 0..m {
        if sigma[j] > cutoff && sigma[j] > 0.0 {
            continue;
        }
        let mut filled = false;
        for cand in 0..n {
            let mut col = Array1::zeros(n);
            col[cand] = 1.0;
            for _ in 0..2 {
                for (k, &sk) in sigma.iter().enumerate() {
                    if k == j || (sk <= cutoff && k > j) {
                        continue;
                    }
                    let proj = u.column(k).dot(&col);
                    col = &col - &(proj * &u.column(k).to_owned());
                }
            }
            let norm = col.dot(&col).sqrt();
            if norm > 0.5 {
                u.column_mut(j).assign(&(col / norm));
                filled = true;
                break;
            }
        }
        if !filled {
            return Err(Error::SingularMatrix(
                "thin_svd: could not complete left singular basis".into(),
            ));
        }
    }

    Ok(ThinSvd {
        u,
        sigma: Array1::from_vec(sigma),
        v: v_sorted,
    })
}

/// Solve `A·X = B` for dense square `A` by LU with partial pivoting.
pub fn lu_solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "lu_solve: A is {}x{}, B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for k in 0..n {
        let mut p = k;
        let mut best = lu[[k, k]].abs();
        for i in (k + 1)..n {
            let v = lu[[i, k]].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= scale * (n as f64) * f64::EPSILON {
            return Err(Error::SingularMatrix(format!(
                "pivot {best:.3e} at column {k} (scale {scale:.3e})"
            )));
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
            piv.swap(k, p);
        }
        let pivot = lu[[k, k]];
        for i in (k + 1)..n {
            let factor = lu[[i, k]] / pivot;
            lu[[i, k]] = factor;
            for j in (k + 1)..n {
                lu[[i, j]] -= factor * lu[[k, j]];
            }
        }
    }

    let mut x = Array2::zeros(b.dim());
    for c in 0..b.ncols() {
        // apply permutation
        let mut y: Vec<f64> = (0..n).map(|i| b[[piv[i], c]]).collect();
        // forward substitution (unit lower)
        for i in 1..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= lu[[i, j]] * y[j];
            }
            y[i] = acc;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc -= lu[[i, j]] * y[j];
            }
            y[i] = acc / lu[[i, i]];
        }
        for i in 0..n {
            x[[i, c]] = y[i];
        }
    }
    Ok(x)
}

/// Solve `A·x = b` for a single right-hand side.
pub fn lu_solve_vec(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let b2 = b.clone().insert_axis(ndarray::Axis(1));
    let x = lu_solve(a, &b2)?;
    Ok(x.column(0).to_owned())
}

/// Orthonormalize the columns of `a` by modified Gram-Schmidt with
/// re-orthogonalization. Errors if a column is numerically dependent on its
/// predecessors.
pub fn orthonormalize_columns(a: &Array2<f64>) -> Result<Array2<f64>> {
    let (n, m) = a.dim();
    if m > n {
        return Err(Error::DimensionMismatch(format!(
            "cannot orthonormalize {m} columns in dimension {n}"
        )));
    }
    let mut q = a.clone();
    for j in 0..m {
        let mut col = q.column(j).to_owned();
        let original = col.dot(&col).sqrt();
        for _pass in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dot(&col);
                col = &col - &(proj * &q.column(k).to_owned());
            }
        }
        let norm = col.dot(&col).sqrt();
        if norm <= 1e-10 * original.max(1.0) {
            return Err(Error::SingularMatrix(format!(
                "column {j} is numerically dependent (residual {norm:.3e})"
            )));
        }
        q.column_mut(j).assign(&(col / norm));
    }
    Ok(q)
}

/// Extend orthonormal columns `basis` (n×p) to a full orthonormal basis of
/// ℝⁿ by deterministically sweeping the standard basis.
pub fn complete_orthonormal(basis: &Array2<f64>) -> Result<Array2<f64>> {
    let (n, p) = basis.dim();
    if p > n {
        return Err(Error::DimensionMismatch(format!(
            "{p} columns cannot be orthonormal in dimension {n}"
        )));
    }
    let mut q = Array2::zeros((n, n));
    q.slice_mut(s![.., ..p]).assign(basis);
    let mut filled = p;
    for cand in 0..n {
        if filled == n {
            break;
        }
        let mut col = Array1::zeros(n);
        col[cand] = 1.0;
        for _pass in 0..2 {
            for k in 0..filled {
                let proj = q.column(k).dot(&col);
                col = &col - &(proj * &q.column(k).to_owned());
            }
        }
        let norm = col.dot(&col).sqrt();
        if norm > 0.5 {
            q.column_mut(filled).assign(&(col / norm));
            filled += 1;
        }
    }
    if filled != n {
        return Err(Error::NotOrthonormal(
            "completion failed; input columns not orthonormal?".into(),
        ));
    }
    Ok(q)
}

/// Orthogonal (Procrustes) factor of a tall matrix: the `U·Vᵀ` of its thin
/// SVD. Maximizes `tr(Qᵀ·M)` over matrices with orthonormal columns.
pub fn orthogonal_factor(m: &Array2<f64>) -> Result<Array2<f64>> {
    let svd = thin_svd(m)?;
    Ok(svd.u.dot(&svd.v.t()))
}
