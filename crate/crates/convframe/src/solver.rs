//! Iterative Krylov solvers for linear systems presented as operator closures.
//!
//! Both solvers take the coefficient matrix as a matrix-vector-product
//! closure, so callers can combine sparse and diagonal terms without
//! materialising the system matrix. Convergence is measured by the relative
//! residual `‖b − Ax‖ ≤ tol·‖b‖`, and both solvers accept an optional warm
//! start. All arithmetic is sequential with a fixed evaluation order, so
//! results are bit-reproducible for identical inputs.

use ndarray::Array1;

use crate::error::{Error, Result};

/// Outcome of a successful iterative solve.
#[derive(Debug, Clone)]
pub struct Solution {
    /// The computed solution vector.
    pub x: Array1<f64>,
    /// Number of iterations performed (0 when the start vector already
    /// satisfies the tolerance).
    pub iterations: usize,
    /// Relative residual `‖b − Ax‖ / ‖b‖` at exit (0 when `b = 0`).
    pub residual: f64,
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Conjugate gradient for symmetric positive (semi-)definite operators.
///
/// `apply` must evaluate `y = A·x`. Converges when the recurrence residual
/// satisfies `‖r‖ ≤ tol·‖b‖`. Returns an error carrying the achieved relative
/// residual if the iteration limit is hit or a non-positive curvature
/// direction reveals an indefinite operator.
pub fn conjugate_gradient<A>(
    mut apply: A,
    b: &Array1<f64>,
    x0: Option<&Array1<f64>>,
    tol: f64,
    max_iters: usize,
    context: &'static str,
) -> Result<Solution>
where
    A: FnMut(&Array1<f64>, &mut Array1<f64>),
{
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(Solution {
            x: Array1::zeros(n),
            iterations: 0,
            residual: 0.0,
        });
    }

    let mut x = match x0 {
        Some(v) => v.clone(),
        None => Array1::zeros(n),
    };
    let mut work = Array1::zeros(n);
    apply(&x, &mut work);
    let mut r = b - &work;
    let mut r_norm = norm(&r);
    if r_norm <= tol * b_norm {
        return Ok(Solution {
            x,
            iterations: 0,
            residual: r_norm / b_norm,
        });
    }

    let mut p = r.clone();
    let mut rs_old = r.dot(&r);
    for it in 1..=max_iters {
        apply(&p, &mut work);
        let curvature = p.dot(&work);
        if curvature <= 0.0 {
            return Err(Error::SolverNoConvergence {
                context,
                iterations: it,
                residual: r_norm / b_norm,
            });
        }
        let alpha = rs_old / curvature;
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &work);
        r_norm = norm(&r);
        if r_norm <= tol * b_norm {
            return Ok(Solution {
                x,
                iterations: it,
                residual: r_norm / b_norm,
            });
        }
        let rs_new = r.dot(&r);
        let beta = rs_new / rs_old;
        // p ← r + beta·p, in place.
        p.mapv_inplace(|v| beta * v);
        p += &r;
        rs_old = rs_new;
    }
    Err(Error::SolverNoConvergence {
        context,
        iterations: max_iters,
        residual: r_norm / b_norm,
    })
}

/// BiCGStab for general (possibly nonsymmetric) operators.
///
/// Same interface and convergence criterion as [`conjugate_gradient`].
/// Orthogonality breakdowns (vanishing `ρ`, `r̂ᵀv`, or `tᵀt`) surface as
/// errors carrying the last relative residual.
pub fn bicgstab<A>(
    mut apply: A,
    b: &Array1<f64>,
    x0: Option<&Array1<f64>>,
    tol: f64,
    max_iters: usize,
    context: &'static str,
) -> Result<Solution>
where
    A: FnMut(&Array1<f64>, &mut Array1<f64>),
{
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(Solution {
            x: Array1::zeros(n),
            iterations: 0,
            residual: 0.0,
        });
    }

    let mut x = match x0 {
        Some(v) => v.clone(),
        None => Array1::zeros(n),
    };
    let mut v = Array1::zeros(n);
    apply(&x, &mut v);
    let mut r = b - &v;
    let mut r_norm = norm(&r);
    if r_norm <= tol * b_norm {
        return Ok(Solution {
            x,
            iterations: 0,
            residual: r_norm / b_norm,
        });
    }

    let breakdown = f64::EPSILON * b_norm * b_norm;
    let r_hat = r.clone();
    let mut p = Array1::zeros(n);
    let mut t = Array1::zeros(n);
    v.fill(0.0);
    let mut rho = 1.0_f64;
    let mut alpha = 1.0_f64;
    let mut omega = 1.0_f64;

    for it in 1..=max_iters {
        let rho_new = r_hat.dot(&r);
        if rho_new.abs() < breakdown || omega == 0.0 {
            return Err(Error::SolverNoConvergence {
                context,
                iterations: it,
                residual: r_norm / b_norm,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        // p ← r + beta·(p − omega·v), in place.
        p.scaled_add(-omega, &v);
        p.mapv_inplace(|val| beta * val);
        p += &r;
        apply(&p, &mut v);
        let denom = r_hat.dot(&v);
        if denom.abs() < breakdown {
            return Err(Error::SolverNoConvergence {
                context,
                iterations: it,
                residual: r_norm / b_norm,
            });
        }
        alpha = rho_new / denom;
        // s overwrites r: s = r − alpha·v.
        r.scaled_add(-alpha, &v);
        let s_norm = norm(&r);
        if s_norm <= tol * b_norm {
            x.scaled_add(alpha, &p);
            return Ok(Solution {
                x,
                iterations: it,
                residual: s_norm / b_norm,
            });
        }
        apply(&r, &mut t);
        let tt = t.dot(&t);
        if tt <= 0.0 {
            return Err(Error::SolverNoConvergence {
                context,
                iterations: it,
                residual: s_norm / b_norm,
            });
        }
        omega = t.dot(&r) / tt;
        x.scaled_add(alpha, &p);
        x.scaled_add(omega, &r);
        r.scaled_add(-omega, &t);
        r_norm = norm(&r);
        if r_norm <= tol * b_norm {
            return Ok(Solution {
                x,
                iterations: it,
                residual: r_norm / b_norm,
            });
        }
        rho = rho_new;
    }
    Err(Error::SolverNoConvergence {
        context,
        iterations: max_iters,
        residual: r_norm / b_norm,
    })
}
