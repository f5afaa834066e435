//! Damped least-squares engine: Levenberg–Marquardt with Marquardt
//! diagonal scaling, monotone accepted steps, and Gauss–Newton
//! covariance at the solution.
//!
//! The problems fitted here are small (a handful of parameters against a
//! few thousand residuals), so the normal equations are solved with a
//! dense Cholesky factorization.

use crate::error::{Error, Result};

/// Dense row-major matrix, just big enough for this crate's needs.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    /// JᵀJ of this matrix.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for r in 0..self.rows {
                    acc += self.at(r, i) * self.at(r, j);
                }
                *g.at_mut(i, j) = acc;
                *g.at_mut(j, i) = acc;
            }
        }
        g
    }

    /// Jᵀ r of this matrix against a residual vector.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, vr) in v.iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.at(r, c) * vr;
            }
        }
        out
    }
}

/// Cholesky solve of a symmetric positive-definite system; `None` when a
/// pivot drops below `pivot_floor`.
pub fn cholesky_solve(a: &DenseMatrix, b: &[f64], pivot_floor: f64) -> Option<Vec<f64>> {
    let n = a.rows;
    let mut l = a.clone();
    for k in 0..n {
        let mut diag = l.at(k, k);
        for j in 0..k {
            diag -= l.at(k, j) * l.at(k, j);
        }
        if diag <= pivot_floor {
            return None;
        }
        let diag = diag.sqrt();
        *l.at_mut(k, k) = diag;
        for i in (k + 1)..n {
            let mut v = l.at(i, k);
            for j in 0..k {
                v -= l.at(i, j) * l.at(k, j);
            }
            *l.at_mut(i, k) = v / diag;
        }
    }
    // forward then back substitution
    let mut y = b.to_vec();
    for i in 0..n {
        for j in 0..i {
            y[i] -= l.at(i, j) * y[j];
        }
        y[i] /= l.at(i, i);
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            y[i] -= l.at(j, i) * y[j];
        }
        y[i] /= l.at(i, i);
    }
    Some(y)
}

/// Inverse of a symmetric positive-definite matrix via Cholesky solves.
pub fn spd_inverse(a: &DenseMatrix, pivot_floor: f64) -> Option<DenseMatrix> {
    let n = a.rows;
    let mut inv = DenseMatrix::zeros(n, n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = cholesky_solve(a, &e, pivot_floor)?;
        for (row, value) in x.iter().enumerate() {
            *inv.at_mut(row, col) = *value;
        }
    }
    Some(inv)
}

/// Rescales a Gram matrix to unit diagonal: C = D^{-1/2} A D^{-1/2}.
/// Returns the scaled matrix and the scale factors d_i = √A_ii, or
/// `None` when a diagonal entry is not positive.
fn scale_gram(a: &DenseMatrix) -> Option<(DenseMatrix, Vec<f64>)> {
    let n = a.rows;
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let v = a.at(i, i);
        if !v.is_finite() || v <= 0.0 {
            return None;
        }
        d.push(v.sqrt());
    }
    let mut c = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            *c.at_mut(i, j) = a.at(i, j) / (d[i] * d[j]);
        }
    }
    Some((c, d))
}

/// Inverse of a Gram matrix computed in correlation-scaled space, which
/// is immune to wildly different parameter sensitivities. `None` when
/// the matrix is numerically rank deficient.
pub fn gram_inverse(a: &DenseMatrix) -> Option<DenseMatrix> {
    let (c, d) = scale_gram(a)?;
    let inv_c = spd_inverse(&c, 1e-14)?;
    let n = a.rows;
    let mut inv = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            *inv.at_mut(i, j) = inv_c.at(i, j) / (d[i] * d[j]);
        }
    }
    Some(inv)
}

/// A least-squares problem in transformed (unconstrained) coordinates.
pub trait LeastSquares {
    /// (number of residuals, number of parameters).
    fn dims(&self) -> (usize, usize);
    /// Residual vector at `x`.
    fn residuals(&self, x: &[f64]) -> Vec<f64>;
    /// Jacobian ∂r/∂x at `x`, `dims().0 × dims().1`.
    fn jacobian(&self, x: &[f64]) -> DenseMatrix;
    /// Clamp a trial point into the feasible box (identity by default).
    fn clamp(&self, _x: &mut [f64]) {}
}

/// Optimizer knobs; the defaults implement the crate's fit contract.
#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Terminate when ‖Jᵀr‖ falls below this fraction of its initial value.
    pub gradient_tolerance_rel: f64,
    pub lambda_init: f64,
    pub lambda_shrink: f64,
    pub lambda_grow: f64,
    pub lambda_max: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance_rel: 1e-10,
            lambda_init: 1e-3,
            lambda_shrink: 1.0 / 3.0,
            lambda_grow: 4.0,
            lambda_max: 1e12,
        }
    }
}

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// ‖r‖ at the solution.
    pub residual_norm: f64,
    /// Jᵀ J at the solution (undamped).
    pub jtj: DenseMatrix,
    /// Residual count.
    pub n_residuals: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes ½‖r(x)‖². Accepted steps strictly decrease the residual
/// norm; terminates on the relative gradient criterion or the iteration
/// budget. A rank-deficient Jacobian at the starting point is reported
/// as a degenerate model.
pub fn minimize<P: LeastSquares>(problem: &P, x0: &[f64], opts: &LmOptions) -> Result<LmOutcome> {
    let (m, n) = problem.dims();
    if x0.len() != n {
        return Err(Error::DegenerateModel(format!(
            "initial guess has {} entries for {} parameters",
            x0.len(),
            n
        )));
    }

    let mut x = x0.to_vec();
    problem.clamp(&mut x);
    let mut r = problem.residuals(&x);
    let mut j = problem.jacobian(&x);
    let mut cost = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
    let mut grad = j.t_mul_vec(&r);
    let grad0_norm = norm(&grad);

    // sensitivity check at the cold start: a parameter the model does not
    // respond to, or an exactly collinear pair, cannot be fitted. Rank is
    // judged in correlation-scaled space so parameter scales drop out.
    let jtj0 = j.gram();
    for i in 0..n {
        if jtj0.at(i, i) <= 0.0 {
            return Err(Error::DegenerateModel(format!(
                "parameter {i} has zero sensitivity at the initial guess"
            )));
        }
    }
    match scale_gram(&jtj0) {
        Some((c, _)) if cholesky_solve(&c, &vec![0.0; n], 1e-12).is_some() => {}
        _ => {
            return Err(Error::DegenerateModel(
                "singular Jacobian at the initial guess".into(),
            ))
        }
    }

    if grad0_norm == 0.0 || cost == 0.0 {
        return Ok(LmOutcome {
            x,
            converged: true,
            iterations: 0,
            residual_norm: (2.0 * cost).sqrt(),
            jtj: jtj0,
            n_residuals: m,
        });
    }

    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut iterations = 0;
    let mut consecutive_rejects = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let jtj = j.gram();
        // solve the Marquardt-damped normal equations in scaled space:
        // (C + λI) y = −D^{-1/2} g, step = D^{-1/2} y
        let step = match scale_gram(&jtj) {
            Some((c, d)) => {
                let mut damped = c;
                for i in 0..n {
                    *damped.at_mut(i, i) += lambda;
                }
                let rhs: Vec<f64> = grad.iter().zip(&d).map(|(g, di)| -g / di).collect();
                cholesky_solve(&damped, &rhs, 0.0)
                    .map(|y| y.iter().zip(&d).map(|(yi, di)| yi / di).collect::<Vec<f64>>())
            }
            None => None,
        };
        let step = match step {
            Some(s) => s,
            None => {
                lambda = (lambda * opts.lambda_grow).min(opts.lambda_max);
                consecutive_rejects += 1;
                if consecutive_rejects > 25 {
                    break;
                }
                continue;
            }
        };

        let mut x_trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + d).collect();
        problem.clamp(&mut x_trial);
        let r_trial = problem.residuals(&x_trial);
        let cost_trial = 0.5 * r_trial.iter().map(|v| v * v).sum::<f64>();

        if cost_trial.is_finite() && cost_trial < cost {
            x = x_trial;
            r = r_trial;
            cost = cost_trial;
            j = problem.jacobian(&x);
            grad = j.t_mul_vec(&r);
            lambda = (lambda * opts.lambda_shrink).max(1e-14);
            consecutive_rejects = 0;
            if norm(&grad) < opts.gradient_tolerance_rel * grad0_norm || cost == 0.0 {
                converged = true;
                break;
            }
        } else {
            // a trial that changes the cost by less than rounding noise
            // after the gradient has already collapsed means the iterate
            // sits at the optimum to machine precision
            if (cost_trial - cost).abs() <= 16.0 * f64::EPSILON * cost
                && norm(&grad) < 1e-6 * grad0_norm
            {
                converged = true;
                break;
            }
            lambda = (lambda * opts.lambda_grow).min(opts.lambda_max);
            consecutive_rejects += 1;
            if consecutive_rejects > 25 {
                break;
            }
        }
    }

    Ok(LmOutcome {
        converged,
        iterations,
        residual_norm: (2.0 * cost).sqrt(),
        jtj: j.gram(),
        n_residuals: m,
        x,
    })
}
