//! Slow reference solver used to cross-check the interior-point method.
//!
//! Operator-splitting iteration (ADMM) on
//! `max <C, X> s.t. <G_k, X> = b_k, X >= 0`:
//! the affine step projects onto the equality constraints with the objective
//! as a linear shift (one cached Cholesky factorization of the constraint
//! Gram matrix), the cone step projects onto the PSD cone by
//! eigendecomposition, and a scaled dual variable couples the two. This is a
//! projection-based first-order method: orders of magnitude slower than the
//! interior-point solver but entirely independent of it, which is the point.
//! Not intended for production use.

use crate::linalg::{self, Mat};

pub struct ReferenceOutcome {
    pub x: Mat,
    pub objective: f64,
    /// Final splitting residual max(||X - Z||, ||A(X) - b||).
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes `<c, X>` subject to `<a_k, X> = b_k`, `X >= 0`. The feasible
/// set must be bounded (every problem in this crate carries a trace row).
pub fn solve_max(c: &Mat, a: &[Mat], b: &[f64], tol: f64, max_iter: usize) -> ReferenceOutcome {
    let n = c.rows();
    let m = a.len();
    let sigma = 1.0;

    // Gram matrix of the constraint functionals, factored once.
    let gram = Mat::from_fn(m, m, |i, j| a[i].dot(&a[j]));
    let gram_l = {
        // Tiny ridge guards against duplicated rows in caller-supplied sets.
        let mut g = gram.clone();
        let ridge = 1e-12 * (1.0 + g.trace() / m as f64);
        for i in 0..m {
            g[(i, i)] += ridge;
        }
        linalg::cholesky(&g).expect("constraint Gram matrix must be factorable")
    };

    let project_affine = |w: &Mat| -> Mat {
        // Least-change correction onto the affine set A(X) = b.
        let resid: Vec<f64> = (0..m).map(|k| a[k].dot(w) - b[k]).collect();
        let coef = linalg::cholesky_solve(&gram_l, &resid);
        let mut out = w.clone();
        for k in 0..m {
            out = out.sub(&a[k].scale(coef[k]));
        }
        out
    };
    let project_psd = |w: &Mat| -> Mat {
        let (vals, vecs) = linalg::eig_sym(&w.sym_part());
        let mut out = Mat::zeros(n, n);
        for k in 0..n {
            if vals[k] <= 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += vals[k] * vecs[(i, k)] * vecs[(j, k)];
                }
            }
        }
        out
    };

    let mut z = Mat::identity(n);
    let mut u = Mat::zeros(n, n);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let scale = 1.0 + c.frob_norm() + b.iter().map(|v| v.abs()).fold(0.0, f64::max);

    for iter in 0..max_iter {
        iterations = iter + 1;
        // X-step: minimize -<C,X> + (sigma/2)||X - Z + U||^2 over the
        // affine set; the unconstrained minimizer is Z - U + C/sigma.
        let target = z.sub(&u).add(&c.scale(1.0 / sigma));
        let x = project_affine(&target);
        let z_next = project_psd(&x.add(&u));
        let dual_shift = z_next.sub(&z).frob_norm();
        z = z_next;
        u = u.add(&x).sub(&z);

        let split = x.sub(&z).frob_norm();
        residual = split.max(sigma * dual_shift);
        if residual <= tol * scale && iter > 10 {
            break;
        }
    }

    ReferenceOutcome {
        objective: c.dot(&z),
        x: z.clone(),
        residual,
        iterations,
        converged: residual <= tol * scale,
    }
}
