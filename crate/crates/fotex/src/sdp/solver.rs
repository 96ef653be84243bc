//! Dense primal-dual path-following interior-point solver.
//!
//! Solves min <C, X> subject to <A_k, X> = b_k and X >= 0 over symmetric
//! n x n matrices, with a Mehrotra predictor-corrector and the symmetrized
//! HKM Newton direction. Everything is dense: the target problems have
//! n <= 9 and at most a few dozen constraints, so robustness is the only
//! criterion that matters.
//!
//! Each iteration factors the Schur complement M_kj = <A_k, X A_j Z^{-1}>
//! (symmetrized) once and reuses the factor for the predictor and corrector
//! solves. Step lengths are fraction-to-boundary with factor 0.98, computed
//! from the minimal eigenvalue of the Cholesky-whitened direction.

use crate::linalg::{self, Mat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RawStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub(crate) struct RawSolution {
    pub x: Mat,
    pub y: Vec<f64>,
    pub objective: f64,
    pub status: RawStatus,
    pub iterations: usize,
    /// ||b - A(X)||_2 / (1 + ||b||)
    pub rel_primal: f64,
    /// ||C - Z - A^T(y)||_F / (1 + ||C||)
    pub rel_dual: f64,
    /// |<C,X> - b^T y| / (1 + |pobj| + |dobj|)
    pub rel_gap: f64,
    /// <X, Z> (complementarity, absolute)
    pub complementarity: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct RawOptions {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Classify infeasibility with a big-M phase-I when the main solve fails.
    pub classify_infeasibility: bool,
}

impl Default for RawOptions {
    fn default() -> Self {
        RawOptions {
            tol_feas: 1e-9,
            tol_gap: 1e-8,
            max_iter: 200,
            classify_infeasibility: true,
        }
    }
}

/// Minimization problem data. Constraint matrices must be symmetric.
pub(crate) struct RawProblem<'a> {
    pub n: usize,
    pub c: &'a Mat,
    pub a: &'a [Mat],
    pub b: &'a [f64],
}

/// Packs the upper triangle with sqrt(2)-scaled off-diagonals so Euclidean
/// inner products of packed vectors equal Frobenius products.
fn svec(m: &Mat) -> Vec<f64> {
    let n = m.rows();
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        v.push(m[(i, i)]);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            v.push(s * m[(i, j)]);
        }
    }
    v
}

/// Lower-triangular solve L Y = B for all columns of B.
fn tri_solve_lower(l: &Mat, b: &Mat) -> Mat {
    let n = l.rows();
    let mut y = b.clone();
    for col in 0..b.cols() {
        for i in 0..n {
            let mut s = y[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * y[(k, col)];
            }
            y[(i, col)] = s / l[(i, i)];
        }
    }
    y
}

/// Largest step alpha with S + alpha D >= 0, given S > 0 through its
/// Cholesky factor.
fn max_step(l: &Mat, d: &Mat) -> f64 {
    // lambda_min of L^-1 D L^-T; the admissible step is -1/lambda_min.
    let y = tri_solve_lower(l, d);
    let w = tri_solve_lower(l, &y.transpose());
    let (vals, _) = linalg::eig_sym(&w.sym_part());
    let lam_min = *vals.last().unwrap();
    if lam_min >= -1e-14 {
        1e16
    } else {
        -1.0 / lam_min
    }
}

/// Cholesky with escalating diagonal regularization; the Schur complement
/// can become numerically semidefinite near the central path's end.
fn chol_regularized(m: &Mat) -> Option<Mat> {
    if let Some(l) = linalg::cholesky(m) {
        return Some(l);
    }
    let scale = m.trace().abs().max(1e-30) / m.rows() as f64;
    let mut reg = 1e-14 * scale;
    for _ in 0..6 {
        let mut shifted = m.clone();
        for i in 0..m.rows() {
            shifted[(i, i)] += reg;
        }
        if let Some(l) = linalg::cholesky(&shifted) {
            return Some(l);
        }
        reg *= 100.0;
    }
    None
}

struct Preprocessed {
    /// Indices of retained (independent) constraints.
    keep: Vec<usize>,
    /// Least-squares symmetric solution of the kept equality system.
    witness: Mat,
    consistent: bool,
}

/// Removes linearly dependent constraint rows (rank-revealing QR on the
/// svec rows) and checks that dropped rows are consistent with the kept
/// ones via the min-norm solution.
fn preprocess(prob: &RawProblem) -> Preprocessed {
    let m = prob.a.len();
    let rows: Vec<Vec<f64>> = prob.a.iter().map(svec).collect();
    let bmat = Mat::from_rows(&rows);
    let qr = linalg::qr_col_pivot(&bmat.transpose());
    let rank = qr.rank(1e-12);
    let keep: Vec<usize> = {
        let mut k = qr.perm[..rank].to_vec();
        k.sort_unstable();
        k
    };
    if keep.len() < m {
        log::warn!(
            "dropping {} linearly dependent constraint row(s) of {}",
            m - keep.len(),
            m
        );
    }
    // Min-norm solution x0 = B^T (B B^T)^-1 b over the kept rows.
    let bk = Mat::from_rows(&keep.iter().map(|&k| rows[k].clone()).collect::<Vec<_>>());
    let gram = bk.matmul(&bk.transpose());
    let bvals: Vec<f64> = keep.iter().map(|&k| prob.b[k]).collect();
    let x0 = match chol_regularized(&gram) {
        Some(l) => {
            let coef = linalg::cholesky_solve(&l, &bvals);
            let packed = bk.transpose().matvec(&coef);
            unsvec(prob.n, &packed)
        }
        None => Mat::zeros(prob.n, prob.n),
    };
    let scale = 1.0 + bvals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let consistent = (0..m).all(|k| {
        keep.contains(&k) || (prob.a[k].dot(&x0) - prob.b[k]).abs() <= 1e-8 * scale
    });
    Preprocessed {
        keep,
        witness: x0,
        consistent,
    }
}

fn unsvec(n: usize, v: &[f64]) -> Mat {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = v[i];
    }
    let s = std::f64::consts::SQRT_2;
    let mut idx = n;
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = v[idx] / s;
            m[(j, i)] = v[idx] / s;
            idx += 1;
        }
    }
    m
}

pub(crate) fn solve_raw(prob: &RawProblem, opts: &RawOptions) -> RawSolution {
    let pre = preprocess(prob);
    if !pre.consistent {
        return RawSolution {
            x: Mat::zeros(prob.n, prob.n),
            y: vec![0.0; prob.a.len()],
            objective: f64::NAN,
            status: RawStatus::Infeasible,
            iterations: 0,
            rel_primal: f64::INFINITY,
            rel_dual: f64::INFINITY,
            rel_gap: f64::INFINITY,
            complementarity: f64::INFINITY,
        };
    }
    let a: Vec<Mat> = pre.keep.iter().map(|&k| prob.a[k].clone()).collect();
    let b: Vec<f64> = pre.keep.iter().map(|&k| prob.b[k]).collect();
    let mut sol = ipm(prob.n, prob.c, &a, &b, opts);

    if sol.status == RawStatus::NumericalFailure && opts.classify_infeasibility {
        if let Some(infeasible) = phase_one_says_infeasible(prob.n, &a, &b, &pre.witness, opts) {
            if infeasible {
                sol.status = RawStatus::Infeasible;
            }
        }
    }

    // Scatter kept dual multipliers back to the caller's constraint order;
    // dropped rows get zero.
    let mut y_full = vec![0.0; prob.a.len()];
    for (slot, &k) in pre.keep.iter().enumerate() {
        y_full[k] = sol.y[slot];
    }
    sol.y = y_full;
    sol
}

/// Runs the big-M phase-I feasibility program
/// `max lambda s.t. A(X) = b, X >= lambda I, tr X <= R`
/// on an (n+2)-dimensional block embedding. Returns Some(true) when the
/// optimum is clearly negative (no PSD solution exists), Some(false) when
/// clearly positive, None when the classification itself failed.
fn phase_one_says_infeasible(
    n: usize,
    a: &[Mat],
    b: &[f64],
    witness: &Mat,
    opts: &RawOptions,
) -> Option<bool> {
    let ne = n + 2;
    let r_bound = 1e4 * (1.0 + witness.frob_norm() + b.iter().map(|v| v.abs()).fold(0.0, f64::max));
    let m0 = r_bound;

    let mut ahat: Vec<Mat> = Vec::new();
    let mut bhat: Vec<f64> = Vec::new();
    // Original rows on the leading block plus tr(A_k) on the lambda slot.
    for (ak, &bk) in a.iter().zip(b) {
        let mut g = Mat::zeros(ne, ne);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = ak[(i, j)];
            }
        }
        g[(n, n)] = ak.trace();
        ahat.push(g);
        bhat.push(bk + m0 * ak.trace());
    }
    // Trace bound with slack.
    let mut g = Mat::zeros(ne, ne);
    for i in 0..n {
        g[(i, i)] = 1.0;
    }
    g[(n, n)] = n as f64;
    g[(n + 1, n + 1)] = 1.0;
    ahat.push(g);
    bhat.push(r_bound + n as f64 * m0);
    // Zero the coupling entries so the block structure is exact.
    for i in 0..n {
        for jcol in [n, n + 1] {
            let mut g = Mat::zeros(ne, ne);
            g[(i, jcol)] = 0.5;
            g[(jcol, i)] = 0.5;
            ahat.push(g);
            bhat.push(0.0);
        }
    }
    let mut g = Mat::zeros(ne, ne);
    g[(n, n + 1)] = 0.5;
    g[(n + 1, n)] = 0.5;
    ahat.push(g);
    bhat.push(0.0);

    // Minimize -u, i.e. maximize lambda + M0.
    let mut c = Mat::zeros(ne, ne);
    c[(n, n)] = -1.0;

    let phase_opts = RawOptions {
        tol_feas: 1e-9,
        tol_gap: 1e-9,
        max_iter: opts.max_iter,
        classify_infeasibility: false,
    };
    let sol = ipm(ne, &c, &ahat, &bhat, &phase_opts);
    if sol.status != RawStatus::Optimal {
        return None;
    }
    let lambda_star = sol.x[(n, n)] - m0;
    let margin = 1e-6 * (1.0 + m0);
    if lambda_star < -margin {
        Some(true)
    } else if lambda_star > margin {
        Some(false)
    } else {
        // Boundary of feasibility; treat as feasible-but-degenerate.
        Some(false)
    }
}

fn ipm(n: usize, c: &Mat, a: &[Mat], b: &[f64], opts: &RawOptions) -> RawSolution {
    let m = a.len();
    let nf = n as f64;
    let norm_c = 1.0 + c.frob_norm();
    let norm_b = 1.0 + b.iter().map(|v| v * v).sum::<f64>().sqrt();

    // Infeasible start on the central ray, scaled to the data.
    let eta_p = norm_b.sqrt().max(1.0) * 10.0;
    let eta_d = norm_c.max(1.0);
    let mut x = Mat::identity(n).scale(eta_p);
    let mut z = Mat::identity(n).scale(eta_d);
    let mut y = vec![0.0; m];

    let mut best: Option<(f64, RawSolution)> = None;
    let tau = 0.98;

    for iter in 0..opts.max_iter {
        let lx = match chol_regularized(&x) {
            Some(l) => l,
            None => break,
        };
        let lz = match chol_regularized(&z) {
            Some(l) => l,
            None => break,
        };
        // Z^-1 from the factor.
        let zinv = {
            let inv_cols = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 });
            let yy = tri_solve_lower(&lz, &inv_cols);
            // Z^-1 = L^-T L^-1: solve L^T W = Y.
            let mut w = yy.clone();
            for col in 0..n {
                for i in (0..n).rev() {
                    let mut s = w[(i, col)];
                    for k in (i + 1)..n {
                        s -= lz[(k, i)] * w[(k, col)];
                    }
                    w[(i, col)] = s / lz[(i, i)];
                }
            }
            w.sym_part()
        };

        let rp: Vec<f64> = (0..m).map(|k| b[k] - a[k].dot(&x)).collect();
        let mut rd = c.sub(&z);
        for k in 0..m {
            rd = rd.sub(&a[k].scale(y[k]));
        }
        let mu = x.dot(&z) / nf;

        let pobj = c.dot(&x);
        let dobj: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
        let rel_p = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / norm_b;
        let rel_d = rd.frob_norm() / norm_c;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        let make_solution = |status: RawStatus, iterations: usize| RawSolution {
            x: x.clone(),
            y: y.clone(),
            objective: pobj,
            status,
            iterations,
            rel_primal: rel_p,
            rel_dual: rel_d,
            rel_gap,
            complementarity: x.dot(&z),
        };

        let merit = rel_p + rel_d + rel_gap;
        if best.as_ref().is_none_or(|(bm, _)| merit < *bm) {
            best = Some((merit, make_solution(RawStatus::NumericalFailure, iter)));
        }

        if rel_p <= opts.tol_feas && rel_d <= opts.tol_feas && rel_gap <= opts.tol_gap {
            return make_solution(RawStatus::Optimal, iter);
        }
        if !pobj.is_finite() || pobj < -1e12 * norm_c * norm_b || mu > 1e16 {
            break;
        }

        // Schur complement M_kj = <A_k, X A_j Z^-1>, symmetrized.
        let u: Vec<Mat> = (0..m)
            .map(|j| x.matmul(&a[j]).matmul(&zinv))
            .collect();
        let mut schur = Mat::from_fn(m, m, |k, j| a[k].dot(&u[j]));
        schur = schur.sym_part();
        let lm = match chol_regularized(&schur) {
            Some(l) => l,
            None => break,
        };

        let x_rd_zinv = x.matmul(&rd).matmul(&zinv);
        let solve_direction = |kmat: &Mat| -> (Vec<f64>, Mat, Mat) {
            let kz = kmat.matmul(&zinv);
            let rhs: Vec<f64> = (0..m)
                .map(|k| rp[k] - a[k].dot(&kz) + a[k].dot(&x_rd_zinv))
                .collect();
            let dy = linalg::cholesky_solve(&lm, &rhs);
            let mut dz = rd.clone();
            for k in 0..m {
                dz = dz.sub(&a[k].scale(dy[k]));
            }
            let dx = kz.sub(&x.matmul(&dz).matmul(&zinv)).sym_part();
            (dy, dz, dx)
        };

        // Predictor: aim at mu = 0.
        let k_aff = x.matmul(&z).scale(-1.0);
        let (_dy_a, dz_a, dx_a) = solve_direction(&k_aff);
        let ap_a = max_step(&lx, &dx_a).min(1.0);
        let ad_a = max_step(&lz, &dz_a).min(1.0);
        let x_a = x.add(&dx_a.scale(ap_a));
        let z_a = z.add(&dz_a.scale(ad_a));
        let mu_aff = x_a.dot(&z_a) / nf;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-10, 1.0);

        // Corrector with the second-order Mehrotra term.
        let mut k_cor = x.matmul(&z).scale(-1.0);
        for i in 0..n {
            k_cor[(i, i)] += sigma * mu;
        }
        k_cor = k_cor.sub(&dx_a.matmul(&dz_a));
        let (dy, dz, dx) = solve_direction(&k_cor);

        let ap = (tau * max_step(&lx, &dx)).min(1.0);
        let ad = (tau * max_step(&lz, &dz)).min(1.0);
        x = x.add(&dx.scale(ap));
        z = z.add(&dz.scale(ad));
        for k in 0..m {
            y[k] += ad * dy[k];
        }
    }

    best.map(|(_, s)| s).unwrap_or_else(|| RawSolution {
        x,
        y,
        objective: f64::NAN,
        status: RawStatus::NumericalFailure,
        iterations: opts.max_iter,
        rel_primal: f64::INFINITY,
        rel_dual: f64::INFINITY,
        rel_gap: f64::INFINITY,
        complementarity: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        if i == j {
            m[(i, i)] = 1.0;
        } else {
            m[(i, j)] = 0.5;
            m[(j, i)] = 0.5;
        }
        m
    }

    #[test]
    fn maximizes_corner_entry_on_the_simplex() {
        // max X11 s.t. tr X = 1, X >= 0  ==  min -X11.
        let n = 6;
        let c = e(n, 0, 0).scale(-1.0);
        let a = vec![Mat::identity(n)];
        let b = vec![1.0];
        let sol = solve_raw(
            &RawProblem { n, c: &c, a: &a, b: &b },
            &RawOptions::default(),
        );
        assert_eq!(sol.status, RawStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-7, "obj {}", sol.objective);
        assert!((sol.x[(0, 0)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bounded_trace_identity_objective() {
        // max <I, X> s.t. X11 = 1, X22 = 0, tr X = 1: value 1.
        let n = 6;
        let c = Mat::identity(n).scale(-1.0);
        let a = vec![e(n, 0, 0), e(n, 1, 1), Mat::identity(n)];
        let b = vec![1.0, 0.0, 1.0];
        let sol = solve_raw(
            &RawProblem { n, c: &c, a: &a, b: &b },
            &RawOptions::default(),
        );
        assert_eq!(sol.status, RawStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-6);
    }

    #[test]
    fn unbounded_problem_is_not_reported_optimal() {
        // max <I, X> s.t. X11 = 1, X22 = 0: unbounded above.
        let n = 6;
        let c = Mat::identity(n).scale(-1.0);
        let a = vec![e(n, 0, 0), e(n, 1, 1)];
        let b = vec![1.0, 0.0];
        let sol = solve_raw(
            &RawProblem { n, c: &c, a: &a, b: &b },
            &RawOptions {
                classify_infeasibility: false,
                ..Default::default()
            },
        );
        assert_ne!(sol.status, RawStatus::Optimal);
    }

    #[test]
    fn detects_infeasible_diagonal() {
        // X11 = -1 contradicts X >= 0.
        let n = 6;
        let c = Mat::zeros(n, n);
        let a = vec![e(n, 0, 0), Mat::identity(n)];
        let b = vec![-1.0, 1.0];
        let sol = solve_raw(
            &RawProblem { n, c: &c, a: &a, b: &b },
            &RawOptions::default(),
        );
        assert_eq!(sol.status, RawStatus::Infeasible);
    }

    #[test]
    fn detects_inconsistent_linear_rows() {
        // Same functional, contradictory right-hand sides.
        let n = 3;
        let c = Mat::zeros(n, n);
        let a = vec![e(n, 0, 1), e(n, 0, 1)];
        let b = vec![0.0, 1.0];
        let sol = solve_raw(
            &RawProblem { n, c: &c, a: &a, b: &b },
            &RawOptions::default(),
        );
        assert_eq!(sol.status, RawStatus::Infeasible);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let n = 4;
        let c = e(n, 0, 0).scale(-1.0);
        let a = vec![Mat::identity(n), Mat::identity(n).scale(2.0)];
        let b = vec![1.0, 2.0];
        let sol = solve_raw(
            &RawProblem { n, c: &c, a: &a, b: &b },
            &RawOptions::default(),
        );
        assert_eq!(sol.status, RawStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-6);
    }
}
