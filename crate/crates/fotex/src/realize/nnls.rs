//! Nonnegative least squares by the Lawson-Hanson active-set method.
//!
//! Solves min ||A x - b|| subject to x >= 0. The passive-set least-squares
//! subproblems are re-solved from scratch by Householder QR; with at most 15
//! rows that is cheaper than maintaining factor updates and has no stale
//! state to corrupt.

use crate::linalg::{solve_ls, Mat};

pub struct NnlsOutcome {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

pub fn nnls(a: &Mat, b: &[f64]) -> NnlsOutcome {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(m, b.len());
    let mut x = vec![0.0f64; n];
    let mut passive = vec![false; n];
    let scale = a.frob_norm() * (1.0 + b.iter().map(|v| v * v).sum::<f64>().sqrt());
    let w_tol = 1e-12 * scale.max(1e-30);
    let max_outer = 3 * n + 30;
    let mut iterations = 0;

    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = a.matvec(x);
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
    };
    let solve_passive = |passive: &[bool]| -> (Vec<usize>, Vec<f64>) {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        if idx.is_empty() {
            return (idx, vec![]);
        }
        let sub = Mat::from_fn(m, idx.len(), |i, k| a[(i, idx[k])]);
        let z = solve_ls(&sub, b);
        (idx, z)
    };

    for _outer in 0..max_outer {
        iterations += 1;
        // Dual vector w = A^T (b - A x); optimality when no inactive
        // coordinate has positive gradient.
        let r = residual(&x);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if passive[j] {
                continue;
            }
            let wj: f64 = (0..m).map(|i| a[(i, j)] * r[i]).sum();
            if wj > w_tol && best.is_none_or(|(_, bw)| wj > bw) {
                best = Some((j, wj));
            }
        }
        let Some((enter, _)) = best else { break };
        passive[enter] = true;

        // Inner loop: restore feasibility of the passive-set solution.
        loop {
            let (idx, z) = solve_passive(&passive);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                // Degenerate step; drop the entering column and give up on it.
                passive[enter] = false;
                break;
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
            }
            for &j in &idx {
                if x[j] <= 1e-14 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }

    let r = residual(&x);
    NnlsOutcome {
        x,
        residual_norm: r.iter().map(|v| v * v).sum::<f64>().sqrt(),
        iterations,
    }
}
