//! Dense linear algebra for the small matrices used throughout the crate.
//!
//! Everything here targets matrices of order at most a few dozen (6x6
//! Kelvin-Mandel blocks, constraint systems with ~20 rows, moment
//! dictionaries with 15 rows), so the kernels favour robustness over
//! blocking or vectorization: cyclic Jacobi for symmetric eigenproblems,
//! Cholesky and partially pivoted LU for solves, Householder QR for least
//! squares and rank detection.

use std::ops::{Index, IndexMut};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// (M + M^T) / 2 for square matrices.
    pub fn sym_part(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        Mat::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Cholesky factor L (lower triangular, `M = L L^T`). `None` if a pivot
/// drops below `1e-300` (matrix not numerically positive definite).
pub fn cholesky(m: &Mat) -> Option<Mat> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 1e-300 {
            return None;
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Some(l)
}

/// Solve `L L^T x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Solve a square system by LU with partial pivoting. `None` on singularity.
pub fn lu_solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    assert_eq!(n, b.len());
    let mut lu = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let mut p = k;
        for i in (k + 1)..n {
            if lu[(i, k)].abs() > lu[(p, k)].abs() {
                p = i;
            }
        }
        if lu[(p, k)].abs() < 1e-300 {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            x.swap(k, p);
        }
        for i in (k + 1)..n {
            let f = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                lu[(i, j)] -= f * lu[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            x[i] -= lu[(i, j)] * x[j];
        }
        x[i] /= lu[(i, i)];
    }
    Some(x)
}

/// Least-squares solution of an overdetermined (or square) system by
/// Householder QR without pivoting. Requires full column rank.
pub fn solve_ls(a: &Mat, b: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n);
    assert_eq!(m, b.len());
    let mut r = a.clone();
    let mut y = b.to_vec();
    for k in 0..n {
        let mut alpha: f64 = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        if r[(k, k)] > 0.0 {
            alpha = -alpha;
        }
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 < 1e-300 {
            continue;
        }
        for j in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            let f = 2.0 * s / vnorm2;
            for i in k..m {
                r[(i, j)] -= f * v[i - k];
            }
        }
        let s: f64 = (k..m).map(|i| v[i - k] * y[i]).sum();
        let f = 2.0 * s / vnorm2;
        for i in k..m {
            y[i] -= f * v[i - k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = if r[(i, i)].abs() > 1e-300 {
            s / r[(i, i)]
        } else {
            0.0
        };
    }
    x
}

/// Column-pivoted Householder QR used for numerical rank decisions.
pub struct PivotedQr {
    /// Upper-triangular factor (rows x cols, R in the pivoted ordering).
    pub r: Mat,
    /// Column permutation: `perm[k]` is the original column at pivot slot k.
    pub perm: Vec<usize>,
}

impl PivotedQr {
    /// Numerical rank at relative tolerance `rel_tol` against the largest
    /// diagonal of R.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let kmax = self.r.rows().min(self.r.cols());
        let scale = self.r[(0, 0)].abs();
        if scale == 0.0 {
            return 0;
        }
        (0..kmax)
            .take_while(|&k| self.r[(k, k)].abs() > rel_tol * scale)
            .count()
    }
}

pub fn qr_col_pivot(a: &Mat) -> PivotedQr {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut colnorm2: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| r[(i, j)] * r[(i, j)]).sum())
        .collect();
    for k in 0..m.min(n) {
        let mut p = k;
        for j in (k + 1)..n {
            if colnorm2[j] > colnorm2[p] {
                p = j;
            }
        }
        if p != k {
            for i in 0..m {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, p)];
                r[(i, p)] = t;
            }
            perm.swap(k, p);
            colnorm2.swap(k, p);
        }
        let mut alpha: f64 = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        if r[(k, k)] > 0.0 {
            alpha = -alpha;
        }
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 < 1e-300 {
            continue;
        }
        for j in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            let f = 2.0 * s / vnorm2;
            for i in k..m {
                r[(i, j)] -= f * v[i - k];
            }
        }
        for j in (k + 1)..n {
            colnorm2[j] = ((k + 1)..m).map(|i| r[(i, j)] * r[(i, j)]).sum();
        }
    }
    PivotedQr { r, perm }
}

/// Symmetric eigendecomposition by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvectors as columns. Rotations below `1e-14` times the Frobenius norm
/// are skipped; the sweep loop is capped at 100 passes, which is far beyond
/// what matrices of this size need. The residual `||M v - lambda v||` stays
/// below `1e-10 ||M||` for symmetric input.
pub fn eig_sym(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.rows();
    assert_eq!(n, m.cols());
    debug_assert!(
        m.max_asymmetry() <= 1e-12 * (1.0 + m.frob_norm()),
        "eig_sym expects a symmetric matrix"
    );
    let mut a = m.sym_part();
    let mut v = Mat::identity(n);
    let scale = a.frob_norm();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    let thresh = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= thresh {
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = aip - s * (aiq + tau * aip);
                        a[(i, q)] = aiq + s * (aip - tau * aiq);
                        a[(p, i)] = a[(i, p)];
                        a[(q, i)] = a[(i, q)];
                    }
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip - s * (viq + tau * vip);
                    v[(i, q)] = viq + s * (vip - tau * viq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat3(d: [[f64; 3]; 3]) -> Mat {
        Mat::from_fn(3, 3, |i, j| d[i][j])
    }

    #[test]
    fn eig_diagonal_sorts_descending() {
        let m = mat3([[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        let (vals, _) = eig_sym(&m);
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn eig_residual_small_on_random_symmetric() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [3usize, 6, 9] {
            let g = Mat::from_fn(n, n, |_, _| next());
            let m = g.sym_part();
            let (vals, vecs) = eig_sym(&m);
            let norm = m.frob_norm().max(1e-30);
            for k in 0..n {
                let vk: Vec<f64> = (0..n).map(|i| vecs[(i, k)]).collect();
                let mv = m.matvec(&vk);
                let res: f64 = mv
                    .iter()
                    .zip(&vk)
                    .map(|(a, b)| (a - vals[k] * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-10 * norm, "residual {res:e} too large");
            }
            // Orthonormality of the eigenvector basis.
            let vtv = vecs.transpose().matmul(&vecs);
            let eye = Mat::identity(n);
            assert!(vtv.sub(&eye).frob_norm() < 1e-12);
        }
    }

    #[test]
    fn cholesky_roundtrip() {
        let m = mat3([[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]]);
        let l = cholesky(&m).unwrap();
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0]);
        let b = m.matvec(&x);
        for (bi, ei) in b.iter().zip([1.0, 2.0, 3.0]) {
            assert!((bi - ei).abs() < 1e-12);
        }
        assert!(cholesky(&mat3([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])).is_none());
    }

    #[test]
    fn lu_and_ls_agree_on_square_systems() {
        let a = mat3([[2.0, 1.0, 0.5], [-1.0, 3.0, 1.0], [0.0, 0.5, -2.0]]);
        let b = [1.0, -2.0, 0.25];
        let x1 = lu_solve(&a, &b).unwrap();
        let x2 = solve_ls(&a, &b);
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn pivoted_qr_detects_rank() {
        // Rank-2 matrix: third row = row0 + row1.
        let a = Mat::from_rows(&[
            vec![1.0, 0.0, 2.0, -1.0],
            vec![0.0, 1.0, 1.0, 3.0],
            vec![1.0, 1.0, 3.0, 2.0],
        ]);
        let qr = qr_col_pivot(&a.transpose());
        assert_eq!(qr.rank(1e-10), 2);
    }
}
