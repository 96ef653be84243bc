//! Kelvin-Mandel 6x6 matrix representation.
//!
//! Basis convention: B1 = v1 (x) v1, B2 = v2 (x) v2, B3 = v3 (x) v3,
//! B4 = (v2 (x) v3 + v3 (x) v2) / sqrt(2), B5 = (v1 (x) v3 + v3 (x) v1) / sqrt(2),
//! B6 = (v1 (x) v2 + v2 (x) v1) / sqrt(2). The basis tensors are orthonormal,
//! so the matrix eigenvalues equal the tensor eigenvalues.
//!
//! A completely symmetric tensor satisfies six redundancy relations among
//! its Kelvin-Mandel entries:
//! X44 = 2 X23, X55 = 2 X13, X66 = 2 X12,
//! X45 = sqrt(2) X36, X46 = sqrt(2) X25, X56 = sqrt(2) X14.

use std::f64::consts::SQRT_2;

use super::sym4::Sym4;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use serde::{Deserialize, Serialize};

/// Frame a Kelvin-Mandel matrix is expressed in: the fixed laboratory basis
/// or the eigensystem of the second-order tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Fixed,
    Eigen,
}

/// Symmetric 6x6 matrix in the Kelvin-Mandel basis, tagged with its frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Km66 {
    m: [f64; 36],
    frame: Frame,
}

/// Coefficient slots keyed by the Kelvin-Mandel entry that carries them with
/// an exact scale factor (1 or 2), used for bit-exact recovery. Entries that
/// only appear with a sqrt(2) factor are listed separately.
const EXACT_ONE: [(usize, usize, usize); 6] = [
    // (row, col, slot): X_rc = coeff[slot]
    (0, 0, 0),  // 1111
    (1, 1, 10), // 2222
    (2, 2, 14), // 3333
    (0, 1, 3),  // 1122
    (0, 2, 5),  // 1133
    (1, 2, 12), // 2233
];
const EXACT_TWO: [(usize, usize, usize); 3] = [
    // X_rc = 2 coeff[slot]
    (4, 5, 4), // 1123
    (3, 5, 7), // 1223
    (3, 4, 8), // 1233
];
const SQRT2_ONLY: [(usize, usize, usize); 6] = [
    // X_rc = sqrt(2) coeff[slot]
    (0, 4, 2), // 1113
    (0, 5, 1), // 1112
    (1, 3, 11), // 2223
    (1, 5, 6), // 1222
    (2, 3, 13), // 2333
    (2, 4, 9), // 1333
];

impl Km66 {
    /// Builds the matrix view of a completely symmetric tensor. The six
    /// redundancy relations hold by construction.
    pub fn from_sym4(a: &Sym4, frame: Frame) -> Km66 {
        let c = a.coeffs();
        let mut m = [0.0; 36];
        let mut set = |i: usize, j: usize, v: f64| {
            m[6 * i + j] = v;
            m[6 * j + i] = v;
        };
        for (i, j, slot) in EXACT_ONE {
            set(i, j, c[slot]);
        }
        for (i, j, slot) in EXACT_TWO {
            set(i, j, 2.0 * c[slot]);
        }
        for (i, j, slot) in SQRT2_ONLY {
            set(i, j, SQRT_2 * c[slot]);
        }
        // Redundant partners: upper-right entries paired with the
        // lower-right block, and the lower-right diagonal.
        set(0, 3, SQRT_2 * c[4]); // 1123
        set(1, 4, SQRT_2 * c[7]); // 1223
        set(2, 5, SQRT_2 * c[8]); // 1233
        set(3, 3, 2.0 * c[12]); // 2233
        set(4, 4, 2.0 * c[5]); // 1133
        set(5, 5, 2.0 * c[3]); // 1122
        Km66 { m, frame }
    }

    /// Wraps raw entries, validating matrix symmetry within `sym_tol` and
    /// storing the symmetrized matrix.
    #[allow(clippy::needless_range_loop)]
    pub fn from_entries(entries: [f64; 36], frame: Frame, sym_tol: f64) -> Result<Km66> {
        let mut worst = 0.0f64;
        for i in 0..6 {
            for j in (i + 1)..6 {
                worst = worst.max((entries[6 * i + j] - entries[6 * j + i]).abs());
            }
        }
        if worst > sym_tol {
            return Err(Error::NotSymmetric { residual: worst });
        }
        let mut m = [0.0; 36];
        for i in 0..6 {
            for j in 0..6 {
                m[6 * i + j] = 0.5 * (entries[6 * i + j] + entries[6 * j + i]);
            }
        }
        Ok(Km66 { m, frame })
    }

    pub fn zero(frame: Frame) -> Km66 {
        Km66 { m: [0.0; 36], frame }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[6 * i + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.m[6 * i + j] = v;
        self.m[6 * j + i] = v;
    }

    pub fn entries(&self) -> &[f64; 36] {
        &self.m
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn with_frame(mut self, frame: Frame) -> Km66 {
        self.frame = frame;
        self
    }

    pub fn trace(&self) -> f64 {
        (0..6).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product over all 36 entries.
    pub fn dot(&self, o: &Km66) -> f64 {
        self.m.iter().zip(&o.m).map(|(a, b)| a * b).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Worst absolute residual among the six complete-symmetry redundancy
    /// relations.
    pub fn redundancy_residual(&self) -> f64 {
        let g = |i: usize, j: usize| self.get(i, j);
        [
            (g(3, 3) - 2.0 * g(1, 2)).abs(),
            (g(4, 4) - 2.0 * g(0, 2)).abs(),
            (g(5, 5) - 2.0 * g(0, 1)).abs(),
            (g(3, 4) - SQRT_2 * g(2, 5)).abs(),
            (g(3, 5) - SQRT_2 * g(1, 4)).abs(),
            (g(4, 5) - SQRT_2 * g(0, 3)).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Eigenvalues in descending order (equal to the tensor eigenvalues).
    pub fn eigenvalues(&self) -> [f64; 6] {
        let (vals, _) = linalg::eig_sym(&self.to_mat());
        [vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]]
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_fn(6, 6, |i, j| self.get(i, j))
    }

    pub fn from_mat(m: &Mat, frame: Frame) -> Km66 {
        assert_eq!((m.rows(), m.cols()), (6, 6));
        let mut e = [0.0; 36];
        for i in 0..6 {
            for j in 0..6 {
                e[6 * i + j] = m[(i, j)];
            }
        }
        Km66 { m: e, frame }
    }
}

impl Sym4 {
    pub fn to_km(&self, frame: Frame) -> Km66 {
        Km66::from_sym4(self, frame)
    }

    /// Reads the 15 coefficients back from a Kelvin-Mandel matrix.
    ///
    /// The redundancy relations must hold within `tol`; the worst violation
    /// is reported otherwise. Coefficients carried by factor-1 and factor-2
    /// entries are recovered bit-exactly; the six coefficients that only
    /// appear with a sqrt(2) factor are recovered by one IEEE division.
    pub fn from_km(km: &Km66, tol: f64) -> Result<Sym4> {
        let residual = km.redundancy_residual();
        if residual > tol {
            return Err(Error::NotCompletelySymmetric { residual, tol });
        }
        let mut c = [0.0; 15];
        for (i, j, slot) in EXACT_ONE {
            c[slot] = km.get(i, j);
        }
        for (i, j, slot) in EXACT_TWO {
            c[slot] = km.get(i, j) / 2.0;
        }
        for (i, j, slot) in SQRT2_ONLY {
            c[slot] = km.get(i, j) / SQRT_2;
        }
        Ok(Sym4::from_coeffs(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Vec3;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn monomial_km_entries() {
        let a = Sym4::outer4(&Vec3::new(1.0, 0.0, 0.0));
        let km = a.to_km(Frame::Fixed);
        assert_eq!(km.get(0, 0), 1.0);
        assert_eq!(km.frob_norm(), 1.0);
        // 1122 coefficient lands at (1,2) with factor 1 and (6,6) with factor 2.
        let mut c = [0.0; 15];
        c[3] = 1.0 / 15.0;
        let km = Sym4::from_coeffs(c).to_km(Frame::Fixed);
        assert_eq!(km.get(0, 1), 1.0 / 15.0);
        assert_eq!(km.get(5, 5), 2.0 / 15.0);
        // 1123 coefficient lands at (1,4) with sqrt(2) and (5,6) with 2.
        let mut c = [0.0; 15];
        c[4] = 0.37;
        let km = Sym4::from_coeffs(c).to_km(Frame::Fixed);
        assert_eq!(km.get(0, 3), SQRT_2 * 0.37);
        assert_eq!(km.get(4, 5), 2.0 * 0.37);
    }

    #[test]
    fn roundtrip_is_exact_on_factor_1_and_2_entries() {
        let mut seed = 1u64;
        for _ in 0..200 {
            let mut c = [0.0; 15];
            for v in c.iter_mut() {
                *v = lcg(&mut seed);
            }
            let a = Sym4::from_coeffs(c);
            // The redundancy pairs go through sqrt(2) arithmetic, so they
            // match only to rounding.
            let back = Sym4::from_km(&a.to_km(Frame::Fixed), 1e-15).unwrap();
            for slot in [0usize, 3, 4, 5, 7, 8, 10, 12, 14] {
                assert_eq!(back.coeffs()[slot], c[slot], "slot {slot}");
            }
            // sqrt(2)-only coefficients round-trip to within one ulp.
            for slot in [1usize, 2, 6, 9, 11, 13] {
                let d = (back.coeffs()[slot] - c[slot]).abs();
                assert!(d <= c[slot].abs() * f64::EPSILON, "slot {slot}: {d:e}");
            }
        }
    }

    #[test]
    fn roundtrip_matrix_side() {
        let mut seed = 5u64;
        let mut c = [0.0; 15];
        for v in c.iter_mut() {
            *v = lcg(&mut seed);
        }
        let a = Sym4::from_coeffs(c);
        let km = a.to_km(Frame::Eigen);
        let back = Sym4::from_km(&km, 1e-12).unwrap().to_km(Frame::Eigen);
        for (x, y) in km.entries().iter().zip(back.entries()) {
            assert!((x - y).abs() <= 1e-14);
        }
        assert_eq!(back.frame(), Frame::Eigen);
    }

    #[test]
    fn redundancy_violation_is_reported() {
        let a = Sym4::from_coeffs([0.1; 15]);
        let mut km = a.to_km(Frame::Fixed);
        // Break X44 = 2 X23 by 1e-3.
        km.set_sym(3, 3, km.get(3, 3) + 1e-3);
        match Sym4::from_km(&km, 1e-6) {
            Err(Error::NotCompletelySymmetric { residual, .. }) => {
                assert!((residual - 1e-3).abs() < 1e-12);
            }
            other => panic!("expected NotCompletelySymmetric, got {other:?}"),
        }
    }

    #[test]
    fn frobenius_products_agree() {
        let mut seed = 9u64;
        for _ in 0..100 {
            let mut c1 = [0.0; 15];
            let mut c2 = [0.0; 15];
            for v in c1.iter_mut() {
                *v = lcg(&mut seed);
            }
            for v in c2.iter_mut() {
                *v = lcg(&mut seed);
            }
            let a = Sym4::from_coeffs(c1);
            let b = Sym4::from_coeffs(c2);
            let t = a.ddot4(&b);
            let m = a.to_km(Frame::Fixed).dot(&b.to_km(Frame::Fixed));
            assert!((t - m).abs() <= 1e-12 * (1.0 + t.abs()));
        }
    }

    #[test]
    fn km_trace_equals_tensor_trace_and_eigen_sum() {
        let mut seed = 13u64;
        for _ in 0..50 {
            let mut c = [0.0; 15];
            for v in c.iter_mut() {
                *v = lcg(&mut seed);
            }
            let a = Sym4::from_coeffs(c);
            let km = a.to_km(Frame::Fixed);
            let id = crate::tensor::Sym2::identity();
            let tensor_trace = id.ddot(&a.contract_sym2(&id));
            assert!((km.trace() - tensor_trace).abs() <= 1e-12 * (1.0 + tensor_trace.abs()));
            let eig_sum: f64 = km.eigenvalues().iter().sum();
            assert!((eig_sum - tensor_trace).abs() <= 1e-12 * (1.0 + tensor_trace.abs()));
        }
    }

    #[test]
    fn eigenvalues_of_monomial() {
        let a = Sym4::outer4(&Vec3::new(1.0, 0.0, 0.0));
        let ev = a.to_km(Frame::Fixed).eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-14);
        for v in &ev[1..] {
            assert!(v.abs() < 1e-14);
        }
    }
}
