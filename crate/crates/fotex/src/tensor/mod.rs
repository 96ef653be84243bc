//! Symmetric tensor algebra in three dimensions.
//!
//! The canonical storage for a completely symmetric fourth-order tensor is
//! the vector of its 15 independent coefficients indexed by sorted
//! multi-indices ([`Sym4`]); the 6x6 Kelvin-Mandel matrix ([`Km66`]) is a
//! derived view. Complete symmetry therefore holds by construction and never
//! has to be enforced as a constraint.

mod km;
mod sym4;

pub use km::{Frame, Km66};
pub use sym4::{coeff_slot, Sym4, MULTIPLICITY, MULTI_INDICES};

use crate::error::{Error, Result};

/// Tolerance for unit-norm and orthogonality checks on construction.
pub const UNIT_TOL: f64 = 1e-12;

/// Plain 3-vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn comp(&self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("component index {i} out of range"),
        }
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Unit vector on the sphere; the norm is 1 within [`UNIT_TOL`] by
/// construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction(Vec3);

impl Direction {
    /// Wraps a vector that is already unit length.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm: n, tol: UNIT_TOL });
        }
        Ok(Direction(v))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_vector(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if n < 1e-14 {
            return Err(Error::ZeroDirection { norm: n });
        }
        Ok(Direction(v.scale(1.0 / n)))
    }

    pub fn e1() -> Self {
        Direction(Vec3::new(1.0, 0.0, 0.0))
    }

    pub fn e2() -> Self {
        Direction(Vec3::new(0.0, 1.0, 0.0))
    }

    pub fn e3() -> Self {
        Direction(Vec3::new(0.0, 0.0, 1.0))
    }

    /// Spherical angles as used for the sweep grids:
    /// `n = (cos(phi) sin(theta), sin(phi) sin(theta), cos(theta))`.
    pub fn from_angles(phi: f64, theta: f64) -> Self {
        Direction(Vec3::new(
            phi.cos() * theta.sin(),
            phi.sin() * theta.sin(),
            theta.cos(),
        ))
    }

    pub fn vector(&self) -> &Vec3 {
        &self.0
    }

    pub fn flipped(&self) -> Direction {
        Direction(self.0.scale(-1.0))
    }

    /// Sign-canonical representative of the antipodal pair {p, -p}: the
    /// first nonzero component is positive.
    pub fn antipodal_canonical(&self) -> Direction {
        let v = self.0;
        let lead = if v.x.abs() > 1e-14 {
            v.x
        } else if v.y.abs() > 1e-14 {
            v.y
        } else {
            v.z
        };
        if lead < 0.0 {
            self.flipped()
        } else {
            *self
        }
    }
}

impl std::ops::Deref for Direction {
    type Target = Vec3;

    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

/// Position of the sorted pair (i, j) in the coefficient order
/// 11, 22, 33, 23, 13, 12.
pub(crate) fn pair_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => panic!("pair index ({i}, {j}) out of range"),
    }
}

/// Symmetric second-order tensor stored as its 6 independent coefficients in
/// the order 11, 22, 33, 23, 13, 12.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    c: [f64; 6],
}

impl Sym2 {
    pub fn zero() -> Self {
        Sym2 { c: [0.0; 6] }
    }

    pub fn identity() -> Self {
        Sym2 {
            c: [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn from_coeffs(c: [f64; 6]) -> Self {
        Sym2 { c }
    }

    pub fn from_diag(d: [f64; 3]) -> Self {
        Sym2 {
            c: [d[0], d[1], d[2], 0.0, 0.0, 0.0],
        }
    }

    /// Dyad v (x) v.
    pub fn outer(v: &Vec3) -> Self {
        Sym2 {
            c: [
                v.x * v.x,
                v.y * v.y,
                v.z * v.z,
                v.y * v.z,
                v.x * v.z,
                v.x * v.y,
            ],
        }
    }

    pub fn coeffs(&self) -> &[f64; 6] {
        &self.c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[pair_slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.c[pair_slot(i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        self.c[0] + self.c[1] + self.c[2]
    }

    /// Traceless part `S - (tr S / 3) Id`.
    pub fn deviator(&self) -> Sym2 {
        let m = self.trace() / 3.0;
        let mut c = self.c;
        c[0] -= m;
        c[1] -= m;
        c[2] -= m;
        Sym2 { c }
    }

    /// Double contraction S : T.
    pub fn ddot(&self, o: &Sym2) -> f64 {
        self.c[0] * o.c[0]
            + self.c[1] * o.c[1]
            + self.c[2] * o.c[2]
            + 2.0 * (self.c[3] * o.c[3] + self.c[4] * o.c[4] + self.c[5] * o.c[5])
    }

    pub fn frob_norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn add(&self, o: &Sym2) -> Sym2 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(&o.c) {
            *a += b;
        }
        Sym2 { c }
    }

    pub fn sub(&self, o: &Sym2) -> Sym2 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(&o.c) {
            *a -= b;
        }
        Sym2 { c }
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a *= s;
        }
        Sym2 { c }
    }

    /// Kelvin-Mandel coordinate vector
    /// `(S11, S22, S33, sqrt(2) S23, sqrt(2) S13, sqrt(2) S12)`.
    pub fn km_vec(&self) -> [f64; 6] {
        let s = std::f64::consts::SQRT_2;
        [
            self.c[0],
            self.c[1],
            self.c[2],
            s * self.c[3],
            s * self.c[4],
            s * self.c[5],
        ]
    }

    pub fn from_km_vec(v: &[f64; 6]) -> Sym2 {
        let s = std::f64::consts::SQRT_2;
        Sym2 {
            c: [v[0], v[1], v[2], v[3] / s, v[4] / s, v[5] / s],
        }
    }

    /// Quadratic form S : (q (x) q).
    pub fn quad_form(&self, q: &Vec3) -> f64 {
        self.ddot(&Sym2::outer(q))
    }

    pub fn to_mat(&self) -> crate::linalg::Mat {
        crate::linalg::Mat::from_fn(3, 3, |i, j| self.get(i, j))
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let (vals, _) = crate::linalg::eig_sym(&self.to_mat());
        [vals[0], vals[1], vals[2]]
    }
}

/// Orthogonal 3x3 matrix. Proper rotations have determinant +1; improper
/// elements of symmetry groups are stored with determinant -1 and flagged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
    proper: bool,
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            proper: true,
        }
    }

    /// Validates orthogonality within [`UNIT_TOL`] and |det| = 1.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        if worst > UNIT_TOL {
            return Err(Error::NotOrthogonal { residual: worst });
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if (det.abs() - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotOrthogonal {
                residual: (det.abs() - 1.0).abs(),
            });
        }
        Ok(Rotation { m, proper: det > 0.0 })
    }

    /// Rotation about a unit axis by `angle` radians (Rodrigues formula).
    pub fn about_axis(axis: &Direction, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let k = axis.vector();
        let one_c = 1.0 - c;
        let m = [
            [
                c + k.x * k.x * one_c,
                k.x * k.y * one_c - k.z * s,
                k.x * k.z * one_c + k.y * s,
            ],
            [
                k.y * k.x * one_c + k.z * s,
                c + k.y * k.y * one_c,
                k.y * k.z * one_c - k.x * s,
            ],
            [
                k.z * k.x * one_c - k.y * s,
                k.z * k.y * one_c + k.x * s,
                c + k.z * k.z * one_c,
            ],
        ];
        Rotation { m, proper: true }
    }

    /// Diagonal sign matrix diag(s1, s2, s3) with each si = +/-1.
    pub fn from_diag_signs(s1: f64, s2: f64, s3: f64) -> Result<Self> {
        Rotation::from_matrix([[s1, 0.0, 0.0], [0.0, s2, 0.0], [0.0, 0.0, s3]])
    }

    /// Change-of-basis rotation mapping e_i onto the given frame vectors,
    /// i.e. the matrix with v_i as columns.
    pub fn from_frame(v1: &Direction, v2: &Direction, v3: &Direction) -> Result<Self> {
        Rotation::from_matrix([
            [v1.x, v2.x, v3.x],
            [v1.y, v2.y, v3.y],
            [v1.z, v2.z, v3.z],
        ])
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn is_proper(&self) -> bool {
        self.proper
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.m[j][i];
            }
        }
        Rotation { m, proper: self.proper }
    }

    pub fn compose(&self, o: &Rotation) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Rotation {
            m,
            proper: self.proper == o.proper,
        }
    }
}

/// Complete symmetrization of S (x) T over all four indices.
///
/// For symmetric S and T the 24-term permutation average collapses to six
/// pairings.
pub fn sym_dyad(s: &Sym2, t: &Sym2) -> Sym4 {
    let mut out = Sym4::zero();
    for (slot, idx) in MULTI_INDICES.iter().enumerate() {
        let [i, j, k, l] = *idx;
        let v = (s.get(i, j) * t.get(k, l)
            + s.get(i, k) * t.get(j, l)
            + s.get(i, l) * t.get(j, k)
            + t.get(i, j) * s.get(k, l)
            + t.get(i, k) * s.get(j, l)
            + t.get(i, l) * s.get(j, k))
            / 6.0;
        out.set_slot(slot, v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_validates_norm() {
        assert!(Direction::new(Vec3::new(1.0, 0.0, 0.0)).is_ok());
        assert!(Direction::new(Vec3::new(1.0, 1.0, 0.0)).is_err());
        let d = Direction::from_vector(Vec3::new(3.0, 4.0, 0.0)).unwrap();
        assert!((d.norm() - 1.0).abs() < 1e-15);
        assert!(Direction::from_vector(Vec3::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn deviator_is_traceless() {
        assert_eq!(Sym2::identity().deviator(), Sym2::zero());
        let d = Sym2::from_diag([1.0, 0.0, 0.0]).deviator();
        assert!((d.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.get(1, 1) + 1.0 / 3.0).abs() < 1e-15);
        assert!((d.get(2, 2) + 1.0 / 3.0).abs() < 1e-15);
        let s = Sym2::from_coeffs([0.3, -1.2, 2.0, 0.7, -0.1, 0.4]);
        assert!(s.deviator().trace().abs() < 1e-15);
    }

    #[test]
    fn rotation_validation() {
        assert!(Rotation::from_matrix([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
        let r = Rotation::from_diag_signs(1.0, -1.0, -1.0).unwrap();
        assert!(r.is_proper());
        let m = Rotation::from_diag_signs(-1.0, 1.0, 1.0).unwrap();
        assert!(!m.is_proper());
    }

    #[test]
    fn sym_dyad_identity_components() {
        let t = sym_dyad(&Sym2::identity(), &Sym2::identity());
        assert!((t.coeff(0, 0, 0, 0) - 1.0).abs() < 1e-15);
        assert!((t.coeff(0, 0, 1, 1) - 1.0 / 3.0).abs() < 1e-15);
        let s = Sym2::outer(&Vec3::new(1.0, 0.0, 0.0));
        let e4 = sym_dyad(&s, &s);
        assert_eq!(e4, Sym4::outer4(&Vec3::new(1.0, 0.0, 0.0)));
    }
}
