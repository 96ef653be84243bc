//! Completely symmetric fourth-order tensors.

use super::{Rotation, Sym2, Vec3};

/// Sorted multi-indices of the 15 independent coefficients, in canonical
/// order: 1111, 1112, 1113, 1122, 1123, 1133, 1222, 1223, 1233, 1333,
/// 2222, 2223, 2233, 2333, 3333 (zero-based here).
pub const MULTI_INDICES: [[usize; 4]; 15] = [
    [0, 0, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 0, 2],
    [0, 0, 1, 1],
    [0, 0, 1, 2],
    [0, 0, 2, 2],
    [0, 1, 1, 1],
    [0, 1, 1, 2],
    [0, 1, 2, 2],
    [0, 2, 2, 2],
    [1, 1, 1, 1],
    [1, 1, 1, 2],
    [1, 1, 2, 2],
    [1, 2, 2, 2],
    [2, 2, 2, 2],
];

/// Number of distinct index permutations of each multi-index; the weight of
/// the coefficient in full contractions.
pub const MULTIPLICITY: [f64; 15] = [
    1.0, 4.0, 4.0, 6.0, 12.0, 6.0, 4.0, 12.0, 12.0, 4.0, 1.0, 4.0, 6.0, 4.0, 1.0,
];

/// Lookup table mapping any (i, j, k, l) with entries in 0..3 to the slot of
/// its sorted multi-index.
const SLOT_OF: [[[[u8; 3]; 3]; 3]; 3] = build_slot_table();

const fn build_slot_table() -> [[[[u8; 3]; 3]; 3]; 3] {
    let mut t = [[[[0u8; 3]; 3]; 3]; 3];
    let mut i = 0;
    while i < 3 {
        let mut j = 0;
        while j < 3 {
            let mut k = 0;
            while k < 3 {
                let mut l = 0;
                while l < 3 {
                    // Insertion sort of four small values.
                    let mut s = [i, j, k, l];
                    let mut a = 1;
                    while a < 4 {
                        let mut b = a;
                        while b > 0 && s[b - 1] > s[b] {
                            let tmp = s[b - 1];
                            s[b - 1] = s[b];
                            s[b] = tmp;
                            b -= 1;
                        }
                        a += 1;
                    }
                    let mut slot = 0u8;
                    let mut m = 0;
                    while m < 15 {
                        if MULTI_INDICES[m][0] == s[0]
                            && MULTI_INDICES[m][1] == s[1]
                            && MULTI_INDICES[m][2] == s[2]
                            && MULTI_INDICES[m][3] == s[3]
                        {
                            slot = m as u8;
                        }
                        m += 1;
                    }
                    t[i][j][k][l] = slot;
                    l += 1;
                }
                k += 1;
            }
            j += 1;
        }
        i += 1;
    }
    t
}

/// Slot of the sorted multi-index of (i, j, k, l).
pub fn coeff_slot(i: usize, j: usize, k: usize, l: usize) -> usize {
    SLOT_OF[i][j][k][l] as usize
}

/// Completely symmetric fourth-order tensor in three dimensions, stored as
/// 15 independent coefficients; see [`MULTI_INDICES`] for the ordering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym4 {
    c: [f64; 15],
}

impl Sym4 {
    pub fn zero() -> Self {
        Sym4 { c: [0.0; 15] }
    }

    pub fn from_coeffs(c: [f64; 15]) -> Self {
        Sym4 { c }
    }

    /// Rank-one tensor p (x) p (x) p (x) p.
    pub fn outer4(p: &Vec3) -> Self {
        let mut c = [0.0; 15];
        for (slot, idx) in MULTI_INDICES.iter().enumerate() {
            c[slot] = p.comp(idx[0]) * p.comp(idx[1]) * p.comp(idx[2]) * p.comp(idx[3]);
        }
        Sym4 { c }
    }

    pub fn coeffs(&self) -> &[f64; 15] {
        &self.c
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.c[coeff_slot(i, j, k, l)]
    }

    pub fn slot(&self, s: usize) -> f64 {
        self.c[s]
    }

    pub fn set_slot(&mut self, s: usize, v: f64) {
        self.c[s] = v;
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.c[coeff_slot(i, j, k, l)] = v;
    }

    pub fn add(&self, o: &Sym4) -> Sym4 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(&o.c) {
            *a += b;
        }
        Sym4 { c }
    }

    pub fn sub(&self, o: &Sym4) -> Sym4 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(&o.c) {
            *a -= b;
        }
        Sym4 { c }
    }

    pub fn scale(&self, s: f64) -> Sym4 {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a *= s;
        }
        Sym4 { c }
    }

    pub fn axpy(&mut self, s: f64, o: &Sym4) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += s * b;
        }
    }

    /// Full contraction A :: B, the inner product on Sym(3, 4).
    pub fn ddot4(&self, o: &Sym4) -> f64 {
        self.c
            .iter()
            .zip(&o.c)
            .zip(&MULTIPLICITY)
            .map(|((a, b), m)| m * a * b)
            .sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.ddot4(self).sqrt()
    }

    /// Quartic form A :: q^(x)4, evaluated as m^T KM(A) m with the
    /// Kelvin-Mandel vector m of q (x) q.
    pub fn quartic_eval(&self, q: &Vec3) -> f64 {
        let m = Sym2::outer(q).km_vec();
        let km = super::Km66::from_sym4(self, super::Frame::Fixed);
        let mut acc = 0.0;
        for (i, mi) in m.iter().enumerate() {
            let mut row = 0.0;
            for (j, mj) in m.iter().enumerate() {
                row += km.get(i, j) * mj;
            }
            acc += mi * row;
        }
        acc
    }

    /// Gradient of the quartic form: 4 A : q^(x)3 as a vector.
    #[allow(clippy::needless_range_loop)]
    pub fn quartic_grad(&self, q: &Vec3) -> Vec3 {
        let mut g = [0.0; 3];
        for (slot, idx) in MULTI_INDICES.iter().enumerate() {
            let a = self.c[slot] * MULTIPLICITY[slot];
            if a == 0.0 {
                continue;
            }
            // d/dq_m of q_i q_j q_k q_l, summed over the distinct
            // permutations via the multiplicity prefactor: for each slot of
            // the sorted index, the count of positions holding axis m times
            // the product of the remaining entries.
            for m in 0..3 {
                let count = idx.iter().filter(|&&x| x == m).count();
                if count == 0 {
                    continue;
                }
                let mut prod = count as f64;
                let mut dropped = false;
                for &x in idx {
                    if x == m && !dropped {
                        dropped = true;
                        continue;
                    }
                    prod *= q.comp(x);
                }
                g[m] += a * prod;
            }
        }
        Vec3::new(g[0], g[1], g[2])
    }

    /// Hessian of the quartic form: 12 (A : q (x) q) as a symmetric matrix.
    pub fn quartic_hess(&self, q: &Vec3) -> Sym2 {
        // (d^2/dq_m dq_n) A::q^4 = 12 sum_kl A_mnkl q_k q_l.
        let mut h = Sym2::zero();
        for m in 0..3 {
            for n in m..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += self.coeff(m, n, k, l) * q.comp(k) * q.comp(l);
                    }
                }
                h.set(m, n, 12.0 * acc);
            }
        }
        h
    }

    /// Double contraction with the identity: (A : Id)_ij = sum_k A_ijkk.
    pub fn contract_id(&self) -> Sym2 {
        let mut s = Sym2::zero();
        for i in 0..3 {
            for j in i..3 {
                let v = self.coeff(i, j, 0, 0) + self.coeff(i, j, 1, 1) + self.coeff(i, j, 2, 2);
                s.set(i, j, v);
            }
        }
        s
    }

    /// Contraction against a symmetric tensor: (A : S)_ij = sum_kl A_ijkl S_kl.
    pub fn contract_sym2(&self, s: &Sym2) -> Sym2 {
        let mut out = Sym2::zero();
        for i in 0..3 {
            for j in i..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += self.coeff(i, j, k, l) * s.get(k, l);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Full 81-component array, indexed [i][j][k][l].
    #[allow(clippy::needless_range_loop)]
    pub fn to_full(&self) -> [[[[f64; 3]; 3]; 3]; 3] {
        let mut f = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        f[i][j][k][l] = self.coeff(i, j, k, l);
                    }
                }
            }
        }
        f
    }

    /// Reads the 15 coefficients back from a full array that is already
    /// completely symmetric.
    #[allow(clippy::needless_range_loop)]
    pub fn from_full(f: &[[[[f64; 3]; 3]; 3]; 3]) -> Sym4 {
        let mut c = [0.0; 15];
        for (slot, idx) in MULTI_INDICES.iter().enumerate() {
            c[slot] = f[idx[0]][idx[1]][idx[2]][idx[3]];
        }
        Sym4 { c }
    }

    /// Rayleigh product Q * A: rotates every tensor basis, via the full
    /// 81-component transform A'_ijkl = Q_ia Q_jb Q_kc Q_ld A_abcd.
    #[allow(clippy::needless_range_loop)]
    pub fn rotate(&self, q: &Rotation) -> Sym4 {
        let full = self.to_full();
        let mut c = [0.0; 15];
        for (slot, idx) in MULTI_INDICES.iter().enumerate() {
            let [i, j, k, l] = *idx;
            let mut acc = 0.0;
            for a in 0..3 {
                let qa = q.entry(i, a);
                if qa == 0.0 {
                    continue;
                }
                for b in 0..3 {
                    let qb = qa * q.entry(j, b);
                    if qb == 0.0 {
                        continue;
                    }
                    for cc in 0..3 {
                        let qc = qb * q.entry(k, cc);
                        if qc == 0.0 {
                            continue;
                        }
                        for d in 0..3 {
                            acc += qc * q.entry(l, d) * full[a][b][cc][d];
                        }
                    }
                }
            }
            c[slot] = acc;
        }
        Sym4 { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Direction;

    fn brute_force_quartic(a: &Sym4, q: &Vec3) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        acc += a.coeff(i, j, k, l)
                            * q.comp(i)
                            * q.comp(j)
                            * q.comp(k)
                            * q.comp(l);
                    }
                }
            }
        }
        acc
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn slot_table_is_consistent() {
        for (slot, idx) in MULTI_INDICES.iter().enumerate() {
            assert_eq!(coeff_slot(idx[0], idx[1], idx[2], idx[3]), slot);
            // Any permutation maps to the same slot.
            assert_eq!(coeff_slot(idx[3], idx[1], idx[0], idx[2]), slot);
        }
        // Multiplicities add up to 3^4.
        assert_eq!(MULTIPLICITY.iter().sum::<f64>(), 81.0);
    }

    #[test]
    fn quartic_matches_brute_force_sum() {
        let mut seed = 7u64;
        for _ in 0..100 {
            let mut c = [0.0; 15];
            for v in c.iter_mut() {
                *v = lcg(&mut seed);
            }
            let a = Sym4::from_coeffs(c);
            let q = Vec3::new(lcg(&mut seed), lcg(&mut seed), lcg(&mut seed));
            let d = (a.quartic_eval(&q) - brute_force_quartic(&a, &q)).abs();
            assert!(d <= 1e-13 * (1.0 + a.frob_norm()), "mismatch {d:e}");
        }
    }

    #[test]
    fn quartic_on_monomials() {
        let e1 = Vec3::new(1.0, 0.0, 0.0);
        let a = Sym4::outer4(&e1);
        assert_eq!(a.quartic_eval(&e1), 1.0);
        let q = Vec3::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!((a.quartic_eval(&q) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn contract_id_examples() {
        let e1 = Vec3::new(1.0, 0.0, 0.0);
        let e2 = Vec3::new(0.0, 1.0, 0.0);
        let a = Sym4::outer4(&e1);
        assert_eq!(a.contract_id(), Sym2::outer(&e1));
        let b = Sym4::outer4(&e1).scale(0.5).add(&Sym4::outer4(&e2).scale(0.5));
        assert_eq!(b.contract_id(), Sym2::from_diag([0.5, 0.5, 0.0]));
    }

    #[test]
    fn rotate_permutes_axes_and_composes() {
        let e1 = Vec3::new(1.0, 0.0, 0.0);
        let e2 = Vec3::new(0.0, 1.0, 0.0);
        let q = Rotation::about_axis(&Direction::e3(), std::f64::consts::FRAC_PI_2);
        let r = Sym4::outer4(&e1).rotate(&q);
        let expect = Sym4::outer4(&e2);
        assert!(r.sub(&expect).frob_norm() < 1e-14);

        // Identity leaves tensors untouched.
        let id = Rotation::identity();
        let a = Sym4::from_coeffs([0.3; 15]);
        assert_eq!(a.rotate(&id), a);

        // Composition law (Q1 Q2) * A = Q1 * (Q2 * A).
        let mut seed = 3u64;
        let axis = Direction::from_vector(Vec3::new(
            lcg(&mut seed),
            lcg(&mut seed),
            lcg(&mut seed),
        ))
        .unwrap();
        let q1 = Rotation::about_axis(&axis, 0.83);
        let q2 = Rotation::about_axis(&Direction::e2(), -1.2);
        let mut c = [0.0; 15];
        for v in c.iter_mut() {
            *v = lcg(&mut seed);
        }
        let a = Sym4::from_coeffs(c);
        let lhs = a.rotate(&q2).rotate(&q1);
        let rhs = a.rotate(&q1.compose(&q2));
        assert!(lhs.sub(&rhs).frob_norm() < 1e-13);
    }

    #[test]
    fn rotation_pullback_identity() {
        let mut seed = 11u64;
        for _ in 0..100 {
            let axis = Direction::from_vector(Vec3::new(
                lcg(&mut seed),
                lcg(&mut seed),
                lcg(&mut seed),
            ))
            .unwrap();
            let q = Rotation::about_axis(&axis, 4.0 * lcg(&mut seed));
            let mut c = [0.0; 15];
            for v in c.iter_mut() {
                *v = lcg(&mut seed);
            }
            let a = Sym4::from_coeffs(c);
            let dir = Vec3::new(lcg(&mut seed), lcg(&mut seed), lcg(&mut seed));
            let lhs = a.rotate(&q).quartic_eval(&dir);
            let rhs = a.quartic_eval(&q.transpose().apply(&dir));
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + a.frob_norm()));
        }
    }

    #[test]
    fn quartic_grad_matches_finite_differences() {
        let mut seed = 23u64;
        let mut c = [0.0; 15];
        for v in c.iter_mut() {
            *v = lcg(&mut seed);
        }
        let a = Sym4::from_coeffs(c);
        let q = Vec3::new(0.3, -0.5, 0.81);
        let g = a.quartic_grad(&q);
        let h = 1e-6;
        for m in 0..3 {
            let mut qp = q;
            let mut qm = q;
            match m {
                0 => {
                    qp.x += h;
                    qm.x -= h;
                }
                1 => {
                    qp.y += h;
                    qm.y -= h;
                }
                _ => {
                    qp.z += h;
                    qm.z -= h;
                }
            }
            let fd = (a.quartic_eval(&qp) - a.quartic_eval(&qm)) / (2.0 * h);
            assert!((g.comp(m) - fd).abs() < 1e-7, "axis {m}");
        }
    }
}
