//! Eigensystem-based parameterization of fourth-order orientation tensors
//! and material-symmetry groups.
//!
//! A triclinic fourth-order orientation tensor splits into the isotropic
//! tensor, a second-order part carrying the eigenvalues (lambda1, lambda2)
//! of its double trace, and a fully traceless structure tensor with nine
//! parameters d1..d9. The split separates second- from fourth-order
//! information: the parts are mutually orthogonal in the Frobenius sense.
//!
//! All outputs are expressed in the eigensystem frame; aligning them with a
//! fixed laboratory frame is a Rayleigh rotation by the basis
//! change-of-frame.

use crate::error::{Error, Result};
use crate::tensor::{sym_dyad, Rotation, Sym2, Sym4};

/// Tolerance for the eigenvalue ordering checks.
pub const ORDERING_TOL: f64 = 1e-12;

/// Parameters of the triclinic representation: ordered eigenvalues of the
/// second-order contraction plus the nine structure parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriclinicParams {
    lambda1: f64,
    lambda2: f64,
    d: [f64; 9],
}

impl TriclinicParams {
    /// Validates the ordering convention
    /// `lambda1 >= lambda2 >= 1 - lambda1 - lambda2 >= 0` (within
    /// [`ORDERING_TOL`]).
    pub fn new(lambda1: f64, lambda2: f64, d: [f64; 9]) -> Result<Self> {
        check_ordering(lambda1, lambda2)?;
        Ok(TriclinicParams { lambda1, lambda2, d })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn lambda3(&self) -> f64 {
        1.0 - self.lambda1 - self.lambda2
    }

    pub fn d(&self) -> &[f64; 9] {
        &self.d
    }
}

pub fn check_ordering(lambda1: f64, lambda2: f64) -> Result<()> {
    let lambda3 = 1.0 - lambda1 - lambda2;
    if lambda1 + ORDERING_TOL < lambda2
        || lambda2 + ORDERING_TOL < lambda3
        || lambda3 < -ORDERING_TOL
    {
        return Err(Error::OrderingViolation { lambda1, lambda2 });
    }
    Ok(())
}

/// The isotropic fourth-order orientation tensor, `(1/5) sym(Id (x) Id)`:
/// coefficients 1/5 on iiii and 1/15 on iijj.
pub fn iso4() -> Sym4 {
    let mut a = Sym4::zero();
    for i in 0..3 {
        a.set_coeff(i, i, i, i, 0.2);
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        a.set_coeff(i, i, j, j, 1.0 / 15.0);
    }
    a
}

/// Constant plus second-order part of the triclinic parameterization, i.e.
/// `iso4 + (6/7) sym(dev(A(lambda1, lambda2)) (x) Id)`, written out with its
/// exact rational entries.
pub fn second_order_part(lambda1: f64, lambda2: f64) -> Result<Sym4> {
    check_ordering(lambda1, lambda2)?;
    let mut a = Sym4::zero();
    a.set_coeff(0, 0, 0, 0, 6.0 / 7.0 * lambda1 - 3.0 / 35.0);
    a.set_coeff(1, 1, 1, 1, 6.0 / 7.0 * lambda2 - 3.0 / 35.0);
    a.set_coeff(2, 2, 2, 2, -6.0 / 7.0 * lambda1 - 6.0 / 7.0 * lambda2 + 27.0 / 35.0);
    a.set_coeff(0, 0, 1, 1, (lambda1 + lambda2) / 7.0 - 1.0 / 35.0);
    a.set_coeff(0, 0, 2, 2, -lambda2 / 7.0 + 4.0 / 35.0);
    a.set_coeff(1, 1, 2, 2, -lambda1 / 7.0 + 4.0 / 35.0);
    Ok(a)
}

/// Equivalent tensorial form of [`second_order_part`], used as an algebraic
/// cross-check: `iso4 + (6/7) sym(dev(A) (x) Id)`.
pub fn second_order_part_tensorial(lambda1: f64, lambda2: f64) -> Result<Sym4> {
    check_ordering(lambda1, lambda2)?;
    let a2 = Sym2::from_diag([lambda1, lambda2, 1.0 - lambda1 - lambda2]);
    let mut out = iso4();
    out.axpy(6.0 / 7.0, &sym_dyad(&a2.deviator(), &Sym2::identity()));
    Ok(out)
}

/// Fully traceless triclinic structure tensor carrying the nine parameters
/// beyond second-order information. Its double trace vanishes identically.
pub fn tricl_structure(d: &[f64; 9]) -> Sym4 {
    let [d1, d2, d3, d4, d5, d6, d7, d8, d9] = *d;
    let mut a = Sym4::zero();
    a.set_coeff(0, 0, 0, 0, -(d1 + d2));
    a.set_coeff(1, 1, 1, 1, -(d1 + d3));
    a.set_coeff(2, 2, 2, 2, -(d2 + d3));
    a.set_coeff(0, 0, 1, 1, d1);
    a.set_coeff(0, 0, 2, 2, d2);
    a.set_coeff(1, 1, 2, 2, d3);
    a.set_coeff(0, 0, 1, 2, -(d4 + d5));
    a.set_coeff(1, 1, 1, 2, d4);
    a.set_coeff(1, 2, 2, 2, d5);
    a.set_coeff(0, 0, 0, 2, d6);
    a.set_coeff(0, 1, 1, 2, -(d6 + d7));
    a.set_coeff(0, 2, 2, 2, d7);
    a.set_coeff(0, 0, 0, 1, d8);
    a.set_coeff(0, 1, 1, 1, d9);
    a.set_coeff(0, 1, 2, 2, -(d8 + d9));
    a
}

/// Assembles the full triclinic tensor. The result always has double trace
/// diag(lambda1, lambda2, lambda3) and unit trace, but is not necessarily a
/// realizable candidate — membership depends on the parameter values.
pub fn assemble_triclinic(p: &TriclinicParams) -> Sym4 {
    second_order_part(p.lambda1, p.lambda2)
        .expect("ordering validated on construction")
        .add(&tricl_structure(&p.d))
}

/// Material-symmetry classes used by the extremization problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    Triclinic,
    Orthotropic,
}

impl SymmetryClass {
    pub fn group(&self) -> SymmetryGroup {
        match self {
            SymmetryClass::Triclinic => triclinic_group(),
            SymmetryClass::Orthotropic => orthotropic_group(),
        }
    }
}

impl std::fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymmetryClass::Triclinic => write!(f, "triclinic"),
            SymmetryClass::Orthotropic => write!(f, "orthotropic"),
        }
    }
}

/// A finite set of rotations, expressed in the eigensystem frame, under
/// which a tensor is required to be invariant.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    pub name: SymmetryClass,
    pub elements: Vec<Rotation>,
}

/// The trivial group {Id}.
pub fn triclinic_group() -> SymmetryGroup {
    SymmetryGroup {
        name: SymmetryClass::Triclinic,
        elements: vec![Rotation::identity()],
    }
}

/// The four-element orthotropic group: the identity and the three rotations
/// by 180 degrees about the eigensystem axes (paired sign flips).
pub fn orthotropic_group() -> SymmetryGroup {
    let signs = [
        (1.0, 1.0, 1.0),
        (1.0, -1.0, -1.0),
        (-1.0, 1.0, -1.0),
        (-1.0, -1.0, 1.0),
    ];
    SymmetryGroup {
        name: SymmetryClass::Orthotropic,
        elements: signs
            .iter()
            .map(|&(a, b, c)| {
                Rotation::from_diag_signs(a, b, c).expect("sign matrices are orthogonal")
            })
            .collect(),
    }
}

/// Worst-case invariance defect `max_{Q in G} ||Q * A - A||_F`.
pub fn symmetry_residual(a: &Sym4, group: &SymmetryGroup) -> f64 {
    group
        .elements
        .iter()
        .map(|q| a.rotate(q).sub(a).frob_norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Frame, Sym2};

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    /// Random ordered eigenvalue pair via sorted simplex coordinates.
    fn random_ordered_lambdas(seed: &mut u64) -> (f64, f64) {
        let mut l = [lcg(seed) + 0.5, lcg(seed) + 0.5, lcg(seed) + 0.5];
        let s: f64 = l.iter().sum();
        for v in l.iter_mut() {
            *v /= s;
        }
        l.sort_by(|a, b| b.partial_cmp(a).unwrap());
        (l[0], l[1])
    }

    #[test]
    fn iso4_components_and_trace() {
        let a = iso4();
        assert_eq!(a.coeff(0, 0, 0, 0), 0.2);
        assert_eq!(a.coeff(0, 0, 1, 1), 1.0 / 15.0);
        let id = Sym2::identity();
        assert!((id.ddot(&a.contract_sym2(&id)) - 1.0).abs() < 1e-15);
        // Same tensor as (1/5) sym(Id (x) Id).
        let alt = sym_dyad(&id, &id).scale(0.2);
        assert!(a.sub(&alt).frob_norm() < 1e-16);
    }

    #[test]
    fn second_order_part_matches_reference_entries() {
        // (1/3, 1/3) is the isotropic state: KM (1,1) entry 6/7/3 - 3/35 = 1/5.
        let a = second_order_part(1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!(a.sub(&iso4()).frob_norm() < 1e-15);
        assert!((a.to_km(Frame::Eigen).get(0, 0) - 0.2).abs() < 1e-15);
        // (1/2, 1/4): KM (3,3) entry -6/7 * 3/4 + 27/35 = 9/70.
        let a = second_order_part(0.5, 0.25).unwrap();
        assert!((a.to_km(Frame::Eigen).get(2, 2) - 9.0 / 70.0).abs() < 1e-15);
    }

    #[test]
    fn second_order_part_contraction_is_diag_lambda() {
        let mut seed = 17u64;
        for _ in 0..50 {
            let (l1, l2) = random_ordered_lambdas(&mut seed);
            let a = second_order_part(l1, l2).unwrap();
            let c = a.contract_id();
            let target = Sym2::from_diag([l1, l2, 1.0 - l1 - l2]);
            assert!(c.sub(&target).frob_norm() < 1e-13);
        }
    }

    #[test]
    fn explicit_matrix_equals_tensorial_form() {
        let mut seed = 29u64;
        for _ in 0..100 {
            let (l1, l2) = random_ordered_lambdas(&mut seed);
            let a = second_order_part(l1, l2).unwrap();
            let b = second_order_part_tensorial(l1, l2).unwrap();
            assert!(a.sub(&b).frob_norm() < 1e-14);
        }
    }

    #[test]
    fn ordering_violations_rejected() {
        assert!(matches!(
            second_order_part(0.2, 0.5),
            Err(Error::OrderingViolation { .. })
        ));
        assert!(matches!(
            second_order_part(0.3, 0.3), // lambda3 = 0.4 > lambda2
            Err(Error::OrderingViolation { .. })
        ));
        // Boundary cases pass.
        assert!(second_order_part(0.5, 0.5).is_ok());
        assert!(second_order_part(1.0, 0.0).is_ok());
    }

    #[test]
    fn tricl_structure_entries_and_tracelessness() {
        assert_eq!(tricl_structure(&[0.0; 9]), Sym4::zero());
        let mut d = [0.0; 9];
        d[0] = 1.0;
        let km = tricl_structure(&d).to_km(Frame::Eigen);
        assert_eq!(km.get(0, 0), -1.0);
        assert_eq!(km.get(0, 1), 1.0);
        assert_eq!(km.get(1, 1), -1.0);
        assert_eq!(km.get(5, 5), 2.0);

        let mut seed = 31u64;
        for _ in 0..50 {
            let mut d = [0.0; 9];
            for v in d.iter_mut() {
                *v = lcg(&mut seed);
            }
            let f = tricl_structure(&d);
            assert!(f.contract_id().frob_norm() < 1e-14);
            // Fully traceless also in the scalar sense Id : F : Id = 0.
            let id = Sym2::identity();
            assert!(id.ddot(&f.contract_sym2(&id)).abs() < 1e-14);
        }
    }

    #[test]
    fn assemble_triclinic_contraction_and_special_cases() {
        let p = TriclinicParams::new(1.0 / 3.0, 1.0 / 3.0, [0.0; 9]).unwrap();
        assert!(assemble_triclinic(&p).sub(&iso4()).frob_norm() < 1e-15);

        // Second-order part alone does not reach the unidirectional state:
        // at (1, 0) the KM (1,1) entry is 27/35, not 1, and the tensor has a
        // negative eigenvalue.
        let a = second_order_part(1.0, 0.0).unwrap();
        assert!((a.to_km(Frame::Eigen).get(0, 0) - 27.0 / 35.0).abs() < 1e-15);
        let evs = a.to_km(Frame::Eigen).eigenvalues();
        assert!(evs[5] < -1e-3);

        let mut d = [0.0; 9];
        d[0] = 0.01;
        let p = TriclinicParams::new(0.5, 0.25, d).unwrap();
        let c = assemble_triclinic(&p).contract_id();
        assert!(c.sub(&Sym2::from_diag([0.5, 0.25, 0.25])).frob_norm() < 1e-13);
    }

    #[test]
    fn orthotropic_group_structure() {
        let g = orthotropic_group();
        assert_eq!(g.elements.len(), 4);
        for q in &g.elements {
            assert!(q.is_proper());
            let sq = q.compose(q);
            let id = Rotation::identity();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((sq.entry(i, j) - id.entry(i, j)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn symmetry_residual_detects_structure_parameters() {
        let g = orthotropic_group();
        assert!(symmetry_residual(&iso4(), &g) < 1e-14);

        // d1..d3 keep orthotropy.
        let mut seed = 41u64;
        let mut d = [0.0; 9];
        for v in d.iter_mut().take(3) {
            *v = lcg(&mut seed);
        }
        assert!(symmetry_residual(&tricl_structure(&d), &g) < 1e-14);

        // Any of d4..d9 breaks it.
        for k in 3..9 {
            let mut d = [0.0; 9];
            d[k] = 1e-3;
            let p = TriclinicParams::new(0.5, 0.3, d).unwrap();
            let r = symmetry_residual(&assemble_triclinic(&p), &g);
            assert!(r > 1e-6, "d{} residual {r:e}", k + 1);
        }
    }

    #[test]
    fn decomposition_parts_are_orthogonal() {
        let mut seed = 43u64;
        for _ in 0..50 {
            let (l1, l2) = random_ordered_lambdas(&mut seed);
            let mut d = [0.0; 9];
            for v in d.iter_mut() {
                *v = lcg(&mut seed);
            }
            let iso = iso4();
            let dev2 = second_order_part(l1, l2).unwrap().sub(&iso);
            let f = tricl_structure(&d);
            assert!(iso.ddot4(&dev2).abs() < 1e-13);
            assert!(iso.ddot4(&f).abs() < 1e-13);
            assert!(dev2.ddot4(&f).abs() < 1e-13);
        }
    }
}
