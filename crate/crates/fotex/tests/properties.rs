//! Property-based invariants of the tensor algebra.

use proptest::prelude::*;

use fotex::tensor::{Direction, Frame, Rotation, Sym2, Sym4, Vec3};

fn coeff_array() -> impl Strategy<Value = [f64; 15]> {
    prop::array::uniform15(-1.0f64..1.0)
}

fn unit_vector() -> impl Strategy<Value = Vec3> {
    (prop::array::uniform3(-1.0f64..1.0))
        .prop_filter("nonzero", |v| {
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() > 1e-2
        })
        .prop_map(|v| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            Vec3::new(v[0] / n, v[1] / n, v[2] / n)
        })
}

proptest! {
    /// Kelvin-Mandel round trip: bit-exact on the coefficients carried by
    /// factor-1/factor-2 entries, within one ulp on the six carried only by
    /// sqrt(2)-scaled entries.
    #[test]
    fn km_roundtrip(c in coeff_array()) {
        let a = Sym4::from_coeffs(c);
        let back = Sym4::from_km(&a.to_km(Frame::Fixed), 1e-14).unwrap();
        for slot in [0usize, 3, 4, 5, 7, 8, 10, 12, 14] {
            prop_assert_eq!(back.coeffs()[slot], c[slot]);
        }
        for slot in [1usize, 2, 6, 9, 11, 13] {
            let d = (back.coeffs()[slot] - c[slot]).abs();
            prop_assert!(d <= c[slot].abs() * f64::EPSILON);
        }
    }

    /// The deviator is traceless and idempotent.
    #[test]
    fn deviator_traceless(c in prop::array::uniform6(-1.0f64..1.0)) {
        let s = Sym2::from_coeffs(c);
        let d = s.deviator();
        prop_assert!(d.trace().abs() <= 1e-15 * (1.0 + s.frob_norm()));
        prop_assert!(d.deviator().sub(&d).frob_norm() <= 1e-15 * (1.0 + s.frob_norm()));
    }

    /// Even-order moments are invariant under the antipodal involution.
    #[test]
    fn outer4_sign_invariance(p in unit_vector()) {
        let plus = Sym4::outer4(&p);
        let minus = Sym4::outer4(&p.scale(-1.0));
        prop_assert_eq!(plus.coeffs(), minus.coeffs());
    }

    /// Rotations preserve the Kelvin-Mandel spectrum.
    #[test]
    fn rotation_preserves_eigenvalues(
        c in coeff_array(),
        axis in unit_vector(),
        angle in -3.2f64..3.2,
    ) {
        let a = Sym4::from_coeffs(c);
        let q = Rotation::about_axis(&Direction::new(axis).unwrap(), angle);
        let before = a.to_km(Frame::Fixed).eigenvalues();
        let after = a.rotate(&q).to_km(Frame::Fixed).eigenvalues();
        let scale = 1.0 + a.frob_norm();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
        }
    }

    /// Convex combinations of moment tensors stay inside the candidate set.
    #[test]
    fn candidate_set_is_convex(
        p in unit_vector(),
        q in unit_vector(),
        r in unit_vector(),
        t in 0.0f64..1.0,
    ) {
        let a = Sym4::outer4(&p).scale(0.5).add(&Sym4::outer4(&q).scale(0.5));
        let b = Sym4::outer4(&r);
        let mix = a.scale(t).add(&b.scale(1.0 - t));
        prop_assert!(fotex::fot::check_candidate(&mix, 1e-10).is_candidate);
    }
}
