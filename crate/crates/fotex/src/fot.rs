//! Orientation tensors of discrete fiber measures and candidate-set
//! membership.
//!
//! A fourth-order tensor is a reasonable candidate for an orientation tensor
//! precisely if it is completely symmetric, positive semidefinite as an
//! operator on symmetric second-order tensors, and has unit double trace —
//! equivalently, its Kelvin-Mandel eigenvalues are nonnegative and sum to
//! one. In three dimensions this candidate set coincides with the set of
//! realizable orientation tensors, which `realize` verifies constructively.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sdp;
use crate::sphere::fibonacci_sphere;
use crate::tensor::{Direction, Frame, Km66, Sym2, Sym4};

/// Default tolerance for candidate checks; solver outputs carry residuals
/// around 1e-8, so membership decisions use a slightly looser gate.
pub const DEFAULT_CANDIDATE_TOL: f64 = 1e-9;

/// One weighted direction of a discrete orientation measure.
#[derive(Clone, Copy, Debug)]
pub struct FiberAtom {
    pub weight: f64,
    pub direction: Direction,
}

/// Finite list of (weight, unit direction) pairs. Weights are nonnegative;
/// the normalized form has weights summing to one within 1e-12.
#[derive(Clone, Debug)]
pub struct FiberMeasure {
    atoms: Vec<FiberAtom>,
}

impl FiberMeasure {
    pub fn new(atoms: Vec<FiberAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        for (index, atom) in atoms.iter().enumerate() {
            if atom.weight < 0.0 {
                return Err(Error::NegativeWeight {
                    index,
                    weight: atom.weight,
                });
            }
        }
        Ok(FiberMeasure { atoms })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, Direction)>) -> Result<Self> {
        FiberMeasure::new(
            pairs
                .into_iter()
                .map(|(weight, direction)| FiberAtom { weight, direction })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[FiberAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Always false: construction rejects empty atom lists.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.weight_sum() - 1.0).abs() <= tol
    }

    /// Rescales the weights to sum to one.
    pub fn normalized(mut self) -> Result<Self> {
        let s = self.weight_sum();
        if s <= 0.0 {
            return Err(Error::EmptyMeasure);
        }
        for atom in &mut self.atoms {
            atom.weight /= s;
        }
        Ok(self)
    }

    /// Second moment sum w_i p_i (x) p_i.
    pub fn moment2(&self) -> Sym2 {
        let mut s = Sym2::zero();
        for atom in &self.atoms {
            s = s.add(&Sym2::outer(atom.direction.vector()).scale(atom.weight));
        }
        s
    }

    /// Fourth moment sum w_i p_i^(x)4.
    pub fn moment4(&self) -> Sym4 {
        let mut a = Sym4::zero();
        for atom in &self.atoms {
            a.axpy(atom.weight, &Sym4::outer4(atom.direction.vector()));
        }
        a
    }
}

/// Second-order orientation tensor: unit trace and eigenvalues >= -1e-12.
#[derive(Clone, Copy, Debug)]
pub struct Fot2 {
    tensor: Sym2,
}

impl Fot2 {
    pub fn new(tensor: Sym2) -> Result<Self> {
        let trace = tensor.trace();
        if (trace - 1.0).abs() > 1e-12 {
            return Err(Error::NotCandidate {
                trace,
                min_eigenvalue: tensor.eigenvalues()[2],
                symmetry_residual: 0.0,
                tol: 1e-12,
            });
        }
        let evs = tensor.eigenvalues();
        if evs[2] < -1e-12 {
            return Err(Error::NotCandidate {
                trace,
                min_eigenvalue: evs[2],
                symmetry_residual: 0.0,
                tol: 1e-12,
            });
        }
        Ok(Fot2 { tensor })
    }

    pub fn tensor(&self) -> &Sym2 {
        &self.tensor
    }

    /// Eigenvalues in the common ordering lambda1 >= lambda2 >= lambda3.
    pub fn ordered_eigenvalues(&self) -> [f64; 3] {
        self.tensor.eigenvalues()
    }
}

/// Outcome of a candidate-set membership test.
#[derive(Clone, Debug, Serialize)]
pub struct CandidateReport {
    /// Worst violation of the Kelvin-Mandel redundancy relations (zero for
    /// tensors built from 15 coefficients).
    pub symmetry_residual: f64,
    /// Kelvin-Mandel eigenvalues, descending; values in (-tol, 0) are
    /// clamped to zero and flagged.
    pub km_eigenvalues: [f64; 6],
    /// Smallest eigenvalue before clamping.
    pub min_eigenvalue_raw: f64,
    pub eigenvalues_clamped: bool,
    pub trace: f64,
    pub tol: f64,
    pub is_candidate: bool,
}

fn report_from_km(km: &Km66, symmetry_residual: f64, tol: f64) -> CandidateReport {
    let mut km_eigenvalues = km.eigenvalues();
    let min_eigenvalue_raw = km_eigenvalues[5];
    let trace = km.trace();
    let mut eigenvalues_clamped = false;
    for v in km_eigenvalues.iter_mut() {
        if *v < 0.0 && *v >= -tol {
            *v = 0.0;
            eigenvalues_clamped = true;
        }
    }
    let is_candidate = symmetry_residual <= tol
        && min_eigenvalue_raw >= -tol
        && (trace - 1.0).abs() <= tol;
    CandidateReport {
        symmetry_residual,
        km_eigenvalues,
        min_eigenvalue_raw,
        eigenvalues_clamped,
        trace,
        tol,
        is_candidate,
    }
}

/// Candidate test for a completely symmetric tensor (symmetry residual is
/// identically zero).
pub fn check_candidate(a: &Sym4, tol: f64) -> CandidateReport {
    report_from_km(&a.to_km(Frame::Fixed), 0.0, tol)
}

/// Candidate test for a raw Kelvin-Mandel matrix; the redundancy violations
/// contribute to the symmetry residual.
pub fn check_candidate_km(km: &Km66, tol: f64) -> CandidateReport {
    report_from_km(km, km.redundancy_residual(), tol)
}

/// Shorthand for an error when a report rejects.
pub fn require_candidate(a: &Sym4, tol: f64) -> Result<CandidateReport> {
    let report = check_candidate(a, tol);
    if report.is_candidate {
        Ok(report)
    } else {
        Err(Error::NotCandidate {
            trace: report.trace,
            min_eigenvalue: report.min_eigenvalue_raw,
            symmetry_residual: report.symmetry_residual,
            tol,
        })
    }
}

/// Worst residual per defining property of orientation tensors built from a
/// normalized measure: complete symmetry (as Kelvin-Mandel redundancies),
/// pointwise nonnegativity of the quartic form on a direction grid,
/// contraction consistency A4 : Id = A2, and normalization of weights and
/// trace.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub complete_symmetry: f64,
    pub one_fold_positivity: f64,
    pub contraction_consistency: f64,
    pub normalization: f64,
    pub grid_size: usize,
}

impl PropertyReport {
    pub fn worst(&self) -> f64 {
        self.complete_symmetry
            .max(self.one_fold_positivity)
            .max(self.contraction_consistency)
            .max(self.normalization)
    }
}

/// Default audit grid for the pointwise positivity check.
pub const DEFAULT_POSITIVITY_GRID: usize = 1000;

pub fn check_properties(m: &FiberMeasure, grid_size: usize) -> PropertyReport {
    let a2 = m.moment2();
    let a4 = m.moment4();
    let km = a4.to_km(Frame::Fixed);
    let complete_symmetry = km.redundancy_residual();

    let mut min_val = f64::INFINITY;
    for q in fibonacci_sphere(grid_size) {
        min_val = min_val.min(a4.quartic_eval(q.vector()));
    }
    let one_fold_positivity = (-min_val).max(0.0);

    let contraction_consistency = a4.contract_id().sub(&a2).frob_norm();
    let normalization = (m.weight_sum() - 1.0)
        .abs()
        .max((km.trace() - 1.0).abs());

    PropertyReport {
        complete_symmetry,
        one_fold_positivity,
        contraction_consistency,
        normalization,
        grid_size,
    }
}

/// Extreme point of the candidate set: the maximizer of a random linear
/// objective over complete symmetry + unit trace + PSD. Deterministic for a
/// fixed seed; the result passes [`check_candidate`] at 1e-8.
pub fn sample_extreme_candidate(seed: u64) -> Result<Sym4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objective = Km66::zero(Frame::Fixed);
    for i in 0..6 {
        for j in i..6 {
            objective.set_sym(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    let problem = sdp::SdpProblem::new(
        objective,
        sdp::build_constraints(&sdp::ConstraintSpec::candidate_set()),
    );
    let sol = sdp::solve(&problem, &sdp::SolverOptions::default());
    if !sol.is_optimal() {
        return Err(Error::Solver {
            status: sol.status,
            iterations: sol.iterations,
        });
    }
    let a = Sym4::from_km(&sol.x, 1e-6)?;
    require_candidate(&a, 1e-8)?;
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::iso4;
    use crate::sphere::icosahedron_directions;
    use crate::tensor::Vec3;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    fn random_measure(seed: &mut u64, n: usize) -> FiberMeasure {
        let pairs: Vec<(f64, Direction)> = (0..n)
            .map(|_| {
                let d = Direction::from_vector(Vec3::new(
                    lcg(seed),
                    lcg(seed),
                    lcg(seed),
                ))
                .unwrap();
                (lcg(seed) + 0.6, d)
            })
            .collect();
        FiberMeasure::from_pairs(pairs)
            .unwrap()
            .normalized()
            .unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(matches!(
            FiberMeasure::new(vec![]),
            Err(Error::EmptyMeasure)
        ));
        assert!(matches!(
            FiberMeasure::from_pairs([(-0.1, Direction::e1())]),
            Err(Error::NegativeWeight { index: 0, .. })
        ));
    }

    #[test]
    fn single_atom_moments() {
        let m = FiberMeasure::from_pairs([(1.0, Direction::e1())]).unwrap();
        assert_eq!(m.moment4(), Sym4::outer4(&Vec3::new(1.0, 0.0, 0.0)));
        let m3 = FiberMeasure::from_pairs([(1.0, Direction::e3())]).unwrap();
        assert_eq!(m3.moment4().contract_id(), Sym2::outer(&Vec3::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn two_atom_moment_has_no_coupling() {
        let m =
            FiberMeasure::from_pairs([(0.5, Direction::e1()), (0.5, Direction::e2())]).unwrap();
        let a = m.moment4();
        assert_eq!(a.coeff(0, 0, 0, 0), 0.5);
        assert_eq!(a.coeff(1, 1, 1, 1), 0.5);
        assert_eq!(a.coeff(0, 0, 1, 1), 0.0);
        assert_eq!(a.coeff(2, 2, 2, 2), 0.0);
    }

    #[test]
    fn icosahedron_measure_is_isotropic() {
        let m = FiberMeasure::from_pairs(
            icosahedron_directions().map(|d| (1.0 / 6.0, d)),
        )
        .unwrap();
        let a = m.moment4();
        assert!(a.sub(&iso4()).frob_norm() < 1e-12);
        let report = check_properties(&m, 500);
        assert!(report.worst() < 1e-12);
    }

    #[test]
    fn fibonacci_moment_converges_to_isotropy() {
        let dirs = fibonacci_sphere(2000);
        let w = 1.0 / dirs.len() as f64;
        let m = FiberMeasure::from_pairs(dirs.into_iter().map(|d| (w, d))).unwrap();
        let err = m.moment4().sub(&iso4()).frob_norm();
        assert!(err <= 1e-3, "quadrature error {err:e}");
    }

    #[test]
    fn moment_trace_and_contraction_identities() {
        let mut seed = 3u64;
        for _ in 0..20 {
            let m = random_measure(&mut seed, 10);
            let a4 = m.moment4();
            let a2 = m.moment2();
            assert!((a2.trace() - 1.0).abs() < 1e-12);
            assert!(a4.contract_id().sub(&a2).frob_norm() < 1e-13);
            let report = check_properties(&m, 200);
            assert!(report.worst() < 1e-12, "worst {:e}", report.worst());
        }
    }

    #[test]
    fn sign_flip_leaves_moments_unchanged() {
        let mut seed = 5u64;
        let m = random_measure(&mut seed, 8);
        let flipped = FiberMeasure::from_pairs(
            m.atoms()
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let d = if i % 2 == 0 { a.direction.flipped() } else { a.direction };
                    (a.weight, d)
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(m.moment4(), flipped.moment4());
        assert_eq!(m.moment2(), flipped.moment2());
    }

    #[test]
    fn candidate_reports() {
        let report = check_candidate(&iso4(), DEFAULT_CANDIDATE_TOL);
        assert!(report.is_candidate);
        assert!((report.trace - 1.0).abs() < 1e-14);
        assert!((report.km_eigenvalues[0] - 1.0 / 3.0).abs() < 1e-12);
        for v in &report.km_eigenvalues[1..] {
            assert!((v - 2.0 / 15.0).abs() < 1e-12);
        }

        let e1 = Sym4::outer4(&Vec3::new(1.0, 0.0, 0.0));
        let report = check_candidate(&e1, DEFAULT_CANDIDATE_TOL);
        assert!(report.is_candidate);
        assert!((report.km_eigenvalues[0] - 1.0).abs() < 1e-13);

        // Scaled tensor fails on the trace.
        let report = check_candidate(&iso4().scale(1.1), DEFAULT_CANDIDATE_TOL);
        assert!(!report.is_candidate);
        assert!((report.trace - 1.1).abs() < 1e-12);
    }

    #[test]
    fn km_input_contributes_symmetry_residual() {
        let mut km = iso4().to_km(Frame::Fixed);
        km.set_sym(3, 3, km.get(3, 3) + 1e-3);
        let report = check_candidate_km(&km, 1e-6);
        assert!(!report.is_candidate);
        assert!((report.symmetry_residual - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn convex_combinations_of_candidates_stay_candidates() {
        let mut seed = 11u64;
        for _ in 0..100 {
            let a = random_measure(&mut seed, 5).moment4();
            let b = random_measure(&mut seed, 5).moment4();
            let t = lcg(&mut seed) + 0.5;
            let mix = a.scale(t).add(&b.scale(1.0 - t));
            assert!(check_candidate(&mix, 1e-10).is_candidate);
        }
    }

    #[test]
    fn candidates_have_nonnegative_quartics() {
        let mut seed = 13u64;
        let grid = fibonacci_sphere(1000);
        for _ in 0..10 {
            let a = random_measure(&mut seed, 6).moment4();
            assert!(check_candidate(&a, 1e-10).is_candidate);
            for q in &grid {
                assert!(a.quartic_eval(q.vector()) >= -1e-10);
            }
        }
    }

    #[test]
    fn monomial_objective_reaches_the_corner() {
        // Maximizing <KM(e1^4), X> over the candidate set must reach the
        // unidirectional state with A1111 at its constrained maximum of 1.
        let e1 = Sym4::outer4(&Vec3::new(1.0, 0.0, 0.0));
        let problem = crate::sdp::SdpProblem::new(
            e1.to_km(Frame::Fixed),
            crate::sdp::build_constraints(&crate::sdp::ConstraintSpec::candidate_set()),
        );
        let sol = crate::sdp::solve(&problem, &crate::sdp::SolverOptions::default());
        assert!(sol.is_optimal());
        let a = Sym4::from_km(&sol.x, 1e-6).unwrap();
        assert!((a.coeff(0, 0, 0, 0) - 1.0).abs() < 1e-6);
        assert!(check_candidate(&a, 1e-7).is_candidate);
    }

    #[test]
    fn fot2_validation() {
        assert!(Fot2::new(Sym2::from_diag([0.5, 0.3, 0.2])).is_ok());
        assert!(Fot2::new(Sym2::from_diag([0.5, 0.3, 0.1])).is_err());
        assert!(Fot2::new(Sym2::from_diag([1.2, 0.0, -0.2])).is_err());
    }
}
