//! Linear semidefinite programs over 6x6 Kelvin-Mandel matrices: problem
//! types, the constraint builder for the extremal-information problems, the
//! extremization driver, and direction sweeps.

mod solver;

pub mod reference;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::param::{check_ordering, SymmetryClass};
use crate::tensor::{Direction, Frame, Km66, Sym2, Sym4};

pub(crate) use solver::{solve_raw, RawOptions, RawProblem, RawStatus};

/// One equality constraint on the Kelvin-Mandel matrix, written in
/// upper-triangular counting: sum over xi <= zeta of G_[xi zeta] X_[xi zeta]
/// equals the right-hand side. With this reading the complete-symmetry row
/// "G44 = 1, G23 = -2" encodes X44 = 2 X23.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    coeffs: Vec<((usize, usize), f64)>,
    rhs: f64,
}

impl LinearConstraint {
    /// Entries are (row, col, coefficient) with zero-based row <= col < 6.
    pub fn new(entries: &[(usize, usize, f64)], rhs: f64) -> Self {
        let mut coeffs: Vec<((usize, usize), f64)> = Vec::with_capacity(entries.len());
        for &(i, j, v) in entries {
            assert!(i <= j && j < 6, "constraint index ({i}, {j}) out of range");
            if let Some(slot) = coeffs.iter_mut().find(|(k, _)| *k == (i, j)) {
                slot.1 += v;
            } else {
                coeffs.push(((i, j), v));
            }
        }
        coeffs.sort_by_key(|&((i, j), _)| (i, j));
        LinearConstraint { coeffs, rhs }
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn coeffs(&self) -> &[((usize, usize), f64)] {
        &self.coeffs
    }

    /// Evaluates the functional on a matrix.
    pub fn eval(&self, x: &Km66) -> f64 {
        self.coeffs
            .iter()
            .map(|&((i, j), v)| v * x.get(i, j))
            .sum()
    }

    /// Symmetric matrix G with <G, X>_F equal to the functional: halved
    /// off-diagonal coefficients.
    pub(crate) fn to_sym_mat(&self) -> Mat {
        let mut g = Mat::zeros(6, 6);
        for &((i, j), v) in &self.coeffs {
            if i == j {
                g[(i, i)] += v;
            } else {
                g[(i, j)] += 0.5 * v;
                g[(j, i)] += 0.5 * v;
            }
        }
        g
    }
}

/// Linear SDP: maximize <C, X> over PSD Kelvin-Mandel matrices subject to
/// equality constraints.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub objective: Km66,
    pub constraints: Vec<LinearConstraint>,
}

impl SdpProblem {
    /// Exact duplicate constraints are removed up front (with a log entry);
    /// linearly dependent rows are handled later by the solver's
    /// rank-revealing preprocessing.
    pub fn new(objective: Km66, constraints: Vec<LinearConstraint>) -> Self {
        let mut unique: Vec<LinearConstraint> = Vec::with_capacity(constraints.len());
        for c in constraints {
            if unique.contains(&c) {
                log::warn!("removing exactly duplicated constraint row");
            } else {
                unique.push(c);
            }
        }
        SdpProblem {
            objective,
            constraints: unique,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// KKT residuals of a returned solution.
#[derive(Clone, Copy, Debug)]
pub struct KktResiduals {
    /// Relative primal feasibility ||b - A(X)|| / (1 + ||b||).
    pub primal: f64,
    /// Relative dual feasibility ||sum y_k G_k - C - Z|| / (1 + ||C||).
    pub dual: f64,
    /// Relative duality gap.
    pub gap: f64,
    /// Complementarity <X, Z>.
    pub complementarity: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Km66,
    pub objective_value: f64,
    /// Dual multiplier per constraint, in the problem's constraint order;
    /// the dual slack Z = sum_k y_k G_k - C is PSD at optimality.
    pub dual_y: Vec<f64>,
    pub status: SdpStatus,
    pub residuals: KktResiduals,
    pub iterations: usize,
}

impl SdpSolution {
    /// Dual slack matrix reconstructed from the multipliers.
    pub fn dual_slack(&self, p: &SdpProblem) -> Km66 {
        let mut z = Mat::zeros(6, 6);
        for (c, &yk) in p.constraints.iter().zip(&self.dual_y) {
            z = z.add(&c.to_sym_mat().scale(yk));
        }
        z = z.sub(&p.objective.to_mat());
        Km66::from_mat(&z, self.x.frame())
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Primal and dual feasibility tolerance (relative).
    pub tol_feas: f64,
    /// Duality-gap tolerance (relative).
    pub tol_gap: f64,
    /// Eigenvalue slack allowed when validating returned matrices.
    pub psd_slack: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_feas: 1e-9,
            tol_gap: 1e-8,
            psd_slack: 1e-10,
            max_iter: 200,
        }
    }
}

/// Solves the maximization problem. The returned solution always carries a
/// status; callers that need a hard error can check [`SdpSolution::is_optimal`].
///
/// The reported residuals are recomputed from the returned primal/dual pair
/// alone: the dual slack is reconstructed from the multipliers and its PSD
/// defect, the equality defects, the duality gap and the complementarity
/// <X, Z> form the KKT certificate checked on every solve.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> SdpSolution {
    let frame = p.objective.frame();
    // Internal form minimizes, so flip the objective sign.
    let c = p.objective.to_mat().scale(-1.0);
    let a: Vec<Mat> = p.constraints.iter().map(|c| c.to_sym_mat()).collect();
    let b: Vec<f64> = p.constraints.iter().map(|c| c.rhs()).collect();
    let raw = solve_raw(
        &RawProblem { n: 6, c: &c, a: &a, b: &b },
        &RawOptions {
            tol_feas: opts.tol_feas,
            tol_gap: opts.tol_gap,
            max_iter: opts.max_iter,
            classify_infeasibility: true,
        },
    );
    let status = match raw.status {
        RawStatus::Optimal => SdpStatus::Optimal,
        RawStatus::Infeasible => SdpStatus::Infeasible,
        RawStatus::NumericalFailure => SdpStatus::NumericalFailure,
    };
    let mut sol = SdpSolution {
        x: Km66::from_mat(&raw.x, frame),
        objective_value: -raw.objective,
        // Internal dual of the minimization differs by a sign.
        dual_y: raw.y.iter().map(|v| -v).collect(),
        status,
        residuals: KktResiduals {
            primal: raw.rel_primal,
            dual: raw.rel_dual,
            gap: raw.rel_gap,
            complementarity: raw.complementarity,
        },
        iterations: raw.iterations,
    };
    if status == SdpStatus::Optimal {
        sol.residuals = kkt_residuals(p, &sol);
        let r = &sol.residuals;
        if r.primal > 10.0 * opts.tol_feas
            || r.dual > 10.0 * opts.tol_feas
            || r.gap > 10.0 * opts.tol_gap
        {
            log::warn!(
                "KKT certificate weaker than requested: primal {:.2e}, dual {:.2e}, gap {:.2e}",
                r.primal,
                r.dual,
                r.gap
            );
        }
    }
    sol
}

/// Recomputes the KKT certificate of a primal/dual pair from scratch.
pub fn kkt_residuals(p: &SdpProblem, sol: &SdpSolution) -> KktResiduals {
    let bnorm = 1.0
        + p.constraints
            .iter()
            .map(|c| c.rhs() * c.rhs())
            .sum::<f64>()
            .sqrt();
    let primal = p
        .constraints
        .iter()
        .map(|c| (c.eval(&sol.x) - c.rhs()).powi(2))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    let z = sol.dual_slack(p);
    let dual = (-z.eigenvalues()[5]).max(0.0) / (1.0 + p.objective.frob_norm());
    let pobj = sol.objective_value;
    let dobj: f64 = p
        .constraints
        .iter()
        .zip(&sol.dual_y)
        .map(|(c, y)| c.rhs() * y)
        .sum();
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
    let complementarity = sol.x.to_mat().dot(&z.to_mat()).abs();
    KktResiduals {
        primal,
        dual,
        gap,
        complementarity,
    }
}

/// Which constraint blocks to include, mirroring the rows of the
/// extremal-information problem.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstraintSpec {
    /// The six Kelvin-Mandel redundancy rows.
    pub complete_symmetry: bool,
    /// Vanishing off-diagonal second-order contraction (tensor expressed in
    /// the eigensystem of its double trace).
    pub eigensystem: bool,
    /// Unit trace.
    pub normalization: bool,
    /// Prescribed largest two eigenvalues of the double trace.
    pub eigenvalues: Option<(f64, f64)>,
    /// Orthotropic material symmetry (relies on the eigensystem rows to pin
    /// the remaining odd couplings).
    pub orthotropy: bool,
}

impl ConstraintSpec {
    /// Constraint set of the extremal problem for fixed second-order
    /// information.
    pub fn extremal(lambda1: f64, lambda2: f64, symmetry: SymmetryClass) -> Self {
        ConstraintSpec {
            complete_symmetry: true,
            eigensystem: true,
            normalization: true,
            eigenvalues: Some((lambda1, lambda2)),
            orthotropy: symmetry == SymmetryClass::Orthotropic,
        }
    }

    /// Constraint set describing the whole candidate set (complete symmetry
    /// and unit trace only).
    pub fn candidate_set() -> Self {
        ConstraintSpec {
            complete_symmetry: true,
            normalization: true,
            ..Default::default()
        }
    }
}

/// Builds the constraint rows in upper-triangular counting.
pub fn build_constraints(spec: &ConstraintSpec) -> Vec<LinearConstraint> {
    let s2 = std::f64::consts::SQRT_2;
    let mut rows = Vec::new();
    if spec.complete_symmetry {
        rows.push(LinearConstraint::new(&[(3, 3, 1.0), (1, 2, -2.0)], 0.0));
        rows.push(LinearConstraint::new(&[(4, 4, 1.0), (0, 2, -2.0)], 0.0));
        rows.push(LinearConstraint::new(&[(5, 5, 1.0), (0, 1, -2.0)], 0.0));
        rows.push(LinearConstraint::new(&[(3, 4, 1.0), (2, 5, -s2)], 0.0));
        rows.push(LinearConstraint::new(&[(3, 5, 1.0), (1, 4, -s2)], 0.0));
        rows.push(LinearConstraint::new(&[(4, 5, 1.0), (0, 3, -s2)], 0.0));
    }
    if spec.eigensystem {
        for col in 3..6 {
            rows.push(LinearConstraint::new(
                &[(0, col, 1.0), (1, col, 1.0), (2, col, 1.0)],
                0.0,
            ));
        }
    }
    if spec.normalization {
        rows.push(LinearConstraint::new(
            &[
                (0, 0, 1.0),
                (1, 1, 1.0),
                (2, 2, 1.0),
                (3, 3, 1.0),
                (4, 4, 1.0),
                (5, 5, 1.0),
            ],
            1.0,
        ));
    }
    if let Some((l1, l2)) = spec.eigenvalues {
        rows.push(LinearConstraint::new(
            &[(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0)],
            l1,
        ));
        rows.push(LinearConstraint::new(
            &[(0, 1, 1.0), (1, 1, 1.0), (1, 2, 1.0)],
            l2,
        ));
    }
    if spec.orthotropy {
        for (i, j) in [(1, 3), (2, 3), (0, 4), (2, 4), (0, 5), (1, 5)] {
            rows.push(LinearConstraint::new(&[(i, j, 1.0)], 0.0));
        }
    }
    rows
}

/// Objective matrix <KM(n (x) n) KM(n (x) n)^T> whose Frobenius pairing with
/// KM(A) is the quartic n^(x)4 :: A.
pub fn direction_objective(n: &Direction, frame: Frame) -> Km66 {
    let m = Sym2::outer(n.vector()).km_vec();
    let mut km = Km66::zero(frame);
    for i in 0..6 {
        for j in i..6 {
            km.set_sym(i, j, m[i] * m[j]);
        }
    }
    km
}

/// Maximal quartic projection onto `n` over all candidates with prescribed
/// second-order information, optionally restricted to orthotropic tensors.
/// Returns the optimal value and the maximizing tensor (eigensystem frame).
pub fn extremize(
    lambda1: f64,
    lambda2: f64,
    n: &Direction,
    symmetry: SymmetryClass,
) -> Result<(f64, Sym4)> {
    extremize_with_options(lambda1, lambda2, n, symmetry, &SolverOptions::default())
}

pub fn extremize_with_options(
    lambda1: f64,
    lambda2: f64,
    n: &Direction,
    symmetry: SymmetryClass,
    opts: &SolverOptions,
) -> Result<(f64, Sym4)> {
    extremize_impl(lambda1, lambda2, n, symmetry, opts).map(|(v, a, _)| (v, a))
}

fn extremize_impl(
    lambda1: f64,
    lambda2: f64,
    n: &Direction,
    symmetry: SymmetryClass,
    opts: &SolverOptions,
) -> Result<(f64, Sym4, usize)> {
    check_ordering(lambda1, lambda2)?;
    let lambda3 = 1.0 - lambda1 - lambda2;

    if lambda2 <= 1e-12 {
        // lambda2 = lambda3 = 0: the feasible set is the single tensor
        // v1^(x)4 (the second-order rows plus the PSD diagonal force every
        // other entry to vanish), for either symmetry class.
        let a = Sym4::outer4(&crate::tensor::Vec3::new(1.0, 0.0, 0.0));
        return Ok((a.quartic_eval(n.vector()), a, 0));
    }
    if lambda3 <= 1e-12 {
        return extremize_planar(lambda1, lambda2, n, symmetry, opts);
    }

    let spec = ConstraintSpec::extremal(lambda1, lambda2, symmetry);
    let problem = SdpProblem::new(
        direction_objective(n, Frame::Eigen),
        build_constraints(&spec),
    );
    let sol = solve(&problem, opts);
    if !sol.is_optimal() {
        return Err(Error::Solver {
            status: sol.status,
            iterations: sol.iterations,
        });
    }
    let a = Sym4::from_km(&sol.x, 1e-6)?;
    Ok((sol.objective_value, a, sol.iterations))
}

/// Planar case lambda3 = 0: every feasible matrix is supported on the
/// {B1, B2, B6} face (zero third diagonal plus the redundancy rows force the
/// remaining rows to vanish), so the program is solved on that 3x3 face
/// where an interior exists. The constraints are the same rows mapped onto
/// the face; the result is reassembled as a full tensor.
fn extremize_planar(
    lambda1: f64,
    lambda2: f64,
    n: &Direction,
    symmetry: SymmetryClass,
    opts: &SolverOptions,
) -> Result<(f64, Sym4, usize)> {
    let mvec = Sym2::outer(n.vector()).km_vec();
    let mface = [mvec[0], mvec[1], mvec[5]];
    let mut c = Mat::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            c[(i, j)] = -mface[i] * mface[j];
        }
    }
    let mut rows: Vec<Mat> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let push = |rows: &mut Vec<Mat>, rhs: &mut Vec<f64>, entries: &[(usize, usize, f64)], r: f64| {
        let mut g = Mat::zeros(3, 3);
        for &(i, j, v) in entries {
            if i == j {
                g[(i, i)] += v;
            } else {
                g[(i, j)] += 0.5 * v;
                g[(j, i)] += 0.5 * v;
            }
        }
        rows.push(g);
        rhs.push(r);
    };
    // Complete symmetry on the face: Y33 = 2 Y12.
    push(&mut rows, &mut rhs, &[(2, 2, 1.0), (0, 1, -2.0)], 0.0);
    // Normalization.
    push(&mut rows, &mut rhs, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)], 1.0);
    // Second-order rows (X13 and X23 vanish on the face).
    push(&mut rows, &mut rhs, &[(0, 0, 1.0), (0, 1, 1.0)], lambda1);
    push(&mut rows, &mut rhs, &[(0, 1, 1.0), (1, 1, 1.0)], lambda2);
    // Eigensystem row X16 + X26 + X36 = 0 restricted to the face.
    push(&mut rows, &mut rhs, &[(0, 2, 1.0), (1, 2, 1.0)], 0.0);
    if symmetry == SymmetryClass::Orthotropic {
        push(&mut rows, &mut rhs, &[(0, 2, 1.0)], 0.0);
        push(&mut rows, &mut rhs, &[(1, 2, 1.0)], 0.0);
    }
    let raw = solve_raw(
        &RawProblem { n: 3, c: &c, a: &rows, b: &rhs },
        &RawOptions {
            tol_feas: opts.tol_feas,
            tol_gap: opts.tol_gap,
            max_iter: opts.max_iter,
            classify_infeasibility: true,
        },
    );
    if raw.status != RawStatus::Optimal {
        return Err(Error::Solver {
            status: match raw.status {
                RawStatus::Infeasible => SdpStatus::Infeasible,
                _ => SdpStatus::NumericalFailure,
            },
            iterations: raw.iterations,
        });
    }
    let mut km = Km66::zero(Frame::Eigen);
    km.set_sym(0, 0, raw.x[(0, 0)]);
    km.set_sym(1, 1, raw.x[(1, 1)]);
    km.set_sym(0, 1, raw.x[(0, 1)]);
    km.set_sym(0, 5, raw.x[(0, 2)]);
    km.set_sym(1, 5, raw.x[(1, 2)]);
    km.set_sym(5, 5, raw.x[(2, 2)]);
    let a4 = Sym4::from_km(&km, 1e-6)?;
    Ok((-raw.objective, a4, raw.iterations))
}

/// Grid for a sweep: one-eighth sphere or the in-plane circle quadrant.
#[derive(Clone, Copy, Debug)]
pub enum SweepGrid {
    /// phi and theta both span [0, 90] degrees with the given node counts.
    ThreeD { n_phi: usize, n_theta: usize },
    /// In-plane directions (theta = 90 degrees), phi spans [0, 90].
    Planar { n_phi: usize },
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid::ThreeD { n_phi: 31, n_theta: 31 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepNode {
    pub phi_deg: f64,
    pub theta_deg: f64,
    /// NaN when the node's solve failed.
    pub value_triclinic: f64,
    pub value_orthotropic: f64,
}

impl SweepNode {
    pub fn failed(&self) -> bool {
        !self.value_triclinic.is_finite() || !self.value_orthotropic.is_finite()
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub lambda1: f64,
    pub lambda2: f64,
    pub grid: SweepGrid,
    pub nodes: Vec<SweepNode>,
    pub tol_feas: f64,
    pub tol_gap: f64,
    /// Interior-point iterations summed over all node solves.
    pub total_iterations: usize,
    pub failures: usize,
}

impl SweepResult {
    /// Planar quadrant values mirrored over the full circle
    /// (phi, 180 - phi, 180 + phi, 360 - phi share one value by the
    /// orthotropic symmetry of the feasible set in the eigensystem frame).
    pub fn mirrored_planar(&self) -> Vec<SweepNode> {
        let mut out: Vec<SweepNode> = Vec::new();
        let mut push_unique = |node: SweepNode| {
            if !out
                .iter()
                .any(|n| (n.phi_deg - node.phi_deg).abs() < 1e-9)
            {
                out.push(node);
            }
        };
        for node in &self.nodes {
            for phi in [
                node.phi_deg,
                180.0 - node.phi_deg,
                180.0 + node.phi_deg,
                360.0 - node.phi_deg,
            ] {
                let phi = if (phi - 360.0).abs() < 1e-9 { 0.0 } else { phi };
                push_unique(SweepNode { phi_deg: phi, ..*node });
            }
        }
        out.sort_by(|a, b| a.phi_deg.partial_cmp(&b.phi_deg).unwrap());
        out
    }
}

/// One extremize solve per grid node per symmetry class. Nodes run
/// concurrently on the global rayon pool; per-node failures are recorded as
/// NaN and the sweep continues.
pub fn sweep(lambda1: f64, lambda2: f64, grid: SweepGrid) -> Result<SweepResult> {
    sweep_with_options(lambda1, lambda2, grid, &SolverOptions::default())
}

pub fn sweep_with_options(
    lambda1: f64,
    lambda2: f64,
    grid: SweepGrid,
    opts: &SolverOptions,
) -> Result<SweepResult> {
    use rayon::prelude::*;

    check_ordering(lambda1, lambda2)?;
    let angles: Vec<(f64, f64)> = match grid {
        SweepGrid::ThreeD { n_phi, n_theta } => {
            assert!(n_phi >= 2 && n_theta >= 2);
            let mut v = Vec::with_capacity(n_phi * n_theta);
            // Row-major: theta outer, phi inner.
            for ti in 0..n_theta {
                let theta = 90.0 * ti as f64 / (n_theta - 1) as f64;
                for pi in 0..n_phi {
                    let phi = 90.0 * pi as f64 / (n_phi - 1) as f64;
                    v.push((phi, theta));
                }
            }
            v
        }
        SweepGrid::Planar { n_phi } => {
            assert!(n_phi >= 2);
            (0..n_phi)
                .map(|pi| (90.0 * pi as f64 / (n_phi - 1) as f64, 90.0))
                .collect()
        }
    };

    let outcomes: Vec<(f64, f64, usize, bool)> = angles
        .par_iter()
        .map(|&(phi_deg, theta_deg)| {
            let n = Direction::from_angles(phi_deg.to_radians(), theta_deg.to_radians());
            let mut failed = false;
            let mut iterations = 0;
            let mut values = [f64::NAN; 2];
            for (slot, sym) in [SymmetryClass::Triclinic, SymmetryClass::Orthotropic]
                .into_iter()
                .enumerate()
            {
                match extremize_impl(lambda1, lambda2, &n, sym, opts) {
                    Ok((value, _, iters)) => {
                        values[slot] = value;
                        iterations += iters;
                    }
                    Err(err) => {
                        log::warn!(
                            "sweep node (phi {phi_deg}, theta {theta_deg}, {sym}) failed: {err}"
                        );
                        failed = true;
                    }
                }
            }
            (values[0], values[1], iterations, failed)
        })
        .collect();

    let nodes: Vec<SweepNode> = angles
        .iter()
        .zip(&outcomes)
        .map(|(&(phi_deg, theta_deg), &(vt, vo, _, _))| SweepNode {
            phi_deg,
            theta_deg,
            value_triclinic: vt,
            value_orthotropic: vo,
        })
        .collect();
    let failures = outcomes.iter().filter(|o| o.3).count();
    let total_iterations = outcomes.iter().map(|o| o.2).sum();

    Ok(SweepResult {
        lambda1,
        lambda2,
        grid,
        nodes,
        tol_feas: opts.tol_feas,
        tol_gap: opts.tol_gap,
        total_iterations,
        failures,
    })
}
