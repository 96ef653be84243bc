//! Constructive realizability and the dual-cone machinery.
//!
//! [`realize`] decomposes a candidate tensor into a nonnegative measure with
//! at most 15 atoms: nonnegative least squares over a Fibonacci hemisphere
//! dictionary, alternating direction polish (Riemannian Gauss-Newton on the
//! sphere) with weight re-fits, and a Caratheodory elimination pass down to
//! the dimension of Sym(3, 4).
//!
//! [`sos_certificate`] decides membership of a quartic in the dual cone: a
//! PSD Gram matrix whose complete symmetrization reproduces the target (a
//! sum-of-squares certificate), or a separating candidate tensor with
//! negative pairing as the infeasibility witness.

mod nnls;

pub use nnls::{nnls, NnlsOutcome};

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fot::{require_candidate, FiberMeasure};
use crate::linalg::{self, Mat};
use crate::sdp;
use crate::sphere::{fibonacci_hemisphere, fibonacci_sphere};
use crate::tensor::{Direction, Frame, Km66, Sym2, Sym4, Vec3, MULTIPLICITY, MULTI_INDICES};

/// Weighted coefficient vector of a tensor: Euclidean inner products of
/// these vectors equal full tensor contractions.
pub(crate) fn sym4_to_vec(a: &Sym4) -> [f64; 15] {
    let mut v = [0.0; 15];
    for (slot, (&c, &m)) in a.coeffs().iter().zip(&MULTIPLICITY).enumerate() {
        v[slot] = m.sqrt() * c;
    }
    v
}

/// Weighted moment vector of p^(x)4.
pub(crate) fn moment_vec(p: &Vec3) -> [f64; 15] {
    let mut v = [0.0; 15];
    for (slot, idx) in MULTI_INDICES.iter().enumerate() {
        v[slot] = MULTIPLICITY[slot].sqrt()
            * p.comp(idx[0])
            * p.comp(idx[1])
            * p.comp(idx[2])
            * p.comp(idx[3]);
    }
    v
}

/// Componentwise gradient d moment_vec / d p_a, one 3-vector per slot.
#[allow(clippy::needless_range_loop)]
fn moment_grad(p: &Vec3) -> [[f64; 3]; 15] {
    let mut g = [[0.0; 3]; 15];
    for (slot, idx) in MULTI_INDICES.iter().enumerate() {
        let w = MULTIPLICITY[slot].sqrt();
        for a in 0..3 {
            let count = idx.iter().filter(|&&x| x == a).count();
            if count == 0 {
                continue;
            }
            let mut prod = count as f64;
            let mut dropped = false;
            for &x in idx {
                if x == a && !dropped {
                    dropped = true;
                    continue;
                }
                prod *= p.comp(x);
            }
            g[slot][a] = w * prod;
        }
    }
    g
}

/// Orthonormal tangent basis at p.
fn tangent_basis(p: &Vec3) -> (Vec3, Vec3) {
    let pick = if p.x.abs() <= p.y.abs() && p.x.abs() <= p.z.abs() {
        Vec3::new(1.0, 0.0, 0.0)
    } else if p.y.abs() <= p.z.abs() {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let t1v = pick.sub(&p.scale(pick.dot(p)));
    let t1 = t1v.scale(1.0 / t1v.norm());
    let t2 = p.cross(&t1);
    (t1, t2)
}

/// Result of a constructive decomposition.
#[derive(Clone, Debug)]
pub struct RealizationResult {
    pub measure: FiberMeasure,
    /// Frobenius norm of (sum w_i p_i^(x)4 - A), recomputed from scratch.
    pub residual: f64,
    pub atom_count: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct RealizeOptions {
    /// Dictionary size on the hemisphere.
    pub grid_size: usize,
    /// Rounds of the alternating direction-polish / weight-refit loop.
    pub polish_iters: usize,
    /// Target residual.
    pub tol: f64,
    /// Gate for the candidate precheck of the input.
    pub candidate_tol: f64,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            grid_size: 400,
            polish_iters: 50,
            tol: 1e-8,
            candidate_tol: 1e-9,
        }
    }
}

fn reconstruct(atoms: &[(f64, Direction)]) -> Sym4 {
    let mut a = Sym4::zero();
    for (w, p) in atoms {
        a.axpy(*w, &Sym4::outer4(p.vector()));
    }
    a
}

fn residual_norm(atoms: &[(f64, Direction)], target: &Sym4) -> f64 {
    reconstruct(atoms).sub(target).frob_norm()
}

/// Merges atoms whose directions coincide up to sign and drops vanishing
/// weights.
fn merge_and_prune(atoms: &mut Vec<(f64, Direction)>) {
    let mut merged: Vec<(f64, Direction)> = Vec::with_capacity(atoms.len());
    for &(w, p) in atoms.iter() {
        if w <= 1e-14 {
            continue;
        }
        if let Some(slot) = merged
            .iter_mut()
            .find(|(_, q)| p.dot(q).abs() > 1.0 - 1e-12)
        {
            slot.0 += w;
        } else {
            merged.push((w, p.antipodal_canonical()));
        }
    }
    *atoms = merged;
}

fn refit_weights(atoms: &mut Vec<(f64, Direction)>, target_vec: &[f64; 15]) {
    if atoms.is_empty() {
        return;
    }
    let dict = Mat::from_fn(15, atoms.len(), |i, j| moment_vec(atoms[j].1.vector())[i]);
    let fit = nnls(&dict, target_vec);
    for (slot, w) in atoms.iter_mut().zip(&fit.x) {
        slot.0 = *w;
    }
    atoms.retain(|(w, _)| *w > 1e-14);
}

/// Greedy clustering of atoms whose directions agree to about 1e-7 in the
/// dot product; the polish step routinely parks several dictionary atoms on
/// one true support direction without crossing the exact-duplicate gate.
/// Returns None when there is nothing to merge.
fn cluster_atoms(atoms: &[(f64, Direction)]) -> Option<Vec<(f64, Direction)>> {
    let mut merged: Vec<(f64, Vec3)> = Vec::new();
    for &(w, p) in atoms {
        let pc = p.antipodal_canonical();
        if let Some(slot) = merged.iter_mut().find(|(_, q)| {
            pc.vector().dot(q).abs() / q.norm() > 1.0 - 1e-7
        }) {
            slot.0 += w;
            // Weighted direction average within the cluster.
            slot.1 = slot.1.add(&pc.vector().scale(w));
        } else {
            merged.push((w, pc.vector().scale(w)));
        }
    }
    if merged.len() == atoms.len() {
        return None;
    }
    Some(
        merged
            .into_iter()
            .filter_map(|(w, v)| Direction::from_vector(v).ok().map(|d| (w, d)))
            .collect(),
    )
}

/// One damped Gauss-Newton update, joint over all atom weights and
/// directions (alternating the two blocks converges only linearly, with a
/// rate near one for clustered supports), followed by an NNLS weight refit
/// that restores exact nonnegativity. Returns the new residual if the round
/// improved, or None.
fn polish_round(
    atoms: &mut Vec<(f64, Direction)>,
    target_vec: &[f64; 15],
    target: &Sym4,
    lm_lambda: &mut f64,
) -> Option<f64> {
    let k = atoms.len();
    if k == 0 {
        return None;
    }
    let current = residual_norm(atoms, target);

    // Residual vector and Jacobian; per atom one weight column and two
    // tangent columns.
    let mut r = [0.0f64; 15];
    for (slot, rv) in r.iter_mut().enumerate() {
        *rv = -target_vec[slot];
    }
    for (w, p) in atoms.iter() {
        let phi = moment_vec(p.vector());
        for slot in 0..15 {
            r[slot] += w * phi[slot];
        }
    }
    let mut jac = Mat::zeros(15, 3 * k);
    let mut bases: Vec<(Vec3, Vec3)> = Vec::with_capacity(k);
    for (col, (w, p)) in atoms.iter().enumerate() {
        let phi = moment_vec(p.vector());
        let grad = moment_grad(p.vector());
        let (t1, t2) = tangent_basis(p.vector());
        bases.push((t1, t2));
        for slot in 0..15 {
            let g = Vec3::new(grad[slot][0], grad[slot][1], grad[slot][2]);
            jac[(slot, 3 * col)] = phi[slot];
            jac[(slot, 3 * col + 1)] = w * g.dot(&t1);
            jac[(slot, 3 * col + 2)] = w * g.dot(&t2);
        }
    }
    let jt = jac.transpose();
    let jtj = jt.matmul(&jac);
    let jtr = jt.matvec(&r);

    for _attempt in 0..8 {
        let mut lhs = jtj.clone();
        for i in 0..3 * k {
            lhs[(i, i)] += *lm_lambda * (1.0 + jtj[(i, i)]);
        }
        let Some(l) = linalg::cholesky(&lhs) else {
            *lm_lambda *= 10.0;
            continue;
        };
        let delta = linalg::cholesky_solve(&l, &jtr);
        let mut trial: Vec<(f64, Direction)> = atoms.clone();
        let mut valid = true;
        for (col, slot) in trial.iter_mut().enumerate() {
            let (t1, t2) = bases[col];
            slot.0 = (slot.0 - delta[3 * col]).max(0.0);
            let step = t1
                .scale(-delta[3 * col + 1])
                .add(&t2.scale(-delta[3 * col + 2]));
            match Direction::from_vector(slot.1.vector().add(&step)) {
                Ok(d) => slot.1 = d,
                Err(_) => {
                    valid = false;
                    break;
                }
            }
        }
        if !valid {
            *lm_lambda *= 10.0;
            continue;
        }
        // Weight refit on the moved directions.
        let dict = Mat::from_fn(15, trial.len(), |i, j| moment_vec(trial[j].1.vector())[i]);
        let fit = nnls(&dict, target_vec);
        for (slot, w) in trial.iter_mut().zip(&fit.x) {
            slot.0 = *w;
        }
        merge_and_prune(&mut trial);
        if trial.is_empty() {
            *lm_lambda *= 10.0;
            continue;
        }
        let new_res = residual_norm(&trial, target);
        if new_res < current {
            *atoms = trial;
            *lm_lambda = (*lm_lambda / 3.0).max(1e-12);
            return Some(new_res);
        }
        *lm_lambda *= 10.0;
    }
    None
}

/// Decomposes a candidate tensor into a normalized nonnegative measure with
/// at most 15 atoms. When the first pass stays above half the target
/// residual the fit is retried on denser dictionaries before giving up.
pub fn realize(a: &Sym4, opts: &RealizeOptions) -> Result<RealizationResult> {
    require_candidate(a, opts.candidate_tol)?;
    let mut best: Option<RealizationResult> = None;
    for escalation in 0..3 {
        let attempt_opts = RealizeOptions {
            grid_size: opts.grid_size << escalation,
            ..*opts
        };
        let attempt = realize_once(a, &attempt_opts)?;
        let better = best
            .as_ref()
            .is_none_or(|b| attempt.residual < b.residual);
        if better {
            best = Some(attempt);
        }
        if best.as_ref().unwrap().residual <= 0.5 * opts.tol {
            break;
        }
    }
    let result = best.expect("at least one attempt ran");
    if result.residual <= opts.tol {
        Ok(result)
    } else {
        Err(Error::ToleranceNotReached {
            residual: result.residual,
            tol: opts.tol,
            best: Box::new(result),
        })
    }
}

fn polish_until_stall(
    atoms: &mut Vec<(f64, Direction)>,
    target_vec: &[f64; 15],
    a: &Sym4,
    max_rounds: usize,
) -> f64 {
    let mut lm_lambda = 1e-6;
    let mut last = residual_norm(atoms, a);
    for _round in 0..max_rounds {
        match polish_round(atoms, target_vec, a, &mut lm_lambda) {
            Some(res) => {
                let stalled = last - res < 1e-12;
                last = res;
                if stalled {
                    break;
                }
            }
            None => break,
        }
    }
    last
}

/// Collapses tight angular clusters when doing so does not degrade the fit
/// beyond `floor`; merged sets get their weights refit and a short polish.
fn try_consolidate(
    atoms: &mut Vec<(f64, Direction)>,
    target_vec: &[f64; 15],
    a: &Sym4,
    floor: f64,
) {
    if let Some(mut merged) = cluster_atoms(atoms) {
        refit_weights(&mut merged, target_vec);
        if merged.is_empty() {
            return;
        }
        polish_until_stall(&mut merged, target_vec, a, 10);
        let current = residual_norm(atoms, a);
        let candidate = residual_norm(&merged, a);
        if candidate <= current.max(floor) {
            *atoms = merged;
        }
    }
}

fn realize_once(a: &Sym4, opts: &RealizeOptions) -> Result<RealizationResult> {
    let target_vec = sym4_to_vec(a);

    // Initial fit over the hemisphere dictionary.
    let dict_dirs = fibonacci_hemisphere(opts.grid_size);
    let dict = Mat::from_fn(15, dict_dirs.len(), |i, j| {
        moment_vec(dict_dirs[j].vector())[i]
    });
    let fit = nnls(&dict, &target_vec);
    let mut atoms: Vec<(f64, Direction)> = fit
        .x
        .iter()
        .zip(&dict_dirs)
        .filter(|(&w, _)| w > 1e-14)
        .map(|(&w, &d)| (w, d))
        .collect();
    merge_and_prune(&mut atoms);
    if atoms.is_empty() {
        // Degenerate fit; fall back to a single atom at the strongest axis.
        atoms.push((1.0, Direction::e1()));
    }

    // Alternating refinement of the dictionary fit.
    let mut last = polish_until_stall(&mut atoms, &target_vec, a, opts.polish_iters);

    // Conditional-gradient rounds: whenever the alternating fit stalls above
    // the target, the direction maximizing the residual's quartic form is
    // the steepest feasible new atom (for a realizable target that maximum
    // stays strictly positive until the residual vanishes). Add it, refit
    // the weights, and re-polish.
    let mut best_atoms = atoms.clone();
    let mut best_res = last;
    for _round in 0..40 {
        if best_res <= 0.25 * opts.tol {
            break;
        }
        let residual_tensor = a.sub(&reconstruct(&atoms));
        let (neg_gain, dir) = quartic_min_on_sphere(&residual_tensor.scale(-1.0), 600, true);
        if -neg_gain <= 1e-15 {
            break;
        }
        atoms.push((0.0, dir.antipodal_canonical()));
        refit_weights(&mut atoms, &target_vec);
        if atoms.is_empty() {
            break;
        }
        try_consolidate(&mut atoms, &target_vec, a, 0.05 * opts.tol);
        last = polish_until_stall(&mut atoms, &target_vec, a, opts.polish_iters);
        if last < best_res {
            best_res = last;
            best_atoms = atoms.clone();
        }
    }
    let mut atoms = best_atoms;
    let mut last = best_res;

    // Backward elimination: a spurious light atom can trap the joint fit in
    // a shallow local minimum. Probe dropping the lightest atoms one at a
    // time and keep any removal that fits at least as well.
    let mut guard = atoms.len() + 2;
    while last > 0.25 * opts.tol && atoms.len() > 1 && guard > 0 {
        guard -= 1;
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&i, &j| atoms[i].0.partial_cmp(&atoms[j].0).unwrap());
        let mut accepted = false;
        for &drop in order.iter().take(3) {
            let mut trial: Vec<(f64, Direction)> = atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, &at)| at)
                .collect();
            refit_weights(&mut trial, &target_vec);
            if trial.is_empty() {
                continue;
            }
            let res = polish_until_stall(&mut trial, &target_vec, a, 30);
            if res <= last.max(0.1 * opts.tol) {
                atoms = trial;
                last = res;
                accepted = true;
                break;
            }
        }
        if !accepted {
            break;
        }
    }

    // Prefer the sparser representation with clusters collapsed; keep it
    // only when it matches the unmerged quality.
    try_consolidate(&mut atoms, &target_vec, a, last.max(0.1 * opts.tol));
    let _ = last;

    if atoms.len() > 15 {
        let measure = FiberMeasure::from_pairs(atoms.clone())?;
        let reduced = caratheodory_reduce(&measure, a)?;
        atoms = reduced
            .atoms()
            .iter()
            .map(|at| (at.weight, at.direction))
            .collect();
    }

    // The input has unit trace, so the weights must sum to one; enforce it
    // exactly and report the honest residual afterwards.
    let total: f64 = atoms.iter().map(|(w, _)| *w).sum();
    if total > 0.0 {
        for slot in atoms.iter_mut() {
            slot.0 /= total;
        }
    }
    let residual = residual_norm(&atoms, a);
    let atom_count = atoms.len();
    let measure = FiberMeasure::from_pairs(atoms)?;
    Ok(RealizationResult {
        measure,
        residual,
        atom_count,
    })
}

/// Caratheodory elimination: while more than 15 atoms remain, a null-space
/// coefficient vector of the atom moment vectors is oriented to have a
/// positive entry and subtracted at the largest step that keeps all weights
/// nonnegative, zeroing at least one atom without changing the represented
/// tensor.
pub fn caratheodory_reduce(m: &FiberMeasure, target: &Sym4) -> Result<FiberMeasure> {
    let mut weights: Vec<f64> = m.atoms().iter().map(|a| a.weight).collect();
    let mut dirs: Vec<Direction> = m.atoms().iter().map(|a| a.direction).collect();

    while weights.len() > 15 {
        let r = weights.len();
        let phi = Mat::from_fn(15, r, |i, j| moment_vec(dirs[j].vector())[i]);
        let gram = phi.transpose().matmul(&phi);
        let (_vals, vecs) = linalg::eig_sym(&gram);
        let mut c: Vec<f64> = (0..r).map(|i| vecs[(i, r - 1)]).collect();
        // With r > 15 the moment vectors are linearly dependent, so the
        // smallest Gram eigenvalue must be numerically zero; anything else
        // signals rank ambiguity. Retry against progressively looser
        // cutoffs before giving up.
        let phic = phi.matvec(&c);
        let defect = phic.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = phi.frob_norm().max(1e-30);
        if ![1e-10, 1e-8, 1e-6].iter().any(|cut| defect <= cut * scale) {
            return Err(Error::NullSpaceNotFound);
        }
        if c.iter().cloned().fold(f64::MIN, f64::max) <= 0.0 {
            for v in c.iter_mut() {
                *v = -*v;
            }
        }
        let cmax = c.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut t = f64::INFINITY;
        let mut kill = usize::MAX;
        for (i, &ci) in c.iter().enumerate() {
            if ci > 1e-12 * cmax {
                let ratio = weights[i] / ci;
                if ratio < t {
                    t = ratio;
                    kill = i;
                }
            }
        }
        if kill == usize::MAX {
            return Err(Error::NullSpaceNotFound);
        }
        for (w, &ci) in weights.iter_mut().zip(&c) {
            *w -= t * ci;
            if *w < 0.0 {
                debug_assert!(*w > -1e-12, "negative weight {w:e} after elimination");
                *w = 0.0;
            }
        }
        weights[kill] = 0.0;
        let keep: Vec<usize> = (0..r).filter(|&i| weights[i] > 1e-15).collect();
        weights = keep.iter().map(|&i| weights[i]).collect();
        dirs = keep.iter().map(|&i| dirs[i]).collect();
        if weights.is_empty() {
            return Err(Error::NullSpaceNotFound);
        }
    }

    let atoms: Vec<(f64, Direction)> = weights.into_iter().zip(dirs).collect();
    let reduced = FiberMeasure::from_pairs(atoms)?;
    let drift = reduced.moment4().sub(target).frob_norm();
    debug_assert!(drift <= 1e-8 * (1.0 + target.frob_norm()), "drift {drift:e}");
    Ok(reduced)
}

/// Smallest value of the quartic form on the unit sphere, from a Fibonacci
/// grid optionally polished by Newton steps in the tangent plane. Without
/// polish the value is only the grid minimum; with polish it is at most the
/// grid minimum.
pub fn quartic_min_on_sphere(b: &Sym4, grid_size: usize, polish: bool) -> (f64, Direction) {
    assert!(grid_size >= 100, "grid must resolve the quartic's landscape");
    let grid = fibonacci_sphere(grid_size);
    let mut scored: Vec<(f64, Direction)> = grid
        .iter()
        .map(|q| (b.quartic_eval(q.vector()), *q))
        .collect();
    scored.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let (mut best_val, mut best_dir) = scored[0];
    if !polish {
        return (best_val, best_dir);
    }
    for &(_, seed) in scored.iter().take(6) {
        let (v, d) = newton_polish(b, seed);
        if v < best_val {
            best_val = v;
            best_dir = d;
        }
    }
    (best_val, best_dir)
}

fn newton_polish(b: &Sym4, start: Direction) -> (f64, Direction) {
    let mut q = start;
    let mut f = b.quartic_eval(q.vector());
    for _ in 0..50 {
        let g = b.quartic_grad(q.vector());
        let radial = g.dot(q.vector());
        let gt = g.sub(&q.vector().scale(radial));
        if gt.norm() <= 1e-14 * (1.0 + f.abs()) {
            break;
        }
        let (t1, t2) = tangent_basis(q.vector());
        let h = b.quartic_hess(q.vector());
        let hv = |v: &Vec3| -> Vec3 {
            let s = h;
            Vec3::new(
                s.get(0, 0) * v.x + s.get(0, 1) * v.y + s.get(0, 2) * v.z,
                s.get(0, 1) * v.x + s.get(1, 1) * v.y + s.get(1, 2) * v.z,
                s.get(0, 2) * v.x + s.get(1, 2) * v.y + s.get(2, 2) * v.z,
            )
        };
        // Riemannian Hessian in the tangent basis.
        let mut h11 = t1.dot(&hv(&t1)) - radial;
        let mut h22 = t2.dot(&hv(&t2)) - radial;
        let h12 = t1.dot(&hv(&t2));
        let g1 = gt.dot(&t1);
        let g2 = gt.dot(&t2);
        // Positive-definite safeguard for the 2x2 system.
        let trace = h11 + h22;
        let det = h11 * h22 - h12 * h12;
        let lam_min = 0.5 * (trace - (trace * trace - 4.0 * det).max(0.0).sqrt());
        if lam_min < 1e-10 {
            let shift = 1e-10 - lam_min;
            h11 += shift;
            h22 += shift;
        }
        let det = h11 * h22 - h12 * h12;
        let (mut d1, mut d2) = if det.abs() > 1e-300 {
            ((-g1 * h22 + g2 * h12) / det, (-g2 * h11 + g1 * h12) / det)
        } else {
            (-g1, -g2)
        };
        // Backtracking line search with gradient fallback.
        let mut improved = false;
        for _half in 0..25 {
            let step = t1.scale(d1).add(&t2.scale(d2));
            if let Ok(cand) = Direction::from_vector(q.vector().add(&step)) {
                let fc = b.quartic_eval(cand.vector());
                if fc < f {
                    q = cand;
                    f = fc;
                    improved = true;
                    break;
                }
            }
            d1 *= 0.5;
            d2 *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (f, q)
}

/// The six Kelvin-Mandel basis tensors as symmetric matrices.
fn km_basis(xi: usize) -> Sym2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = Sym2::zero();
    match xi {
        0 => b.set(0, 0, 1.0),
        1 => b.set(1, 1, 1.0),
        2 => b.set(2, 2, 1.0),
        3 => b.set(1, 2, s),
        4 => b.set(0, 2, s),
        5 => b.set(0, 1, s),
        _ => unreachable!(),
    }
    b
}

/// Functional matrices of the complete-symmetrization map: for coefficient
/// slot mu, <S_mu, G>_F is the mu-coefficient of sym(G-as-tensor).
fn sym_functionals() -> &'static [Mat; 15] {
    static CELL: OnceLock<[Mat; 15]> = OnceLock::new();
    CELL.get_or_init(|| {
        let perms: Vec<[usize; 4]> = {
            let mut out = Vec::new();
            let idx = [0usize, 1, 2, 3];
            // All 24 permutations of four positions.
            for a in 0..4 {
                for b in 0..4 {
                    if b == a {
                        continue;
                    }
                    for c in 0..4 {
                        if c == a || c == b {
                            continue;
                        }
                        let d = 6 - a - b - c;
                        out.push([idx[a], idx[b], idx[c], idx[d]]);
                    }
                }
            }
            out
        };
        let mut mats: Vec<Mat> = (0..15).map(|_| Mat::zeros(6, 6)).collect();
        for xi in 0..6 {
            for zeta in 0..6 {
                let bx = km_basis(xi);
                let bz = km_basis(zeta);
                for (slot, target) in MULTI_INDICES.iter().enumerate() {
                    let mut acc = 0.0;
                    for p in &perms {
                        let t = [target[p[0]], target[p[1]], target[p[2]], target[p[3]]];
                        acc += bx.get(t[0], t[1]) * bz.get(t[2], t[3]);
                    }
                    mats[slot][(xi, zeta)] = acc / 24.0;
                }
            }
        }
        mats.try_into().expect("exactly 15 slots")
    })
}

/// Sum-of-squares certificate: PSD Gram matrix plus the squared quadratics
/// from its spectral factorization.
#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub gram: Km66,
    pub squares: Vec<Sym2>,
    /// Frobenius distance between the symmetrized Gram tensor and the target.
    pub reconstruction_residual: f64,
}

/// Separating witness for non-SOS quartics: a candidate tensor with
/// negative pairing against the target.
#[derive(Clone, Debug)]
pub struct SosWitness {
    pub candidate: Sym4,
    /// candidate :: B, strictly negative.
    pub pairing: f64,
}

#[derive(Clone, Debug)]
pub enum SosOutcome {
    Certificate(SosCertificate),
    Infeasible(SosWitness),
}

/// Decides whether the quartic form of `b` is a sum of squares.
///
/// The decision runs on the dual side first: minimizing `A :: B` over the
/// candidate set is a small SDP whose optimum is negative exactly when a
/// separating candidate exists. Otherwise the Gram feasibility SDP (zero
/// objective, 15 symmetrization constraints, 6 free reshuffling degrees of
/// freedom) produces the certificate.
pub fn sos_certificate(b: &Sym4, tol: f64) -> Result<SosOutcome> {
    let gate = tol.max(1e-9);

    // Dual check: min A::B over candidates == -max <-KM(B), X>.
    let neg_obj = Km66::from_mat(&b.to_km(Frame::Fixed).to_mat().scale(-1.0), Frame::Fixed);
    let dual_problem = sdp::SdpProblem::new(
        neg_obj,
        sdp::build_constraints(&sdp::ConstraintSpec::candidate_set()),
    );
    let dual_sol = sdp::solve(&dual_problem, &sdp::SolverOptions::default());
    if !dual_sol.is_optimal() {
        return Err(Error::Solver {
            status: dual_sol.status,
            iterations: dual_sol.iterations,
        });
    }
    let min_pairing = -dual_sol.objective_value;
    if min_pairing < -gate {
        let candidate = Sym4::from_km(&dual_sol.x, 1e-6)?;
        let pairing = candidate.ddot4(b);
        return Ok(SosOutcome::Infeasible(SosWitness { candidate, pairing }));
    }

    // Gram feasibility: find G >= 0 with sym(G) = B.
    let functionals = sym_functionals();
    let constraints: Vec<sdp::LinearConstraint> = functionals
        .iter()
        .zip(b.coeffs())
        .map(|(s, &b_mu)| {
            let mut entries = Vec::new();
            for i in 0..6 {
                for j in i..6 {
                    let v = if i == j {
                        s[(i, i)]
                    } else {
                        s[(i, j)] + s[(j, i)]
                    };
                    if v != 0.0 {
                        entries.push((i, j, v));
                    }
                }
            }
            sdp::LinearConstraint::new(&entries, b_mu)
        })
        .collect();
    let problem = sdp::SdpProblem::new(Km66::zero(Frame::Fixed), constraints);
    let sol = sdp::solve(&problem, &sdp::SolverOptions::default());
    if !sol.is_optimal() {
        return Err(Error::Solver {
            status: sol.status,
            iterations: sol.iterations,
        });
    }
    let gram = sol.x;

    // Spectral factorization into squares.
    let (vals, vecs) = linalg::eig_sym(&gram.to_mat());
    debug_assert!(vals[5] >= -1e-8, "Gram eigenvalue {:.3e}", vals[5]);
    let mut squares = Vec::new();
    for k in 0..6 {
        if vals[k] <= 1e-12 {
            continue;
        }
        let col = [
            vecs[(0, k)],
            vecs[(1, k)],
            vecs[(2, k)],
            vecs[(3, k)],
            vecs[(4, k)],
            vecs[(5, k)],
        ];
        squares.push(Sym2::from_km_vec(&col).scale(vals[k].sqrt()));
    }

    // Honest reconstruction check in tensor coordinates.
    let mut recon = [0.0f64; 15];
    for (slot, s) in functionals.iter().enumerate() {
        recon[slot] = s.dot(&gram.to_mat());
    }
    let recon_t = Sym4::from_coeffs(recon);
    let reconstruction_residual = recon_t.sub(b).frob_norm();

    Ok(SosOutcome::Certificate(SosCertificate {
        gram,
        squares,
        reconstruction_residual,
    }))
}
