//! See-saw searches for robust PPT-entangled and fully biseparable states,
//! and the analysis of the `ρ(θ)` family.

use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use log::{info, warn};
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use crate::basis::ProductBasis;
use crate::bipartite::{adaptive_visibility, dual_witness_fixed, AdaptiveOptions};
use crate::conic::{ConeKind, SdpProblem, SolverOptions, Term};
use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOp};
use crate::io::MatrixDoc;
use crate::multiparty::{
    adaptive_cut_class_from, adaptive_fsep, fsep_dual_witness, minimize_witness_over_fbsep, MultiOptions,
    SeparabilityClass,
};
use crate::polytope::bloch_vector;
use crate::states::{gamma_family, gamma_vectors, random_pure, rng_from_seed};

/// `min Tr(Wρ)` over unit-trace `ρ ⪰ 0` with `ρ^{T_B} ⪰ 0`.
pub fn minimize_witness_over_ppt(w: &HermitianOp, solver: &SolverOptions) -> Result<(f64, HermitianOp)> {
    if w.num_subsystems() != 2 {
        return Err(Error::invalid("PPT minimisation needs a bipartite operator"));
    }
    let dims = w.dims().to_vec();
    let basis = ProductBasis::new(&dims);
    let mut p = SdpProblem::new();
    let rho = p.add_hermitian("rho", dims.clone());
    p.require_psd(rho)?;
    p.require_ppt(rho, &[false, true])?;
    let tr: Vec<_> = (0..basis.len())
        .filter_map(|k| {
            let x = basis.trace_of(k);
            (x != 0.0).then_some((0, k, x))
        })
        .collect();
    p.add_constraint(
        "trace",
        ConeKind::Zero,
        1,
        vec![Term { var: rho, entries: tr }],
        vec![-1.0],
    )?;
    let wc = basis.coords(w);
    p.set_objective(
        wc.iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(k, &x)| (rho, k, -x))
            .collect(),
    )?;
    let sol = p.solve(solver);
    sol.check("PPT minimisation")?;
    let out = repair_ppt(&sol.matrix(rho).with_dims(dims)?)?;
    Ok((w.inner(&out), out))
}

/// Mixes in just enough white noise that the state and its partial
/// transpose on B are PSD (solver output is only feasible to ~1e-8).
pub fn repair_ppt(rho: &HermitianOp) -> Result<HermitianOp> {
    let rho = rho.scale(1.0 / rho.trace());
    let lam = rho.min_eigenvalue().min(rho.partial_transpose(&[1])?.min_eigenvalue());
    if lam >= 0.0 {
        return Ok(rho);
    }
    let inv_d = 1.0 / rho.order() as f64;
    let eps = (-lam / (inv_d - lam)) * (1.0 + 1e-6);
    Ok(crate::states::white_noise_mix(&rho, 1.0 - eps))
}

#[derive(Clone, Debug)]
pub struct SeesawOptions {
    pub seed: u64,
    /// Vertices for the adaptions inside the loop.
    pub n_vertices: usize,
    pub conv_tol: f64,
    /// A step is accepted only if `χ` drops by more than this.
    pub accept_tol: f64,
    pub max_stalls: usize,
    pub max_iterations: usize,
    pub max_restarts: usize,
    /// Vertices per party in the FBSEP minimisation.
    pub fbsep_vertices: usize,
    pub fbsep_rounds: usize,
    pub solver: SolverOptions,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            n_vertices: 300,
            conv_tol: 1e-4,
            accept_tol: 1e-5,
            max_stalls: 3,
            max_iterations: 40,
            max_restarts: 10,
            fbsep_vertices: 150,
            fbsep_rounds: 6,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawStep {
    pub state: HermitianOp,
    pub chi: f64,
    /// Minimum of the witness over the target set that produced `state`
    /// (`NaN` for the initial state).
    pub witness_value: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct SeesawTrace {
    pub steps: Vec<SeesawStep>,
    pub converged: bool,
    pub reason: String,
    pub final_state: HermitianOp,
    pub final_chi: f64,
    pub restarts: usize,
    /// FBSEP visibility of the final state (FBSEP see-saw only).
    pub fbsep_chi: Option<f64>,
}

impl SeesawTrace {
    /// `χ` of the accepted states, in order.
    pub fn accepted_chis(&self) -> Vec<f64> {
        self.steps.iter().filter(|s| s.accepted).map(|s| s.chi).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "converged": self.converged,
            "reason": self.reason,
            "final_chi": self.final_chi,
            "restarts": self.restarts,
            "fbsep_chi": self.fbsep_chi,
            "final_state": MatrixDoc::from_op(&self.final_state),
            "steps": self.steps.iter().map(|s| json!({
                "chi": s.chi,
                "witness_value": if s.witness_value.is_nan() { Value::Null } else { s.witness_value.into() },
                "accepted": s.accepted,
                "state": MatrixDoc::from_op(&s.state),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Alternates adaption, dual witness and PPT minimisation starting from a
/// PPT-entangled state.
pub fn seesaw_robust_ppt(initial: &HermitianOp, opts: &SeesawOptions) -> Result<SeesawTrace> {
    let mut adapt = AdaptiveOptions::new(opts.n_vertices, opts.seed);
    adapt.conv_tol = opts.conv_tol;
    adapt.solver = opts.solver.clone();
    let mut rho = initial.clone();
    let mut rep = adaptive_visibility(&rho, &adapt)?;
    let mut steps = vec![SeesawStep {
        state: rho.clone(),
        chi: rep.visibility,
        witness_value: f64::NAN,
        accepted: true,
    }];
    info!("PPT see-saw start: χ = {:.6}", rep.visibility);
    let mut stalls = 0;
    let mut reason = String::from("iteration limit");
    let mut converged = false;
    let mut last = rep.visibility;
    for it in 0..opts.max_iterations {
        let (_, mut w) = dual_witness_fixed(&rho, &rep.polytope, rep.polytope_side, &opts.solver)?;
        if !w.check_vertices(&rep.polytope, 1e-7)? {
            return Err(Error::Solver(format!(
                "witness violates its vertex constraints ({:.2e})",
                w.min_vertex_eigenvalue
            )));
        }
        let scale = w.op.frobenius_norm();
        let (value, out) = minimize_witness_over_ppt(&w.op.scale(1.0 / scale), &opts.solver)?;
        let value = value * scale;
        if value >= 0.0 {
            converged = true;
            reason = format!("witness not violated by any PPT state (min {value:.3e})");
            break;
        }
        adapt.seed = opts.seed.wrapping_add(it as u64 + 1);
        let next = match adaptive_visibility(&out, &adapt) {
            Ok(r) => Some(r),
            Err(Error::Solver(m)) => {
                warn!("PPT see-saw {it}: candidate adaption failed ({m})");
                None
            }
            Err(e) => return Err(e),
        };
        let chi = next.as_ref().map_or(f64::NAN, |r| r.visibility);
        let accepted = chi < last - opts.accept_tol;
        info!(
            "PPT see-saw {it}: χ = {chi:.6} ({})",
            if accepted { "accepted" } else { "rejected" }
        );
        steps.push(SeesawStep {
            state: out.clone(),
            chi,
            witness_value: value,
            accepted,
        });
        if let (true, Some(next)) = (accepted, next) {
            rho = out;
            rep = next;
            last = chi;
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= opts.max_stalls {
                converged = true;
                reason = format!("{stalls} steps without improvement");
                break;
            }
            // a fresh adaption of the current state gives a different witness
            adapt.seed = opts.seed.wrapping_add(1000 + it as u64);
            match adaptive_visibility(&rho, &adapt) {
                Ok(r) => rep = r.max_with(rep),
                Err(Error::Solver(m)) => warn!("PPT see-saw {it}: re-adaption failed ({m})"),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(SeesawTrace {
        final_chi: rep.visibility,
        final_state: rho,
        steps,
        converged,
        reason,
        restarts: 0,
        fbsep_chi: None,
    })
}

trait KeepBest {
    fn max_with(self, other: Self) -> Self;
}

impl KeepBest for crate::bipartite::CertificationReport {
    fn max_with(self, other: Self) -> Self {
        if self.visibility >= other.visibility {
            self
        } else {
            other
        }
    }
}

/// See-saw for fully biseparable states with low full-separability
/// visibility, starting from random pure three-qubit states.
pub fn seesaw_robust_fbsep(opts: &SeesawOptions) -> Result<SeesawTrace> {
    let mut multi = MultiOptions::new(opts.n_vertices, opts.seed);
    multi.conv_tol = opts.conv_tol;
    multi.solver = opts.solver.clone();
    for restart in 0..=opts.max_restarts {
        let seed = opts.seed.wrapping_mul(7919).wrapping_add(restart as u64);
        let initial = random_pure(vec![2, 2, 2], seed)?.into_op();
        multi.seed = seed;
        let mut rep = adaptive_fsep(&initial, &multi)?;
        let mut rho = initial.clone();
        let mut steps = vec![SeesawStep {
            state: rho.clone(),
            chi: rep.visibility,
            witness_value: f64::NAN,
            accepted: false,
        }];
        let mut in_fbsep = false;
        let mut blocks = Vec::new();
        let mut last = f64::INFINITY;
        let mut stalls = 0;
        let mut converged = false;
        let mut reason = String::from("iteration limit");
        for it in 0..opts.max_iterations {
            let pa = rep
                .polytopes
                .iter()
                .find(|(g, _)| g == &vec![0])
                .map(|(_, p)| p.clone())
                .ok_or_else(|| Error::invalid("FSEP report lacks a polytope on party A"))?;
            let dual = fsep_dual_witness(&rho, &pa, 0, &opts.solver)?;
            // the minimiser is scale invariant; unit norm keeps the program well conditioned
            let scale = dual.y0.frobenius_norm();
            let min = match minimize_witness_over_fbsep(
                &dual.y0.scale(1.0 / scale),
                opts.fbsep_vertices,
                opts.fbsep_rounds,
                seed.wrapping_add(100 + it as u64),
                &opts.solver,
            ) {
                Ok(mut m) => {
                    m.value *= scale;
                    m
                }
                Err(Error::Solver(m)) => {
                    warn!("FBSEP see-saw {it}: minimisation failed ({m})");
                    stalls += 1;
                    if stalls >= opts.max_stalls {
                        converged = in_fbsep;
                        reason = format!("{stalls} steps without improvement");
                        break;
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            if min.value >= 0.0 {
                reason = format!("witness not violated on FBSEP (min {:.3e})", min.value);
                converged = in_fbsep;
                break;
            }
            multi.seed = seed.wrapping_add(1 + it as u64);
            let next = match adaptive_fsep(&min.state, &multi) {
                Ok(r) => Some(r),
                Err(Error::Solver(m)) => {
                    warn!("FBSEP see-saw {it}: candidate adaption failed ({m})");
                    None
                }
                Err(e) => return Err(e),
            };
            let chi = next.as_ref().map_or(f64::NAN, |r| r.visibility);
            // the first FBSEP state is always taken; afterwards χ must drop
            let accepted = next.is_some() && (!in_fbsep || chi < last - opts.accept_tol);
            info!(
                "FBSEP see-saw (restart {restart}) {it}: χ = {chi:.6} ({})",
                if accepted { "accepted" } else { "rejected" }
            );
            steps.push(SeesawStep {
                state: min.state.clone(),
                chi,
                witness_value: min.value,
                accepted,
            });
            if let (true, Some(next)) = (accepted, next) {
                rho = min.state;
                blocks = min.blocks;
                rep = next;
                last = chi;
                in_fbsep = true;
                stalls = 0;
            } else {
                stalls += 1;
                if stalls >= opts.max_stalls {
                    converged = true;
                    reason = format!("{stalls} steps without improvement");
                    break;
                }
                multi.seed = seed.wrapping_add(1000 + it as u64);
                match adaptive_fsep(&rho, &multi) {
                    Ok(again) if again.visibility > rep.visibility => rep = again,
                    Ok(_) => {}
                    Err(Error::Solver(m)) => warn!("FBSEP see-saw {it}: re-adaption failed ({m})"),
                    Err(e) => return Err(e),
                }
            }
        }
        if !in_fbsep {
            info!("restart {restart}: no fully biseparable iterate ({reason})");
            continue;
        }
        let fb = adaptive_cut_class_from(&rho, SeparabilityClass::Fbsep, blocks, &multi)?;
        return Ok(SeesawTrace {
            fbsep_chi: Some(fb.visibility),
            final_chi: rep.visibility,
            final_state: rho,
            steps,
            converged,
            reason,
            restarts: restart,
        });
    }
    Err(Error::Solver(format!(
        "no fully biseparable iterate after {} restarts",
        opts.max_restarts
    )))
}

/// FBSEP visibility of `rho`, adapting from random polytopes.
pub fn fbsep_visibility(rho: &HermitianOp, opts: &MultiOptions) -> Result<f64> {
    let mut rng = rng_from_seed(opts.seed);
    let start =
        crate::multiparty::initial_cut_blocks(&SeparabilityClass::Fbsep, rho.dims(), opts.n_vertices, &mut rng)?;
    Ok(adaptive_cut_class_from(rho, SeparabilityClass::Fbsep, start, opts)?.visibility)
}

/// `Rz(a) Ry(b) Rz(c)`.
pub fn qubit_unitary(a: f64, b: f64, c: f64) -> CMatrix {
    let (s, co) = (b / 2.0).sin_cos();
    let e = |x: f64| Complex64::from_polar(1.0, x);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            e(-(a + c) / 2.0) * co,
            -e(-(a - c) / 2.0) * s,
            e((a - c) / 2.0) * s,
            e((a + c) / 2.0) * co,
        ],
    )
}

fn local_unitary(params: &[f64]) -> CMatrix {
    params
        .chunks(3)
        .map(|p| qubit_unitary(p[0], p[1], p[2]))
        .reduce(|a, b| a.kronecker(&b))
        .expect("at least one qubit")
}

/// Whether entry `(i, j)` of an `n`-dimensional matrix lies on the X pattern.
pub fn on_x_pattern(n: usize, i: usize, j: usize) -> bool {
    i == j || i + j == n - 1
}

/// Mean modulus of the entries off the X pattern.
pub fn off_x_weight(rho: &HermitianOp) -> f64 {
    let n = rho.order();
    let m = rho.matrix();
    let mut total = 0.0;
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if !on_x_pattern(n, i, j) {
                total += m[(i, j)].norm();
                count += 1;
            }
        }
    }
    total / count as f64
}

struct OffPattern<'a> {
    rho: &'a HermitianOp,
}

impl CostFunction for OffPattern<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(off_x_weight(&self.rho.conjugate(&local_unitary(p))))
    }
}

/// Local qubit unitaries minimising the off-pattern weight, found by
/// Nelder–Mead from `starts` random points. Returns the rotated state and
/// its off-pattern weight.
pub fn canonicalize_x_shape(rho: &HermitianOp, starts: usize, seed: u64) -> Result<(HermitianOp, f64)> {
    if rho.dims().iter().any(|&d| d != 2) {
        return Err(Error::invalid("X-shape canonicalisation is implemented for qubits"));
    }
    let k = 3 * rho.num_subsystems();
    let mut rng = rng_from_seed(seed);
    let mut best = (rho.clone(), off_x_weight(rho));
    for s in 0..starts {
        let x0: Vec<f64> = if s == 0 {
            vec![0.0; k]
        } else {
            (0..k).map(|_| rng.gen_range(-PI..PI)).collect()
        };
        let mut simplex = vec![x0.clone()];
        for i in 0..k {
            let mut v = x0.clone();
            v[i] += 0.4;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-12)
            .map_err(|e| Error::invalid(e.to_string()))?;
        let res = Executor::new(OffPattern { rho }, solver)
            .configure(|st| st.max_iters(4000))
            .run()
            .map_err(|e| Error::Solver(e.to_string()))?;
        if let Some(p) = res.state().best_param.as_ref() {
            let rotated = rho.conjugate(&local_unitary(p));
            let w = off_x_weight(&rotated);
            if w < best.1 {
                best = (rotated, w);
            }
        }
    }
    Ok(best)
}

/// Counts of entries above `tol` on the diagonal, on the anti-diagonal
/// (upper half) and elsewhere.
pub fn x_pattern_counts(rho: &HermitianOp, tol: f64) -> (usize, usize, usize) {
    let n = rho.order();
    let m = rho.matrix();
    let (mut diag, mut anti, mut off) = (0, 0, 0);
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)].norm() <= tol {
                continue;
            }
            if i == j {
                diag += 1;
            } else if i + j == n - 1 {
                if i < j {
                    anti += 1;
                }
            } else {
                off += 1;
            }
        }
    }
    (diag, anti, off)
}

/// Han-type residual of a three-qubit X state: for every cut, the minimum
/// over anti-diagonal entries of `√(ρ_kk ρ_k̄k̄) − |ρ_{i,ī}|`, where `k` is
/// `i` with the bits of the transposed side exchanged. Non-negative iff the
/// state is PPT (hence separable) for every cut.
pub fn x_state_cut_residual(rho: &HermitianOp) -> f64 {
    let n = rho.order();
    let m = rho.matrix();
    let mut res = f64::INFINITY;
    for mask in [0b100usize, 0b010, 0b001] {
        for i in 0..n {
            let j = n - 1 - i;
            let z = m[(i, j)].norm();
            // the entry moves to (i ^ swap, j ^ swap) with swap = (i ^ j) & mask
            let swap = (i ^ j) & mask;
            let k = i ^ swap;
            let kb = j ^ swap;
            res = res.min((m[(k, k)].re * m[(kb, kb)].re).max(0.0).sqrt() - z);
        }
    }
    res
}

/// Bloch vectors of `Tr_BC |γ_i(θ)⟩⟨γ_i(θ)|` (normalised).
pub fn gamma_bloch_vectors(theta: f64) -> [[f64; 3]; 4] {
    let vs = gamma_vectors(theta);
    let mut out = [[0.0; 3]; 4];
    for (k, v) in vs.iter().enumerate() {
        let p = HermitianOp::projector(vec![2, 2, 2], v).expect("nonzero vector");
        out[k] = bloch_vector(&p.partial_trace(&[0]).expect("valid party"));
    }
    out
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// The six pairwise distances of four points.
pub fn pairwise_distances(r: &[[f64; 3]; 4]) -> [f64; 6] {
    [
        dist(r[0], r[1]),
        dist(r[0], r[2]),
        dist(r[0], r[3]),
        dist(r[1], r[2]),
        dist(r[1], r[3]),
        dist(r[2], r[3]),
    ]
}

/// Volume of the tetrahedron spanned by four points.
pub fn tetrahedron_volume(r: &[[f64; 3]; 4]) -> f64 {
    let u = [r[1][0] - r[0][0], r[1][1] - r[0][1], r[1][2] - r[0][2]];
    let v = [r[2][0] - r[0][0], r[2][1] - r[0][1], r[2][2] - r[0][2]];
    let w = [r[3][0] - r[0][0], r[3][1] - r[0][1], r[3][2] - r[0][2]];
    let det =
        u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0]);
    det.abs() / 6.0
}

/// Angles in `[0, 2π)` with `cos²θ sin²θ = 1/6`.
pub fn tetrahedral_angles() -> [f64; 8] {
    let t = (0.5 + 1.0 / 12f64.sqrt()).sqrt().acos();
    let mut out = [0.0; 8];
    for n in 0..4 {
        out[n] = t + n as f64 * PI / 2.0;
        out[4 + n] = PI / 2.0 - t + n as f64 * PI / 2.0;
    }
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Clone, Debug)]
pub struct GammaRow {
    pub theta: f64,
    pub chi: f64,
    pub bloch: [[f64; 3]; 4],
    pub distances: [f64; 6],
    /// Largest minus smallest pairwise distance.
    pub spread: f64,
    pub volume: f64,
    pub han_residual: f64,
}

impl GammaRow {
    pub fn for_theta(theta: f64, chi: f64) -> Self {
        let bloch = gamma_bloch_vectors(theta);
        let distances = pairwise_distances(&bloch);
        let max = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            theta,
            chi,
            bloch,
            distances,
            spread: max - min,
            volume: tetrahedron_volume(&bloch),
            han_residual: x_state_cut_residual(gamma_family(theta).op()),
        }
    }
}

/// FSEP visibility and Bloch geometry of `ρ(θ)` on a grid.
pub fn gamma_scan(grid: &[f64], opts: &MultiOptions) -> Result<Vec<GammaRow>> {
    grid.iter()
        .map(|&theta| {
            let rho = gamma_family(theta).into_op();
            let chi = adaptive_fsep(&rho, opts)?.visibility;
            Ok(GammaRow::for_theta(theta, chi))
        })
        .collect()
}

/// Indices of strict local minima of a periodic sequence.
pub fn periodic_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let prev = values[(i + n - 1) % n];
            let next = values[(i + 1) % n];
            values[i] < prev && values[i] <= next
        })
        .collect()
}

/// Refines a minimum of `f` inside `[lo, hi]` by golden-section search.
pub fn golden_minimum(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn ppt_minimum_of_identity_and_swap() {
        let opts = SolverOptions::default();
        let (v, rho) = minimize_witness_over_ppt(&HermitianOp::identity(vec![2, 2]), &opts).unwrap();
        assert!((v - 1.0).abs() < 1e-7);
        assert!(rho.partial_transpose(&[1]).unwrap().min_eigenvalue() > -1e-8);
        // partial transpose of the swap: a decomposable witness, never violated by PPT states
        let mut swap = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(2 * i + j, 2 * j + i)] = 1.0.into();
            }
        }
        let w = HermitianOp::new(vec![2, 2], swap)
            .unwrap()
            .partial_transpose(&[1])
            .unwrap();
        let (v, _) = minimize_witness_over_ppt(&w, &opts).unwrap();
        assert!(v >= -1e-7, "{v}");
    }

    #[test]
    fn bloch_vectors_match_closed_forms() {
        for &theta in &[0.1, 0.477, 1.3, 2.9, 5.5] {
            let r = gamma_bloch_vectors(theta);
            let (s2, c2) = ((2.0 * theta).sin(), (2.0 * theta).cos());
            let closed = [[s2, 0.0, c2], [0.0, -s2, -c2], [-s2, 0.0, c2], [0.0, s2, -c2]];
            // the same four points, labels of the two y-vectors possibly exchanged
            for c in &closed {
                let hit = r.iter().any(|x| dist(*x, *c) < 1e-10);
                assert!(hit, "θ={theta}: {c:?} missing from {r:?}");
            }
        }
    }

    #[test]
    fn tetrahedral_and_planar_angles() {
        for t in tetrahedral_angles() {
            let row = GammaRow::for_theta(t, f64::NAN);
            assert!(row.spread < 1e-12, "{t}: {:?}", row.distances);
            let c = t.cos().powi(2) * t.sin().powi(2);
            assert!((c - 1.0 / 6.0).abs() < 1e-12);
            assert!(row.han_residual.abs() < 1e-12);
        }
        assert!(GammaRow::for_theta(PI / 4.0, f64::NAN).volume < 1e-12);
        assert!(GammaRow::for_theta(0.3, f64::NAN).volume > 1e-3);
    }

    #[test]
    fn canonicalisation_undoes_local_unitaries() {
        let rho = states::gamma_family(0.6).into_op();
        let u = local_unitary(&[0.3, -0.7, 1.1, 0.2, 0.5, -0.4, 1.0, 0.1, 0.9]);
        let scrambled = rho.conjugate(&u);
        assert!(off_x_weight(&scrambled) > 1e-2);
        let (back, w) = canonicalize_x_shape(&scrambled, 8, 1).unwrap();
        assert!(w < 1e-6, "{w}");
        let (diag, anti, off) = x_pattern_counts(&back, 1e-4);
        assert_eq!((diag, anti, off), (8, 4, 0));
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_minimum(|x| Ok((x - 0.3).powi(2)), 0.0, 1.0, 1e-8).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert_eq!(periodic_minima(&[3.0, 1.0, 2.0, 0.5, 4.0]), vec![1, 3]);
    }
}
