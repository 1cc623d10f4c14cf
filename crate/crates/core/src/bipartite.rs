//! Bipartite certification: fixed-polytope visibilities, dual witnesses,
//! the alternating polytope adaption and the robustness variants.

use log::{debug, info};
use serde::Serialize;
use serde_json::{json, Value};

use crate::basis::{ProductBasis, SplitLayout};
use crate::conic::{ConeKind, SdpProblem, SolveStatus, SolverOptions, Term};
use crate::decomp::{place, vertex_contraction, Block, Noise, RayProblem, RaySolution, T_CAP};
use crate::error::{Error, Result};
use crate::hermitian::{HermitianOp, PartitionedState};
use crate::io::MatrixDoc;
use crate::polytope::{Polytope, PolytopeKind};
use crate::states::{self, rng_from_seed, StateRng};

/// Partner operators below this fraction of the largest trace are replaced
/// when a polytope is rebuilt.
pub const DROP_TOL: f64 = 1e-7;

fn check_bipartite(rho: &HermitianOp) -> Result<()> {
    if rho.num_subsystems() != 2 {
        return Err(Error::invalid(format!(
            "expected a bipartite state, got dims {:?} (regroup parties first)",
            rho.dims()
        )));
    }
    Ok(())
}

fn check_side(side: usize) -> Result<()> {
    if side > 1 {
        return Err(Error::invalid(format!("side must be 0 or 1, got {side}")));
    }
    Ok(())
}

/// Merges the parties in `group` into subsystem A and the rest into B.
pub fn regroup(rho: &HermitianOp, group: &[usize]) -> Result<HermitianOp> {
    let n = rho.num_subsystems();
    if group.is_empty() || group.len() >= n || group.iter().any(|&p| p >= n) {
        return Err(Error::invalid(format!(
            "group {group:?} is not a proper cut of {n} parties"
        )));
    }
    let rest: Vec<usize> = (0..n).filter(|p| !group.contains(p)).collect();
    let perm: Vec<usize> = group.iter().chain(&rest).copied().collect();
    let permuted = rho.permute(&perm)?;
    let da: usize = group.iter().map(|&p| rho.dims()[p]).product();
    let db: usize = rest.iter().map(|&p| rho.dims()[p]).product();
    permuted.with_dims(vec![da, db])
}

#[derive(Clone, Debug)]
pub struct FixedResult {
    pub t: f64,
    /// Optimum as returned by the solver, before certification.
    pub solver_t: f64,
    pub capped: bool,
    pub partners: Vec<HermitianOp>,
    pub residual: f64,
    pub status: SolveStatus,
}

fn fixed_from(sol: RaySolution) -> Result<FixedResult> {
    if !sol.is_usable() {
        return Err(Error::Solver(format!(
            "visibility program: {:?} ({})",
            sol.status, sol.message
        )));
    }
    Ok(FixedResult {
        t: sol.t,
        solver_t: sol.t,
        capped: sol.capped,
        residual: sol.residuals[0],
        partners: sol.partners.into_iter().next().unwrap().into_iter().next().unwrap(),
        status: sol.status,
    })
}

/// Largest `t` with `tρ + (1 − t)/d ∈ conv(P ⊗ S)`, the polytope sitting on
/// `side`. With an outer polytope the value is an upper bound.
pub fn visibility_fixed(rho: &HermitianOp, p: &Polytope, side: usize, opts: &SolverOptions) -> Result<FixedResult> {
    visibility_fixed_with(rho, p, side, Noise::White, opts)
}

pub fn visibility_fixed_with(
    rho: &HermitianOp,
    p: &Polytope,
    side: usize,
    noise: Noise,
    opts: &SolverOptions,
) -> Result<FixedResult> {
    check_bipartite(rho)?;
    check_side(side)?;
    if p.dims() != [rho.dims()[side]] && p.dims().iter().product::<usize>() != rho.dims()[side] {
        return Err(Error::invalid(format!(
            "polytope dims {:?} do not match party {side} of {:?}",
            p.dims(),
            rho.dims()
        )));
    }
    let vertices: Vec<HermitianOp> = p
        .vertices()
        .iter()
        .map(|v| v.with_dims(vec![rho.dims()[side]]))
        .collect::<Result<_>>()?;
    let white = matches!(noise, Noise::White);
    let prob = RayProblem::new(rho.clone(), vec![vec![Block::new(vec![side], vertices.clone())]]).with_noise(noise);
    let mut r = fixed_from(prob.solve(opts)?).map_err(|e| e.context("fixed-polytope visibility"))?;
    if white && p.kind() == PolytopeKind::Inner {
        let t = certified_t(rho, side, &vertices, &r.partners, r.t)?;
        if r.t - t > 1e-9 {
            debug!("solver t = {:.10}, certified {t:.10}", r.t);
        }
        r.t = t;
    }
    Ok(r)
}

fn psd_part(op: &HermitianOp) -> Result<HermitianOp> {
    let (vals, vecs) = op.eigh();
    let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| num_complex::Complex64::from(x.max(0.0))),
    ));
    HermitianOp::new(op.dims().to_vec(), &vecs * d * vecs.adjoint())
}

/// Shrinks a solver visibility so that the bound is exact despite solver
/// residuals. With the partners and vertices clipped to PSD, `M = Σ vₖ ⊗ σₖ`
/// is separable and `E = ρ_t − M` is small; `ρ_{st} = sM + (1−s)(1/D + cE)`
/// with `c = s/(1−s)`, and the bracket is separable once the traceless part
/// of `cE` lies in the separable ball of radius `1/√(D(D−1))` about `1/D`.
fn certified_t(
    rho: &HermitianOp,
    side: usize,
    vertices: &[HermitianOp],
    partners: &[HermitianOp],
    t: f64,
) -> Result<f64> {
    let dim = rho.order() as f64;
    let mut m = HermitianOp::zeros(rho.dims().to_vec());
    for (v, s) in vertices.iter().zip(partners) {
        m = m.add(&place(&[side], &psd_part(v)?, &psd_part(s)?))?;
    }
    let e = states::white_noise_mix(rho, t).sub(&m)?;
    let tr = e.trace();
    let e0 = e
        .sub(&HermitianOp::identity(rho.dims().to_vec()).scale(tr / dim))?
        .frobenius_norm();
    if e0 == 0.0 && tr >= 0.0 {
        return Ok(t);
    }
    let r = 1.0 / (dim * (dim - 1.0)).sqrt();
    let c = r / (e0 + r * tr.abs());
    Ok(t * c / (1.0 + c))
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "ser_op")]
    pub op: HermitianOp,
    /// `Tr W`.
    pub normalisation: f64,
    /// Party carrying the polytope the witness was computed against.
    pub side: usize,
    /// Smallest eigenvalue of `Tr_side[W(σ_λ ⊗ 1)]` over all vertices.
    pub min_vertex_eigenvalue: f64,
    pub vertex_constraints_ok: bool,
    /// Multiple of the identity added by [`Witness::made_sound`] (zero for
    /// the raw polytope witness).
    pub shift: f64,
}

fn ser_op<S: serde::Serializer>(op: &HermitianOp, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixDoc::from_op(op).serialize(s)
}

impl Witness {
    pub fn value(&self, rho: &HermitianOp) -> f64 {
        self.op.inner(rho)
    }

    /// Checks `Tr_side[W(σ ⊗ 1)] ⪰ −tol` on every vertex of `p`.
    pub fn check_vertices(&mut self, p: &Polytope, tol: f64) -> Result<bool> {
        let dside = self.op.dims()[self.side];
        let mut min = f64::INFINITY;
        for v in p.vertices() {
            let c = vertex_contraction(&self.op, &[self.side], &v.with_dims(vec![dside])?)?;
            min = min.min(c.min_eigenvalue());
        }
        self.min_vertex_eigenvalue = min;
        self.vertex_constraints_ok = min >= -tol;
        Ok(self.vertex_constraints_ok)
    }

    /// Smallest `Tr(W σ⊗τ)` found over pure product states by alternating
    /// eigenvector minimisation from `starts` random points. A local search:
    /// a lower estimate of the true product minimum is not guaranteed.
    pub fn product_minimum(&self, starts: usize, rng: &mut StateRng) -> f64 {
        product_minimum(&self.op, starts, rng)
    }

    /// The raw witness is only nonnegative on the polytope times the other
    /// party. Shifting by the product minimum (with a small margin) gives an
    /// operator nonnegative on every product state the local search can
    /// reach. Heuristic: the search is local.
    pub fn made_sound(&self, starts: usize, rng: &mut StateRng) -> Witness {
        let m = self.product_minimum(starts, rng);
        if m >= 0.0 {
            return self.clone();
        }
        let c = -m + 1e-9;
        let ident = HermitianOp::identity(self.op.dims().to_vec());
        let op = self.op.add(&ident.scale(c)).expect("same dims");
        Witness {
            normalisation: op.trace(),
            op,
            shift: self.shift + c,
            ..self.clone()
        }
    }
}

/// Alternating minimisation of `Tr(W a⊗b⊗…)` over pure product states:
/// each party in turn is set to the lowest eigenvector of `W` contracted
/// with the others.
pub fn product_minimum(w: &HermitianOp, starts: usize, rng: &mut StateRng) -> f64 {
    let dims = w.dims().to_vec();
    let n = dims.len();
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut local: Vec<HermitianOp> = dims
            .iter()
            .map(|&d| crate::states::haar_projector(vec![d], rng))
            .collect();
        let mut val = f64::INFINITY;
        for _ in 0..200 {
            let mut next = val;
            for k in 0..n {
                let others: Vec<usize> = (0..n).filter(|&q| q != k).collect();
                let v = others
                    .iter()
                    .map(|&q| local[q].clone())
                    .reduce(|a, b| a.kron(&b))
                    .expect("at least two parties");
                let c = vertex_contraction(w, &others, &v).expect("dims");
                let (e, vecs) = c.eigh();
                local[k] = HermitianOp::projector(vec![dims[k]], &vecs.column(0).into_owned()).expect("unit vector");
                next = e[0];
            }
            let done = (val - next).abs() < 1e-13;
            val = next;
            if done {
                break;
            }
        }
        best = best.min(val);
    }
    best
}

/// Explicit dual: `min Tr(ρW)` over `Tr W = d` and `Tr_side[W(σ_λ⊗1)] ⪰ 0`.
/// Returns `r = −min` (so `χ_P = 1/(1+r)`) and the optimiser.
pub fn dual_witness_fixed(
    rho: &HermitianOp,
    p: &Polytope,
    side: usize,
    opts: &SolverOptions,
) -> Result<(f64, Witness)> {
    check_bipartite(rho)?;
    check_side(side)?;
    let dims = rho.dims().to_vec();
    let other = 1 - side;
    let basis = ProductBasis::new(&dims);
    let len = basis.len();
    let fbasis = ProductBasis::new(&[dims[side]]);
    let pbasis = ProductBasis::new(&[dims[other]]);
    let layout = SplitLayout::new(&dims, &[side], &[other]);
    let d = rho.order() as f64;
    let mut prob = SdpProblem::new();
    let w = prob.add_hermitian("W", dims.clone());
    let tr: Vec<_> = (0..len)
        .filter_map(|k| {
            let x = basis.trace_of(k);
            (x != 0.0).then_some((0, k, x))
        })
        .collect();
    prob.add_constraint("trace", ConeKind::Zero, 1, vec![Term { var: w, entries: tr }], vec![-d])?;
    for (lam, v) in p.vertices().iter().enumerate() {
        let s = fbasis.coords(&v.with_dims(vec![dims[side]])?);
        let mut entries = Vec::new();
        for (i, &si) in s.iter().enumerate() {
            if si.abs() < 1e-15 {
                continue;
            }
            for j in 0..pbasis.len() {
                entries.push((j, layout.row(i, j), si));
            }
        }
        prob.add_constraint(
            format!("vertex[{lam}]"),
            ConeKind::HermitianPsd(vec![dims[other]]),
            pbasis.len(),
            vec![Term { var: w, entries }],
            vec![0.0; pbasis.len()],
        )?;
    }
    let rc = basis.coords(rho);
    prob.set_objective(
        rc.iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(k, &x)| (w, k, -x))
            .collect(),
    )?;
    let sol = prob.solve(opts);
    sol.check("dual witness program")?;
    let op = sol.matrix(w).with_dims(dims)?;
    let mut wit = Witness {
        normalisation: op.trace(),
        op,
        side,
        min_vertex_eigenvalue: f64::NAN,
        vertex_constraints_ok: false,
        shift: 0.0,
    };
    wit.check_vertices(p, 1e-7)?;
    Ok((sol.objective, wit))
}

/// Largest `t ∈ [0, 1.5]` with `ρ_t ⪰ 0` and `ρ_t^{T_flip} ⪰ 0`, by bisection.
pub fn ppt_visibility(rho: &HermitianOp, flip: &[usize]) -> Result<f64> {
    const TOL: f64 = 1e-10;
    let pt = rho.partial_transpose(flip)?;
    let noise = HermitianOp::maximally_mixed(rho.dims().to_vec());
    let ok = |t: f64| {
        let a = rho.lincomb(t, &noise, 1.0 - t).expect("dims");
        let b = pt.lincomb(t, &noise, 1.0 - t).expect("dims");
        a.min_eigenvalue() >= -TOL && b.min_eigenvalue() >= -TOL
    };
    let (mut lo, mut hi) = (0.0, T_CAP);
    if ok(hi) {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Clone, Debug)]
pub struct AdaptiveOptions {
    pub n_vertices: usize,
    pub seed: u64,
    pub conv_tol: f64,
    pub max_rounds: usize,
    pub drop_tol: f64,
    pub solver: SolverOptions,
    /// Party holding the first polytope; `None` picks the smaller party.
    pub first_side: Option<usize>,
    pub max_restarts: u32,
    /// Reseed once when the loop stalls below the PPT bound.
    pub reseed_on_stall: bool,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            n_vertices: 100,
            seed: 0,
            conv_tol: 1e-4,
            max_rounds: 200,
            drop_tol: DROP_TOL,
            solver: SolverOptions::default(),
            first_side: None,
            max_restarts: 3,
            reseed_on_stall: true,
        }
    }
}

impl AdaptiveOptions {
    pub fn new(n_vertices: usize, seed: u64) -> Self {
        Self {
            n_vertices,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Party holding `vertices`.
    pub side: usize,
    pub vertices: Vec<HermitianOp>,
    pub partners: Vec<HermitianOp>,
}

impl Decomposition {
    pub fn reconstruct(&self, dims: &[usize]) -> HermitianOp {
        let mut acc = HermitianOp::zeros(dims.to_vec());
        for (v, t) in self.vertices.iter().zip(&self.partners) {
            acc = acc.add(&place(&[self.side], v, t)).expect("dims");
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct CertificationReport {
    pub visibility: f64,
    pub capped: bool,
    pub class: String,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub n_vertices: usize,
    pub side_sequence: Vec<usize>,
    pub trace: Vec<f64>,
    pub statuses: Vec<SolveStatus>,
    pub converged: bool,
    pub restarts: u32,
    pub reseeded: bool,
    /// Polytope that produced the best value, with its side.
    pub polytope: Polytope,
    pub polytope_side: usize,
    pub decomposition: Decomposition,
    pub residual: f64,
}

impl CertificationReport {
    /// `(1 − χ)/χ`, clamped at zero.
    pub fn robustness(&self) -> f64 {
        robustness_from(self.visibility)
    }

    pub fn to_json(&self, embed_decomposition: bool) -> Value {
        let mut v = json!({
            "class": self.class,
            "dims": self.dims,
            "visibility": self.visibility,
            "visibility_clipped": self.visibility.min(1.0),
            "capped": self.capped,
            "certified_separable": self.visibility >= 1.0,
            "seed": self.seed,
            "n_vertices": self.n_vertices,
            "converged": self.converged,
            "restarts": self.restarts,
            "reseeded": self.reseeded,
            "side_sequence": self.side_sequence,
            "trace": self.trace,
            "statuses": self.statuses,
            "residual": self.residual,
            "polytope_side": self.polytope_side,
            "polytope": self.polytope.to_doc(),
        });
        if embed_decomposition {
            v["decomposition"] = json!({
                "side": self.decomposition.side,
                "vertices": self.decomposition.vertices.iter().map(MatrixDoc::from_op).collect::<Vec<_>>(),
                "partners": self.decomposition.partners.iter().map(MatrixDoc::from_op).collect::<Vec<_>>(),
            });
        }
        v
    }
}

pub fn robustness_from(chi: f64) -> f64 {
    if chi >= 1.0 {
        0.0
    } else {
        (1.0 - chi) / chi
    }
}

fn first_side(dims: &[usize], opts: &AdaptiveOptions) -> usize {
    opts.first_side.unwrap_or(if dims[1] < dims[0] { 1 } else { 0 })
}

/// Polytope adaption for the white-noise visibility.
pub fn adaptive_visibility(rho: &HermitianOp, opts: &AdaptiveOptions) -> Result<CertificationReport> {
    adaptive_with_noise(rho, Noise::White, opts)
}

/// Polytope adaption for the white-noise (`Noise::White`) or generalised
/// (`Noise::AnyState`) visibility.
pub fn adaptive_with_noise(rho: &HermitianOp, noise: Noise, opts: &AdaptiveOptions) -> Result<CertificationReport> {
    check_bipartite(rho)?;
    if opts.n_vertices < 4 {
        return Err(Error::invalid("adaption needs at least 4 vertices"));
    }
    if !matches!(noise, Noise::White | Noise::AnyState | Noise::Fixed(_)) {
        return Err(Error::invalid("separable noise uses the two-list adaption"));
    }
    let side = first_side(rho.dims(), opts);
    let mut last_err = None;
    for restart in 0..=opts.max_restarts {
        let seed = opts.seed.wrapping_add(restart as u64 * 0x9e37_79b9);
        let p = Polytope::random_inner(vec![rho.dims()[side]], opts.n_vertices, seed)?;
        match adaptive_from(rho, p, side, noise.clone(), seed, opts) {
            Ok(mut r) => {
                r.restarts = restart;
                r.seed = opts.seed;
                return Ok(r);
            }
            Err(Error::DegenerateInput(m)) => {
                info!("adaption collapsed ({m}); restarting");
                last_err = Some(Error::DegenerateInput(m));
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

/// Adaption starting from a given polytope on `side`.
pub fn adaptive_from(
    rho: &HermitianOp,
    start: Polytope,
    side: usize,
    noise: Noise,
    seed: u64,
    opts: &AdaptiveOptions,
) -> Result<CertificationReport> {
    check_bipartite(rho)?;
    check_side(side)?;
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    let ppt = if matches!(noise, Noise::White) {
        Some(ppt_visibility(rho, &[1])?)
    } else {
        None
    };
    let white = matches!(noise, Noise::White);
    let mut p = start;
    let mut side = side;
    let mut trace = Vec::new();
    let mut sides = Vec::new();
    let mut statuses = Vec::new();
    let mut best: Option<(f64, FixedResult, Polytope, usize)> = None;
    let mut reseeded = false;
    let mut converged = false;
    let mut round = 0;
    // previous decomposition re-expressed over the current vertices
    let mut carried: Option<(Vec<HermitianOp>, f64)> = None;
    while round < opts.max_rounds {
        round += 1;
        let r = visibility_fixed_with(rho, &p, side, noise.clone(), &opts.solver)?;
        debug!("round {round}: side {side}, t = {:.8}", r.t);
        let mut t_round = r.t;
        if let Some((partners, t_prev)) = carried.take() {
            let vertices: Vec<HermitianOp> = p
                .vertices()
                .iter()
                .map(|v| v.with_dims(vec![rho.dims()[side]]))
                .collect::<Result<_>>()?;
            let kept = certified_t(rho, side, &vertices, &partners, t_prev)?;
            if kept > t_round {
                debug!("round {round}: keeping the previous decomposition ({kept:.10} > {t_round:.10})");
                t_round = kept;
            }
        }
        trace.push(t_round);
        sides.push(side);
        statuses.push(r.status);
        let improved = best.as_ref().is_none_or(|b| r.t > b.0);
        if improved {
            best = Some((r.t, r.clone(), p.clone(), side));
        }
        if r.capped {
            converged = true;
            break;
        }
        let k = trace.len();
        let stalled = k >= 3 && (trace[k - 1] - trace[k - 2]).abs() < opts.conv_tol;
        let rebuilt = Polytope::from_operators(&r.partners, opts.drop_tol, &mut rng)?;
        let mut dropped = rebuilt.replaced.clone();
        if stalled {
            let below_ppt = ppt.is_some_and(|b| best.as_ref().unwrap().0 < b - 10.0 * opts.conv_tol);
            if opts.reseed_on_stall && below_ppt && !reseeded {
                // replace the lowest-weight quarter of the next polytope
                reseeded = true;
                let mut order: Vec<usize> = (0..r.partners.len()).collect();
                order.sort_by(|&a, &b| r.partners[a].trace().total_cmp(&r.partners[b].trace()));
                let quarter = (order.len() / 4).max(1);
                dropped.extend_from_slice(&order[..quarter]);
                if white {
                    carried = Some((carry_partners(rho, side, &p, &r.partners, &dropped)?, r.solver_t));
                }
                p = rebuilt.polytope;
                p.reseed(&order[..quarter], &mut rng);
                side = 1 - side;
                info!("stalled at {:.6} below the PPT bound; reseeded {quarter} vertices", r.t);
                continue;
            }
            converged = true;
            break;
        }
        if white {
            carried = Some((carry_partners(rho, side, &p, &r.partners, &dropped)?, r.solver_t));
        }
        p = rebuilt.polytope;
        side = 1 - side;
    }
    let (chi, fr, poly, pside) = best.ok_or_else(|| Error::invalid("max_rounds must be positive"))?;
    Ok(CertificationReport {
        visibility: chi,
        capped: fr.capped,
        class: "SEP".into(),
        dims: rho.dims().to_vec(),
        seed,
        n_vertices: opts.n_vertices,
        side_sequence: sides,
        trace,
        statuses,
        converged,
        restarts: 0,
        reseeded,
        residual: fr.residual,
        decomposition: Decomposition {
            side: pside,
            vertices: poly
                .vertices()
                .iter()
                .map(|v| v.with_dims(vec![rho.dims()[pside]]))
                .collect::<Result<_>>()?,
            partners: fr.partners,
        },
        polytope: poly,
        polytope_side: pside,
    })
}

// Old vertex i scaled by the trace of its partner becomes the partner of new
// vertex i, which is that partner normalised; replaced vertices get nothing.
fn carry_partners(
    rho: &HermitianOp,
    side: usize,
    old: &Polytope,
    partners: &[HermitianOp],
    dropped: &[usize],
) -> Result<Vec<HermitianOp>> {
    let dims = vec![rho.dims()[side]];
    old.vertices()
        .iter()
        .zip(partners)
        .enumerate()
        .map(|(i, (v, s))| {
            if dropped.contains(&i) {
                Ok(HermitianOp::zeros(dims.clone()))
            } else {
                Ok(v.with_dims(dims.clone())?.scale(psd_part(s)?.trace()))
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RobustnessReport {
    pub robustness: f64,
    /// Best visibility against the chosen noise set.
    pub visibility: f64,
    pub trace: Vec<f64>,
    pub converged: bool,
}

impl RobustnessReport {
    pub fn to_json(&self, kind: &str) -> Value {
        json!({
            "kind": kind,
            "robustness": self.robustness,
            "visibility": self.visibility,
            "trace": self.trace,
            "converged": self.converged,
        })
    }
}

/// Upper bound on the robustness against separable noise, adapting both the
/// polytope and the noise state.
pub fn absolute_robustness_adaptive(rho: &HermitianOp, opts: &AdaptiveOptions) -> Result<RobustnessReport> {
    check_bipartite(rho)?;
    let dims = rho.dims().to_vec();
    let side = first_side(&dims, opts);
    let other = 1 - side;
    let mut rng = rng_from_seed(opts.seed ^ 0xab5);
    let mut pa = Polytope::random_inner(vec![dims[side]], opts.n_vertices, opts.seed)?;
    let mut trace = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut converged = false;
    for _ in 0..opts.max_rounds {
        let prob = RayProblem::new(rho.clone(), vec![vec![Block::new(vec![side], pa.vertices().to_vec())]])
            .with_noise(Noise::Separable);
        let sol = prob.solve(&opts.solver)?;
        if !sol.is_usable() {
            return Err(Error::Solver(format!("absolute robustness program: {:?}", sol.status)));
        }
        trace.push(sol.t);
        let prev = best;
        best = best.max(sol.t);
        let eta = &sol.noise_partners[0][0];
        let eta_tr: f64 = eta.iter().map(|e| e.trace()).sum();
        if sol.t >= 1.0 - 1e-9 || eta_tr < 1e-9 {
            converged = true;
            break;
        }
        let mut gamma = HermitianOp::zeros(dims.clone());
        for (v, e) in pa.vertices().iter().zip(eta) {
            gamma = gamma.add(&place(&[side], v, e))?;
        }
        let gamma = gamma.scale(1.0 / eta_tr);
        let pb = Polytope::from_operators(&sol.partners[0][0], opts.drop_tol, &mut rng)?.polytope;
        let step = visibility_fixed_with(rho, &pb, other, Noise::Fixed(gamma), &opts.solver)?;
        trace.push(step.t);
        best = best.max(step.t);
        pa = Polytope::from_operators(&step.partners, opts.drop_tol, &mut rng)?.polytope;
        if prev.is_finite() && (best - prev).abs() < opts.conv_tol {
            converged = true;
            break;
        }
    }
    Ok(RobustnessReport {
        robustness: robustness_from(best),
        visibility: best,
        trace,
        converged,
    })
}

/// Upper bound `(1 − χ^G)/χ^G` on the generalised robustness for a fixed
/// polytope on `side`.
pub fn generalized_robustness(rho: &HermitianOp, p: &Polytope, side: usize, opts: &SolverOptions) -> Result<f64> {
    let r = visibility_fixed_with(rho, p, side, Noise::AnyState, opts)?;
    Ok(robustness_from(r.t))
}

/// Generalised robustness with polytope adaption.
pub fn generalized_robustness_adaptive(rho: &HermitianOp, opts: &AdaptiveOptions) -> Result<RobustnessReport> {
    let r = adaptive_with_noise(rho, Noise::AnyState, opts)?;
    Ok(RobustnessReport {
        robustness: r.robustness(),
        visibility: r.visibility,
        trace: r.trace,
        converged: r.converged,
    })
}

/// Default vertex count of the outer qubit polytope.
pub const OUTER_VERTICES: usize = 1002;

/// Upper bound on `χ` from the outer qubit polytope on party A.
pub fn outer_upper_bound(rho: &HermitianOp, n_vertices: usize, opts: &SolverOptions) -> Result<f64> {
    check_bipartite(rho)?;
    if rho.dims()[0] != 2 {
        return Err(Error::invalid(format!(
            "the outer polytope needs a qubit on party A, got dims {:?}",
            rho.dims()
        )));
    }
    let p = Polytope::outer_qubit(n_vertices)?;
    debug_assert_eq!(p.kind(), PolytopeKind::Outer);
    Ok(visibility_fixed(rho, &p, 0, opts)?.t)
}

/// Convenience wrapper taking a validated state.
pub fn certify(rho: &PartitionedState, opts: &AdaptiveOptions) -> Result<CertificationReport> {
    adaptive_visibility(rho.op(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn maximally_mixed_is_capped() {
        let rho = HermitianOp::maximally_mixed(vec![2, 2]);
        let p = Polytope::new(
            vec![2],
            PolytopeKind::Inner,
            vec![HermitianOp::maximally_mixed(vec![2])],
        )
        .unwrap();
        let r = visibility_fixed(&rho, &p, 0, &SolverOptions::default()).unwrap();
        assert!(r.t >= 1.0 && r.capped);
    }

    #[test]
    fn ppt_oracle_values() {
        let bell = states::bell().into_op();
        assert!((ppt_visibility(&bell, &[1]).unwrap() - 1.0 / 3.0).abs() < 1e-8);
        let mm = HermitianOp::maximally_mixed(vec![2, 3]);
        assert_eq!(ppt_visibility(&mm, &[1]).unwrap(), T_CAP);
        for d in 2..=4 {
            let iso = states::isotropic(d, 1.0).unwrap().into_op();
            let want = 1.0 / (d as f64 + 1.0);
            assert!((ppt_visibility(&iso, &[1]).unwrap() - want).abs() < 1e-8, "d={d}");
        }
    }

    #[test]
    fn dual_matches_primal() {
        let rho = states::bell().into_op();
        let p = Polytope::random_inner(vec![2], 60, 7).unwrap();
        let opts = SolverOptions::default();
        let primal = visibility_fixed(&rho, &p, 0, &opts).unwrap();
        let (r, w) = dual_witness_fixed(&rho, &p, 0, &opts).unwrap();
        assert!(
            (primal.t - 1.0 / (1.0 + r)).abs() < 1e-5,
            "{} vs {}",
            primal.t,
            1.0 / (1.0 + r)
        );
        assert!(w.vertex_constraints_ok);
        assert!((w.normalisation - 4.0).abs() < 1e-8);
    }

    #[test]
    fn adaption_reaches_two_qubit_optimum() {
        let rho = states::random_density(vec![2, 2], 3).unwrap().into_op();
        let rep = adaptive_visibility(&rho, &AdaptiveOptions::new(60, 1)).unwrap();
        let ppt = ppt_visibility(&rho, &[1]).unwrap();
        assert!((rep.visibility - ppt).abs() < 1e-3, "{} vs {ppt}", rep.visibility);
        assert!(rep.trace.windows(2).all(|w| w[1] >= w[0] - 1e-6));
        let recon = rep.decomposition.reconstruct(&[2, 2]);
        let target = states::white_noise_mix(&rho, rep.visibility);
        assert!(recon.sub(&target).unwrap().frobenius_norm() < 1e-6 * (1.0 + target.frobenius_norm()));
    }

    #[test]
    fn regroup_moves_parties() {
        let a = states::random_density(vec![2], 1).unwrap().into_op();
        let b = states::random_density(vec![3], 2).unwrap().into_op();
        let c = states::random_density(vec![2], 3).unwrap().into_op();
        let abc = a.kron(&b).kron(&c);
        let g = regroup(&abc, &[1]).unwrap();
        assert_eq!(g.dims(), &[3, 4]);
        assert!(g.max_abs_diff(&b.kron(&a.kron(&c)).with_dims(vec![3, 4]).unwrap()) < 1e-15);
    }

    #[test]
    fn outer_bound_brackets_bell() {
        let bell = states::bell().into_op();
        let ub = outer_upper_bound(&bell, 162, &SolverOptions::default()).unwrap();
        assert!((1.0 / 3.0 - 1e-6..0.36).contains(&ub), "{ub}");
        let qutrit = HermitianOp::maximally_mixed(vec![3, 2]);
        assert!(outer_upper_bound(&qutrit, 162, &SolverOptions::default()).is_err());
    }
}
