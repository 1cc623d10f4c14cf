//! Decomposition programs shared by all certifiers.
//!
//! A [`Block`] pairs fixed vertices `F_λ` on a set of parties with free PSD
//! partners `τ̃_λ` on the complementary parties (optionally also PPT). An
//! equation asks `Σ_blocks Σ_λ F_λ ⊗ τ̃_λ` to equal a target; several
//! equations may share one visibility `t`.

use crate::basis::{ProductBasis, SplitLayout};
use crate::conic::{ConeKind, ConstraintId, SdpProblem, SdpSolution, SolveStatus, SolverOptions, Term, VarId};
use crate::error::{Error, Result};
use crate::hermitian::HermitianOp;

/// Default upper cap on `t`: larger values only say "separable with margin".
pub const T_CAP: f64 = 1.5;

#[derive(Clone, Debug)]
pub struct Block {
    /// Parties carrying the fixed vertices, ascending.
    pub fixed_parties: Vec<usize>,
    /// Vertices on `fixed_parties` (dims in that order).
    pub vertices: Vec<HermitianOp>,
    /// Partial-transpose mask over the partner parties; `Some` adds a PPT
    /// constraint to every partner.
    pub ppt: Option<Vec<bool>>,
}

impl Block {
    pub fn new(fixed_parties: Vec<usize>, vertices: Vec<HermitianOp>) -> Self {
        Self {
            fixed_parties,
            vertices,
            ppt: None,
        }
    }

    pub fn with_ppt(mut self, mask: Vec<bool>) -> Self {
        self.ppt = Some(mask);
        self
    }

    pub fn partner_parties(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|p| !self.fixed_parties.contains(p)).collect()
    }

    fn check(&self, dims: &[usize]) -> Result<()> {
        let n = dims.len();
        let mut sorted = self.fixed_parties.clone();
        sorted.dedup();
        if sorted.is_empty()
            || sorted.len() != self.fixed_parties.len()
            || sorted.windows(2).any(|w| w[0] >= w[1])
            || sorted.iter().any(|&p| p >= n)
            || sorted.len() == n
        {
            return Err(Error::invalid(format!(
                "fixed parties {:?} must be a proper ascending subset of 0..{n}",
                self.fixed_parties
            )));
        }
        if self.vertices.is_empty() {
            return Err(Error::invalid("block without vertices"));
        }
        let fdims: Vec<usize> = self.fixed_parties.iter().map(|&p| dims[p]).collect();
        if let Some(v) = self.vertices.iter().find(|v| v.dims() != fdims.as_slice()) {
            return Err(Error::invalid(format!(
                "vertex dims {:?} do not match fixed parties {:?} of {dims:?}",
                v.dims(),
                self.fixed_parties
            )));
        }
        if let Some(mask) = &self.ppt {
            if mask.len() != n - self.fixed_parties.len() || !mask.iter().any(|&m| m) {
                return Err(Error::invalid("PPT mask must flag at least one partner party"));
            }
        }
        Ok(())
    }
}

fn trace_entries(basis: &ProductBasis) -> Vec<(usize, usize, f64)> {
    (0..basis.len())
        .filter_map(|k| {
            let x = basis.trace_of(k);
            (x != 0.0).then_some((0, k, x))
        })
        .collect()
}

/// Places `fixed ⊗ partner` (given on `fixed_parties ++ partner_parties`)
/// into natural party order.
pub fn place(fixed_parties: &[usize], fixed: &HermitianOp, partner: &HermitianOp) -> HermitianOp {
    let n = fixed_parties.len() + partner.num_subsystems();
    let partner_parties: Vec<usize> = (0..n).filter(|p| !fixed_parties.contains(p)).collect();
    let order: Vec<usize> = fixed_parties.iter().chain(&partner_parties).copied().collect();
    let perm: Vec<usize> = (0..n).map(|k| order.iter().position(|&q| q == k).unwrap()).collect();
    let joint = fixed.kron(partner);
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        joint
    } else {
        joint.permute(&perm).expect("valid permutation")
    }
}

/// One block of a solved decomposition.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub fixed_parties: Vec<usize>,
    pub vertices: Vec<HermitianOp>,
    pub partners: Vec<HermitianOp>,
}

impl BlockDecomposition {
    pub fn reconstruct(&self, dims: &[usize]) -> HermitianOp {
        let mut acc = HermitianOp::zeros(dims.to_vec());
        for (v, t) in self.vertices.iter().zip(&self.partners) {
            acc = acc.add(&place(&self.fixed_parties, v, t)).expect("dims");
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        use crate::io::MatrixDoc;
        serde_json::json!({
            "fixed_parties": self.fixed_parties,
            "vertices": self.vertices.iter().map(MatrixDoc::from_op).collect::<Vec<_>>(),
            "partners": self.partners.iter().map(MatrixDoc::from_op).collect::<Vec<_>>(),
        })
    }
}

/// Sum of the reconstructions of several blocks.
pub fn reconstruct_all(dims: &[usize], blocks: &[BlockDecomposition]) -> HermitianOp {
    blocks.iter().fold(HermitianOp::zeros(dims.to_vec()), |acc, b| {
        acc.add(&b.reconstruct(dims)).expect("dims")
    })
}

struct BlockVars {
    partners: Vec<VarId>,
    psd: Vec<ConstraintId>,
    ppt: Vec<ConstraintId>,
}

/// Adds partner variables and their PSD/PPT constraints; returns the terms
/// they contribute (with `sign`) to an equation over the full coordinates.
fn add_block(
    p: &mut SdpProblem,
    dims: &[usize],
    block: &Block,
    sign: f64,
    label: &str,
) -> Result<(BlockVars, Vec<Term>)> {
    block.check(dims)?;
    let n = dims.len();
    let partner_parties = block.partner_parties(n);
    let fdims: Vec<usize> = block.fixed_parties.iter().map(|&q| dims[q]).collect();
    let pdims: Vec<usize> = partner_parties.iter().map(|&q| dims[q]).collect();
    let fbasis = ProductBasis::new(&fdims);
    let plen: usize = pdims.iter().map(|d| d * d).product();
    let layout = SplitLayout::new(dims, &block.fixed_parties, &partner_parties);
    let mut vars = BlockVars {
        partners: Vec::new(),
        psd: Vec::new(),
        ppt: Vec::new(),
    };
    let mut terms = Vec::with_capacity(block.vertices.len());
    for (lam, v) in block.vertices.iter().enumerate() {
        let var = p.add_hermitian(format!("{label}[{lam}]"), pdims.clone());
        vars.psd.push(p.require_psd(var)?);
        if let Some(mask) = &block.ppt {
            vars.ppt.push(p.require_ppt(var, mask)?);
        }
        let s = fbasis.coords(v);
        let mut entries = Vec::new();
        for (i, &si) in s.iter().enumerate() {
            if si.abs() < 1e-15 {
                continue;
            }
            for j in 0..plen {
                entries.push((layout.row(i, j), j, sign * si));
            }
        }
        terms.push(Term { var, entries });
        vars.partners.push(var);
    }
    Ok((vars, terms))
}

/// Noise mixed into the state along the ray.
#[derive(Clone, Debug)]
pub enum Noise {
    /// `1/d`.
    White,
    /// A fixed state `γ`.
    Fixed(HermitianOp),
    /// `tρ + γ = Σ…` with `γ ⪰ 0`, `Tr γ = 1 − t` free (generalised robustness).
    AnyState,
    /// `tρ = Σ F ⊗ (τ̃ − η̃)` with `Σ Tr η̃ = 1 − t` (absolute robustness).
    Separable,
}

#[derive(Clone, Debug)]
pub struct RayProblem {
    pub rho: HermitianOp,
    pub noise: Noise,
    pub equations: Vec<Vec<Block>>,
    pub cap: f64,
}

#[derive(Clone, Debug)]
pub struct RaySolution {
    pub t: f64,
    /// `t` reached the cap.
    pub capped: bool,
    pub status: SolveStatus,
    pub message: String,
    /// `[equation][block][λ]`.
    pub partners: Vec<Vec<Vec<HermitianOp>>>,
    /// Separable-noise partners `η̃` (same shape), for [`Noise::Separable`].
    pub noise_partners: Vec<Vec<Vec<HermitianOp>>>,
    /// Free noise state for [`Noise::AnyState`].
    pub noise_state: Option<HermitianOp>,
    /// `‖target − Σ F⊗τ̃‖_F / (1 + ‖target‖_F)` per equation.
    pub residuals: Vec<f64>,
    /// Witness `W = −y` from each equation multiplier; for a single
    /// equation with white noise it satisfies `Tr[W(1/d − ρ)] = 1` and the
    /// vertex constraints of the dual program.
    pub witnesses: Vec<HermitianOp>,
    pub dual_objective: f64,
    pub min_partner_eigenvalue: f64,
    pub iterations: u32,
    pub solve_time: f64,
}

impl RaySolution {
    pub fn is_usable(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Inaccurate)
    }
}

impl RayProblem {
    pub fn new(rho: HermitianOp, equations: Vec<Vec<Block>>) -> Self {
        Self {
            rho,
            noise: Noise::White,
            equations,
            cap: T_CAP,
        }
    }

    pub fn with_noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<RaySolution> {
        let dims = self.rho.dims().to_vec();
        let basis = ProductBasis::new(&dims);
        let len = basis.len();
        let rho_c = basis.coords(&self.rho);
        let mut p = SdpProblem::new();
        let t = p.add_scalar("t");
        // cap − t ≥ 0
        p.add_constraint(
            "cap",
            ConeKind::Nonneg,
            1,
            vec![Term {
                var: t,
                entries: vec![(0, 0, -1.0)],
            }],
            vec![self.cap],
        )?;

        // Noise direction: target = t·(ρ − n) + n for fixed noise n.
        let fixed_noise = match &self.noise {
            Noise::White => Some(HermitianOp::maximally_mixed(dims.clone())),
            Noise::Fixed(g) => {
                if g.dims() != dims.as_slice() {
                    return Err(Error::invalid("noise state dims differ from ρ"));
                }
                Some(g.clone())
            }
            Noise::AnyState | Noise::Separable => None,
        };
        let noise_c = fixed_noise.as_ref().map(|n| basis.coords(n));

        let gamma = match self.noise {
            Noise::AnyState => {
                let g = p.add_hermitian("gamma", dims.clone());
                p.require_psd(g)?;
                let tr = trace_entries(&basis);
                // Tr γ + t − 1 = 0
                p.add_constraint(
                    "tr(gamma)",
                    ConeKind::Zero,
                    1,
                    vec![
                        Term { var: g, entries: tr },
                        Term {
                            var: t,
                            entries: vec![(0, 0, 1.0)],
                        },
                    ],
                    vec![-1.0],
                )?;
                Some(g)
            }
            _ => None,
        };

        let mut eq_ids = Vec::new();
        let mut all_vars = Vec::new();
        let mut all_eta = Vec::new();
        let mut eta_trace_terms = Vec::new();
        for (e, blocks) in self.equations.iter().enumerate() {
            let mut terms = Vec::new();
            let mut eq_vars = Vec::new();
            let mut eq_eta = Vec::new();
            for (b, block) in blocks.iter().enumerate() {
                let (vars, bt) = add_block(&mut p, &dims, block, 1.0, &format!("tau{e}.{b}"))?;
                terms.extend(bt);
                eq_vars.push(vars);
                if matches!(self.noise, Noise::Separable) {
                    let (evars, et) = add_block(&mut p, &dims, block, -1.0, &format!("eta{e}.{b}"))?;
                    terms.extend(et);
                    let pdims: Vec<usize> = block.partner_parties(dims.len()).iter().map(|&q| dims[q]).collect();
                    let tr = trace_entries(&ProductBasis::new(&pdims));
                    for &v in &evars.partners {
                        eta_trace_terms.push(Term {
                            var: v,
                            entries: tr.clone(),
                        });
                    }
                    eq_eta.push(evars);
                }
            }
            // − t·(ρ − n) − n, or − tρ − γ, or − tρ
            let t_entries: Vec<_> = (0..len)
                .filter_map(|k| {
                    let x = match &noise_c {
                        Some(n) => rho_c[k] - n[k],
                        None => rho_c[k],
                    };
                    (x != 0.0).then_some((k, 0, -x))
                })
                .collect();
            terms.push(Term {
                var: t,
                entries: t_entries,
            });
            if let Some(g) = gamma {
                terms.push(Term {
                    var: g,
                    entries: (0..len).map(|k| (k, k, -1.0)).collect(),
                });
            }
            let constant: Vec<f64> = match &noise_c {
                Some(n) => n.iter().map(|x| -x).collect(),
                None => vec![0.0; len],
            };
            eq_ids.push(p.add_constraint(format!("decomposition{e}"), ConeKind::Zero, len, terms, constant)?);
            all_vars.push(eq_vars);
            all_eta.push(eq_eta);
        }
        if matches!(self.noise, Noise::Separable) {
            // Σ Tr η̃ + t − 1 = 0, one per equation
            let mut per_eq: Vec<Vec<Term>> = vec![Vec::new(); self.equations.len()];
            let mut idx = 0;
            for (e, eta) in all_eta.iter().enumerate() {
                for ev in eta {
                    for _ in &ev.partners {
                        per_eq[e].push(eta_trace_terms[idx].clone());
                        idx += 1;
                    }
                }
            }
            for (e, mut terms) in per_eq.into_iter().enumerate() {
                terms.push(Term {
                    var: t,
                    entries: vec![(0, 0, 1.0)],
                });
                p.add_constraint(format!("tr(eta){e}"), ConeKind::Zero, 1, terms, vec![-1.0])?;
            }
        }
        p.set_objective(vec![(t, 0, 1.0)])?;
        let sol = p.solve(opts);
        self.collect(&sol, t, gamma, &eq_ids, &all_vars, &all_eta, &basis)
    }

    #[allow(clippy::too_many_arguments)]
    fn collect(
        &self,
        sol: &SdpSolution,
        t: VarId,
        gamma: Option<VarId>,
        eq_ids: &[ConstraintId],
        vars: &[Vec<BlockVars>],
        eta: &[Vec<BlockVars>],
        basis: &ProductBasis,
    ) -> Result<RaySolution> {
        let mut out = RaySolution {
            t: f64::NAN,
            capped: false,
            status: sol.status,
            message: sol.message.clone(),
            partners: Vec::new(),
            noise_partners: Vec::new(),
            noise_state: None,
            residuals: Vec::new(),
            witnesses: Vec::new(),
            dual_objective: sol.dual_objective,
            min_partner_eigenvalue: f64::INFINITY,
            iterations: sol.iterations,
            solve_time: sol.solve_time,
        };
        if !sol.is_usable() {
            return Ok(out);
        }
        let tv = sol.scalar(t);
        out.t = tv;
        out.capped = tv >= self.cap - 1e-6;
        out.noise_state = gamma.map(|g| sol.matrix(g));
        let fixed_noise = match &self.noise {
            Noise::White => Some(HermitianOp::maximally_mixed(self.rho.dims().to_vec())),
            Noise::Fixed(g) => Some(g.clone()),
            _ => None,
        };
        for (e, blocks) in self.equations.iter().enumerate() {
            let target = match (&fixed_noise, &out.noise_state) {
                (Some(nz), _) => self.rho.lincomb(tv, nz, 1.0 - tv)?,
                (None, Some(g)) => self.rho.lincomb(tv, g, 1.0)?,
                (None, None) => self.rho.scale(tv),
            };
            let mut recon = HermitianOp::zeros(self.rho.dims().to_vec());
            let mut eq_partners = Vec::new();
            let mut eq_eta = Vec::new();
            for (b, block) in blocks.iter().enumerate() {
                let ops: Vec<HermitianOp> = vars[e][b].partners.iter().map(|&v| sol.matrix(v)).collect();
                for (v, op) in block.vertices.iter().zip(&ops) {
                    out.min_partner_eigenvalue = out.min_partner_eigenvalue.min(op.min_eigenvalue());
                    recon = recon.add(&place(&block.fixed_parties, v, op))?;
                }
                if let Some(ev) = eta.get(e).and_then(|x| x.get(b)) {
                    let etas: Vec<HermitianOp> = ev.partners.iter().map(|&v| sol.matrix(v)).collect();
                    for (v, op) in block.vertices.iter().zip(&etas) {
                        recon = recon.sub(&place(&block.fixed_parties, v, op))?;
                    }
                    eq_eta.push(etas);
                }
                eq_partners.push(ops);
            }
            let diff = recon.sub(&target)?.frobenius_norm();
            out.residuals.push(diff / (1.0 + target.frobenius_norm()));
            out.partners.push(eq_partners);
            out.noise_partners.push(eq_eta);
            let y = sol.dual(eq_ids[e]);
            let w: Vec<f64> = y.iter().map(|x| -x).collect();
            out.witnesses.push(basis.op_from_coords(&w));
        }
        Ok(out)
    }
}

/// Minimises `Tr(Yρ)` over unit-trace `ρ` admitting every equation's
/// decomposition `ρ = Σ F ⊗ τ̃`.
#[derive(Clone, Debug)]
pub struct StateProblem {
    pub objective: HermitianOp,
    pub equations: Vec<Vec<Block>>,
}

#[derive(Clone, Debug)]
pub struct StateSolution {
    pub value: f64,
    pub state: HermitianOp,
    pub status: SolveStatus,
    pub message: String,
    pub partners: Vec<Vec<Vec<HermitianOp>>>,
}

impl StateProblem {
    pub fn solve(&self, opts: &SolverOptions) -> Result<StateSolution> {
        let dims = self.objective.dims().to_vec();
        let basis = ProductBasis::new(&dims);
        let len = basis.len();
        let mut p = SdpProblem::new();
        let rho = p.add_hermitian("rho", dims.clone());
        let tr = trace_entries(&basis);
        p.add_constraint(
            "trace",
            ConeKind::Zero,
            1,
            vec![Term { var: rho, entries: tr }],
            vec![-1.0],
        )?;
        let mut all_vars = Vec::new();
        for (e, blocks) in self.equations.iter().enumerate() {
            let mut terms = Vec::new();
            let mut eq_vars = Vec::new();
            for (b, block) in blocks.iter().enumerate() {
                let (vars, bt) = add_block(&mut p, &dims, block, 1.0, &format!("tau{e}.{b}"))?;
                terms.extend(bt);
                eq_vars.push(vars);
            }
            terms.push(Term {
                var: rho,
                entries: (0..len).map(|k| (k, k, -1.0)).collect(),
            });
            p.add_constraint(format!("decomposition{e}"), ConeKind::Zero, len, terms, vec![0.0; len])?;
            all_vars.push(eq_vars);
        }
        let y = basis.coords(&self.objective);
        p.set_objective(
            y.iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(k, &x)| (rho, k, -x))
                .collect(),
        )?;
        let sol = p.solve(opts);
        if !sol.is_usable() {
            return Err(Error::Solver(format!(
                "state minimisation: {:?} ({})",
                sol.status, sol.message
            )));
        }
        let partners = all_vars
            .iter()
            .map(|eq| {
                eq.iter()
                    .map(|bv| bv.partners.iter().map(|&v| sol.matrix(v)).collect())
                    .collect()
            })
            .collect();
        Ok(StateSolution {
            value: -sol.objective,
            state: sol.matrix(rho).with_dims(dims)?,
            status: sol.status,
            message: sol.message.clone(),
            partners,
        })
    }
}

/// Explicit dual of a single-equation white-noise ray problem:
///
/// `min Tr(Y₀ρ) + 1` s.t. `Tr[Y₀(1/d − ρ)] = 1`,
/// `Tr_F[(F_λ ⊗ 1)Y₀] + Y_λ ⪰ 0` and `−Y_λ^{T} ⪰ 0` (PPT blocks only).
#[derive(Clone, Debug)]
pub struct RayDual {
    pub value: f64,
    pub y0: HermitianOp,
    /// `Y_λ` per block (empty for blocks without PPT).
    pub y_ppt: Vec<Vec<HermitianOp>>,
    pub status: SolveStatus,
    pub message: String,
}

pub fn solve_ray_dual(rho: &HermitianOp, blocks: &[Block], opts: &SolverOptions) -> Result<RayDual> {
    let dims = rho.dims().to_vec();
    let n = dims.len();
    let basis = ProductBasis::new(&dims);
    let len = basis.len();
    let rho_c = basis.coords(rho);
    let noise_c = basis.coords(&HermitianOp::maximally_mixed(dims.clone()));
    let mut p = SdpProblem::new();
    let y0 = p.add_hermitian("Y0", dims.clone());
    let norm: Vec<_> = (0..len)
        .filter_map(|k| {
            let x = noise_c[k] - rho_c[k];
            (x != 0.0).then_some((0, k, x))
        })
        .collect();
    p.add_constraint(
        "normalisation",
        ConeKind::Zero,
        1,
        vec![Term { var: y0, entries: norm }],
        vec![-1.0],
    )?;
    let mut ppt_vars = Vec::new();
    for (b, block) in blocks.iter().enumerate() {
        block.check(&dims)?;
        let partner_parties = block.partner_parties(n);
        let fdims: Vec<usize> = block.fixed_parties.iter().map(|&q| dims[q]).collect();
        let pdims: Vec<usize> = partner_parties.iter().map(|&q| dims[q]).collect();
        let fbasis = ProductBasis::new(&fdims);
        let pbasis = ProductBasis::new(&pdims);
        let plen = pbasis.len();
        let layout = SplitLayout::new(&dims, &block.fixed_parties, &partner_parties);
        let mut bvars = Vec::new();
        for (lam, v) in block.vertices.iter().enumerate() {
            let s = fbasis.coords(v);
            let mut entries = Vec::new();
            for (i, &si) in s.iter().enumerate() {
                if si.abs() < 1e-15 {
                    continue;
                }
                for j in 0..plen {
                    entries.push((j, layout.row(i, j), si));
                }
            }
            let mut terms = vec![Term { var: y0, entries }];
            if let Some(mask) = &block.ppt {
                let yl = p.add_hermitian(format!("Y{b}[{lam}]"), pdims.clone());
                terms.push(Term {
                    var: yl,
                    entries: (0..plen).map(|j| (j, j, 1.0)).collect(),
                });
                // −Y_λ^T ⪰ 0
                let flipped = (0..plen).map(|j| (j, j, -pbasis.transpose_sign(j, mask))).collect();
                p.add_constraint(
                    format!("ppt-dual{b}[{lam}]"),
                    ConeKind::HermitianPsd(pdims.clone()),
                    plen,
                    vec![Term {
                        var: yl,
                        entries: flipped,
                    }],
                    vec![0.0; plen],
                )?;
                bvars.push(yl);
            }
            p.add_constraint(
                format!("vertex{b}[{lam}]"),
                ConeKind::HermitianPsd(pdims.clone()),
                plen,
                terms,
                vec![0.0; plen],
            )?;
        }
        ppt_vars.push(bvars);
    }
    p.set_objective(
        rho_c
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(k, &x)| (y0, k, -x))
            .collect(),
    )?;
    let sol = p.solve(opts);
    if !sol.is_usable() {
        return Err(Error::Solver(format!(
            "dual program: {:?} ({})",
            sol.status, sol.message
        )));
    }
    Ok(RayDual {
        value: 1.0 - sol.objective,
        y0: sol.matrix(y0).with_dims(dims)?,
        y_ppt: ppt_vars
            .iter()
            .map(|vs| vs.iter().map(|&v| sol.matrix(v)).collect())
            .collect(),
        status: sol.status,
        message: sol.message.clone(),
    })
}

/// `Tr_F[(F ⊗ 1) W]` on the partner parties of `block`.
pub fn vertex_contraction(w: &HermitianOp, fixed_parties: &[usize], vertex: &HermitianOp) -> Result<HermitianOp> {
    let n = w.num_subsystems();
    let dims = w.dims();
    let partner: Vec<usize> = (0..n).filter(|p| !fixed_parties.contains(p)).collect();
    let pdims: Vec<usize> = partner.iter().map(|&q| dims[q]).collect();
    let ident = HermitianOp::identity(pdims);
    let lifted = place(fixed_parties, vertex, &ident);
    // (F ⊗ 1)W is not Hermitian; use the symmetrised product, whose partial
    // trace over F equals Tr_F[(F ⊗ 1)W] because the trace is cyclic there.
    let prod = lifted.matrix() * w.matrix();
    let sym = (prod.clone() + prod.adjoint()).unscale(2.0);
    let op = HermitianOp::new(w.dims().to_vec(), sym)?;
    op.partial_trace(&partner)
}
