//! Multiparty classes: full separability (FSEP), biseparability (BSEP),
//! full biseparability (FBSEP) and separability across a single cut.
//!
//! Cut classes share one adaption engine: every block is a cut whose fixed
//! side holds a polytope; after each solve the partners on the other side
//! become that side's polytope and the orientation flips. FSEP cycles a free
//! party group against a product polytope over the remaining groups.

use std::fmt;
use std::str::FromStr;

use log::{debug, info, warn};
use serde_json::{json, Value};

use crate::bipartite::DROP_TOL;
use crate::conic::{SolveStatus, SolverOptions};
use crate::decomp::{solve_ray_dual, Block, BlockDecomposition, RayDual, RayProblem, StateProblem};
use crate::error::{Error, Result};
use crate::hermitian::HermitianOp;
use crate::polytope::{Polytope, PolytopeKind, ProductPolytope};
use crate::states::{haar_projector, random_product_pure, rng_from_seed, StateRng};

/// A bipartition of the parties into `a | b`, both sides ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

fn parse_side(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::parse("empty side in cut"));
    }
    let mut out = Vec::new();
    if s.contains(',') {
        // a trailing comma marks a one-element list: "30," is party 30
        for part in s.strip_suffix(',').unwrap_or(s).split(',') {
            let p = part.trim();
            out.push(
                p.parse::<usize>()
                    .map_err(|_| Error::parse(format!("bad party index {p:?}")))?,
            );
        }
    } else {
        for c in s.chars() {
            let idx = match c {
                'A'..='Z' => c as usize - 'A' as usize,
                'a'..='z' => c as usize - 'a' as usize,
                '0'..='9' => c as usize - '0' as usize,
                _ => return Err(Error::parse(format!("bad party label {c:?}"))),
            };
            out.push(idx);
        }
    }
    let n = out.len();
    out.sort_unstable();
    out.dedup();
    if out.len() != n {
        return Err(Error::parse(format!("repeated party in {s:?}")));
    }
    Ok(out)
}

impl Cut {
    pub fn new(mut a: Vec<usize>, mut b: Vec<usize>) -> Result<Self> {
        a.sort_unstable();
        b.sort_unstable();
        if a.is_empty() || b.is_empty() || a.iter().any(|p| b.contains(p)) {
            return Err(Error::invalid(format!("{a:?}|{b:?} is not a bipartition")));
        }
        Ok(Self { a, b })
    }

    /// The cut `{party} | rest` of `n` parties.
    pub fn single(party: usize, n: usize) -> Result<Self> {
        Self::new(vec![party], (0..n).filter(|&p| p != party).collect())
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut all: Vec<usize> = self.a.iter().chain(&self.b).copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(Error::invalid(format!("cut {self} does not split {n} parties")));
        }
        Ok(())
    }

    pub fn side(&self, a: bool) -> &[usize] {
        if a {
            &self.a
        } else {
            &self.b
        }
    }
}

impl FromStr for Cut {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('|')
            .ok_or_else(|| Error::parse(format!("cut {s:?} needs a '|'")))?;
        if b.contains('|') {
            return Err(Error::parse(format!("cut {s:?} has more than one '|'")));
        }
        Cut::new(parse_side(a)?, parse_side(b)?).map_err(|e| Error::parse(e.to_string()))
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |v: &[usize]| -> String {
            if v.iter().all(|&p| p < 26) {
                v.iter().map(|&p| (b'A' + p as u8) as char).collect()
            } else if v.len() == 1 {
                format!("{},", v[0])
            } else {
                v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
            }
        };
        write!(f, "{}|{}", side(&self.a), side(&self.b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeparabilityClass {
    Fsep,
    Bsep,
    Fbsep,
    /// Separability across a cut; `None` means `A|B` of a bipartite state.
    Sep(Option<Cut>),
}

impl SeparabilityClass {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Fsep if n < 2 => Err(Error::invalid("FSEP needs at least two parties")),
            Self::Bsep | Self::Fbsep if n != 3 => Err(Error::invalid(format!(
                "{self} is implemented for three parties, got {n}"
            ))),
            Self::Sep(None) if n != 2 => Err(Error::invalid(format!(
                "plain 'sep' needs a bipartite state; use sep:<cut> for {n} parties"
            ))),
            Self::Sep(Some(c)) => c.validate(n),
            _ => Ok(()),
        }
    }
}

impl FromStr for SeparabilityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "fsep" => return Ok(Self::Fsep),
            "bsep" => return Ok(Self::Bsep),
            "fbsep" => return Ok(Self::Fbsep),
            "sep" => return Ok(Self::Sep(None)),
            _ => {}
        }
        // "SEP(A|BC)" is the display form
        if let Some(cut) = t
            .get(..4)
            .filter(|h| h.eq_ignore_ascii_case("sep("))
            .and_then(|_| t[4..].strip_suffix(')'))
        {
            return Ok(Self::Sep(Some(cut.parse()?)));
        }
        match t.split_once(':') {
            Some((head, cut)) if head.eq_ignore_ascii_case("sep") => Ok(Self::Sep(Some(cut.parse()?))),
            _ => Err(Error::parse(format!(
                "unknown class {s:?} (expected fsep, bsep, fbsep, sep or sep:<cut>)"
            ))),
        }
    }
}

impl fmt::Display for SeparabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fsep => write!(f, "FSEP"),
            Self::Bsep => write!(f, "BSEP"),
            Self::Fbsep => write!(f, "FBSEP"),
            Self::Sep(None) => write!(f, "SEP"),
            Self::Sep(Some(c)) => write!(f, "SEP({c})"),
        }
    }
}

fn check_three(rho: &HermitianOp) -> Result<()> {
    if rho.num_subsystems() != 3 {
        return Err(Error::invalid(format!(
            "expected three parties, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

fn vertices_on(p: &Polytope, dims: Vec<usize>) -> Result<Vec<HermitianOp>> {
    p.vertices().iter().map(|v| v.with_dims(dims.clone())).collect()
}

/// PPT block for a polytope on `party` with the remaining pair free.
fn fsep_block(rho: &HermitianOp, p: &Polytope, party: usize) -> Result<Block> {
    check_three(rho)?;
    let dims = rho.dims();
    if party > 2 {
        return Err(Error::invalid(format!("party {party} out of range")));
    }
    let pair: usize = (0..3).filter(|&q| q != party).map(|q| dims[q]).product();
    if pair > 6 {
        return Err(Error::invalid(format!(
            "the free pair is {pair}-dimensional; PPT is exact only up to 2×3 (use the product-polytope mode)"
        )));
    }
    Ok(Block::new(vec![party], vertices_on(p, vec![dims[party]])?).with_ppt(vec![false, true]))
}

#[derive(Clone, Debug)]
pub struct FixedMulti {
    pub t: f64,
    pub capped: bool,
    /// `[equation][block]`.
    pub decompositions: Vec<Vec<BlockDecomposition>>,
    pub residuals: Vec<f64>,
    pub status: SolveStatus,
}

fn solve_fixed(rho: &HermitianOp, equations: Vec<Vec<Block>>, opts: &SolverOptions) -> Result<FixedMulti> {
    let prob = RayProblem::new(rho.clone(), equations);
    let sol = prob.solve(opts)?;
    if !sol.is_usable() {
        return Err(Error::Solver(format!(
            "visibility program: {:?} ({})",
            sol.status, sol.message
        )));
    }
    let decompositions = prob
        .equations
        .iter()
        .zip(sol.partners)
        .map(|(blocks, parts)| {
            blocks
                .iter()
                .zip(parts)
                .map(|(b, partners)| BlockDecomposition {
                    fixed_parties: b.fixed_parties.clone(),
                    vertices: b.vertices.clone(),
                    partners,
                })
                .collect()
        })
        .collect();
    Ok(FixedMulti {
        t: sol.t,
        capped: sol.capped,
        decompositions,
        residuals: sol.residuals,
        status: sol.status,
    })
}

/// FSEP visibility with a polytope on `party` and the other two parties
/// free under PSD and PPT constraints.
pub fn fsep_visibility_fixed(
    rho: &HermitianOp,
    p: &Polytope,
    party: usize,
    opts: &SolverOptions,
) -> Result<FixedMulti> {
    let block = fsep_block(rho, p, party)?;
    solve_fixed(rho, vec![vec![block]], opts)
}

/// Explicit dual of [`fsep_visibility_fixed`]; its value equals the primal
/// visibility at optimum.
pub fn fsep_dual_witness(rho: &HermitianOp, p: &Polytope, party: usize, opts: &SolverOptions) -> Result<RayDual> {
    let block = fsep_block(rho, p, party)?;
    solve_ray_dual(rho, &[block], opts)
}

fn single_blocks(rho: &HermitianOp, ps: [&Polytope; 3]) -> Result<[Block; 3]> {
    check_three(rho)?;
    let dims = rho.dims();
    let mk = |q: usize| -> Result<Block> { Ok(Block::new(vec![q], vertices_on(ps[q], vec![dims[q]])?)) };
    Ok([mk(0)?, mk(1)?, mk(2)?])
}

/// BSEP visibility: one decomposition mixing the three cuts, each with the
/// single party's polytope fixed and an arbitrary partner on the pair.
pub fn bsep_visibility_fixed(
    rho: &HermitianOp,
    pa: &Polytope,
    pb: &Polytope,
    pc: &Polytope,
    opts: &SolverOptions,
) -> Result<FixedMulti> {
    let [a, b, c] = single_blocks(rho, [pa, pb, pc])?;
    solve_fixed(rho, vec![vec![c, a, b]], opts)
}

/// FBSEP visibility: three decompositions, one per cut, sharing `t`.
pub fn fbsep_visibility_fixed(
    rho: &HermitianOp,
    pa: &Polytope,
    pb: &Polytope,
    pc: &Polytope,
    opts: &SolverOptions,
) -> Result<FixedMulti> {
    let [a, b, c] = single_blocks(rho, [pa, pb, pc])?;
    solve_fixed(rho, vec![vec![a], vec![b], vec![c]], opts)
}

/// One cut inside a cut-class program: the polytope sits on side `a` when
/// `fixed_a`, otherwise on side `b`.
#[derive(Clone, Debug)]
pub struct CutBlock {
    pub cut: Cut,
    pub fixed_a: bool,
    pub polytope: Polytope,
}

impl CutBlock {
    pub fn random(cut: Cut, fixed_a: bool, dims: &[usize], n_vertices: usize, rng: &mut StateRng) -> Result<Self> {
        let side: Vec<usize> = cut.side(fixed_a).iter().map(|&p| dims[p]).collect();
        let polytope = Polytope::random_inner_with(side, n_vertices, rng)?;
        Ok(Self { cut, fixed_a, polytope })
    }

    pub fn fixed_parties(&self) -> &[usize] {
        self.cut.side(self.fixed_a)
    }

    fn block(&self, dims: &[usize]) -> Result<Block> {
        let fd: Vec<usize> = self.fixed_parties().iter().map(|&p| dims[p]).collect();
        Ok(Block::new(
            self.fixed_parties().to_vec(),
            vertices_on(&self.polytope, fd)?,
        ))
    }
}

#[derive(Clone, Debug)]
pub struct MultipartyReport {
    pub class: SeparabilityClass,
    pub dims: Vec<usize>,
    pub visibility: f64,
    pub capped: bool,
    pub seed: u64,
    pub n_vertices: usize,
    pub trace: Vec<f64>,
    /// Free group (FSEP) or fixed-side orientation (cut classes) per step.
    pub steps: Vec<String>,
    pub statuses: Vec<SolveStatus>,
    pub converged: bool,
    /// Best decomposition, `[equation][block]`.
    pub decompositions: Vec<Vec<BlockDecomposition>>,
    pub residuals: Vec<f64>,
    /// Polytopes by party group (FSEP) or by cut block (cut classes).
    pub polytopes: Vec<(Vec<usize>, Polytope)>,
    /// Final cut blocks, usable as a warm start (cut classes only).
    pub next_blocks: Vec<Vec<CutBlock>>,
    /// Blocks that produced `visibility` (cut classes only).
    pub best_blocks: Vec<Vec<CutBlock>>,
    /// Index into `polytopes` of the group left free at the best step (FSEP only).
    pub free_group: Option<usize>,
}

impl MultipartyReport {
    pub fn to_json(&self, embed_decomposition: bool) -> Value {
        let mut v = json!({
            "class": self.class.to_string(),
            "dims": self.dims,
            "visibility": self.visibility,
            "visibility_clipped": self.visibility.min(1.0),
            "capped": self.capped,
            "certified_member": self.visibility >= 1.0,
            "seed": self.seed,
            "n_vertices": self.n_vertices,
            "converged": self.converged,
            "trace": self.trace,
            "steps": self.steps,
            "statuses": self.statuses,
            "residuals": self.residuals,
            "polytopes": self.polytopes.iter().map(|(g, p)| json!({"parties": g, "polytope": p.to_doc()})).collect::<Vec<_>>(),
        });
        if embed_decomposition {
            v["decompositions"] = self
                .decompositions
                .iter()
                .map(|eq| eq.iter().map(BlockDecomposition::to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into();
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct MultiOptions {
    pub n_vertices: usize,
    pub seed: u64,
    pub conv_tol: f64,
    pub max_rounds: usize,
    pub drop_tol: f64,
    pub solver: SolverOptions,
    /// Merge the last two parties under PPT in FSEP mode when exact.
    pub merge_ppt_pair: bool,
}

impl Default for MultiOptions {
    fn default() -> Self {
        Self {
            n_vertices: 300,
            seed: 0,
            conv_tol: 1e-4,
            max_rounds: 200,
            drop_tol: DROP_TOL,
            solver: SolverOptions::default(),
            merge_ppt_pair: true,
        }
    }
}

impl MultiOptions {
    pub fn new(n_vertices: usize, seed: u64) -> Self {
        Self {
            n_vertices,
            seed,
            ..Self::default()
        }
    }
}

/// Default cut blocks for a class: the single party (or side `a`) holds the
/// first polytope.
pub fn initial_cut_blocks(
    class: &SeparabilityClass,
    dims: &[usize],
    n_vertices: usize,
    rng: &mut StateRng,
) -> Result<Vec<Vec<CutBlock>>> {
    let n = dims.len();
    class.validate(n)?;
    let single = |q: usize, rng: &mut StateRng| CutBlock::random(Cut::single(q, n)?, true, dims, n_vertices, rng);
    Ok(match class {
        SeparabilityClass::Bsep => vec![vec![single(2, rng)?, single(0, rng)?, single(1, rng)?]],
        SeparabilityClass::Fbsep => vec![vec![single(0, rng)?], vec![single(1, rng)?], vec![single(2, rng)?]],
        SeparabilityClass::Sep(cut) => {
            let cut = cut.clone().unwrap_or(Cut::new(vec![0], vec![1])?);
            let da: usize = cut.a.iter().map(|&p| dims[p]).product();
            let db: usize = cut.b.iter().map(|&p| dims[p]).product();
            let fixed_a = da <= db;
            vec![vec![CutBlock::random(cut, fixed_a, dims, n_vertices, rng)?]]
        }
        SeparabilityClass::Fsep => return Err(Error::invalid("FSEP does not use cut blocks")),
    })
}

/// What the cut engine optimises.
#[derive(Clone, Debug)]
pub enum Goal {
    /// Maximise the white-noise visibility of `ρ`.
    Visibility(HermitianOp),
    /// Minimise `Tr(Yρ)` over unit-trace members of the class.
    Overlap(HermitianOp),
}

#[derive(Clone, Debug)]
pub struct CutRun {
    /// Visibility (maximised) or overlap (minimised).
    pub value: f64,
    pub capped: bool,
    pub trace: Vec<f64>,
    pub steps: Vec<String>,
    pub statuses: Vec<SolveStatus>,
    pub converged: bool,
    pub decompositions: Vec<Vec<BlockDecomposition>>,
    pub residuals: Vec<f64>,
    /// Optimal state for [`Goal::Overlap`].
    pub state: Option<HermitianOp>,
    pub best_blocks: Vec<Vec<CutBlock>>,
    pub next_blocks: Vec<Vec<CutBlock>>,
}

/// Runs the flip-and-rebuild adaption over cut blocks.
pub fn run_cut_adaption(
    goal: &Goal,
    mut eqs: Vec<Vec<CutBlock>>,
    conv_tol: f64,
    max_rounds: usize,
    drop_tol: f64,
    solver: &SolverOptions,
    rng: &mut StateRng,
) -> Result<CutRun> {
    let dims = match goal {
        Goal::Visibility(r) | Goal::Overlap(r) => r.dims().to_vec(),
    };
    let maximise = matches!(goal, Goal::Visibility(_));
    let mut run = CutRun {
        value: if maximise { f64::NEG_INFINITY } else { f64::INFINITY },
        capped: false,
        trace: Vec::new(),
        steps: Vec::new(),
        statuses: Vec::new(),
        converged: false,
        decompositions: Vec::new(),
        residuals: Vec::new(),
        state: None,
        best_blocks: eqs.clone(),
        next_blocks: Vec::new(),
    };
    for round in 0..max_rounds {
        let blocks: Vec<Vec<Block>> = eqs
            .iter()
            .map(|eq| eq.iter().map(|cb| cb.block(&dims)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let solved = match goal {
            Goal::Visibility(rho) => {
                solve_fixed(rho, blocks, solver).map(|f| (f.t, f.capped, f.decompositions, f.residuals, f.status, None))
            }
            Goal::Overlap(y) => {
                let prob = StateProblem {
                    objective: y.clone(),
                    equations: blocks,
                };
                prob.solve(solver).map(|s| {
                    let decs = prob
                        .equations
                        .iter()
                        .zip(s.partners)
                        .map(|(bs, ps)| {
                            bs.iter()
                                .zip(ps)
                                .map(|(b, partners)| BlockDecomposition {
                                    fixed_parties: b.fixed_parties.clone(),
                                    vertices: b.vertices.clone(),
                                    partners,
                                })
                                .collect()
                        })
                        .collect();
                    (s.value, false, decs, Vec::new(), s.status, Some(s.state))
                })
            }
        };
        let (value, capped, decs, residuals, status, state) = match solved {
            Ok(x) => x,
            // rebuilt polytopes can be badly conditioned; keep the best round so far
            Err(Error::Solver(m)) if !run.decompositions.is_empty() => {
                warn!("cut round {round}: {m}; stopping at the best value so far");
                break;
            }
            Err(e) => return Err(e),
        };
        let orient: Vec<String> = eqs
            .iter()
            .flatten()
            .map(|cb| {
                let side: String = cb.fixed_parties().iter().map(|&p| (b'A' + p as u8) as char).collect();
                format!("{}:{side}", cb.cut)
            })
            .collect();
        debug!("cut round {round}: value {value:.8} [{}]", orient.join(" "));
        run.trace.push(value);
        run.steps.push(orient.join(" "));
        run.statuses.push(status);
        let better = if maximise { value > run.value } else { value < run.value };
        if better || run.decompositions.is_empty() {
            run.value = value;
            run.capped = capped;
            run.decompositions = decs.clone();
            run.residuals = residuals;
            run.state = state;
            run.best_blocks = eqs.clone();
        }
        // flip every block, rebuilding the polytope from its partners
        let mut next = Vec::with_capacity(eqs.len());
        for (eq, dec) in eqs.iter().zip(&decs) {
            let mut row = Vec::with_capacity(eq.len());
            for (cb, d) in eq.iter().zip(dec) {
                let rebuilt = match Polytope::from_operators(&d.partners, drop_tol, rng) {
                    Ok(r) => r.polytope,
                    // an unused block: keep its size with fresh states
                    Err(Error::DegenerateInput(_)) => {
                        let side: Vec<usize> = cb.cut.side(!cb.fixed_a).iter().map(|&p| dims[p]).collect();
                        Polytope::random_inner_with(side, cb.polytope.len(), rng)?
                    }
                    Err(e) => return Err(e),
                };
                row.push(CutBlock {
                    cut: cb.cut.clone(),
                    fixed_a: !cb.fixed_a,
                    polytope: rebuilt,
                });
            }
            next.push(row);
        }
        eqs = next;
        let k = run.trace.len();
        if capped || (k >= 3 && (run.trace[k - 1] - run.trace[k - 2]).abs() < conv_tol) {
            run.converged = true;
            break;
        }
    }
    run.next_blocks = eqs;
    Ok(run)
}

/// Party groups for FSEP: singletons, with the last two merged when PPT
/// decides their separability.
pub fn fsep_groups(dims: &[usize], merge_ppt_pair: bool) -> Vec<Vec<usize>> {
    let n = dims.len();
    let mut groups: Vec<Vec<usize>> = (0..n).map(|p| vec![p]).collect();
    if merge_ppt_pair && n >= 3 && dims[n - 2] * dims[n - 1] <= 6 {
        groups.pop();
        groups.pop();
        groups.push(vec![n - 2, n - 1]);
    }
    groups
}

fn random_group_polytope(dims: &[usize], group: &[usize], n: usize, rng: &mut StateRng) -> Result<Polytope> {
    let gd: Vec<usize> = group.iter().map(|&p| dims[p]).collect();
    if gd.len() == 1 {
        return Polytope::random_inner_with(gd, n, rng);
    }
    // separable vertices only: random pure product states
    let verts = (0..n).map(|_| random_product_pure(&gd, rng).into_op()).collect();
    Polytope::new(gd, PolytopeKind::Inner, verts)
}

/// FSEP adaption over party groups: each step frees one group and fixes the
/// product polytope of the others; the free group's partners become its
/// polytope. Groups are visited round-robin starting from the last.
/// FSEP visibility with a diagonal product polytope on every group except
/// `free`, which is left unconstrained (or PPT when it is a pair).
pub fn fsep_step_fixed(
    rho: &HermitianOp,
    groups: &[Vec<usize>],
    factors: &[Polytope],
    free: usize,
    solver: &SolverOptions,
) -> Result<FixedMulti> {
    let dims = rho.dims();
    let fixed_groups: Vec<usize> = (0..groups.len()).filter(|&k| k != free).collect();
    let fixed_parties: Vec<usize> = fixed_groups.iter().flat_map(|&k| groups[k].clone()).collect();
    let product = ProductPolytope::new(fixed_groups.iter().map(|&k| factors[k].clone()).collect())?;
    let fd: Vec<usize> = fixed_parties.iter().map(|&p| dims[p]).collect();
    let vertices: Vec<HermitianOp> = (0..product.len())
        .map(|l| product.vertex(l).with_dims(fd.clone()))
        .collect::<Result<_>>()?;
    let mut block = Block::new(fixed_parties, vertices);
    if groups[free].len() == 2 {
        block = block.with_ppt(vec![false, true]);
    }
    solve_fixed(rho, vec![vec![block]], solver)
}

/// Visibility for fixed cut blocks.
pub fn cut_visibility_fixed(rho: &HermitianOp, eqs: &[Vec<CutBlock>], solver: &SolverOptions) -> Result<FixedMulti> {
    let blocks: Vec<Vec<Block>> = eqs
        .iter()
        .map(|eq| eq.iter().map(|cb| cb.block(rho.dims())).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    solve_fixed(rho, blocks, solver)
}

pub fn adaptive_fsep(rho: &HermitianOp, opts: &MultiOptions) -> Result<MultipartyReport> {
    let dims = rho.dims().to_vec();
    let n = dims.len();
    if n < 2 {
        return Err(Error::invalid("FSEP needs at least two parties"));
    }
    let groups = fsep_groups(&dims, opts.merge_ppt_pair);
    let g = groups.len();
    let mut rng = rng_from_seed(opts.seed);
    let mut factors: Vec<Polytope> = groups
        .iter()
        .map(|gr| random_group_polytope(&dims, gr, opts.n_vertices, &mut rng))
        .collect::<Result<_>>()?;
    let mut trace = Vec::new();
    let mut steps = Vec::new();
    let mut statuses = Vec::new();
    let mut best: Option<(FixedMulti, Vec<Polytope>, usize)> = None;
    let mut converged = false;
    let mut free = g - 1;
    for step in 0..opts.max_rounds * g {
        let f = fsep_step_fixed(rho, &groups, &factors, free, &opts.solver)?;
        debug!("fsep step {step}: free {:?}, t = {:.8}", groups[free], f.t);
        trace.push(f.t);
        steps.push(format!("free {:?}", groups[free]));
        statuses.push(f.status);
        let partners = f.decompositions[0][0].partners.clone();
        let capped = f.capped;
        if best.as_ref().is_none_or(|b| f.t > b.0.t) {
            best = Some((f, factors.clone(), free));
        }
        if capped {
            converged = true;
            break;
        }
        let gd: Vec<usize> = groups[free].iter().map(|&p| dims[p]).collect();
        let ops: Vec<HermitianOp> = partners
            .iter()
            .map(|o| o.with_dims(gd.clone()))
            .collect::<Result<_>>()?;
        let mut next = Polytope::from_operators(&ops, opts.drop_tol, &mut rng)?.polytope;
        if groups[free].len() == 2 {
            // normalising a low-weight partner magnifies solver-level PPT violations
            next.make_ppt(&[1])?;
        }
        factors[free] = next;
        free = (free + 1) % g;
        let k = trace.len();
        // one full cycle without progress
        if k > 2 * g && (trace[k - 1] - trace[k - 1 - g]).abs() < opts.conv_tol {
            converged = true;
            break;
        }
    }
    let (f, polys, best_free) = best.ok_or_else(|| Error::invalid("max_rounds must be positive"))?;
    info!("FSEP visibility {:.6} after {} steps", f.t, trace.len());
    Ok(MultipartyReport {
        class: SeparabilityClass::Fsep,
        dims,
        visibility: f.t,
        capped: f.capped,
        seed: opts.seed,
        n_vertices: opts.n_vertices,
        trace,
        steps,
        statuses,
        converged,
        decompositions: f.decompositions,
        residuals: f.residuals,
        polytopes: groups.into_iter().zip(polys).collect(),
        next_blocks: Vec::new(),
        best_blocks: Vec::new(),
        free_group: Some(best_free),
    })
}

/// Cut-class adaption from explicit starting blocks.
pub fn adaptive_cut_class_from(
    rho: &HermitianOp,
    class: SeparabilityClass,
    start: Vec<Vec<CutBlock>>,
    opts: &MultiOptions,
) -> Result<MultipartyReport> {
    let mut rng = rng_from_seed(opts.seed ^ 0xc47);
    let run = run_cut_adaption(
        &Goal::Visibility(rho.clone()),
        start,
        opts.conv_tol,
        opts.max_rounds,
        opts.drop_tol,
        &opts.solver,
        &mut rng,
    )?;
    Ok(MultipartyReport {
        class,
        dims: rho.dims().to_vec(),
        visibility: run.value,
        capped: run.capped,
        seed: opts.seed,
        n_vertices: opts.n_vertices,
        trace: run.trace,
        steps: run.steps,
        statuses: run.statuses,
        converged: run.converged,
        decompositions: run.decompositions,
        residuals: run.residuals,
        polytopes: run
            .best_blocks
            .iter()
            .flatten()
            .map(|cb| (cb.fixed_parties().to_vec(), cb.polytope.clone()))
            .collect(),
        next_blocks: run.next_blocks,
        best_blocks: run.best_blocks,
        free_group: None,
    })
}

/// Adaptive lower bound on the visibility for any class.
pub fn adaptive_multiparty(
    rho: &HermitianOp,
    class: &SeparabilityClass,
    opts: &MultiOptions,
) -> Result<MultipartyReport> {
    class.validate(rho.num_subsystems())?;
    match class {
        SeparabilityClass::Fsep => adaptive_fsep(rho, opts),
        _ => {
            let mut rng = rng_from_seed(opts.seed);
            let start = initial_cut_blocks(class, rho.dims(), opts.n_vertices, &mut rng)?;
            adaptive_cut_class_from(rho, class.clone(), start, opts)
        }
    }
}

#[derive(Clone, Debug)]
pub struct FbsepMinimum {
    pub value: f64,
    pub state: HermitianOp,
    /// Cut blocks whose decompositions contain `state`.
    pub blocks: Vec<Vec<CutBlock>>,
    pub trace: Vec<f64>,
}

/// Minimises `Tr(Yρ)` over the inner FBSEP approximation of three parties,
/// then tightens with a short adaption.
pub fn minimize_witness_over_fbsep(
    y: &HermitianOp,
    n_vertices: usize,
    rounds: usize,
    seed: u64,
    solver: &SolverOptions,
) -> Result<FbsepMinimum> {
    check_three(y)?;
    let mut rng = rng_from_seed(seed);
    let start = initial_cut_blocks(&SeparabilityClass::Fbsep, y.dims(), n_vertices, &mut rng)?;
    let run = run_cut_adaption(
        &Goal::Overlap(y.clone()),
        start,
        1e-6,
        rounds.max(1),
        DROP_TOL,
        solver,
        &mut rng,
    )?;
    Ok(FbsepMinimum {
        value: run.value,
        state: run.state.expect("overlap runs return a state"),
        blocks: run.best_blocks,
        trace: run.trace,
    })
}

/// Random pure product state on all parties of `dims`, as a density matrix.
pub fn random_product_state(dims: &[usize], rng: &mut StateRng) -> HermitianOp {
    dims.iter()
        .map(|&d| haar_projector(vec![d], rng))
        .reduce(|a, b| a.kron(&b))
        .expect("at least one party")
}
