//! Finite vertex sets approximating the state space of one party.

pub mod geodesic;

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::ProductBasis;
use crate::conic::{ConeKind, SdpProblem, SolveStatus, SolverOptions, Term};
use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOp, STATE_TOL};
use crate::io::MatrixDoc;
use crate::states::{haar_projector, rng_from_seed};

pub const DEFAULT_DROP_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolytopeKind {
    Inner,
    Outer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dims: Vec<usize>,
    kind: PolytopeKind,
    vertices: Vec<HermitianOp>,
}

/// Result of rebuilding a polytope from partner operators.
#[derive(Clone, Debug)]
pub struct Rebuilt {
    pub polytope: Polytope,
    /// Indices whose operator was dropped and replaced by a random pure state.
    pub replaced: Vec<usize>,
}

impl Polytope {
    pub fn new(dims: Vec<usize>, kind: PolytopeKind, vertices: Vec<HermitianOp>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("a polytope needs at least one vertex"));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.dims() != dims.as_slice() {
                return Err(Error::invalid(format!(
                    "vertex {i} has dims {:?}, expected {dims:?}",
                    v.dims()
                )));
            }
            if (v.trace() - 1.0).abs() > STATE_TOL {
                return Err(Error::invalid(format!("vertex {i} has trace {}", v.trace())));
            }
            if kind == PolytopeKind::Inner && v.min_eigenvalue() < -STATE_TOL {
                return Err(Error::invalid(format!("inner vertex {i} is not PSD")));
            }
        }
        Ok(Self { dims, kind, vertices })
    }

    /// Independent Haar-random pure states.
    pub fn random_inner_with<R: Rng + ?Sized>(dims: Vec<usize>, n_vertices: usize, rng: &mut R) -> Result<Self> {
        if n_vertices < 1 {
            return Err(Error::invalid("n_vertices must be at least 1"));
        }
        let d: usize = dims.iter().product();
        if n_vertices < d * d {
            log::warn!("{n_vertices} vertices cannot span the {d}x{d} state space");
        }
        let vertices = (0..n_vertices).map(|_| haar_projector(dims.clone(), rng)).collect();
        Ok(Self {
            dims,
            kind: PolytopeKind::Inner,
            vertices,
        })
    }

    pub fn random_inner(dims: Vec<usize>, n_vertices: usize, seed: u64) -> Result<Self> {
        Self::random_inner_with(dims, n_vertices, &mut rng_from_seed(seed))
    }

    /// Normalises partner operators into an inner polytope. Operators with
    /// trace `≤ drop_tol · max trace` are replaced by fresh random pure
    /// states, keeping the vertex count. Small negative eigenvalues left by
    /// the solver are clipped so that every vertex is a state.
    pub fn from_operators<R: Rng + ?Sized>(ops: &[HermitianOp], drop_tol: f64, rng: &mut R) -> Result<Rebuilt> {
        let first = ops.first().ok_or_else(|| Error::invalid("no operators"))?;
        let dims = first.dims().to_vec();
        let max_tr = ops.iter().map(|o| o.trace()).fold(f64::NEG_INFINITY, f64::max);
        if max_tr.is_nan() || max_tr <= 1e-12 {
            return Err(Error::DegenerateInput(format!(
                "all partner operators have negligible trace (max {max_tr:.2e})"
            )));
        }
        let mut vertices = Vec::with_capacity(ops.len());
        let mut replaced = Vec::new();
        for (i, op) in ops.iter().enumerate() {
            if op.dims() != dims.as_slice() {
                return Err(Error::invalid("partner operators have mixed dims"));
            }
            let tr = op.trace();
            let v = if tr > drop_tol * max_tr {
                project_to_state(&op.scale(1.0 / tr))
            } else {
                None
            };
            match v {
                Some(v) => vertices.push(v),
                None => {
                    replaced.push(i);
                    vertices.push(haar_projector(dims.clone(), rng));
                }
            }
        }
        Ok(Rebuilt {
            polytope: Self {
                dims,
                kind: PolytopeKind::Inner,
                vertices,
            },
            replaced,
        })
    }

    /// Fixed outer approximation of the qubit Bloch ball: geodesic icosphere
    /// directions scaled by the reciprocal hull inradius, mapped to
    /// `(1 + v·σ)/2`. Supported counts are `10f² + 2` for
    /// `f ∈ {1, 2, 4, 8, 10, 16}`.
    pub fn outer_qubit(n_vertices: usize) -> Result<Self> {
        const COUNTS: [usize; 6] = [12, 42, 162, 642, 1002, 2562];
        if !COUNTS.contains(&n_vertices) {
            return Err(Error::invalid(format!(
                "outer qubit polytope supports {COUNTS:?} vertices, got {n_vertices}"
            )));
        }
        let f = geodesic::frequency_for(n_vertices).expect("supported count");
        let ico = geodesic::Icosphere::new(f);
        let scale = 1.0 / ico.inradius();
        let vertices = ico
            .vertices
            .iter()
            .map(|&v| bloch_operator(v.map(|x| x * scale)))
            .collect();
        Ok(Self {
            dims: vec![2],
            kind: PolytopeKind::Outer,
            vertices,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn kind(&self) -> PolytopeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[HermitianOp] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &HermitianOp {
        &self.vertices[i]
    }

    /// Replaces the given vertices with fresh random pure states.
    pub fn reseed<R: Rng + ?Sized>(&mut self, which: &[usize], rng: &mut R) {
        for &i in which {
            self.vertices[i] = haar_projector(self.dims.clone(), rng);
        }
    }

    /// Appends random pure vertices (inner polytopes only).
    /// Mixes every vertex whose partial transpose on `flip` has a negative
    /// eigenvalue `λ` with the smallest white-noise weight restoring PPT.
    /// Returns the number of vertices touched.
    pub fn make_ppt(&mut self, flip: &[usize]) -> Result<usize> {
        let mut touched = 0;
        for v in &mut self.vertices {
            let lam = v.partial_transpose(flip)?.min_eigenvalue();
            if lam < 0.0 {
                let eps = -lam * v.order() as f64 * (1.0 + 1e-9);
                let noise = HermitianOp::maximally_mixed(v.dims().to_vec());
                *v = v.lincomb(1.0 / (1.0 + eps), &noise, eps / (1.0 + eps))?;
                touched += 1;
            }
        }
        Ok(touched)
    }

    pub fn extend_random<R: Rng + ?Sized>(&mut self, count: usize, rng: &mut R) {
        for _ in 0..count {
            self.vertices.push(haar_projector(self.dims.clone(), rng));
        }
    }

    /// Whether `op` lies in the convex hull of the vertices, by a small
    /// linear feasibility program.
    pub fn hull_contains(&self, op: &HermitianOp) -> Result<bool> {
        let basis = ProductBasis::new(&self.dims);
        let target = basis.coords(op);
        let mut p = SdpProblem::new();
        let w: Vec<_> = (0..self.len()).map(|i| p.add_scalar(format!("w{i}"))).collect();
        let mut eq_terms = Vec::new();
        let mut nn_terms = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let c = basis.coords(v);
            let entries: Vec<_> = c
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(r, &x)| (r, 0, x))
                .collect();
            eq_terms.push(Term { var: w[i], entries });
            nn_terms.push(Term {
                var: w[i],
                entries: vec![(i, 0, 1.0)],
            });
        }
        let neg: Vec<f64> = target.iter().map(|x| -x).collect();
        p.add_constraint("hull", ConeKind::Zero, target.len(), eq_terms, neg)?;
        p.add_constraint("weights", ConeKind::Nonneg, self.len(), nn_terms, vec![0.0; self.len()])?;
        let sol = p.solve(&SolverOptions::default());
        match sol.status {
            SolveStatus::Optimal | SolveStatus::Inaccurate => Ok(true),
            SolveStatus::Infeasible => Ok(false),
            SolveStatus::Failed => Err(Error::Solver(format!("hull membership: {}", sol.message))),
        }
    }

    pub fn to_doc(&self) -> PolytopeDoc {
        PolytopeDoc {
            kind: self.kind,
            dims: self.dims.clone(),
            vertices: self.vertices.iter().map(MatrixDoc::from_op).collect(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_doc())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        parse_polytope(&text).map_err(|e| e.context(path.display()))
    }
}

/// `{"kind": "inner" | "outer", "dims": [..], "vertices": [matrix docs]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeDoc {
    pub kind: PolytopeKind,
    pub dims: Vec<usize>,
    pub vertices: Vec<MatrixDoc>,
}

impl PolytopeDoc {
    pub fn to_polytope(&self) -> Result<Polytope> {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_op().map_err(|e| e.context(format!("vertex {i}"))))
            .collect::<Result<Vec<_>>>()?;
        Polytope::new(self.dims.clone(), self.kind, vertices).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Parse(m),
            other => other,
        })
    }
}

pub fn parse_polytope(text: &str) -> Result<Polytope> {
    let doc: PolytopeDoc = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
    doc.to_polytope()
}

/// `(1 + v·σ)/2`.
pub fn bloch_operator(v: [f64; 3]) -> HermitianOp {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::new((1.0 + v[2]) / 2.0, 0.0);
    m[(1, 1)] = Complex64::new((1.0 - v[2]) / 2.0, 0.0);
    m[(0, 1)] = Complex64::new(v[0] / 2.0, -v[1] / 2.0);
    m[(1, 0)] = Complex64::new(v[0] / 2.0, v[1] / 2.0);
    HermitianOp::new(vec![2], m).expect("Bloch operator is Hermitian")
}

/// Bloch vector `(Tr ρσx, Tr ρσy, Tr ρσz)` of a qubit operator.
pub fn bloch_vector(op: &HermitianOp) -> [f64; 3] {
    let m = op.matrix();
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

/// Clips negative eigenvalues and renormalises; `None` if nothing remains.
fn project_to_state(op: &HermitianOp) -> Option<HermitianOp> {
    if op.min_eigenvalue() >= -1e-12 {
        return Some(op.clone());
    }
    let (ev, u) = op.eigh();
    let mut m = CMatrix::zeros(op.order(), op.order());
    let mut total = 0.0;
    for (k, &l) in ev.iter().enumerate() {
        if l > 0.0 {
            let col = u.column(k);
            m += (col * col.adjoint()).scale(l);
            total += l;
        }
    }
    if total <= 1e-14 {
        return None;
    }
    HermitianOp::new(op.dims().to_vec(), m.unscale(total)).ok()
}

/// Equal-length vertex lists on several parties; vertex `λ` is the product
/// of the `λ`-th vertex of each factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPolytope {
    factors: Vec<Polytope>,
}

impl ProductPolytope {
    pub fn new(factors: Vec<Polytope>) -> Result<Self> {
        let n = factors.first().ok_or_else(|| Error::invalid("no factors"))?.len();
        if factors.iter().any(|f| f.len() != n) {
            return Err(Error::invalid("product polytope factors differ in length"));
        }
        if factors.iter().any(|f| f.kind() != PolytopeKind::Inner) {
            return Err(Error::invalid("product polytope factors must be inner"));
        }
        Ok(Self { factors })
    }

    pub fn len(&self) -> usize {
        self.factors[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn factors(&self) -> &[Polytope] {
        &self.factors
    }

    pub fn factor_mut(&mut self, i: usize) -> &mut Polytope {
        &mut self.factors[i]
    }

    pub fn set_factor(&mut self, i: usize, p: Polytope) -> Result<()> {
        if p.len() != self.len() {
            return Err(Error::invalid("replacement factor has the wrong length"));
        }
        self.factors[i] = p;
        Ok(())
    }

    pub fn vertex(&self, lambda: usize) -> HermitianOp {
        let mut op = self.factors[0].vertex(lambda).clone();
        for f in &self.factors[1..] {
            op = op.kron(f.vertex(lambda));
        }
        op
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_inner_vertices_are_pure_states() {
        let p = Polytope::random_inner(vec![2], 4, 3).unwrap();
        assert_eq!(p.len(), 4);
        for v in p.vertices() {
            assert!((v.trace() - 1.0).abs() < 1e-12);
            assert!(v.min_eigenvalue() > -1e-12);
            assert!((v.purity() - 1.0).abs() < 1e-12);
        }
        assert_eq!(p, Polytope::random_inner(vec![2], 4, 3).unwrap());
        assert!(Polytope::random_inner(vec![2], 0, 3).is_err());
    }

    #[test]
    fn random_inner_contains_maximally_mixed() {
        let p = Polytope::random_inner(vec![2], 500, 5).unwrap();
        assert!(p.hull_contains(&HermitianOp::maximally_mixed(vec![2])).unwrap());
        let tiny = Polytope::random_inner(vec![2], 3, 5).unwrap();
        assert!(!tiny.hull_contains(&HermitianOp::maximally_mixed(vec![2])).unwrap());
    }

    #[test]
    fn from_operators_normalises_and_replaces() {
        let mut rng = rng_from_seed(1);
        let rho = crate::states::random_density(vec![2], 1).unwrap().into_op();
        let sigma = crate::states::random_density(vec![2], 2).unwrap().into_op();
        let out = Polytope::from_operators(&[rho.scale(2.0), sigma.scale(3.0)], DEFAULT_DROP_TOL, &mut rng).unwrap();
        assert!(out.replaced.is_empty());
        assert!(out.polytope.vertex(0).max_abs_diff(&rho) < 1e-14);
        assert!(out.polytope.vertex(1).max_abs_diff(&sigma) < 1e-14);
        // idempotent on normalised input
        let again = Polytope::from_operators(out.polytope.vertices(), DEFAULT_DROP_TOL, &mut rng).unwrap();
        for (a, b) in again.polytope.vertices().iter().zip(out.polytope.vertices()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }

        let zero = HermitianOp::zeros(vec![2]);
        let out = Polytope::from_operators(&[rho.clone(), zero.clone()], DEFAULT_DROP_TOL, &mut rng).unwrap();
        assert_eq!(out.replaced, vec![1]);
        assert_eq!(out.polytope.len(), 2);
        assert!((out.polytope.vertex(1).purity() - 1.0).abs() < 1e-12);
        assert!(matches!(
            Polytope::from_operators(&[zero.clone(), zero], DEFAULT_DROP_TOL, &mut rng),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn outer_polytope_bounds_the_ball() {
        let p = Polytope::outer_qubit(12).unwrap();
        let r = bloch_vector(p.vertex(0));
        let len = crate::polytope::geodesic::dot(r, r).sqrt();
        assert!((len - 1.258_408_572_364_819).abs() < 1e-12);
        for n in [12, 42, 162, 642, 1002, 2562] {
            let p = Polytope::outer_qubit(n).unwrap();
            assert_eq!(p.len(), n);
            assert_eq!(p.kind(), PolytopeKind::Outer);
            for v in p.vertices() {
                assert!((v.trace() - 1.0).abs() < 1e-14);
            }
            // every hull facet of the scaled Bloch vectors sits at distance ≥ 1
            let ico = geodesic::Icosphere::new(geodesic::frequency_for(n).unwrap());
            let planes = ico.planes();
            let mut closest = f64::INFINITY;
            for (t, (normal, _)) in ico.triangles.iter().zip(&planes) {
                let v = bloch_vector(p.vertex(t[0]));
                closest = closest.min(geodesic::dot(*normal, v));
            }
            assert!((closest - 1.0).abs() < 1e-12, "n={n}: {closest}");
            assert!(p.vertex(0).min_eigenvalue() < 0.0);
        }
        assert!(Polytope::outer_qubit(100).is_err());
    }

    #[test]
    fn outer_polytope_contains_random_pure_states() {
        let p = Polytope::outer_qubit(42).unwrap();
        let mut rng = rng_from_seed(9);
        for _ in 0..200 {
            let s = haar_projector(vec![2], &mut rng);
            assert!(p.hull_contains(&s).unwrap());
        }
    }

    #[test]
    fn document_round_trip() {
        let p = Polytope::random_inner(vec![3], 5, 2).unwrap();
        let text = serde_json::to_string(&p.to_doc()).unwrap();
        let back = parse_polytope(&text).unwrap();
        assert_eq!(back.len(), 5);
        for (a, b) in back.vertices().iter().zip(p.vertices()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
        assert!(parse_polytope(r#"{"kind":"inner","dims":[2],"vertices":[]}"#).is_err());
        assert!(
            parse_polytope(r#"{"kind":"inner","dims":[2],"vertices":[{"dims":[2],"re":[[2,0],[0,-1]]}]}"#).is_err()
        );
        assert!(parse_polytope(r#"{"kind":"outer","dims":[2],"vertices":[{"dims":[2],"re":[[2,0],[0,-1]]}]}"#).is_ok());
    }

    #[test]
    fn product_vertex_is_kron() {
        let a = Polytope::random_inner(vec![2], 3, 1).unwrap();
        let b = Polytope::random_inner(vec![3], 3, 2).unwrap();
        let pp = ProductPolytope::new(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(pp.vertex(1), a.vertex(1).kron(b.vertex(1)));
        let c = Polytope::random_inner(vec![2], 4, 1).unwrap();
        assert!(ProductPolytope::new(vec![a, c]).is_err());
    }
}
