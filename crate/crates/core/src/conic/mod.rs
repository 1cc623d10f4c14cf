//! Solver-agnostic linear–semidefinite programs.
//!
//! Variables are real scalars, complex Hermitian matrices, or real symmetric
//! matrices. Matrix variables are stored as real coordinates in the
//! orthonormal bases of [`crate::basis::ProductBasis`] (Hermitian) or its
//! real restriction (symmetric: diagonal units then symmetric pairs).
//!
//! A constraint is an affine expression `Σ M_i x_i + k` in a cone `K`:
//! the zero cone (equalities), the nonnegative orthant, or the PSD cone of
//! Hermitian / symmetric matrices whose coordinates are the expression rows.
//! Every problem is a maximisation of a linear objective.
//!
//! Dual multipliers `y_g ∈ K_g*` satisfy `c + Σ_g M_gᵀ y_g = 0` at optimality,
//! and the dual objective is `Σ_g ⟨y_g, k_g⟩ ≥ cᵀx`.

mod backend;
mod dump;
mod embed;

pub use embed::{embed_complex, RealCone, RealConicProblem};

use crate::basis::ProductBasis;
use crate::error::{Error, Result};
use crate::hermitian::HermitianOp;

pub const DEFAULT_TOL: f64 = 1e-8;
/// PSD tolerance on primal cone expressions of an optimal solution.
pub const PSD_CHECK_TOL: f64 = 1e-8;
/// Relative equality residual allowed for an optimal solution.
pub const EQ_CHECK_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConstraintId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub enum VarShape {
    Scalar,
    Hermitian(Vec<usize>),
    Symmetric(usize),
}

impl VarShape {
    pub fn len(&self) -> usize {
        match self {
            VarShape::Scalar => 1,
            VarShape::Hermitian(dims) => {
                let n: usize = dims.iter().product();
                n * n
            }
            VarShape::Symmetric(n) => n * (n + 1) / 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub label: String,
    pub shape: VarShape,
    offset: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConeKind {
    Zero,
    Nonneg,
    HermitianPsd(Vec<usize>),
    SymmetricPsd(usize),
}

impl ConeKind {
    fn rows(&self) -> Option<usize> {
        match self {
            ConeKind::Zero | ConeKind::Nonneg => None,
            ConeKind::HermitianPsd(dims) => {
                let n: usize = dims.iter().product();
                Some(n * n)
            }
            ConeKind::SymmetricPsd(n) => Some(n * (n + 1) / 2),
        }
    }
}

/// `M · x_var` as sparse `(row, coordinate, value)` triplets.
#[derive(Clone, Debug)]
pub struct Term {
    pub var: VarId,
    pub entries: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub label: String,
    pub kind: ConeKind,
    pub rows: usize,
    pub terms: Vec<Term>,
    pub constant: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, usize, f64)>,
    n_coords: usize,
}

/// Coordinates of the real symmetric basis of order `n`: diagonal units,
/// then `(E_ij + E_ji)/√2` for `i < j` row-major.
pub(crate) fn symmetric_element(n: usize, k: usize) -> Vec<(usize, usize, f64)> {
    if k < n {
        return vec![(k, k, 1.0)];
    }
    let mut idx = n;
    for i in 0..n {
        for j in i + 1..n {
            if idx == k {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                return vec![(i, j, s), (j, i, s)];
            }
            idx += 1;
        }
    }
    panic!("symmetric basis index {k} out of range for order {n}")
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    fn add_var(&mut self, label: impl Into<String>, shape: VarShape) -> VarId {
        let len = shape.len();
        self.vars.push(Variable {
            label: label.into(),
            shape,
            offset: self.n_coords,
        });
        self.n_coords += len;
        VarId(self.vars.len() - 1)
    }

    pub fn add_scalar(&mut self, label: impl Into<String>) -> VarId {
        self.add_var(label, VarShape::Scalar)
    }

    pub fn add_hermitian(&mut self, label: impl Into<String>, dims: Vec<usize>) -> VarId {
        self.add_var(label, VarShape::Hermitian(dims))
    }

    pub fn add_symmetric(&mut self, label: impl Into<String>, n: usize) -> VarId {
        self.add_var(label, VarShape::Symmetric(n))
    }

    /// Adds `Σ terms + constant ∈ kind`.
    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        kind: ConeKind,
        rows: usize,
        terms: Vec<Term>,
        constant: Vec<f64>,
    ) -> Result<ConstraintId> {
        let label = label.into();
        if let Some(r) = kind.rows() {
            if r != rows {
                return Err(Error::invalid(format!(
                    "constraint {label}: cone needs {r} rows, got {rows}"
                )));
            }
        }
        if constant.len() != rows {
            return Err(Error::invalid(format!(
                "constraint {label}: constant has {} rows, expected {rows}",
                constant.len()
            )));
        }
        for t in &terms {
            let var = self
                .vars
                .get(t.var.0)
                .ok_or_else(|| Error::invalid(format!("constraint {label}: undeclared variable {:?}", t.var)))?;
            let len = var.shape.len();
            if let Some(&(r, c, _)) = t.entries.iter().find(|&&(r, c, _)| r >= rows || c >= len) {
                return Err(Error::invalid(format!(
                    "constraint {label}: entry ({r}, {c}) out of range for variable {}",
                    var.label
                )));
            }
        }
        self.constraints.push(Constraint {
            label,
            kind,
            rows,
            terms,
            constant,
        });
        Ok(ConstraintId(self.constraints.len() - 1))
    }

    /// Constrains a matrix variable to be PSD.
    pub fn require_psd(&mut self, var: VarId) -> Result<ConstraintId> {
        self.require_psd_signed(var, None)
    }

    /// Constrains the partial transpose (over the flagged subsystems) of a
    /// Hermitian variable to be PSD.
    pub fn require_ppt(&mut self, var: VarId, mask: &[bool]) -> Result<ConstraintId> {
        self.require_psd_signed(var, Some(mask))
    }

    fn require_psd_signed(&mut self, var: VarId, mask: Option<&[bool]>) -> Result<ConstraintId> {
        let v = self
            .vars
            .get(var.0)
            .ok_or_else(|| Error::invalid(format!("undeclared variable {var:?}")))?
            .clone();
        let (kind, len) = match &v.shape {
            VarShape::Hermitian(dims) => (ConeKind::HermitianPsd(dims.clone()), v.shape.len()),
            VarShape::Symmetric(n) => {
                if mask.is_some() {
                    return Err(Error::invalid("partial transpose needs a Hermitian variable"));
                }
                (ConeKind::SymmetricPsd(*n), v.shape.len())
            }
            VarShape::Scalar => return Err(Error::invalid(format!("{} is not a matrix variable", v.label))),
        };
        let entries = match (mask, &v.shape) {
            (Some(mask), VarShape::Hermitian(dims)) => {
                if mask.len() != dims.len() {
                    return Err(Error::invalid("transpose mask length does not match dims"));
                }
                let basis = ProductBasis::new(dims);
                (0..len).map(|k| (k, k, basis.transpose_sign(k, mask))).collect()
            }
            _ => (0..len).map(|k| (k, k, 1.0)).collect(),
        };
        let label = match mask {
            Some(_) => format!("ppt({})", v.label),
            None => format!("psd({})", v.label),
        };
        self.add_constraint(label, kind, len, vec![Term { var, entries }], vec![0.0; len])
    }

    /// Replaces the objective (maximised) with `Σ coef · x_var[coord]`.
    pub fn set_objective(&mut self, objective: Vec<(VarId, usize, f64)>) -> Result<()> {
        for &(v, c, _) in &objective {
            let var = self
                .vars
                .get(v.0)
                .ok_or_else(|| Error::invalid(format!("objective: undeclared variable {v:?}")))?;
            if c >= var.shape.len() {
                return Err(Error::invalid("objective coordinate out of range"));
            }
        }
        self.objective = objective;
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, c: ConstraintId) -> &Constraint {
        &self.constraints[c.0]
    }

    pub fn objective(&self) -> &[(VarId, usize, f64)] {
        &self.objective
    }

    /// Total number of real coordinates over all variables.
    pub fn num_coords(&self) -> usize {
        self.n_coords
    }

    pub(crate) fn offset(&self, v: VarId) -> usize {
        self.vars[v.0].offset
    }

    /// Value of every constraint expression at the stacked coordinates `x`.
    pub fn evaluate(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.constraints
            .iter()
            .map(|c| {
                let mut out = c.constant.clone();
                for t in &c.terms {
                    let off = self.offset(t.var);
                    for &(r, col, v) in &t.entries {
                        out[r] += v * x[off + col];
                    }
                }
                out
            })
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c, w)| w * x[self.offset(v) + c]).sum()
    }

    /// Solves with the default backend.
    pub fn solve(&self, opts: &SolverOptions) -> SdpSolution {
        solve(self, opts)
    }

    /// Writes the problem as plain-text sparse triplets.
    pub fn write_dump<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        dump::write(self, w)
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
    pub kkt: KktMethod,
}

/// Sparse factorisation used for the interior-point linear systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KktMethod {
    /// qdldl unless the program has more than [`FAER_THRESHOLD`] equality
    /// rows, then the supernodal faer solver.
    #[default]
    Auto,
    Qdldl,
    Faer,
}

/// qdldl is a simplicial LDLᵀ: the equality rows of a state equation couple
/// every partner block, and from 5×5 states up (625 rows) the fill makes it
/// ~10x slower than faer. Below that qdldl is fast enough and its duals are
/// cleaner (faer tends to stop one step short of the tolerance).
pub const FAER_THRESHOLD: usize = 400;

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: 300,
            verbose: std::env::var_os("SEPCERT_SOLVER_VERBOSE").is_some_and(|v| v != "0"),
            kkt: match std::env::var("SEPCERT_KKT").as_deref() {
                Ok("qdldl") => KktMethod::Qdldl,
                Ok("faer") => KktMethod::Faer,
                _ => KktMethod::Auto,
            },
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Inaccurate,
    Failed,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub dual_objective: f64,
    /// Stacked coordinates of all variables.
    pub x: Vec<f64>,
    /// One multiplier vector per constraint, in expression coordinates.
    pub duals: Vec<Vec<f64>>,
    pub iterations: u32,
    pub solve_time: f64,
    /// Worst relative equality residual.
    pub eq_residual: f64,
    /// Most negative eigenvalue over PSD constraint expressions.
    pub min_cone_eigenvalue: f64,
    pub message: String,
    var_layout: Vec<(usize, VarShape)>,
    con_kinds: Vec<ConeKind>,
}

impl SdpSolution {
    pub(crate) fn failed(p: &SdpProblem, message: impl Into<String>) -> Self {
        Self {
            status: SolveStatus::Failed,
            objective: f64::NAN,
            dual_objective: f64::NAN,
            x: vec![0.0; p.num_coords()],
            duals: p.constraints.iter().map(|c| vec![0.0; c.rows]).collect(),
            iterations: 0,
            solve_time: 0.0,
            eq_residual: f64::NAN,
            min_cone_eigenvalue: f64::NAN,
            message: message.into(),
            var_layout: p.vars.iter().map(|v| (v.offset, v.shape.clone())).collect(),
            con_kinds: p.constraints.iter().map(|c| c.kind.clone()).collect(),
        }
    }

    pub fn is_usable(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Inaccurate)
    }

    /// Converts a non-usable status into an error.
    pub fn check(&self, what: &str) -> Result<()> {
        if self.is_usable() {
            Ok(())
        } else {
            Err(Error::Solver(format!(
                "{what}: status {:?} ({})",
                self.status, self.message
            )))
        }
    }

    pub fn coords(&self, v: VarId) -> &[f64] {
        let (off, shape) = &self.var_layout[v.0];
        &self.x[*off..*off + shape.len()]
    }

    pub fn scalar(&self, v: VarId) -> f64 {
        self.coords(v)[0]
    }

    /// Value of a matrix variable as an operator (symmetric variables are
    /// returned with `dims = [n]`).
    pub fn matrix(&self, v: VarId) -> HermitianOp {
        let (_, shape) = &self.var_layout[v.0];
        coords_to_op(shape_as_cone(shape).as_ref(), self.coords(v))
    }

    pub fn dual(&self, c: ConstraintId) -> &[f64] {
        &self.duals[c.0]
    }

    /// Multiplier of a PSD constraint as an operator.
    pub fn dual_matrix(&self, c: ConstraintId) -> HermitianOp {
        coords_to_op(Some(&self.con_kinds[c.0]), &self.duals[c.0])
    }
}

fn shape_as_cone(shape: &VarShape) -> Option<ConeKind> {
    match shape {
        VarShape::Hermitian(d) => Some(ConeKind::HermitianPsd(d.clone())),
        VarShape::Symmetric(n) => Some(ConeKind::SymmetricPsd(*n)),
        VarShape::Scalar => None,
    }
}

pub(crate) fn coords_to_op(kind: Option<&ConeKind>, coords: &[f64]) -> HermitianOp {
    match kind {
        Some(ConeKind::HermitianPsd(dims)) => ProductBasis::new(dims).op_from_coords(coords),
        Some(ConeKind::SymmetricPsd(n)) => {
            let mut m = crate::hermitian::CMatrix::zeros(*n, *n);
            for (k, &x) in coords.iter().enumerate() {
                for (i, j, v) in symmetric_element(*n, k) {
                    m[(i, j)] += num_complex::Complex64::new(v * x, 0.0);
                }
            }
            HermitianOp::from_nearly_hermitian(vec![*n], m)
        }
        _ => panic!("not a matrix cone"),
    }
}

/// Solves `p` with the Clarabel interior-point backend through the real
/// symmetric embedding, then checks the optimality contract: cone
/// expressions PSD within [`PSD_CHECK_TOL`] and equality residuals within
/// [`EQ_CHECK_TOL`]·(‖k‖ + 1). Violations downgrade `Optimal` to `Inaccurate`.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> SdpSolution {
    let real = embed_complex(p);
    let mut sol = backend::solve_real(p, &real, opts);
    if sol.is_usable() {
        let (eq, eig) = contract_residuals(p, &sol.x);
        sol.eq_residual = eq;
        sol.min_cone_eigenvalue = eig;
        if sol.status == SolveStatus::Optimal && (eq > EQ_CHECK_TOL || eig < -PSD_CHECK_TOL) {
            sol.status = SolveStatus::Inaccurate;
            sol.message =
                format!("optimality contract violated: equality residual {eq:.2e}, min cone eigenvalue {eig:.2e}");
        }
    }
    sol
}

fn contract_residuals(p: &SdpProblem, x: &[f64]) -> (f64, f64) {
    let values = p.evaluate(x);
    let mut eq: f64 = 0.0;
    let mut eig = f64::INFINITY;
    for (c, val) in p.constraints.iter().zip(&values) {
        match &c.kind {
            ConeKind::Zero => {
                let r = val.iter().map(|v| v * v).sum::<f64>().sqrt();
                let k = c.constant.iter().map(|v| v * v).sum::<f64>().sqrt();
                eq = eq.max(r / (k + 1.0));
            }
            ConeKind::Nonneg => {
                for &v in val {
                    eig = eig.min(v);
                }
            }
            kind => {
                eig = eig.min(coords_to_op(Some(kind), val).min_eigenvalue());
            }
        }
    }
    if eig == f64::INFINITY {
        eig = 0.0;
    }
    (eq, eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_entries(n: usize) -> Vec<(usize, usize, f64)> {
        (0..n).map(|k| (k, 0, -1.0)).collect()
    }

    #[test]
    fn max_t_below_smallest_eigenvalue() {
        // maximise t s.t. diag(1,2) - t·1 ⪰ 0
        let mut p = SdpProblem::new();
        let t = p.add_scalar("t");
        let basis = ProductBasis::new(&[2]);
        let target = HermitianOp::diagonal(vec![2], &[1.0, 2.0]).unwrap();
        p.add_constraint(
            "slack",
            ConeKind::HermitianPsd(vec![2]),
            4,
            vec![Term {
                var: t,
                entries: diag_entries(2),
            }],
            basis.coords(&target),
        )
        .unwrap();
        p.set_objective(vec![(t, 0, 1.0)]).unwrap();
        let sol = p.solve(&SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.message);
        assert!((sol.scalar(t) - 1.0).abs() < 1e-7);
        assert!(sol.dual_objective >= sol.objective - 1e-6);
    }

    #[test]
    fn off_diagonal_placement() {
        // maximise x s.t. [[1, x, 0], [x, 2, i], [0, -i, 3]] ⪰ 0 → picks up
        // the exact svec ordering of every off-diagonal slot.
        let mut m = crate::hermitian::CMatrix::zeros(3, 3);
        m[(0, 0)] = 1.0.into();
        m[(1, 1)] = 2.0.into();
        m[(2, 2)] = 3.0.into();
        m[(1, 2)] = num_complex::Complex64::new(0.0, 1.0);
        m[(2, 1)] = num_complex::Complex64::new(0.0, -1.0);
        let k = HermitianOp::new(vec![3], m).unwrap();
        let basis = ProductBasis::new(&[3]);
        let mut unit = crate::hermitian::CMatrix::zeros(3, 3);
        unit[(0, 1)] = 1.0.into();
        unit[(1, 0)] = 1.0.into();
        let unit = basis.coords(&HermitianOp::new(vec![3], unit).unwrap());
        let mut p = SdpProblem::new();
        let x = p.add_scalar("x");
        let entries = unit
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(r, &v)| (r, 0, v))
            .collect();
        p.add_constraint(
            "c",
            ConeKind::HermitianPsd(vec![3]),
            9,
            vec![Term { var: x, entries }],
            basis.coords(&k),
        )
        .unwrap();
        p.set_objective(vec![(x, 0, 1.0)]).unwrap();
        let sol = p.solve(&SolverOptions::default());
        // det condition: 1·(2·3 − 1) − x²·3 = 0 → x = √(5/3)
        assert!(
            (sol.scalar(x) - (5.0f64 / 3.0).sqrt()).abs() < 1e-6,
            "{}",
            sol.scalar(x)
        );
    }

    #[test]
    fn rejects_undeclared_variables() {
        let mut p = SdpProblem::new();
        let res = p.add_constraint(
            "bad",
            ConeKind::Zero,
            1,
            vec![Term {
                var: VarId(3),
                entries: vec![(0, 0, 1.0)],
            }],
            vec![0.0],
        );
        assert!(res.is_err());
        let t = p.add_scalar("t");
        assert!(p.require_psd(t).is_err());
        assert!(p
            .add_constraint("rows", ConeKind::HermitianPsd(vec![2]), 3, vec![], vec![0.0; 3])
            .is_err());
    }

    #[test]
    fn infeasible_is_reported() {
        // t ≥ 1 and t ≤ 0
        let mut p = SdpProblem::new();
        let t = p.add_scalar("t");
        p.add_constraint(
            "bounds",
            ConeKind::Nonneg,
            2,
            vec![Term {
                var: t,
                entries: vec![(0, 0, 1.0), (1, 0, -1.0)],
            }],
            vec![-1.0, 0.0],
        )
        .unwrap();
        p.set_objective(vec![(t, 0, 1.0)]).unwrap();
        let sol = p.solve(&SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.check("bounds").is_err());
    }
}
