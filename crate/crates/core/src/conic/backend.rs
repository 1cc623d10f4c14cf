use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::embed::{RealCone, RealConicProblem};
use super::{KktMethod, SdpProblem, SdpSolution, SolveStatus, SolverOptions, FAER_THRESHOLD};

// Loose acceptance for runs that stop on iteration limits or stalls.
const STALL_ACCEPT: f64 = 1e-6;

fn kkt_method(k: KktMethod, zero_rows: usize) -> &'static str {
    match k {
        KktMethod::Qdldl => "qdldl",
        KktMethod::Faer => "faer",
        KktMethod::Auto if zero_rows > FAER_THRESHOLD => "faer",
        KktMethod::Auto => "qdldl",
    }
}

pub(super) fn solve_real(p: &SdpProblem, real: &RealConicProblem, opts: &SolverOptions) -> SdpSolution {
    let m = real.b.len();
    let n = real.n;
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    for &(r, c, v) in &real.a {
        rows.push(r);
        cols.push(c);
        vals.push(v);
    }
    let a = CscMatrix::new_from_triplets(m, n, rows, cols, vals);
    let pm = CscMatrix::<f64>::zeros((n, n));
    let cones: Vec<SupportedConeT<f64>> = real
        .cones
        .iter()
        .map(|c| match *c {
            RealCone::Zero(k) => SupportedConeT::ZeroConeT(k),
            RealCone::Nonneg(k) => SupportedConeT::NonnegativeConeT(k),
            RealCone::Psd(k) => SupportedConeT::PSDTriangleConeT(k),
        })
        .collect();
    let zero_rows: usize = real
        .cones
        .iter()
        .map(|c| if let RealCone::Zero(k) = c { *k } else { 0 })
        .sum();
    let settings = match DefaultSettingsBuilder::default()
        .verbose(opts.verbose)
        .max_iter(opts.max_iter)
        .direct_solve_method(kkt_method(opts.kkt, zero_rows).into())
        .tol_gap_abs(opts.tol)
        .tol_gap_rel(opts.tol)
        .tol_feas(opts.tol)
        .tol_infeas_abs(opts.tol)
        .tol_infeas_rel(opts.tol)
        .build()
    {
        Ok(s) => s,
        Err(e) => return SdpSolution::failed(p, format!("solver settings: {e}")),
    };
    let mut solver = match DefaultSolver::new(&pm, &real.q, &a, &real.b, &cones, settings) {
        Ok(s) => s,
        Err(e) => return SdpSolution::failed(p, format!("solver setup: {e}")),
    };
    solver.solve();
    let s = &solver.solution;

    let objective = -s.obj_val;
    let dual_objective: f64 = s.z.iter().zip(&real.b).map(|(z, b)| z * b).sum();
    let gap = (objective - dual_objective).abs() / (1.0 + objective.abs().max(dual_objective.abs()));
    let (status, message) = match s.status {
        SolverStatus::Solved => (SolveStatus::Optimal, String::from("solved")),
        SolverStatus::AlmostSolved => (SolveStatus::Inaccurate, String::from("almost solved")),
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            (SolveStatus::Infeasible, format!("{:?}", s.status))
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            (SolveStatus::Failed, String::from("unbounded objective"))
        }
        other => {
            let ok = s.r_prim < STALL_ACCEPT && s.r_dual < STALL_ACCEPT && gap < STALL_ACCEPT;
            if ok && objective.is_finite() {
                (SolveStatus::Inaccurate, format!("{other:?} with small residuals"))
            } else {
                (
                    SolveStatus::Failed,
                    format!(
                        "{other:?} (primal {:.1e}, dual {:.1e}, gap {gap:.1e})",
                        s.r_prim, s.r_dual
                    ),
                )
            }
        }
    };

    let duals = real
        .blocks
        .iter()
        .zip(p.constraints())
        .map(|((row0, map), c)| match map {
            None => s.z[*row0..*row0 + c.rows].to_vec(),
            Some(m) => m.pull_back(&s.z[*row0..*row0 + m.packed_len]),
        })
        .collect();

    let mut out = SdpSolution::failed(p, message);
    out.status = status;
    out.objective = objective;
    out.dual_objective = dual_objective;
    out.x = s.x.clone();
    out.duals = duals;
    out.iterations = s.iterations;
    out.solve_time = s.solve_time;
    log::debug!(
        "conic solve: {} vars, {} rows, {:?} in {} iterations ({:.2}s), objective {objective:.10}",
        n,
        m,
        s.status,
        s.iterations,
        s.solve_time
    );
    out
}
