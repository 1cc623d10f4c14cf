use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde_json::{json, Value};

use sepcert::bipartite::{
    absolute_robustness_adaptive, adaptive_visibility, dual_witness_fixed, generalized_robustness_adaptive,
    outer_upper_bound, ppt_visibility, product_minimum, AdaptiveOptions, RobustnessReport, OUTER_VERTICES,
};
use sepcert::conic::SolverOptions;
use sepcert::io::{parse_matrix, MatrixDoc};
use sepcert::multiparty::{
    adaptive_multiparty, cut_visibility_fixed, fsep_dual_witness, fsep_step_fixed, Cut, CutBlock, MultiOptions,
    SeparabilityClass,
};
use sepcert::polytope::Polytope;
use sepcert::seesaw::{
    canonicalize_x_shape, gamma_scan, golden_minimum, periodic_minima, seesaw_robust_fbsep, seesaw_robust_ppt,
    tetrahedral_angles, x_pattern_counts, GammaRow, SeesawOptions, SeesawTrace,
};
use sepcert::states::{rng_from_seed, StateSpec};
use sepcert::{Error, HermitianOp, Result};

use crate::output::{write_csv, write_json, Cell};
use crate::{Cli, Command, Format, Global, RobustnessKind, WitnessAction};

const BIPARTITE_VERTICES: usize = 100;
const MULTI_VERTICES: usize = 300;
const PSD_TOL: f64 = 1e-10;

// chi, ppt, outer, converged
type SweepBounds = (f64, Option<f64>, Option<f64>, bool);

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    if g.tol.is_nan() || g.tol <= 0.0 {
        return Err(Error::InvalidArgument("--tol must be positive".into()));
    }
    if g.max_rounds == 0 || g.jobs == 0 || g.vertices == Some(0) {
        return Err(Error::InvalidArgument(
            "--max-rounds, --jobs and --vertices must be positive".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Certify {
            state,
            class,
            decomposition,
            save_polytope,
        } => certify(g, state, class, *decomposition, save_polytope.as_deref()),
        Command::Sweep {
            state,
            class,
            from,
            to,
            points,
            no_outer,
        } => sweep(g, state, class, *from, *to, *points, !no_outer),
        Command::CrossSection {
            anchor1,
            anchor2,
            classes,
            grid,
            min,
            max,
        } => cross_section(g, anchor1, anchor2, classes, *grid, *min, *max),
        Command::Robustness { kind, state } => robustness(g, *kind, state),
        Command::SeesawPpt { state, iterations } => seesaw_ppt(g, state, *iterations),
        Command::SeesawFbsep { seeds, iterations } => seesaw_fbsep(g, *seeds, *iterations),
        Command::GammaScan { points, refine } => gamma(g, *points, *refine),
        Command::Witness { action } => match action {
            WitnessAction::Extract { state } => witness_extract(g, state),
            WitnessAction::Verify { witness, state, starts } => witness_verify(g, witness, state.as_deref(), *starts),
        },
    })
}

fn load_state(spec: &str) -> Result<(StateSpec, HermitianOp)> {
    let spec: StateSpec = spec.parse()?;
    let rho = spec.make_state()?.into_op();
    Ok((spec, rho))
}

fn parse_class(s: &str, n: usize) -> Result<SeparabilityClass> {
    let class: SeparabilityClass = s.parse()?;
    if n == 2 {
        if let SeparabilityClass::Sep(Some(_)) | SeparabilityClass::Fsep = class {
            // every bipartite class is plain SEP
            return Ok(SeparabilityClass::Sep(None));
        }
    }
    class.validate(n)?;
    Ok(class)
}

fn adaptive_opts(g: &Global) -> AdaptiveOptions {
    let mut o = AdaptiveOptions::new(g.vertices.unwrap_or(BIPARTITE_VERTICES), g.seed);
    o.conv_tol = g.tol;
    o.max_rounds = g.max_rounds;
    o
}

fn multi_opts(g: &Global) -> MultiOptions {
    let mut o = MultiOptions::new(g.vertices.unwrap_or(MULTI_VERTICES), g.seed);
    o.conv_tol = g.tol;
    o.max_rounds = g.max_rounds;
    o
}

/// All bipartitions with party A on the first side.
fn bipartitions(n: usize) -> Vec<Cut> {
    (1..(1usize << (n - 1)))
        .map(|mask| {
            let b: Vec<usize> = (0..n - 1).filter(|q| mask >> q & 1 == 1).map(|q| q + 1).collect();
            let a: Vec<usize> = (0..n).filter(|q| !b.contains(q)).collect();
            Cut::new(a, b).expect("disjoint nonempty sides")
        })
        .collect()
}

/// PPT upper bound on `χ` where PPT is implied by membership.
fn ppt_upper(rho: &HermitianOp, class: &SeparabilityClass) -> Result<Option<f64>> {
    let n = rho.num_subsystems();
    Ok(match class {
        SeparabilityClass::Sep(None) if n == 2 => Some(ppt_visibility(rho, &[1])?),
        SeparabilityClass::Sep(Some(cut)) => Some(ppt_visibility(rho, &cut.b)?),
        SeparabilityClass::Fsep => {
            let mut best = f64::INFINITY;
            for cut in bipartitions(n) {
                best = best.min(ppt_visibility(rho, &cut.b)?);
            }
            Some(best)
        }
        _ => None,
    })
}

struct Certified {
    visibility: f64,
    capped: bool,
    converged: bool,
    rounds: usize,
    json: Value,
    classifier: Classifier,
}

fn certify_state(g: &Global, rho: &HermitianOp, class: &SeparabilityClass, embed: bool) -> Result<Certified> {
    if rho.num_subsystems() == 2 {
        let r = adaptive_visibility(rho, &adaptive_opts(g))?;
        Ok(Certified {
            visibility: r.visibility,
            capped: r.capped,
            converged: r.converged,
            rounds: r.trace.len(),
            json: r.to_json(embed),
            classifier: Classifier::Bipartite {
                side: r.polytope_side,
                polytope: r.polytope,
            },
        })
    } else {
        let r = adaptive_multiparty(rho, class, &multi_opts(g))?;
        let classifier = match r.free_group {
            Some(free) => Classifier::Fsep {
                groups: r.polytopes.iter().map(|(gr, _)| gr.clone()).collect(),
                factors: r.polytopes.iter().map(|(_, p)| p.clone()).collect(),
                free,
            },
            None => Classifier::Cut(r.best_blocks.clone()),
        };
        Ok(Certified {
            visibility: r.visibility,
            capped: r.capped,
            converged: r.converged,
            rounds: r.trace.len(),
            json: r.to_json(embed),
            classifier,
        })
    }
}

fn format_or(g: &Global, default: Format) -> Format {
    g.format.unwrap_or(default)
}

fn certify(g: &Global, state: &str, class: &str, embed: bool, save: Option<&Path>) -> Result<()> {
    let (spec, rho) = load_state(state)?;
    let class = parse_class(class, rho.num_subsystems())?;
    let t0 = Instant::now();
    let c = certify_state(g, &rho, &class, embed)?;
    let ppt = ppt_upper(&rho, &class)?;
    let wall = t0.elapsed().as_secs_f64();
    if let (Some(path), Classifier::Bipartite { polytope, .. }) = (save, &c.classifier) {
        polytope.save(path)?;
    } else if save.is_some() {
        warn!("--save-polytope is only supported for bipartite states");
    }
    match format_or(g, Format::Json) {
        Format::Json => {
            let mut v = c.json;
            v["state"] = spec.to_string().into();
            v["ppt_upper"] = json!(ppt);
            v["wall_time"] = wall.into();
            write_json(g.out.as_deref(), &v)
        }
        Format::Csv => {
            let header = [
                "state",
                "class",
                "visibility",
                "capped",
                "certified",
                "converged",
                "rounds",
                "ppt_upper",
                "seed",
                "vertices",
                "wall_time",
            ];
            let row = vec![
                Cell::from(spec.to_string()),
                class.to_string().into(),
                c.visibility.into(),
                c.capped.into(),
                (c.visibility >= 1.0).into(),
                c.converged.into(),
                c.rounds.into(),
                ppt.unwrap_or(f64::NAN).into(),
                g.seed.into(),
                g.vertices
                    .unwrap_or(if rho.num_subsystems() == 2 {
                        BIPARTITE_VERTICES
                    } else {
                        MULTI_VERTICES
                    })
                    .into(),
                wall.into(),
            ];
            write_csv(g.out.as_deref(), &strings(&header), &[row])
        }
    }
}

fn strings(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

fn grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![from];
    }
    (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn sweep(g: &Global, state: &str, class: &str, from: f64, to: f64, points: usize, outer: bool) -> Result<()> {
    let spec: StateSpec = state.parse()?;
    let (name, _) = spec
        .sweep_parameter()
        .ok_or_else(|| Error::InvalidArgument(format!("{spec} has no scalar parameter to sweep")))?;
    if points == 0 {
        return Err(Error::InvalidArgument("--points must be positive".into()));
    }
    spec.with_parameter(from)?;
    spec.with_parameter(to)?;
    let probe = spec.make_state()?.into_op();
    let n = probe.num_subsystems();
    let class = parse_class(class, n)?;
    let use_outer = outer && n == 2 && probe.dims()[0] == 2;
    let rows: Vec<(f64, Result<SweepBounds>, f64)> = grid(from, to, points)
        .into_par_iter()
        .map(|x| {
            let t0 = Instant::now();
            let res = (|| {
                let rho = spec.with_parameter(x)?.make_state()?.into_op();
                let c = certify_state(g, &rho, &class, false)?;
                let ppt = ppt_upper(&rho, &class)?;
                let outer = if use_outer {
                    Some(outer_upper_bound(&rho, OUTER_VERTICES, &SolverOptions::default())?)
                } else {
                    None
                };
                Ok((c.visibility, ppt, outer, c.converged))
            })();
            info!("{name} = {x}: {res:?}");
            (x, res, t0.elapsed().as_secs_f64())
        })
        .collect();
    match format_or(g, Format::Csv) {
        Format::Csv => {
            let header = strings(&[
                "parameter",
                "chi_lower",
                "ppt_upper",
                "outer_upper",
                "converged",
                "wall_time",
                "status",
                "seed",
            ]);
            let table: Vec<Vec<Cell>> = rows
                .iter()
                .map(|(x, r, wall)| match r {
                    Ok((chi, ppt, outer, conv)) => vec![
                        Cell::from(*x),
                        (*chi).into(),
                        ppt.unwrap_or(f64::NAN).into(),
                        outer.unwrap_or(f64::NAN).into(),
                        (*conv).into(),
                        (*wall).into(),
                        "ok".into(),
                        g.seed.into(),
                    ],
                    Err(e) => vec![
                        Cell::from(*x),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        false.into(),
                        (*wall).into(),
                        format!("error: {e}").into(),
                        g.seed.into(),
                    ],
                })
                .collect();
            write_csv(g.out.as_deref(), &header, &table)
        }
        Format::Json => {
            let v = json!({
                "state": spec.to_string(),
                "parameter": name,
                "class": class.to_string(),
                "seed": g.seed,
                "rows": rows.iter().map(|(x, r, wall)| match r {
                    Ok((chi, ppt, outer, conv)) => json!({
                        "parameter": x, "chi_lower": chi, "ppt_upper": ppt, "outer_upper": outer,
                        "converged": conv, "wall_time": wall, "status": "ok",
                    }),
                    Err(e) => json!({"parameter": x, "wall_time": wall, "status": format!("error: {e}")}),
                }).collect::<Vec<_>>(),
            });
            write_json(g.out.as_deref(), &v)
        }
    }
}

/// A converged polytope configuration reused for membership tests.
enum Classifier {
    Bipartite {
        polytope: Polytope,
        side: usize,
    },
    Fsep {
        groups: Vec<Vec<usize>>,
        factors: Vec<Polytope>,
        free: usize,
    },
    Cut(Vec<Vec<CutBlock>>),
}

impl Classifier {
    fn visibility(&self, rho: &HermitianOp, solver: &SolverOptions) -> Result<f64> {
        Ok(match self {
            Classifier::Bipartite { polytope, side } => {
                sepcert::bipartite::visibility_fixed(rho, polytope, *side, solver)?.t
            }
            Classifier::Fsep { groups, factors, free } => fsep_step_fixed(rho, groups, factors, *free, solver)?.t,
            Classifier::Cut(blocks) => cut_visibility_fixed(rho, blocks, solver)?.t,
        })
    }
}

fn column_name(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect::<String>()
        .trim_end_matches('_')
        .to_string()
}

fn cross_section(g: &Global, a1: &str, a2: &str, classes: &str, n_grid: usize, min: f64, max: f64) -> Result<()> {
    let (s1, r1) = load_state(a1)?;
    let (s2, r2) = load_state(a2)?;
    if r1.dims() != r2.dims() {
        return Err(Error::InvalidArgument(format!(
            "anchors have different dims {:?} and {:?}",
            r1.dims(),
            r2.dims()
        )));
    }
    if n_grid < 2 || min.is_nan() || max.is_nan() || min >= max {
        return Err(Error::InvalidArgument("need --grid ≥ 2 and --min < --max".into()));
    }
    let n = r1.num_subsystems();
    let classes: Vec<SeparabilityClass> = classes
        .split(',')
        .map(|c| parse_class(c.trim(), n))
        .collect::<Result<_>>()?;
    let cuts = bipartitions(n);
    // one adaption per class, at the anchor with the smaller χ
    let mut classifiers = Vec::new();
    for class in &classes {
        let c1 = certify_state(g, &r1, class, false)?;
        let c2 = certify_state(g, &r2, class, false)?;
        info!("{class}: anchor χ = {:.6}, {:.6}", c1.visibility, c2.visibility);
        classifiers.push(if c1.visibility <= c2.visibility {
            c1.classifier
        } else {
            c2.classifier
        });
    }
    let mm = HermitianOp::maximally_mixed(r1.dims().to_vec());
    let d1 = r1.add(&mm.scale(-1.0))?;
    let d2 = r2.add(&mm.scale(-1.0))?;
    let axis = grid(min, max, n_grid);
    let points: Vec<(f64, f64)> = axis.iter().flat_map(|&y| axis.iter().map(move |&x| (x, y))).collect();
    let solver = SolverOptions::default();
    let rows: Vec<Result<Vec<Cell>>> = points
        .par_iter()
        .map(|&(x, y)| {
            let op = mm.add(&d1.scale(x))?.add(&d2.scale(y))?;
            let psd = op.min_eigenvalue() >= -PSD_TOL;
            let mut row = vec![Cell::from(x), y.into(), psd.into()];
            for cut in &cuts {
                let ppt = psd && op.partial_transpose(&cut.b)?.min_eigenvalue() >= -PSD_TOL;
                row.push(ppt.into());
            }
            for cl in &classifiers {
                let chi = if psd { cl.visibility(&op, &solver)? } else { f64::NAN };
                row.push(chi.into());
                // a point is a member when the ray reaches past it
                row.push((chi >= 1.0 + 1e-7).into());
            }
            row.push(g.seed.into());
            Ok(row)
        })
        .collect();
    let rows: Vec<Vec<Cell>> = rows.into_iter().collect::<Result<_>>()?;
    let mut header = strings(&["x", "y", "psd"]);
    header.extend(cuts.iter().map(|c| format!("ppt_{}", column_name(&c.to_string()))));
    for class in &classes {
        let name = column_name(&class.to_string());
        header.push(format!("chi_{name}"));
        header.push(name);
    }
    header.push("seed".into());
    if format_or(g, Format::Csv) == Format::Json {
        warn!("cross-section writes CSV only");
    }
    info!("anchors {s1} and {s2}");
    write_csv(g.out.as_deref(), &header, &rows)
}

fn robustness(g: &Global, kind: RobustnessKind, state: &str) -> Result<()> {
    let (spec, rho) = load_state(state)?;
    if rho.num_subsystems() != 2 {
        return Err(Error::InvalidArgument(
            "robustness is implemented for bipartite states".into(),
        ));
    }
    let opts = adaptive_opts(g);
    let (name, r) = match kind {
        RobustnessKind::Random => {
            let rep = adaptive_visibility(&rho, &opts)?;
            (
                "random",
                RobustnessReport {
                    robustness: rep.robustness(),
                    visibility: rep.visibility,
                    trace: rep.trace,
                    converged: rep.converged,
                },
            )
        }
        RobustnessKind::Absolute => ("absolute", absolute_robustness_adaptive(&rho, &opts)?),
        RobustnessKind::Generalized => ("generalized", generalized_robustness_adaptive(&rho, &opts)?),
    };
    match format_or(g, Format::Json) {
        Format::Json => {
            let mut v = r.to_json(name);
            v["state"] = spec.to_string().into();
            v["seed"] = g.seed.into();
            write_json(g.out.as_deref(), &v)
        }
        Format::Csv => write_csv(
            g.out.as_deref(),
            &strings(&[
                "state",
                "kind",
                "robustness",
                "visibility",
                "converged",
                "rounds",
                "seed",
            ]),
            &[vec![
                Cell::from(spec.to_string()),
                name.into(),
                r.robustness.into(),
                r.visibility.into(),
                r.converged.into(),
                r.trace.len().into(),
                g.seed.into(),
            ]],
        ),
    }
}

fn seesaw_opts(g: &Global, iterations: usize) -> SeesawOptions {
    SeesawOptions {
        seed: g.seed,
        n_vertices: g.vertices.unwrap_or(SeesawOptions::default().n_vertices),
        conv_tol: g.tol,
        max_iterations: iterations,
        ..SeesawOptions::default()
    }
}

fn trace_rows(t: &SeesawTrace, seed: u64) -> Vec<Vec<Cell>> {
    t.steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                Cell::from(seed),
                i.into(),
                s.chi.into(),
                s.witness_value.into(),
                s.accepted.into(),
            ]
        })
        .collect()
}

const TRACE_HEADER: [&str; 5] = ["seed", "iteration", "chi", "witness_value", "accepted"];

fn seesaw_ppt(g: &Global, state: &str, iterations: usize) -> Result<()> {
    let (spec, rho) = load_state(state)?;
    if rho.num_subsystems() != 2 {
        return Err(Error::InvalidArgument("the PPT see-saw needs a bipartite state".into()));
    }
    let t = seesaw_robust_ppt(&rho, &seesaw_opts(g, iterations))?;
    match format_or(g, Format::Json) {
        Format::Json => {
            let mut v = t.to_json();
            v["state"] = spec.to_string().into();
            v["seed"] = g.seed.into();
            write_json(g.out.as_deref(), &v)
        }
        Format::Csv => write_csv(g.out.as_deref(), &strings(&TRACE_HEADER), &trace_rows(&t, g.seed)),
    }
}

fn seesaw_fbsep(g: &Global, seeds: usize, iterations: usize) -> Result<()> {
    if seeds == 0 {
        return Err(Error::InvalidArgument("--seeds must be positive".into()));
    }
    let base = seesaw_opts(g, iterations);
    let runs: Vec<(u64, Result<SeesawTrace>)> = (0..seeds as u64)
        .into_par_iter()
        .map(|k| {
            let seed = g.seed.wrapping_add(k);
            let opts = SeesawOptions { seed, ..base.clone() };
            (seed, seesaw_robust_fbsep(&opts))
        })
        .collect();
    let best = runs
        .iter()
        .filter_map(|(s, r)| r.as_ref().ok().map(|t| (*s, t)))
        .min_by(|a, b| a.1.final_chi.total_cmp(&b.1.final_chi));
    let Some((best_seed, best_trace)) = best else {
        let msgs: Vec<String> = runs
            .iter()
            .filter_map(|(s, r)| r.as_ref().err().map(|e| format!("seed {s}: {e}")))
            .collect();
        return Err(Error::Solver(msgs.join("; ")));
    };
    let (canon, off) = canonicalize_x_shape(&best_trace.final_state, 20, g.seed)?;
    let (diag, anti, rest) = x_pattern_counts(&canon, 1e-3);
    match format_or(g, Format::Json) {
        Format::Json => {
            let v = json!({
                "seed": g.seed,
                "runs": runs.iter().map(|(s, r)| match r {
                    Ok(t) => json!({"seed": s, "status": "ok", "trace": t.to_json()}),
                    Err(e) => json!({"seed": s, "status": format!("error: {e}")}),
                }).collect::<Vec<_>>(),
                "best": {
                    "seed": best_seed,
                    "final_chi": best_trace.final_chi,
                    "fbsep_chi": best_trace.fbsep_chi,
                    "canonical_state": MatrixDoc::from_op(&canon),
                    "off_pattern_weight": off,
                    "pattern_counts": {"diagonal": diag, "antidiagonal": anti, "other": rest},
                },
            });
            write_json(g.out.as_deref(), &v)
        }
        Format::Csv => {
            let header = strings(&[
                "seed",
                "final_chi",
                "fbsep_chi",
                "restarts",
                "converged",
                "accepted_steps",
                "best",
                "status",
            ]);
            let rows: Vec<Vec<Cell>> = runs
                .iter()
                .map(|(s, r)| match r {
                    Ok(t) => vec![
                        Cell::from(*s),
                        t.final_chi.into(),
                        t.fbsep_chi.unwrap_or(f64::NAN).into(),
                        t.restarts.into(),
                        t.converged.into(),
                        t.accepted_chis().len().into(),
                        (*s == best_seed).into(),
                        "ok".into(),
                    ],
                    Err(e) => vec![
                        Cell::from(*s),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        0usize.into(),
                        false.into(),
                        0usize.into(),
                        false.into(),
                        format!("error: {e}").into(),
                    ],
                })
                .collect();
            write_csv(g.out.as_deref(), &header, &rows)
        }
    }
}

fn gamma_row_cells(r: &GammaRow, seed: u64) -> Vec<Cell> {
    let mut row = vec![Cell::from(r.theta), r.chi.into()];
    row.extend(r.bloch.iter().flatten().map(|&x| Cell::from(x)));
    row.extend(r.distances.iter().map(|&x| Cell::from(x)));
    row.extend([
        Cell::from(r.spread),
        r.volume.into(),
        r.han_residual.into(),
        seed.into(),
    ]);
    row
}

fn gamma_header() -> Vec<String> {
    let mut h = strings(&["theta", "chi"]);
    for i in 1..=4 {
        for c in ["x", "y", "z"] {
            h.push(format!("r{i}_{c}"));
        }
    }
    for (i, j) in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)] {
        h.push(format!("d{i}{j}"));
    }
    h.extend(strings(&["spread", "volume", "han_residual", "seed"]));
    h
}

fn gamma(g: &Global, points: usize, refine: bool) -> Result<()> {
    if points < 3 {
        return Err(Error::InvalidArgument("--points must be at least 3".into()));
    }
    let opts = multi_opts(g);
    let thetas: Vec<f64> = (0..points).map(|k| TAU * k as f64 / points as f64).collect();
    let rows: Vec<GammaRow> = thetas
        .par_iter()
        .map(|&t| gamma_scan(&[t], &opts).map(|mut v| v.remove(0)))
        .collect::<Result<_>>()?;
    let chis: Vec<f64> = rows.iter().map(|r| r.chi).collect();
    let step = TAU / points as f64;
    let mut minima = Vec::new();
    for i in periodic_minima(&chis) {
        let theta = rows[i].theta;
        // the curve has period π/2, so only the first quadrant is refined
        let refined = if refine && theta < FRAC_PI_2 {
            let f = |t: f64| gamma_scan(&[t.rem_euclid(TAU)], &opts).map(|r| r[0].chi);
            Some(golden_minimum(f, theta - step, theta + step, 2e-3)?)
        } else {
            None
        };
        let near = tetrahedral_angles()
            .into_iter()
            .min_by(|a, b| ang_dist(*a, theta).total_cmp(&ang_dist(*b, theta)))
            .expect("eight angles");
        let at = GammaRow::for_theta(near, f64::NAN);
        minima.push(json!({
            "grid_theta": theta,
            "chi": rows[i].chi,
            "refined_theta": refined,
            "nearest_tetrahedral_theta": near,
            "spread_at_tetrahedral": at.spread,
            "cos2_sin2_at_refined": refined.map(|t| (t.cos() * t.sin()).powi(2)),
        }));
    }
    match format_or(g, Format::Csv) {
        Format::Csv => {
            for m in &minima {
                info!("minimum {m}");
            }
            let table: Vec<Vec<Cell>> = rows.iter().map(|r| gamma_row_cells(r, g.seed)).collect();
            write_csv(g.out.as_deref(), &gamma_header(), &table)
        }
        Format::Json => {
            let header = gamma_header();
            let v = json!({
                "seed": g.seed,
                "rows": rows.iter().map(|r| {
                    let cells = gamma_row_cells(r, g.seed);
                    header.iter().zip(cells).map(|(h, c)| (h.clone(), match c {
                        Cell::Num(x) => json!(x),
                        Cell::Int(n) => json!(n),
                        Cell::Bool(b) => json!(b),
                        Cell::Text(s) => json!(s),
                    })).collect::<serde_json::Map<_, _>>()
                }).collect::<Vec<_>>(),
                "minima": minima,
            });
            write_json(g.out.as_deref(), &v)
        }
    }
}

fn ang_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn witness_extract(g: &Global, state: &str) -> Result<()> {
    let (spec, rho) = load_state(state)?;
    let solver = SolverOptions::default();
    let mut rng = rng_from_seed(g.seed ^ 0x5eed);
    let v = if rho.num_subsystems() == 2 {
        let rep = adaptive_visibility(&rho, &adaptive_opts(g))?;
        let (r, raw) = dual_witness_fixed(&rho, &rep.polytope, rep.polytope_side, &solver)?;
        let sound = raw.made_sound(100, &mut rng);
        json!({
            "state": spec.to_string(),
            "seed": g.seed,
            "visibility": rep.visibility,
            "dual_visibility": 1.0 / (1.0 + r),
            "polytope_side": rep.polytope_side,
            "vertex_constraints_ok": raw.vertex_constraints_ok,
            "min_vertex_eigenvalue": raw.min_vertex_eigenvalue,
            "raw_value": raw.value(&rho),
            "shift": sound.shift,
            "value": sound.value(&rho),
            "detects": sound.value(&rho) < 0.0,
            "witness": MatrixDoc::from_op(&sound.op),
            "raw_witness": MatrixDoc::from_op(&raw.op),
        })
    } else {
        let rep = adaptive_multiparty(&rho, &SeparabilityClass::Fsep, &multi_opts(g))?;
        let (gi, p) = rep
            .polytopes
            .iter()
            .find(|(gr, _)| gr.len() == 1)
            .ok_or_else(|| Error::InvalidArgument("no single-party polytope to take the dual against".into()))?;
        let dual = fsep_dual_witness(&rho, p, gi[0], &solver)?;
        let m = product_minimum(&dual.y0, 100, &mut rng);
        let shift = if m < 0.0 { -m + 1e-9 } else { 0.0 };
        let sound = dual.y0.add(&HermitianOp::identity(rho.dims().to_vec()).scale(shift))?;
        json!({
            "state": spec.to_string(),
            "seed": g.seed,
            "visibility": rep.visibility,
            "dual_visibility": dual.value,
            "polytope_party": gi[0],
            "raw_value": dual.y0.inner(&rho),
            "shift": shift,
            "value": sound.inner(&rho),
            "detects": sound.inner(&rho) < 0.0,
            "witness": MatrixDoc::from_op(&sound),
            "raw_witness": MatrixDoc::from_op(&dual.y0),
        })
    };
    write_json(g.out.as_deref(), &v)
}

fn witness_verify(g: &Global, path: &Path, state: Option<&str>, starts: usize) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let inner = doc.get("witness").cloned().unwrap_or(doc);
    let w = parse_matrix(&inner.to_string()).map_err(|e| e.context(path.display()))?;
    if w.num_subsystems() < 2 {
        return Err(Error::InvalidArgument("a witness needs at least two parties".into()));
    }
    let mut rng = rng_from_seed(g.seed ^ 0x5eed);
    let pm = product_minimum(&w, starts.max(1), &mut rng);
    let value = match state {
        Some(s) => {
            let (_, rho) = load_state(s)?;
            if rho.dims() != w.dims() {
                return Err(Error::InvalidArgument(format!(
                    "state dims {:?} differ from witness dims {:?}",
                    rho.dims(),
                    w.dims()
                )));
            }
            Some(w.inner(&rho))
        }
        None => None,
    };
    let v = json!({
        "seed": g.seed,
        "product_minimum": pm,
        "nonnegative_on_products": pm >= -1e-7,
        "state_value": value,
        "detects": value.map(|x| x < 0.0 && pm >= -1e-7),
    });
    match format_or(g, Format::Json) {
        Format::Json => write_json(g.out.as_deref(), &v),
        Format::Csv => write_csv(
            g.out.as_deref(),
            &strings(&["product_minimum", "nonnegative_on_products", "state_value", "seed"]),
            &[vec![
                Cell::from(pm),
                (pm >= -1e-7).into(),
                value.unwrap_or(f64::NAN).into(),
                g.seed.into(),
            ]],
        ),
    }
}
