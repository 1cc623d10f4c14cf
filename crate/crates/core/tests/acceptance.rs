//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `SEPCERT_ACCEPT=1,3,7` runs a subset. Five-qubit and qutrit rows of
//! criterion 6 run only with `SEPCERT_SLOW=1`. Line `2s` is the 5×5 random
//! subsample that stands in for the full-size benchmark.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use sepcert::basis::ProductBasis;
use sepcert::bipartite::{
    adaptive_visibility, dual_witness_fixed, outer_upper_bound, ppt_visibility, visibility_fixed, AdaptiveOptions,
    OUTER_VERTICES,
};
use sepcert::conic::SolverOptions;
use sepcert::multiparty::{
    adaptive_fsep, adaptive_multiparty, fsep_dual_witness, fsep_visibility_fixed, random_product_state, Cut,
    MultiOptions, SeparabilityClass,
};
use sepcert::polytope::Polytope;
use sepcert::seesaw::{
    gamma_scan, golden_minimum, periodic_minima, seesaw_robust_fbsep, seesaw_robust_ppt, tetrahedral_angles, GammaRow,
    SeesawOptions,
};
use sepcert::states::{self, rng_from_seed, white_noise_mix};
use sepcert::{HermitianOp, Result};

type Check = Result<(bool, String)>;

struct Suite {
    only: Option<Vec<String>>,
    slow: bool,
    failed: Vec<String>,
}

impl Suite {
    fn run(&mut self, id: &str, title: &str, limit_s: f64, f: impl FnOnce(bool) -> Check) {
        if self.only.as_ref().is_some_and(|o| !o.iter().any(|x| x == id)) {
            return;
        }
        let t0 = Instant::now();
        let res = f(self.slow);
        let secs = t0.elapsed().as_secs_f64();
        let (ok, detail) = match res {
            Ok((ok, d)) => (ok && secs <= limit_s, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {id:>3} {verdict} {title}: {detail} [{secs:.0} s, limit {limit_s:.0} s]");
        if !ok {
            self.failed.push(id.to_string());
        }
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn c1(_: bool) -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let rho = states::random_density(vec![2, 2], seed)?.into_op();
        let chi = adaptive_visibility(&rho, &AdaptiveOptions::new(100, seed))?.visibility;
        let ppt = ppt_visibility(&rho, &[1])?;
        worst = worst.max((chi - ppt).abs());
    }
    Ok((worst <= 1e-3, format!("max |χ − χ_PPT| = {worst:.2e} over 50 states")))
}

fn c2(_: bool) -> Check {
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for d in 2..=5 {
        // the isotropic boundary needs ≳ 12d² vertices to converge inside 1e-3
        let n = (12 * d * d).max(100);
        for (name, rho) in [
            ("iso", states::isotropic(d, 1.0)?.into_op()),
            ("werner", states::werner(d, 1.0)?.into_op()),
        ] {
            let chi = adaptive_visibility(&rho, &AdaptiveOptions::new(n, d as u64))?.visibility;
            let ppt = ppt_visibility(&rho, &[1])?;
            worst = worst.max((chi - ppt).abs());
            rows.push(format!("{name}{d} {chi:.5}/{ppt:.5}"));
        }
    }
    Ok((
        worst <= 1e-3,
        format!("max |χ − χ_PPT| = {worst:.2e} ({})", rows.join(", ")),
    ))
}

// Stand-in for the large 5×5 benchmark: never above the PPT bound, monotone traces.
fn c2_subsample(_: bool) -> Check {
    let mut over = f64::NEG_INFINITY;
    let mut drop: f64 = 0.0;
    for seed in 0..20 {
        let rho = states::random_density(vec![5, 5], 100 + seed)?.into_op();
        let r = adaptive_visibility(&rho, &AdaptiveOptions::new(100, seed))?;
        let ppt = ppt_visibility(&rho, &[1])?;
        over = over.max(r.visibility - ppt);
        if !r.reseeded {
            drop = r.trace.windows(2).map(|w| w[0] - w[1]).fold(drop, f64::max);
        }
    }
    let monotone = drop <= 1e-6;
    Ok((
        over <= 1e-6 && monotone,
        format!("max χ − χ_PPT = {over:.1e} over 20 states, largest round-to-round drop {drop:.1e}"),
    ))
}

fn c3(_: bool) -> Check {
    let rho = states::horodecki2x4(0.25)?.into_op();
    let chi = adaptive_visibility(&rho, &AdaptiveOptions::new(500, 0))?.visibility;
    Ok((
        within(chi, 0.9685, 0.9745),
        format!("χ = {chi:.6}, want [0.9685, 0.9745]"),
    ))
}

fn c4(_: bool) -> Check {
    let mut ok = true;
    let mut rows = Vec::new();
    for k in 1..=9 {
        let b = k as f64 / 10.0;
        let rho = states::horodecki2x4(b)?.into_op();
        let inner = adaptive_visibility(&rho, &AdaptiveOptions::new(200, k))?.visibility;
        let outer = outer_upper_bound(&rho, OUTER_VERTICES, &SolverOptions::default())?;
        let bracket = outer >= inner - 1e-6;
        let detects = inner >= 1.0 - 5e-3 || outer < 1.0;
        ok &= bracket && detects;
        rows.push(format!("b={b:.1} {inner:.4}≤{outer:.4}"));
    }
    Ok((ok, rows.join(", ")))
}

fn c5(_: bool) -> Check {
    let opts = MultiOptions::new(300, 1);
    let ghz = states::ghz(3, 2)?.into_op();
    let w = states::w_state(3, 2)?.into_op();
    let rows = [
        ("GHZ FSEP", &ghz, SeparabilityClass::Fsep, 0.199, 0.002),
        ("GHZ BSEP", &ghz, SeparabilityClass::Bsep, 0.42857, 0.001),
        ("W FSEP", &w, SeparabilityClass::Fsep, 0.178, 0.002),
        ("W BSEP", &w, SeparabilityClass::Bsep, 0.479, 0.002),
    ];
    let mut ok = true;
    let mut out = Vec::new();
    for (name, rho, class, want, tol) in rows {
        let chi = adaptive_multiparty(rho, &class, &opts)?.visibility;
        ok &= (chi - want).abs() <= tol;
        out.push(format!("{name} {chi:.5} (want {want}±{tol})"));
    }
    Ok((ok, out.join(", ")))
}

fn c6(slow: bool) -> Check {
    let opts = MultiOptions::new(300, 1);
    // (name, state, lower, upper)
    let mut rows: Vec<(&str, HermitianOp, f64, f64)> = vec![
        ("4-qubit GHZ", states::ghz(4, 2)?.into_op(), 0.1101, 1.0 / 9.0 + 1e-4),
        (
            "4-qubit W",
            states::w_state(4, 2)?.into_op(),
            0.0926 - 0.0015,
            0.0926 + 0.0015,
        ),
        (
            "4-qubit cluster",
            states::cluster4().into_op(),
            0.111 - 0.0015,
            0.111 + 0.0015,
        ),
        (
            "4-qubit Dicke",
            states::dicke(4, 2)?.into_op(),
            0.08571 - 0.0015,
            0.08571 + 0.0015,
        ),
    ];
    if slow {
        rows.extend([
            ("5-qubit GHZ", states::ghz(5, 2)?.into_op(), 0.0580, 1.0 / 17.0 + 1e-4),
            ("5-qubit W", states::w_state(5, 2)?.into_op(), 0.0455, f64::INFINITY),
            ("5-qubit Dicke", states::dicke(5, 2)?.into_op(), 0.0410, f64::INFINITY),
            ("3-qutrit GHZ", states::ghz(3, 3)?.into_op(), 0.0975, 0.1 + 1e-4),
            ("3-qutrit W", states::w_state(3, 3)?.into_op(), 0.0585, f64::INFINITY),
        ]);
    }
    let mut ok = true;
    let mut out = Vec::new();
    for (name, rho, lo, hi) in rows {
        let chi = adaptive_fsep(&rho, &opts)?.visibility;
        ok &= within(chi, lo, hi);
        out.push(format!("{name} {chi:.5}"));
    }
    if !slow {
        out.push("five-qubit and qutrit rows need SEPCERT_SLOW=1".into());
    }
    Ok((ok, out.join(", ")))
}

fn c7(_: bool) -> Check {
    let rho = states::horodecki2x4(0.25)?.into_op();
    let opts = SeesawOptions {
        n_vertices: 500,
        ..SeesawOptions::default()
    };
    let t = seesaw_robust_ppt(&rho, &opts)?;
    let mut min_pt = f64::INFINITY;
    for s in &t.steps {
        min_pt = min_pt.min(s.state.partial_transpose(&[1])?.min_eigenvalue());
    }
    let acc = t.accepted_chis();
    let monotone = acc.windows(2).all(|w| w[1] <= w[0] + 1e-6);
    Ok((
        t.final_chi <= 0.950 && min_pt >= -1e-9 && monotone,
        format!(
            "χ {:.4} → {:.4} in {} accepted steps, min PT eigenvalue {min_pt:.1e}, monotone {monotone}",
            acc[0],
            t.final_chi,
            acc.len() - 1
        ),
    ))
}

fn c8(_: bool) -> Check {
    let mut best: Option<(u64, f64, f64)> = None;
    let mut all = Vec::new();
    for seed in 0..5 {
        let t = seesaw_robust_fbsep(&SeesawOptions {
            seed,
            ..SeesawOptions::default()
        })?;
        let fb = t.fbsep_chi.unwrap_or(f64::NAN);
        all.push(format!("{:.4}", t.final_chi));
        if best.is_none_or(|b| t.final_chi < b.1) {
            best = Some((seed, t.final_chi, fb));
        }
    }
    let (seed, chi, fb) = best.expect("five runs");
    Ok((
        within(chi, 0.56, 0.60) && fb >= 1.0 - 1e-3,
        format!(
            "final χ per seed [{}]; best seed {seed}: χ = {chi:.4}, FBSEP χ = {fb:.4}",
            all.join(", ")
        ),
    ))
}

fn ang_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn c9(_: bool) -> Check {
    let opts = MultiOptions::new(300, 1);
    let n = 64;
    let quarter = n / 4;
    let grid: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let rows = gamma_scan(&grid, &opts)?;
    let chis: Vec<f64> = rows.iter().map(|r| r.chi).collect();
    // χ(θ) has period π/2; the grid checks it, and only first-quadrant minima are refined
    let period_err = (0..n)
        .map(|i| (chis[i] - chis[(i + quarter) % n]).abs())
        .fold(0.0, f64::max);
    let minima = periodic_minima(&chis);
    let step = TAU / n as f64;
    let targets: Vec<f64> = (0..4)
        .flat_map(|k| [0.48 + k as f64 * FRAC_PI_2, 1.09 + k as f64 * FRAC_PI_2])
        .collect();
    let mut ok = minima.len() == 8 && period_err <= 1e-3;
    let mut out = vec![format!(
        "{} grid minima, period mismatch {period_err:.1e}",
        minima.len()
    )];
    let mut refined = Vec::new();
    for &i in minima.iter().filter(|&&i| i < quarter) {
        let f = |t: f64| gamma_scan(&[t.rem_euclid(TAU)], &opts).map(|r| r[0].chi);
        let t = golden_minimum(f, grid[i] - step, grid[i] + step, 2e-3)?.rem_euclid(TAU);
        refined.push((i, t));
    }
    for &i in &minima {
        let Some(&(_, t0)) = refined.iter().find(|(j, _)| *j == i % quarter) else {
            ok = false;
            out.push(format!("grid minimum {i} has no first-quadrant partner"));
            continue;
        };
        let t = (t0 + (i / quarter) as f64 * FRAC_PI_2).rem_euclid(TAU);
        let dist = targets.iter().map(|&x| ang_dist(t, x)).fold(f64::INFINITY, f64::min);
        let c2s2 = (t.cos() * t.sin()).powi(2);
        // the Bloch geometry is checked at the exact root of cos²θ sin²θ = 1/6 nearest the located minimum
        let exact = tetrahedral_angles()
            .into_iter()
            .min_by(|a, b| ang_dist(*a, t).total_cmp(&ang_dist(*b, t)))
            .expect("eight roots");
        let spread = GammaRow::for_theta(exact, f64::NAN).spread;
        ok &= dist <= 0.02 && (c2s2 - 1.0 / 6.0).abs() <= 1e-3 && spread <= 1e-6;
        out.push(format!("θ={t:.3} (Δ={dist:.3}, c²s²={c2s2:.4}, spread {spread:.0e})"));
    }
    Ok((ok, out.join(", ")))
}

fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex64> {
    use rand::Rng;
    let mut rng = rng_from_seed(seed);
    let a = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&a + a.adjoint()).unscale(2.0)
}

fn c10(_: bool) -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    let solver = SolverOptions::default();

    // partial transpose is an involution
    let mut pt_err: f64 = 0.0;
    for seed in 0..10 {
        let rho = states::random_density(vec![2, 3, 2], seed)?.into_op();
        for flip in [vec![0], vec![1], vec![0, 2]] {
            let back = rho.partial_transpose(&flip)?.partial_transpose(&flip)?;
            pt_err = pt_err.max(back.max_abs_diff(&rho));
        }
    }
    ok &= pt_err <= 1e-12;
    notes.push(format!("PT involution {pt_err:.0e}"));

    // monotone traces and decomposition residuals
    let mut mono = true;
    let mut resid: f64 = 0.0;
    for seed in 0..3 {
        let rho = states::random_pure(vec![2, 3], seed)?.into_op();
        let r = adaptive_visibility(&rho, &AdaptiveOptions::new(60, seed))?;
        mono &= r.reseeded || r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-6);
        let target = white_noise_mix(&rho, r.visibility);
        let rec = r.decomposition.reconstruct(rho.dims());
        resid = resid.max(rec.add(&target.scale(-1.0))?.frobenius_norm() / target.frobenius_norm());
    }
    let ghz = states::ghz(3, 2)?.into_op();
    let f = adaptive_fsep(&ghz, &MultiOptions::new(60, 3))?;
    mono &= f.trace.windows(2).all(|w| w[1] >= w[0] - 1e-6);
    resid = resid.max(f.residuals.iter().copied().fold(0.0, f64::max));
    ok &= mono && resid <= 1e-6;
    notes.push(format!("monotone {mono}, residual {resid:.1e}"));

    // primal/dual gaps
    let mut gap: f64 = 0.0;
    for seed in 0..3 {
        let rho = states::random_pure(vec![2, 2], seed)?.into_op();
        let p = Polytope::random_inner(vec![2], 40, seed)?;
        let primal = visibility_fixed(&rho, &p, 0, &solver)?.t;
        let (r, _) = dual_witness_fixed(&rho, &p, 0, &solver)?;
        gap = gap.max((primal - 1.0 / (1.0 + r)).abs());
    }
    let p = Polytope::random_inner(vec![2], 40, 9)?;
    let fp = fsep_visibility_fixed(&ghz, &p, 0, &solver)?.t;
    let fd = fsep_dual_witness(&ghz, &p, 0, &solver)?.value;
    gap = gap.max((fp - fd).abs());
    ok &= gap <= 1e-5;
    notes.push(format!("duality gap {gap:.1e}"));

    // class hierarchy on random three-qubit states
    let mut hier = true;
    let opts = MultiOptions::new(80, 5);
    for seed in 0..5 {
        let rho = states::random_pure(vec![2, 2, 2], 50 + seed)?.into_op();
        let chi = |c: SeparabilityClass| adaptive_multiparty(&rho, &c, &opts).map(|r| r.visibility.min(1.0));
        let fsep = chi(SeparabilityClass::Fsep)?;
        let fbsep = chi(SeparabilityClass::Fbsep)?;
        let cut = chi(SeparabilityClass::Sep(Some(Cut::single(0, 3)?)))?;
        let bsep = chi(SeparabilityClass::Bsep)?;
        hier &= fsep <= fbsep + 1e-3 && fbsep <= cut + 1e-3 && cut <= bsep + 1e-3;
    }
    ok &= hier;
    notes.push(format!("hierarchy {hier}"));

    // witness soundness on random product states
    let mut rng = rng_from_seed(77);
    let mut wmin = f64::INFINITY;
    for seed in 0..2 {
        let rho = states::random_pure(vec![2, 2], 30 + seed)?.into_op();
        let r = adaptive_visibility(&rho, &AdaptiveOptions::new(60, seed))?;
        let (_, w) = dual_witness_fixed(&rho, &r.polytope, r.polytope_side, &solver)?;
        let w = w.made_sound(100, &mut rng);
        for _ in 0..100 {
            wmin = wmin.min(w.value(&random_product_state(&[2, 2], &mut rng)));
        }
    }
    ok &= wmin >= -1e-6;
    notes.push(format!("witness min on products {wmin:.1e}"));

    // complex embedding round trips
    let mut emb: f64 = 0.0;
    for seed in 0..5 {
        let m = random_hermitian(6, seed);
        let op = HermitianOp::new(vec![2, 3], m.clone())?;
        let basis = ProductBasis::new(&[2, 3]);
        emb = emb.max(basis.op_from_coords(&basis.coords(&op)).max_abs_diff(&op));
        let (x, y) = (m.map(|z| z.re), m.map(|z| z.im));
        let mut big = DMatrix::<f64>::zeros(12, 12);
        big.view_mut((0, 0), (6, 6)).copy_from(&x);
        big.view_mut((0, 6), (6, 6)).copy_from(&(-&y));
        big.view_mut((6, 0), (6, 6)).copy_from(&y);
        big.view_mut((6, 6), (6, 6)).copy_from(&x);
        let back = DMatrix::from_fn(6, 6, |i, j| Complex64::new(big[(i, j)], big[(i + 6, j)]));
        emb = emb.max((back - &m).camax());
        let mut ev: Vec<f64> = op.eigh().0.iter().flat_map(|&e| [e, e]).collect();
        let mut rv: Vec<f64> = big.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        rv.sort_by(f64::total_cmp);
        emb = emb.max(ev.iter().zip(&rv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    ok &= emb <= 1e-9;
    notes.push(format!("embedding round trip {emb:.0e}"));

    Ok((ok, notes.join(", ")))
}

fn main() {
    let only = std::env::var("SEPCERT_ACCEPT")
        .ok()
        .map(|s| s.split(',').map(|x| x.trim().to_string()).collect::<Vec<_>>());
    let slow = std::env::var_os("SEPCERT_SLOW").is_some_and(|v| v != "0");
    let mut suite = Suite {
        only,
        slow,
        failed: Vec::new(),
    };
    suite.run("1", "two-qubit exactness", 300.0, c1);
    suite.run("2", "isotropic/Werner d=2..5", 600.0, c2);
    suite.run("2s", "5x5 random subsample", 3600.0, c2_subsample);
    suite.run("3", "Horodecki 2x4 b=0.25", 600.0, c3);
    suite.run("4", "outer-polytope bracketing", 900.0, c4);
    suite.run("5", "three-qubit thresholds", 1200.0, c5);
    let limit6 = if slow { 4.0 * 3600.0 } else { 1800.0 };
    suite.run("6", "benchmark table lower bounds", limit6, c6);
    suite.run("7", "PPT see-saw", 1800.0, c7);
    suite.run("8", "FBSEP see-saw", 3600.0, c8);
    suite.run("9", "rho(theta) scan", 1200.0, c9);
    suite.run("10", "property suite", 120.0, c10);
    if !suite.failed.is_empty() {
        eprintln!("failed criteria: {:?}", suite.failed);
        std::process::exit(1);
    }
}
