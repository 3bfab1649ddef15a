//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use burgers_core::asymptotics::stationary_residual;
use burgers_core::discretization::linear_ramp;
use burgers_core::evolution::{
    boundedness_check, evolve, fit_decay, instantiate_m, perturbed_initial, EvolveConfig,
    Trajectory,
};
use burgers_core::spectrum::{
    dense_real_eigenvalues, flux_operator_dense, linearized_spectrum, metastability_sweep,
    spectrum_from_weight, symmetrization_weight,
};
use burgers_core::{
    composite, default_node_count, newton_solve_steady, BoundaryPair, CompositeProfile, Error,
    Field, Grid, ResolutionRule,
};

type Verdict = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_stationarity() -> Verdict {
    let g = Grid::symmetric(4001).unwrap();
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        for k in [-1.0, 0.0, 1.0] {
            for eps in [0.05, 0.1, 0.25] {
                let r = stationary_residual(&composite(alpha, k, eps).unwrap(), &g).max_abs();
                let tol = 1e-10 * 1f64.max(alpha * alpha * alpha / (eps * eps));
                worst = worst.max(r / tol);
            }
        }
    }
    ensure(
        worst <= 1.0,
        format!("27 lattice points, worst residual / tolerance = {worst:e}"),
    )
}

fn c2_l2_bound() -> Verdict {
    let g = Grid::symmetric(4001).unwrap();
    let mut worst = 0.0f64;
    let mut strict = true;
    for alpha in [0.5, 1.0, 2.0] {
        for eps in [0.05, 0.1, 0.25] {
            let numeric = composite(alpha, 0.0, eps).unwrap().sample(&g).norm_sq();
            let c = alpha / (2.0 * eps);
            let exact = alpha * alpha * (2.0 - (2.0 / c) * c.tanh());
            worst = worst.max(rel(numeric, exact));
            strict &= numeric < 2.0 * alpha * alpha;
        }
    }
    let anchor = composite(1.0, 0.0, 0.1).unwrap().sample(&g).norm_sq();
    ensure(
        worst <= 1e-6 && strict && (anchor - 1.60003632).abs() < 5e-9,
        format!("worst relative error {worst:e}, strict bound {strict}, anchor {anchor:.8}"),
    )
}

fn c3_boundary_gate() -> Verdict {
    let bad = BoundaryPair::new(1.0, 1.0);
    let good = BoundaryPair::new(1.0, -1.0);
    ensure(
        matches!(bad, Err(Error::IncompatibleBoundary { .. })) && good.is_ok(),
        format!("(1, 1) -> {bad:?}; (1, -1) ok = {}", good.is_ok()),
    )
}

fn c4_newton() -> Verdict {
    let g = Grid::symmetric(801).unwrap();
    let bc = BoundaryPair::new(1.0, -1.0).unwrap();
    let p = composite(1.0, 0.0, 0.1).unwrap();
    let a = newton_solve_steady(0.1, &bc, &p.sample(&g), 1e-10, 20).map_err(|e| e.to_string())?;
    let b = newton_solve_steady(0.1, &bc, &linear_ramp(&g, &bc), 1e-10, 50)
        .map_err(|e| e.to_string())?;
    let diff = a.u.sub(&p.sample(&g)).unwrap().max_abs();
    let cross = a.u.sub(&b.u).unwrap().max_abs();
    ensure(
        diff <= 5e-4 && a.iterations <= 4 && cross <= 1e-8,
        format!(
            "|u - U| = {diff:.3e}, {} iterations from U, ramp start lands {cross:.1e} away",
            a.iterations
        ),
    )
}

fn c5_eigensolver() -> Verdict {
    let g = Grid::symmetric(801).unwrap();
    let mut worst = 0.0f64;
    for eps in [0.5, 1.0] {
        let s = linearized_spectrum(&composite(0.0, 0.0, eps).unwrap(), &g, 2).unwrap();
        for (j, &l) in s.eigenvalues.iter().enumerate() {
            let exact = eps * ((j + 1) as f64 * std::f64::consts::FRAC_PI_2).powi(2);
            worst = worst.max(rel(l, exact));
        }
    }
    ensure(worst <= 1e-3, format!("worst relative error {worst:e}"))
}

fn c6_similarity() -> Verdict {
    let g = Grid::symmetric(401).unwrap();
    let mut worst = 0.0f64;
    for eps in [0.1, 0.2, 0.3, 0.5] {
        let w = symmetrization_weight(&composite(1.0, 0.0, eps).unwrap(), &g).unwrap();
        let dense = dense_real_eigenvalues(&flux_operator_dense(&w, eps).unwrap()).unwrap();
        let sym = spectrum_from_weight(w, eps, 4).unwrap().eigenvalues;
        for (s, d) in sym.iter().zip(&dense) {
            worst = worst.max(rel(*s, *d));
        }
    }
    ensure(
        worst <= 1e-6,
        format!("eps in {{0.1, 0.2, 0.3, 0.5}}, worst relative gap {worst:e}"),
    )
}

fn c7_metastability() -> Verdict {
    let eps = [0.3, 0.25, 0.2, 0.15, 0.1];
    let t = metastability_sweep(1.0, &eps, ResolutionRule::Auto, 2, 1).unwrap();
    if let Some(r) = t.rows.iter().find(|r| r.error.is_some()) {
        return Err(format!("row {} failed: {:?}", r.eps, r.error));
    }
    let fit = t.fit.ok_or_else(|| format!("no fit: {:?}", t.note))?;
    let l2: Vec<f64> = t.rows.iter().map(|r| r.eigenvalues[1]).collect();
    let spread =
        l2.iter().cloned().fold(f64::MIN, f64::max) / l2.iter().cloned().fold(f64::MAX, f64::min);
    ensure(
        fit.slope < 0.0 && fit.r_squared >= 0.95 && spread < 10.0,
        format!(
            "slope {:.4}, r^2 {:.6}, lambda2 max/min {spread:.3}",
            fit.slope, fit.r_squared
        ),
    )
}

struct Case {
    eps: f64,
    grid: Grid,
    profile: CompositeProfile,
    bc: BoundaryPair,
    lambda1: f64,
    phi1: Field,
}

fn case(eps: f64) -> Case {
    let grid = Grid::symmetric(default_node_count(eps)).unwrap();
    let profile = composite(1.0, 0.0, eps).unwrap();
    let bc = BoundaryPair::matched(&profile).unwrap();
    let mut s = linearized_spectrum(&profile, &grid, 1).unwrap();
    Case {
        eps,
        grid,
        profile,
        bc,
        lambda1: s.eigenvalues[0],
        phi1: s.eigenfunctions.swap_remove(0),
    }
}

fn config(c: &Case) -> EvolveConfig {
    let mut cfg = EvolveConfig::new(3.0 / c.lambda1, c.eps, c.bc);
    cfg.keep_snapshots = true;
    cfg
}

/// Runs kept for the boundedness criterion, with the `nu` that produced them.
type Runs = Vec<(f64, Trajectory, usize)>;

fn c8_decay(cases: &[Case], runs: &mut Runs) -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (ci, c) in cases.iter().enumerate() {
        let u0 = perturbed_initial(&c.profile, &c.phi1, 1e-3, &c.grid).unwrap();
        let tr = evolve(&u0, &c.profile.sample(&c.grid), &config(c)).map_err(|e| e.to_string())?;
        let fit = fit_decay(&tr).map_err(|e| e.to_string())?;
        let err = rel(fit.lambda_est, c.lambda1);
        let ratio = tr.deviations.last().unwrap() / tr.deviations[0];
        ok &= err <= 0.10 && ratio <= 0.06;
        lines.push(format!(
            "eps {}: rate off {:.2}%, final/initial {ratio:.4}",
            c.eps,
            100.0 * err
        ));
        runs.push((1e-3, tr, ci));
    }
    ensure(ok, lines.join("; "))
}

fn c9_linearization(cases: &[Case], runs: &mut Runs) -> Verdict {
    let mut worst = 0.0f64;
    for (ci, c) in cases.iter().enumerate() {
        let steady = newton_solve_steady(c.eps, &c.bc, &c.profile.sample(&c.grid), 1e-10, 20)
            .map_err(|e| e.to_string())?
            .u;
        let run = |nu: f64| {
            let v = steady
                .values()
                .iter()
                .zip(c.phi1.values())
                .map(|(s, f)| s + nu * f)
                .collect();
            evolve(&Field::new(c.grid, v).unwrap(), &steady, &config(c)).unwrap()
        };
        for nu in [1e-3, -1e-3] {
            let full = run(nu);
            let half = run(nu / 2.0);
            for (f, h) in full.deviations.iter().zip(&half.deviations) {
                worst = worst.max((2.0 * h - f).abs() / f);
            }
            runs.push((nu, full, ci));
            runs.push((nu / 2.0, half, ci));
        }
    }
    ensure(
        worst <= 0.02,
        format!("nu = ±1e-3 vs ±5e-4 over eps {{0.3, 0.25, 0.2}}, worst relative gap {worst:e}"),
    )
}

fn c10_boundedness(cases: &[Case], runs: &Runs) -> Verdict {
    if runs.is_empty() {
        return Err("no acceptance runs recorded".into());
    }
    let mut snapshots = 0;
    let mut worst = 0.0f64;
    for (nu, tr, ci) in runs {
        let c = &cases[*ci];
        let r = boundedness_check(tr, &c.profile, instantiate_m(&c.phi1, *nu)).unwrap();
        if !r.holds {
            return Err(format!(
                "eps {} nu {nu}: max {} >= bound {}",
                c.eps, r.max_norm_sq, r.bound
            ));
        }
        snapshots += tr.snapshots.len();
        worst = worst.max(r.max_norm_sq / r.bound);
    }
    Ok(format!(
        "{} runs, {snapshots} snapshots, max ratio to bound {worst:.4}",
        runs.len()
    ))
}

fn c11_determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_burgers");
    let invocations: [&[&str]; 7] = [
        &["profile", "--epsilon", "0.1"],
        &["steady", "--epsilon", "0.1", "--n", "801"],
        &["spectrum", "--epsilon", "0.25", "--m", "4"],
        &["evolve", "--epsilon", "0.3"],
        &[
            "sweep",
            "--epsilons",
            "0.3,0.2,0.1",
            "--m",
            "2",
            "--jobs",
            "3",
        ],
        &["report", "--epsilon", "0.25"],
        &["spectrum", "--epsilon", "0.25", "--format", "json"],
    ];
    for args in invocations {
        let once = || {
            let out = Command::new(bin)
                .args(args)
                .env_remove("BURGERS_JOBS")
                .output()
                .unwrap();
            if !out.status.success() {
                return Err(format!("{args:?} exited {:?}", out.status.code()));
            }
            Ok(out.stdout)
        };
        let (a, b) = (once()?, once()?);
        if a.is_empty() || a != b {
            return Err(format!("{args:?}: outputs differ"));
        }
    }
    Ok(format!(
        "{} commands run twice, byte-identical stdout",
        invocations.len()
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: u8, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match v {
            Ok(d) => println!("criterion {n:>2} {name:<32} PASS  {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} {name:<32} FAIL  {d}");
            }
        }
    };

    report(1, "exact_stationarity", &mut c1_stationarity);
    report(2, "l2_membership_bound", &mut c2_l2_bound);
    report(3, "boundary_compatibility_gate", &mut c3_boundary_gate);
    report(4, "asymptotics_vs_newton", &mut c4_newton);
    report(5, "eigensolver_oracle", &mut c5_eigensolver);
    report(6, "similarity_invariance", &mut c6_similarity);
    report(7, "exponentially_small_eigenvalue", &mut c7_metastability);

    let cases: Vec<Case> = [0.3, 0.25, 0.2].into_iter().map(case).collect();
    let mut runs = Runs::new();
    report(8, "dynamics_spectrum_consistency", &mut || {
        c8_decay(&cases, &mut runs)
    });
    report(9, "linearization_validity", &mut || {
        c9_linearization(&cases, &mut runs)
    });
    report(10, "boundedness", &mut || c10_boundedness(&cases, &runs));
    report(11, "determinism", &mut c11_determinism);

    if failed == 0 {
        println!("acceptance: all 11 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
