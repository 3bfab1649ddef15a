use serde::Serialize;

use burgers_core::asymptotics::stationary_residual;
use burgers_core::evolution::{evolve, fit_decay, perturbed_initial, DecayFit, EvolveConfig};
use burgers_core::spectrum::{
    linearized_spectrum_with, metastability_sweep, Equilibrium, SpectrumOptions, SpectrumResult,
};
use burgers_core::{
    composite, default_node_count, newton_solve_steady, BoundaryPair, CompositeProfile, Field,
    Grid, ResolutionRule, SteadyResult,
};

use crate::args::{Base, Command, Format, NodeSpec, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, sweep_header, to_json, Csv};
use crate::report;

/// Refuse evolutions that would take more steps than this; `--t-end` can
/// shorten the run.
pub const MAX_STEPS: f64 = 1e7;

/// The bytes a command produces, plus non-fatal diagnostics for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub body: String,
    pub warnings: Vec<String>,
}

impl From<String> for Artifact {
    fn from(body: String) -> Self {
        Self {
            body,
            warnings: Vec::new(),
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Artifact, CliError> {
    match cfg.command {
        Command::Profile => profile(cfg),
        Command::Steady => steady(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Evolve => evolution(cfg),
        Command::Sweep => sweep(cfg),
        Command::Report => report::render(&report::build(cfg)?, cfg.format).map(Artifact::from),
    }
}

pub fn grid_for(n: NodeSpec, eps: f64) -> Result<Grid, CliError> {
    let n = match n {
        NodeSpec::Auto => default_node_count(eps),
        NodeSpec::Fixed(n) => n,
    };
    Ok(Grid::symmetric(n)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub x: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "Ux")]
    pub ux: f64,
    #[serde(rename = "Uxx")]
    pub uxx: f64,
    pub residual: f64,
}

pub fn profile_rows(p: &CompositeProfile, g: &Grid) -> Vec<ProfileRow> {
    let r = stationary_residual(p, g);
    g.nodes()
        .zip(r.values())
        .map(|(x, &residual)| ProfileRow {
            x,
            u: p.value(x),
            ux: p.derivative(x),
            uxx: p.second_derivative(x),
            residual,
        })
        .collect()
}

#[derive(Serialize)]
struct ProfileDoc<'a> {
    alpha: f64,
    k: f64,
    eps: f64,
    n: usize,
    rows: &'a [ProfileRow],
}

fn profile(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let eps = cfg.eps.single();
    let g = grid_for(cfg.n, eps)?;
    let p = composite(cfg.alpha, cfg.k, eps)?;
    let rows = profile_rows(&p, &g);
    let body = match cfg.format {
        Format::Csv => {
            let mut csv = Csv::new(&["x", "U", "Ux", "Uxx", "residual"]);
            for r in &rows {
                csv.floats(&[r.x, r.u, r.ux, r.uxx, r.residual]);
            }
            csv.finish()
        }
        Format::Json => to_json(&ProfileDoc {
            alpha: cfg.alpha,
            k: cfg.k,
            eps,
            n: g.n(),
            rows: &rows,
        }),
    };
    Ok(body.into())
}

/// Newton solve for `(alpha, -alpha)` data started from the composite.
pub fn steady_solve(
    cfg: &RunConfig,
    p: &CompositeProfile,
    g: &Grid,
) -> Result<SteadyResult, CliError> {
    let bc = BoundaryPair::antisymmetric(cfg.alpha)?;
    Ok(newton_solve_steady(
        p.eps(),
        &bc,
        &p.sample(g),
        cfg.tol,
        cfg.max_iter,
    )?)
}

#[derive(Serialize)]
struct SteadyRow {
    x: f64,
    u_newton: f64,
    #[serde(rename = "U_composite")]
    u_composite: f64,
    diff: f64,
}

#[derive(Serialize)]
struct SteadyDoc {
    alpha: f64,
    k: f64,
    eps: f64,
    n: usize,
    iterations: usize,
    residual_history: Vec<f64>,
    max_abs_diff: f64,
    rows: Vec<SteadyRow>,
}

fn steady(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let eps = cfg.eps.single();
    let g = grid_for(cfg.n, eps)?;
    let p = composite(cfg.alpha, cfg.k, eps)?;
    let sol = steady_solve(cfg, &p, &g)?;
    let rows: Vec<SteadyRow> = g
        .nodes()
        .zip(sol.u.values())
        .map(|(x, &u)| SteadyRow {
            x,
            u_newton: u,
            u_composite: p.value(x),
            diff: u - p.value(x),
        })
        .collect();
    let body = match cfg.format {
        Format::Csv => {
            let mut csv = Csv::new(&["x", "u_newton", "U_composite", "diff"]);
            for r in &rows {
                csv.floats(&[r.x, r.u_newton, r.u_composite, r.diff]);
            }
            csv.finish()
        }
        Format::Json => to_json(&SteadyDoc {
            alpha: cfg.alpha,
            k: cfg.k,
            eps,
            n: g.n(),
            iterations: sol.iterations,
            max_abs_diff: rows.iter().fold(0.0, |m, r| m.max(r.diff.abs())),
            residual_history: sol.residual_history,
            rows,
        }),
    };
    Ok(body.into())
}

/// Spectrum about the equilibrium chosen in `cfg`.
pub fn spectrum_result(
    cfg: &RunConfig,
    p: &CompositeProfile,
    g: &Grid,
    m: usize,
) -> Result<SpectrumResult, CliError> {
    let mut opts = SpectrumOptions {
        allow_below_floor: cfg.allow_small_eps,
        equilibrium: Equilibrium::Composite,
    };
    if cfg.equilibrium == Base::Steady {
        // check the floor before paying for a Newton solve
        linearized_spectrum_with(p, g, 1, &opts)?;
        opts.equilibrium = Equilibrium::Sampled(steady_solve(cfg, p, g)?.u);
    }
    Ok(linearized_spectrum_with(p, g, m, &opts)?)
}

#[derive(Serialize)]
struct SpectrumDoc<'a> {
    alpha: f64,
    k: f64,
    eps: f64,
    n: usize,
    equilibrium: Base,
    eigenvalues: &'a [f64],
}

fn spectrum(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let eps = cfg.eps.single();
    let g = grid_for(cfg.n, eps)?;
    let p = composite(cfg.alpha, cfg.k, eps)?;
    let s = spectrum_result(cfg, &p, &g, cfg.m)?;
    let body = match cfg.format {
        Format::Csv => {
            let mut csv = Csv::new(&["eps", "index", "lambda"]);
            for (i, &l) in s.eigenvalues.iter().enumerate() {
                csv.row(&[fmt_f64(eps), (i + 1).to_string(), fmt_f64(l)]);
            }
            csv.finish()
        }
        Format::Json => to_json(&SpectrumDoc {
            alpha: cfg.alpha,
            k: cfg.k,
            eps,
            n: g.n(),
            equilibrium: cfg.equilibrium,
            eigenvalues: &s.eigenvalues,
        }),
    };
    Ok(body.into())
}

/// Data for a perturbed-equilibrium run: the centered composite, Dirichlet
/// data matched to it, and its principal eigenpair.
pub struct EvolutionSetup {
    pub grid: Grid,
    pub profile: CompositeProfile,
    pub bc: BoundaryPair,
    pub lambda1: f64,
    pub phi1: Field,
}

pub fn evolution_setup(cfg: &RunConfig, eps: f64) -> Result<EvolutionSetup, CliError> {
    if cfg.k != 0.0 {
        return Err(CliError::Config(format!(
            "evolution needs a centered layer (k = 0), got k = {}",
            cfg.k
        )));
    }
    let grid = grid_for(cfg.n, eps)?;
    let profile = composite(cfg.alpha, 0.0, eps)?;
    let bc = BoundaryPair::matched(&profile)?;
    let opts = SpectrumOptions {
        allow_below_floor: cfg.allow_small_eps,
        equilibrium: Equilibrium::Composite,
    };
    let mut s = linearized_spectrum_with(&profile, &grid, 1, &opts)?;
    let lambda1 = s.eigenvalues[0];
    if lambda1.is_nan() || lambda1 <= 0.0 {
        return Err(CliError::Failed(format!(
            "principal eigenvalue {lambda1:e} is not positive; there is no decay to follow"
        )));
    }
    Ok(EvolutionSetup {
        grid,
        profile,
        bc,
        lambda1,
        phi1: s.eigenfunctions.swap_remove(0),
    })
}

pub fn check_step_count(t_end: f64, dt: f64) -> Result<(), CliError> {
    if t_end / dt > MAX_STEPS {
        return Err(CliError::Config(format!(
            "t_end = {t_end:e} with dt = {dt} needs more than {MAX_STEPS:e} steps; pass a shorter --t-end"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct EvolveDoc<'a> {
    alpha: f64,
    eps: f64,
    n: usize,
    nu: f64,
    t_end: f64,
    dt: f64,
    reference: Base,
    lambda1: f64,
    fit: Option<DecayFit>,
    times: &'a [f64],
    deviations: &'a [f64],
}

fn evolution(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let eps = cfg.eps.single();
    let s = evolution_setup(cfg, eps)?;
    let t_end = cfg.t_end.unwrap_or(3.0 / s.lambda1);
    check_step_count(t_end, cfg.dt)?;
    let reference = match cfg.reference {
        Base::Composite => s.profile.sample(&s.grid),
        Base::Steady => {
            newton_solve_steady(
                eps,
                &s.bc,
                &s.profile.sample(&s.grid),
                cfg.tol,
                cfg.max_iter,
            )?
            .u
        }
    };
    let u0 = perturbed_initial(&s.profile, &s.phi1, cfg.nu, &s.grid)?;
    let ec = EvolveConfig {
        t_end,
        dt: cfg.dt,
        eps,
        bc: s.bc,
        sample_every: cfg.sample_every,
        keep_snapshots: false,
    };
    let tr = evolve(&u0, &reference, &ec)?;
    let mut warnings = Vec::new();
    let body = match cfg.format {
        Format::Csv => {
            let mut csv = Csv::new(&["t", "deviation"]);
            for (&t, &d) in tr.times.iter().zip(&tr.deviations) {
                csv.floats(&[t, d]);
            }
            csv.finish()
        }
        Format::Json => {
            let fit = match fit_decay(&tr) {
                Ok(f) => Some(f),
                Err(e) => {
                    warnings.push(format!("decay fit skipped: {e}"));
                    None
                }
            };
            to_json(&EvolveDoc {
                alpha: cfg.alpha,
                eps,
                n: s.grid.n(),
                nu: cfg.nu,
                t_end,
                dt: cfg.dt,
                reference: cfg.reference,
                lambda1: s.lambda1,
                fit,
                times: &tr.times,
                deviations: &tr.deviations,
            })
        }
    };
    Ok(Artifact { body, warnings })
}

fn sweep(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let rule = match cfg.n {
        NodeSpec::Auto => ResolutionRule::Auto,
        NodeSpec::Fixed(n) => ResolutionRule::Fixed(n),
    };
    let table = metastability_sweep(cfg.alpha, cfg.eps.values(), rule, cfg.m, cfg.jobs)?;
    let mut warnings = Vec::new();
    if cfg.k != 0.0 {
        warnings.push("sweep uses a centered layer; --k is ignored".to_string());
    }
    for r in &table.rows {
        if let Some(e) = &r.error {
            warnings.push(format!("eps = {}: {e}", r.eps));
        }
    }
    if table.rows.iter().all(|r| r.error.is_some()) {
        return Err(CliError::Failed(format!(
            "every sweep row failed: {}",
            warnings.join("; ")
        )));
    }
    if let Some(note) = &table.note {
        warnings.push(note.clone());
    }
    let body = match cfg.format {
        Format::Csv => {
            let header = sweep_header(cfg.m);
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut csv = Csv::new(&header);
            for r in table.rows.iter().filter(|r| r.error.is_none()) {
                let mut row = vec![r.eps];
                row.extend(&r.eigenvalues);
                csv.floats(&row);
            }
            csv.finish()
        }
        Format::Json => to_json(&table),
    };
    Ok(Artifact { body, warnings })
}
