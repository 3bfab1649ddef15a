//! Time integration of `u_t + u u_x = eps u_xx` and L2 relaxation to the
//! equilibrium.
//!
//! The semi-discrete system uses the same centered stencils as the steady
//! solver and is advanced with the implicit trapezoidal rule, solving each
//! step by Newton's method on a tridiagonal system.

use serde::Serialize;

use crate::asymptotics::CompositeProfile;
use crate::discretization::{interior_jacobian, interior_operator};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::grid::{l2_norm, BoundaryPair, Field, Grid};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_SAMPLE_EVERY: usize = 10;

const STEP_TOL: f64 = 1e-11;
const STEP_MAX_NEWTON: usize = 25;
const FIT_WINDOW: (f64, f64) = (0.2, 0.9);
const FIT_MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Field,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `||u(., t) - reference||_2` at each sample time.
    pub deviations: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// `||reference||_2`, used to place the rounding floor in [`fit_decay`].
    pub reference_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub lambda_est: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// `U + nu Phi` on the grid. `Phi` must vanish at both ends so that the
/// endpoint values are those of `U`, and `|nu| <= 0.1 |alpha|`.
pub fn perturbed_initial(p: &CompositeProfile, phi: &Field, nu: f64, g: &Grid) -> Result<Field> {
    if phi.grid() != g {
        return Err(Error::config("perturbation lives on a different grid"));
    }
    if nu.abs() > 0.1 * p.alpha().abs() {
        return Err(Error::config(format!(
            "|nu| = {} exceeds the linear regime 0.1 |alpha| = {}",
            nu.abs(),
            0.1 * p.alpha().abs()
        )));
    }
    let v = phi.values();
    let n = v.len();
    if v[0] != 0.0 || v[n - 1] != 0.0 {
        return Err(Error::config(format!(
            "perturbation must vanish at both endpoints, got {} and {}",
            v[0],
            v[n - 1]
        )));
    }
    let values = g.nodes().zip(v).map(|(x, f)| p.value(x) + nu * f).collect();
    Field::new(*g, values)
}

fn step_at(u: &Field, dt: f64, eps: f64, bc: &BoundaryPair, t: f64) -> Result<Field> {
    let g = *u.grid();
    let dx = g.dx();
    let n = g.n();
    let old = u.values();
    let f_old = interior_operator(old, eps, dx);
    let half = 0.5 * dt;

    let mut v = old.to_vec();
    v[0] = bc.alpha();
    v[n - 1] = bc.beta();

    let residual = |v: &[f64]| -> Vec<f64> {
        let f_new = interior_operator(v, eps, dx);
        let mut r: Vec<f64> = (0..n)
            .map(|i| (v[i] - old[i]) - half * (f_new[i] + f_old[i]))
            .collect();
        r[0] = 0.0;
        r[n - 1] = 0.0;
        r
    };

    let mut r = residual(&v);
    let mut rnorm = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut iterations = 0;
    while rnorm > STEP_TOL {
        if iterations == STEP_MAX_NEWTON || !rnorm.is_finite() {
            return Err(Error::StepNoConvergence { t, residual: rnorm });
        }
        let mut jac = interior_jacobian(&v, eps, dx);
        jac.lower.iter_mut().for_each(|x| *x *= -half);
        jac.upper.iter_mut().for_each(|x| *x *= -half);
        jac.diag.iter_mut().for_each(|x| *x = 1.0 - half * *x);
        jac.diag[0] = 1.0;
        jac.upper[0] = 0.0;
        jac.diag[n - 1] = 1.0;
        jac.lower[n - 2] = 0.0;
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = jac.solve(&rhs)?;
        v.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
        r = residual(&v);
        rnorm = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        iterations += 1;
    }
    Field::new(g, v)
}

/// One implicit trapezoidal step of size `dt`. Boundary values are set to
/// `bc` exactly.
pub fn step_implicit(u: &Field, dt: f64, eps: f64, bc: &BoundaryPair) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("dt must be positive, got {dt}")));
    }
    if !(eps > 0.0) {
        return Err(Error::config(format!("eps must be positive, got {eps}")));
    }
    step_at(u, dt, eps, bc, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    pub eps: f64,
    pub bc: BoundaryPair,
    pub sample_every: usize,
    pub keep_snapshots: bool,
}

impl EvolveConfig {
    pub fn new(t_end: f64, eps: f64, bc: BoundaryPair) -> Self {
        Self {
            t_end,
            dt: DEFAULT_DT,
            eps,
            bc,
            sample_every: DEFAULT_SAMPLE_EVERY,
            keep_snapshots: false,
        }
    }
}

/// Integrates from `u0` to `t_end`, recording the L2 distance to `reference`
/// every `sample_every` steps and at the final time. On a failed step the
/// partial trajectory is returned inside [`Error::EvolutionFailed`].
pub fn evolve(u0: &Field, reference: &Field, cfg: &EvolveConfig) -> Result<Trajectory> {
    if !(cfg.t_end > 0.0) || !(cfg.dt > 0.0) || cfg.sample_every == 0 {
        return Err(Error::config(
            "evolve needs t_end > 0, dt > 0, sample_every >= 1",
        ));
    }
    if !(cfg.eps > 0.0) {
        return Err(Error::config(format!(
            "eps must be positive, got {}",
            cfg.eps
        )));
    }
    if u0.grid() != reference.grid() {
        return Err(Error::config(
            "initial state and reference live on different grids",
        ));
    }
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let mut tr = Trajectory {
        times: Vec::new(),
        deviations: Vec::new(),
        snapshots: Vec::new(),
        reference_norm: l2_norm(reference),
    };
    let record = |tr: &mut Trajectory, t: f64, u: &Field| -> Result<()> {
        tr.times.push(t);
        tr.deviations.push(l2_norm(&u.sub(reference)?));
        if cfg.keep_snapshots {
            tr.snapshots.push(Snapshot { t, u: u.clone() });
        }
        Ok(())
    };

    let mut u = u0.clone();
    record(&mut tr, 0.0, &u)?;
    for step in 1..=steps {
        let t = step as f64 * cfg.dt;
        u = match step_at(&u, cfg.dt, cfg.eps, &cfg.bc, t) {
            Ok(next) => next,
            Err(source) => {
                return Err(Error::EvolutionFailed {
                    t,
                    partial: Box::new(tr),
                    source: Box::new(source),
                })
            }
        };
        if step % cfg.sample_every == 0 || step == steps {
            record(&mut tr, t, &u)?;
        }
    }
    Ok(tr)
}

/// Least-squares line through `(t, ln deviation)` on `[0.2, 0.9] t_end`,
/// skipping samples at the rounding floor; `lambda_est = -slope`.
pub fn fit_decay(tr: &Trajectory) -> Result<DecayFit> {
    let t_end = tr.times.last().copied().unwrap_or(0.0);
    let window = (FIT_WINDOW.0 * t_end, FIT_WINDOW.1 * t_end);
    let floor = 1e3 * f64::EPSILON * tr.reference_norm;
    let (ts, ls): (Vec<f64>, Vec<f64>) = tr
        .times
        .iter()
        .zip(&tr.deviations)
        .filter(|(&t, &d)| t >= window.0 && t <= window.1 && d > floor)
        .map(|(&t, &d)| (t, d.ln()))
        .unzip();
    if ts.len() < FIT_MIN_SAMPLES {
        return Err(Error::NotEnoughPoints {
            got: ts.len(),
            need: FIT_MIN_SAMPLES,
        });
    }
    let line = fit_line(&ts, &ls)?;
    Ok(DecayFit {
        lambda_est: -line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        window,
    })
}

/// `M = 4 nu^2 (sup |Phi|)^2`, so that `|nu Phi| <= sqrt(M) / 2`.
pub fn instantiate_m(phi: &Field, nu: f64) -> f64 {
    let s = nu.abs() * phi.max_abs();
    4.0 * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub holds: bool,
    pub max_norm_sq: f64,
    /// `8 alpha^2 + 2 M`.
    pub bound: f64,
}

/// Checks `∫ u^2 < 8 alpha^2 + 2M` on every stored snapshot.
pub fn boundedness_check(
    tr: &Trajectory,
    p: &CompositeProfile,
    m: f64,
) -> Result<BoundednessReport> {
    if tr.snapshots.is_empty() {
        return Err(Error::config("trajectory has no snapshots to check"));
    }
    if !(m >= 0.0) {
        return Err(Error::config(format!("M must be nonnegative, got {m}")));
    }
    let bound = 8.0 * p.alpha() * p.alpha() + 2.0 * m;
    let max_norm_sq = tr
        .snapshots
        .iter()
        .map(|s| s.u.norm_sq())
        .fold(0.0, f64::max);
    Ok(BoundednessReport {
        holds: max_norm_sq < bound || (max_norm_sq == 0.0 && bound == 0.0),
        max_norm_sq,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::composite;

    fn bump(g: &Grid) -> Field {
        Field::from_fn(*g, |x| (1.0 - x * x) * (1.0 + 0.3 * x)).unwrap()
    }

    #[test]
    fn zero_perturbation_is_the_profile() {
        let g = Grid::symmetric(101).unwrap();
        let p = composite(1.0, 0.0, 0.25).unwrap();
        let u = perturbed_initial(&p, &bump(&g), 0.0, &g).unwrap();
        assert_eq!(u, p.sample(&g));
    }

    #[test]
    fn perturbation_scales_linearly() {
        let g = Grid::symmetric(101).unwrap();
        let p = composite(1.0, 0.0, 0.25).unwrap();
        let phi = bump(&g);
        let phi = phi.scaled(1.0 / l2_norm(&phi));
        let u = perturbed_initial(&p, &phi, 1e-3, &g).unwrap();
        let d = l2_norm(&u.sub(&p.sample(&g)).unwrap());
        assert!((d - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_perturbations() {
        let g = Grid::symmetric(101).unwrap();
        let p = composite(1.0, 0.0, 0.25).unwrap();
        let bad = Field::from_fn(g, |x| 1.0 + x).unwrap();
        assert!(perturbed_initial(&p, &bad, 1e-3, &g).is_err());
        assert!(perturbed_initial(&p, &bump(&g), 0.5, &g).is_err());
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid::symmetric(51).unwrap();
        let bc = BoundaryPair::antisymmetric(0.0).unwrap();
        let u = step_implicit(&Field::zeros(g), 0.1, 0.1, &bc).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_rejects_bad_dt() {
        let g = Grid::symmetric(51).unwrap();
        let bc = BoundaryPair::antisymmetric(0.0).unwrap();
        assert!(step_implicit(&Field::zeros(g), 0.0, 0.1, &bc).is_err());
    }

    #[test]
    fn synthetic_exponential_fit() {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let deviations = times.iter().map(|t| 2.5 * (-0.7 * t).exp()).collect();
        let tr = Trajectory {
            times,
            deviations,
            snapshots: vec![],
            reference_norm: 1.0,
        };
        let f = fit_decay(&tr).unwrap();
        assert!((f.lambda_est - 0.7).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.window.0 - 2.0).abs() < 1e-12 && (f.window.1 - 9.0).abs() < 1e-12);
    }

    #[test]
    fn constant_deviation_fit() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let tr = Trajectory {
            deviations: vec![0.3; times.len()],
            times,
            snapshots: vec![],
            reference_norm: 1.0,
        };
        assert!(fit_decay(&tr).unwrap().lambda_est.abs() < 1e-12);
    }

    #[test]
    fn fit_needs_samples() {
        let times: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let tr = Trajectory {
            deviations: vec![1.0; 5],
            times,
            snapshots: vec![],
            reference_norm: 1.0,
        };
        assert!(matches!(fit_decay(&tr), Err(Error::NotEnoughPoints { .. })));
    }

    #[test]
    fn adversarial_snapshot_breaks_bound() {
        let g = Grid::symmetric(101).unwrap();
        let p = composite(1.0, 0.0, 0.25).unwrap();
        let m = 1.0;
        // ∫ c^2 over [-1, 1] = 2 c^2 = 9 alpha^2 + 2M
        let c = ((9.0 + 2.0 * m) / 2.0f64).sqrt();
        let tr = Trajectory {
            times: vec![0.0],
            deviations: vec![0.0],
            snapshots: vec![Snapshot {
                t: 0.0,
                u: Field::from_fn(g, |_| c).unwrap(),
            }],
            reference_norm: 1.0,
        };
        let r = boundedness_check(&tr, &p, m).unwrap();
        assert!(!r.holds);
        assert!((r.max_norm_sq - 11.0).abs() < 1e-12);
        assert_eq!(r.bound, 10.0);
    }

    #[test]
    fn m_from_perturbation() {
        let g = Grid::symmetric(5).unwrap();
        let phi = Field::new(g, vec![0.0, 0.5, -2.0, 1.0, 0.0]).unwrap();
        assert!((instantiate_m(&phi, 1e-3) - 4.0 * 4e-6).abs() < 1e-20);
    }
}
