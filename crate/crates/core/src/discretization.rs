//! Second-order finite differences for `eps u'' - u u' = 0` with Dirichlet
//! rows, and a damped Newton solver for the discrete steady state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{BoundaryPair, Field, Grid};
use crate::tridiag::TriDiag;

/// Smallest node count that puts about eight nodes across the layer.
pub fn min_resolved_nodes(eps: f64) -> usize {
    (16.0 / eps).ceil() as usize + 1
}

/// Default node count for a given viscosity: `max(401, ceil(16/eps) + 1)`.
pub fn default_node_count(eps: f64) -> usize {
    min_resolved_nodes(eps).max(401)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyResult {
    pub u: Field,
    pub iterations: usize,
    /// Max-norm residual before each step and after the last one.
    pub residual_history: Vec<f64>,
}

/// Interior rows of the semi-discrete operator `eps D2 u - u D1 u`.
/// Boundary entries are left at zero.
pub(crate) fn interior_operator(values: &[f64], eps: f64, dx: f64) -> Vec<f64> {
    let n = values.len();
    let diff = eps / (dx * dx);
    let adv = 1.0 / (2.0 * dx);
    let mut r = vec![0.0; n];
    for i in 1..n - 1 {
        let (um, u, up) = (values[i - 1], values[i], values[i + 1]);
        // differences first keeps the rounding at the size of the increments
        r[i] = diff * ((um - u) + (up - u)) - u * (up - um) * adv;
    }
    r
}

/// Jacobian of [`interior_operator`]; boundary rows are zero.
pub(crate) fn interior_jacobian(values: &[f64], eps: f64, dx: f64) -> TriDiag {
    let n = values.len();
    let diff = eps / (dx * dx);
    let adv = 1.0 / (2.0 * dx);
    let mut lower = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n - 1];
    for i in 1..n - 1 {
        let u = values[i];
        lower[i - 1] = diff + u * adv;
        diag[i] = -2.0 * diff - (values[i + 1] - values[i - 1]) * adv;
        upper[i] = diff - u * adv;
    }
    TriDiag { lower, diag, upper }
}

/// Discrete residual of the stationary equation with Dirichlet rows
/// `r_0 = u_0 - alpha`, `r_{n-1} = u_{n-1} - beta`.
pub fn steady_residual(u: &Field, eps: f64, bc: &BoundaryPair) -> Field {
    let g = u.grid();
    let v = u.values();
    let n = v.len();
    let mut r = interior_operator(v, eps, g.dx());
    r[0] = v[0] - bc.alpha();
    r[n - 1] = v[n - 1] - bc.beta();
    Field::new(*g, r).expect("residual of a finite field is finite")
}

pub fn steady_jacobian(u: &Field, eps: f64) -> TriDiag {
    let mut j = interior_jacobian(u.values(), eps, u.grid().dx());
    let n = j.n();
    j.diag[0] = 1.0;
    j.upper[0] = 0.0;
    j.diag[n - 1] = 1.0;
    j.lower[n - 2] = 0.0;
    j
}

const MAX_HALVINGS: usize = 10;

/// Damped Newton iteration on [`steady_residual`]. Full steps are taken while
/// the max-norm residual decreases; otherwise the step is halved up to ten
/// times. The initial guess is projected onto the boundary rows first.
pub fn newton_solve_steady(
    eps: f64,
    bc: &BoundaryPair,
    u0: &Field,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyResult> {
    if !(eps > 0.0) {
        return Err(Error::config(format!("eps must be positive, got {eps}")));
    }
    if !(tol > 0.0) {
        return Err(Error::config(format!("tol must be positive, got {tol}")));
    }
    let g = *u0.grid();
    let n = g.n();
    let mut u = u0.values().to_vec();
    u[0] = bc.alpha();
    u[n - 1] = bc.beta();
    let mut field = Field::new(g, u)?;
    let mut res = steady_residual(&field, eps, bc);
    let mut rnorm = res.max_abs();
    let mut history = vec![rnorm];
    let mut iterations = 0;

    while rnorm > tol {
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: rnorm,
            });
        }
        let jac = steady_jacobian(&field, eps);
        let rhs: Vec<f64> = res.values().iter().map(|r| -r).collect();
        let delta = jac.solve(&rhs)?;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = field
                .values()
                .iter()
                .zip(&delta)
                .map(|(u, d)| u + step * d)
                .collect();
            if let Ok(trial) = Field::new(g, trial) {
                let tres = steady_residual(&trial, eps, bc);
                let tnorm = tres.max_abs();
                if tnorm < rnorm {
                    accepted = Some((trial, tres, tnorm));
                    break;
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((f, r, nrm)) => {
                field = f;
                res = r;
                rnorm = nrm;
                history.push(rnorm);
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: rnorm,
                })
            }
        }
    }

    Ok(SteadyResult {
        u: field,
        iterations,
        residual_history: history,
    })
}

/// Linear interpolant between the boundary values.
pub fn linear_ramp(grid: &Grid, bc: &BoundaryPair) -> Field {
    let (a, b) = (grid.a(), grid.b());
    Field::from_fn(*grid, |x| {
        let t = (x - a) / (b - a);
        (1.0 - t) * bc.alpha() + t * bc.beta()
    })
    .expect("ramp is finite")
}
