//! Leading-order matched asymptotics for the stationary viscous Burgers
//! equation `eps u'' - u u' = 0` on `[-1, 1]`.
//!
//! Away from `x = 0` the outer problem `u u' = 0` gives constants, fixed by the
//! boundary data to `alpha` on the left and `-alpha` on the right. Inside the
//! layer the stretched coordinate `s = x / eps` balances diffusion against
//! advection and the inner problem `u_ss - u u_s = 0` integrates twice to a
//! `tanh` front. Matching the inner far field to the outer constants forces
//! `beta = -alpha`, and the composite `inner + outer - common limit` reduces
//! to the inner solution itself:
//!
//! ```text
//! U(x, eps) = -alpha tanh(theta),   theta = (alpha / 2) (x / eps + k)
//! ```
//!
//! `k` shifts the layer and is not determined by the leading-order problem.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{BoundaryPair, Field, Grid};

/// Exponent `gamma` of the inner coordinate `s = x / eps^gamma`.
///
/// In the stretched variable the stationary equation reads
/// `eps^(1 - 2 gamma) u_ss - eps^(-gamma) u u_s = 0`; both terms survive at
/// leading order only when `1 - 2 gamma = -gamma`.
pub const INNER_SCALING_EXPONENT: f64 = 1.0;

/// Beyond this `|theta|`, `tanh` is replaced by its sign.
const THETA_CLAMP: f64 = 350.0;

/// Inner coordinate `s = x / eps`.
pub fn inner_coordinate(x: f64, eps: f64) -> f64 {
    x / eps.powf(INNER_SCALING_EXPONENT)
}

fn tanh_clamped(theta: f64) -> f64 {
    if theta.abs() > THETA_CLAMP {
        theta.signum()
    } else {
        theta.tanh()
    }
}

/// `sech^2(theta)` without overflowing `cosh`.
fn sech_sq(theta: f64) -> f64 {
    let e = (-2.0 * theta.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// `ln cosh(theta)` without overflowing `cosh`.
pub(crate) fn ln_cosh(theta: f64) -> f64 {
    let t = theta.abs();
    t + (-2.0 * t).exp().ln_1p() - std::f64::consts::LN_2
}

/// Leading-order outer solutions `(left, right) = (alpha, -alpha)`.
pub fn outer_solutions(bc: &BoundaryPair) -> (f64, f64) {
    (bc.alpha(), -bc.alpha())
}

/// Inner solution `-alpha tanh((alpha / 2)(s + k))` in the stretched variable.
pub fn inner_solution(alpha: f64, k: f64, s: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    -alpha * tanh_clamped(0.5 * alpha * (s + k))
}

/// Uniformly valid composite equilibrium with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositeProfile {
    alpha: f64,
    k: f64,
    eps: f64,
}

impl CompositeProfile {
    pub fn new(alpha: f64, k: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::config(format!("eps must be positive, got {eps}")));
        }
        if !(alpha.is_finite() && k.is_finite()) {
            return Err(Error::config("alpha and k must be finite"));
        }
        Ok(Self { alpha, k, eps })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn theta(&self, x: f64) -> f64 {
        0.5 * self.alpha * (inner_coordinate(x, self.eps) + self.k)
    }

    pub fn value(&self, x: f64) -> f64 {
        inner_solution(self.alpha, self.k, inner_coordinate(x, self.eps))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let a = self.alpha;
        -(a * a / (2.0 * self.eps)) * sech_sq(self.theta(x))
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let a = self.alpha;
        let th = self.theta(x);
        (a * a * a / (2.0 * self.eps * self.eps)) * sech_sq(th) * tanh_clamped(th)
    }

    /// `∫_0^x U ds = -2 eps [ln cosh theta(x) - ln cosh theta(0)]`.
    pub fn antiderivative_from_zero(&self, x: f64) -> f64 {
        -2.0 * self.eps * (ln_cosh(self.theta(x)) - ln_cosh(self.theta(0.0)))
    }

    pub fn sample(&self, grid: &Grid) -> Field {
        Field::from_fn(*grid, |x| self.value(x)).expect("composite profile is finite")
    }
}

pub fn composite(alpha: f64, k: f64, eps: f64) -> Result<CompositeProfile> {
    CompositeProfile::new(alpha, k, eps)
}

/// `eps U'' - U U'` from the closed-form derivatives.
pub fn stationary_residual(p: &CompositeProfile, g: &Grid) -> Field {
    let values = g
        .nodes()
        .map(|x| p.eps * p.second_derivative(x) - p.value(x) * p.derivative(x))
        .collect();
    Field::new(*g, values).expect("residual is finite")
}

/// `(|U(-1) - alpha|, |U(1) + alpha|)`: the composite meets the Dirichlet data
/// only up to exponentially small terms.
pub fn boundary_mismatch(p: &CompositeProfile) -> (f64, f64) {
    (
        (p.value(-1.0) - p.alpha).abs(),
        (p.value(1.0) + p.alpha).abs(),
    )
}

/// Trapezoid estimate of `∫ U^2` together with the bound `2 alpha^2`.
pub fn l2_bound_check(p: &CompositeProfile, g: &Grid) -> (f64, f64) {
    (p.sample(g).norm_sq(), 2.0 * p.alpha * p.alpha)
}

/// Far-field limits of the inner solution against the outer constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchReport {
    pub inner_limit_left: f64,
    pub inner_limit_right: f64,
    pub outer_left: f64,
    pub outer_right: f64,
    pub max_defect: f64,
}

/// Evaluates the inner solution at `s = ±s_max` and compares with the outer
/// solutions on either side of the layer.
pub fn matching_check(p: &CompositeProfile, s_max: f64) -> Result<MatchReport> {
    if !(s_max > 0.0) {
        return Err(Error::config(format!(
            "s_max must be positive, got {s_max}"
        )));
    }
    let bc = BoundaryPair::antisymmetric(p.alpha)?;
    let (outer_left, outer_right) = outer_solutions(&bc);
    let inner_limit_left = inner_solution(p.alpha, p.k, -s_max);
    let inner_limit_right = inner_solution(p.alpha, p.k, s_max);
    let max_defect = (inner_limit_left - outer_left)
        .abs()
        .max((inner_limit_right - outer_right).abs());
    Ok(MatchReport {
        inner_limit_left,
        inner_limit_right,
        outer_left,
        outer_right,
        max_defect,
    })
}
