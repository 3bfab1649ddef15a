//! Linear stability of the composite equilibrium.
//!
//! Perturbations `u = U + nu e^{-lambda t} Phi` satisfy, at first order in
//! `nu`, the Dirichlet problem
//!
//! ```text
//! eps Phi'' - (U Phi)' + lambda Phi = 0,   Phi(±1) = 0.
//! ```
//!
//! With `p(x) = exp(eps^-1 ∫_0^x U)` and `Phi = p phi` this becomes
//! `eps phi'' + U phi' + lambda phi = 0`, i.e. the self-adjoint problem
//! `-eps (p phi')' = lambda p phi`. The similarity `psi = sqrt(p) phi` turns
//! its discretization into a symmetric tridiagonal matrix whose eigenvalues
//! are found by Sturm bisection. `U` vanishes at the turning point `x = 0`
//! where the drift in the `phi` problem points inward from both sides, so the
//! principal eigenvalue is exponentially small in `1/eps`.

use std::thread;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::asymptotics::CompositeProfile;
use crate::discretization::min_resolved_nodes;
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::grid::{l2_norm, Field, Grid};
use crate::tridiag::{eigen_smallest, eigenvectors, TriDiag};

/// Below this viscosity the principal eigenvalue approaches the rounding level
/// of the operator and spectra are refused unless explicitly overridden.
pub const EPS_FLOOR: f64 = 0.05;

/// Sweep range accepted by [`metastability_sweep`] and [`turning_point_model`].
pub const SWEEP_EPS_RANGE: (f64, f64) = (0.05, 0.5);

const WEIGHT_UNDERFLOW: f64 = 1e-280;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenfunctions `Phi` of the original problem, unit L2 norm, first
    /// interior extremum positive.
    pub eigenfunctions: Vec<Field>,
    pub weight: Field,
    pub eps: f64,
}

/// Which equilibrium the linearization is taken about.
#[derive(Debug, Clone, Default)]
pub enum Equilibrium {
    #[default]
    Composite,
    /// A sampled equilibrium, typically the Newton steady state.
    Sampled(Field),
}

#[derive(Debug, Clone, Default)]
pub struct SpectrumOptions {
    /// Permit `eps < EPS_FLOOR`.
    pub allow_below_floor: bool,
    pub equilibrium: Equilibrium,
}

fn check_weight(values: &[f64], eps: f64) -> Result<()> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= WEIGHT_UNDERFLOW) {
        return Err(Error::Underflow { min, eps });
    }
    Ok(())
}

/// `p(x) = exp(eps^-1 ∫_0^x U) = [cosh(alpha k / 2) / cosh theta(x)]^2`.
pub fn symmetrization_weight(p: &CompositeProfile, g: &Grid) -> Result<Field> {
    let values: Vec<f64> = g
        .nodes()
        .map(|x| (p.antiderivative_from_zero(x) / p.eps()).exp())
        .collect();
    check_weight(&values, p.eps())?;
    Field::new(*g, values)
}

/// Weight `exp(eps^-1 ∫_0^x u)` for a sampled equilibrium, with the integral
/// taken by the cumulative trapezoid rule and anchored at `x = 0` by linear
/// interpolation (at `a` when `0` is outside the grid).
pub fn weight_from_field(u: &Field, eps: f64) -> Result<Field> {
    let g = u.grid();
    let v = u.values();
    let n = v.len();
    let mut cumulative = vec![0.0; n];
    for i in 1..n {
        cumulative[i] = cumulative[i - 1] + 0.5 * g.dx() * (v[i - 1] + v[i]);
    }
    let anchor = if g.a() < 0.0 && g.b() > 0.0 {
        let t = -g.a() / g.dx();
        let i = (t.floor() as usize).min(n - 2);
        let f = t - i as f64;
        (1.0 - f) * cumulative[i] + f * cumulative[i + 1]
    } else {
        0.0
    };
    let values: Vec<f64> = cumulative
        .iter()
        .map(|w| ((w - anchor) / eps).exp())
        .collect();
    check_weight(&values, eps)?;
    Field::new(*g, values)
}

/// Turning-point model weight `exp(-x^2 / (2 eps))` for `eps phi'' - x phi'`.
pub fn turning_point_weight(eps: f64, g: &Grid) -> Result<Field> {
    let values: Vec<f64> = g.nodes().map(|x| (-x * x / (2.0 * eps)).exp()).collect();
    check_weight(&values, eps)?;
    Field::new(*g, values)
}

fn check_positive(weight: &Field) -> Result<()> {
    if let Some(i) = weight.values().iter().position(|&w| !(w > 0.0)) {
        return Err(Error::config(format!(
            "weight must be positive, got {} at node {i}",
            weight.values()[i]
        )));
    }
    Ok(())
}

/// Symmetric tridiagonal matrix on the interior nodes:
///
/// ```text
/// A_ii     =  (eps/dx^2) (p_{i-1/2} + p_{i+1/2}) / p_i
/// A_i,i±1  = -(eps/dx^2) p_{i±1/2} / sqrt(p_i p_{i±1})
/// ```
///
/// with half-node weights the geometric means of their neighbours.
pub fn build_symmetric_operator(weight: &Field, eps: f64) -> Result<TriDiag> {
    check_positive(weight)?;
    let p = weight.values();
    let n = p.len();
    let s = eps / (weight.grid().dx() * weight.grid().dx());
    let half: Vec<f64> = p.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    let diag: Vec<f64> = (1..n - 1)
        .map(|i| s * (half[i - 1] + half[i]) / p[i])
        .collect();
    let off: Vec<f64> = (1..n - 2)
        .map(|i| -s * half[i] / (p[i] * p[i + 1]).sqrt())
        .collect();
    TriDiag::new(off.clone(), diag, off)
}

/// Nonsymmetric operator `-(eps Phi'' - (U Phi)')` on interior nodes, in
/// conservative form with the exponentially fitted flux
/// `F_{i+1/2} = (eps/dx) p_{i+1/2} (Phi_{i+1}/p_{i+1} - Phi_i/p_i)`,
/// which is exact for `F = eps Phi' - U Phi` when `U` is cellwise such that
/// `p` is exponential. Acts on `Phi` directly without any symmetrization.
pub fn flux_operator_dense(weight: &Field, eps: f64) -> Result<DMatrix<f64>> {
    check_positive(weight)?;
    let p = weight.values();
    let n = p.len();
    let s = eps / (weight.grid().dx() * weight.grid().dx());
    let half: Vec<f64> = p.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    let m = n - 2;
    let mut a = DMatrix::zeros(m, m);
    for r in 0..m {
        let i = r + 1;
        a[(r, r)] = s * (half[i - 1] + half[i]) / p[i];
        if r > 0 {
            a[(r, r - 1)] = -s * half[i - 1] / p[i - 1];
        }
        if r + 1 < m {
            a[(r, r + 1)] = -s * half[i] / p[i + 1];
        }
    }
    Ok(a)
}

/// Eigenvalues of a general real matrix by dense Schur decomposition, sorted
/// ascending by real part. Fails if any eigenvalue has a non-negligible
/// imaginary part.
pub fn dense_real_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::IterationLimit { index: 0 })?;
    let scale = a.norm();
    let mut out = Vec::with_capacity(a.nrows());
    for z in schur.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-8 * scale {
            return Err(Error::config(format!("complex eigenvalue {z}")));
        }
        out.push(z.re);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Scales to unit L2 norm and flips the sign so the first interior local
/// extremum is positive.
fn normalize_eigenfunction(values: Vec<f64>, g: Grid) -> Result<Field> {
    let f = Field::new(g, values)?;
    let norm = l2_norm(&f);
    let v = f.into_values();
    let mut v: Vec<f64> = v.iter().map(|x| x / norm).collect();
    let n = v.len();
    let floor = 1e-8 * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let first_extremum = (1..n - 1)
        .find(|&i| (v[i] - v[i - 1]) * (v[i + 1] - v[i]) <= 0.0 && v[i].abs() > floor)
        .map(|i| v[i])
        .unwrap_or(0.0);
    if first_extremum < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Field::new(g, v)
}

/// Spectrum of `-eps (p phi')' = lambda p phi` for a given positive weight,
/// with eigenfunctions mapped back to `Phi = p phi = sqrt(p) psi`.
pub fn spectrum_from_weight(weight: Field, eps: f64, m: usize) -> Result<SpectrumResult> {
    let a = build_symmetric_operator(&weight, eps)?;
    let eigenvalues = eigen_smallest(&a, m)?;
    let vectors = eigenvectors(&a, &eigenvalues);
    let g = *weight.grid();
    let sqrt_p: Vec<f64> = weight.values().iter().map(|w| w.sqrt()).collect();
    let eigenfunctions = vectors
        .into_iter()
        .map(|psi| {
            let mut phi = vec![0.0; g.n()];
            for (k, val) in psi.into_iter().enumerate() {
                phi[k + 1] = sqrt_p[k + 1] * val;
            }
            normalize_eigenfunction(phi, g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        eigenvalues,
        eigenfunctions,
        weight,
        eps,
    })
}

fn check_eps_floor(eps: f64, allow_below_floor: bool) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::config(format!("eps must be positive, got {eps}")));
    }
    if eps < EPS_FLOOR && !allow_below_floor {
        return Err(Error::PrecisionFloor {
            eps,
            floor: EPS_FLOOR,
        });
    }
    Ok(())
}

fn check_resolution(g: &Grid, eps: f64) -> Result<()> {
    let required = min_resolved_nodes(eps);
    if g.n() < required {
        return Err(Error::Resolution {
            n: g.n(),
            eps,
            required,
        });
    }
    Ok(())
}

pub fn linearized_spectrum(p: &CompositeProfile, g: &Grid, m: usize) -> Result<SpectrumResult> {
    linearized_spectrum_with(p, g, m, &SpectrumOptions::default())
}

pub fn linearized_spectrum_with(
    p: &CompositeProfile,
    g: &Grid,
    m: usize,
    opts: &SpectrumOptions,
) -> Result<SpectrumResult> {
    let eps = p.eps();
    check_eps_floor(eps, opts.allow_below_floor)?;
    check_resolution(g, eps)?;
    let weight = match &opts.equilibrium {
        Equilibrium::Composite => symmetrization_weight(p, g)?,
        Equilibrium::Sampled(u) => {
            if u.grid() != g {
                return Err(Error::config(
                    "sampled equilibrium lives on a different grid",
                ));
            }
            weight_from_field(u, eps)?
        }
    };
    spectrum_from_weight(weight, eps, m)
}

/// Eigenvalues of `eps phi'' - x phi' + lambda phi = 0`, `phi(±1) = 0`.
pub fn turning_point_model(eps: f64, g: &Grid, m: usize) -> Result<Vec<f64>> {
    check_sweep_eps(eps)?;
    check_resolution(g, eps)?;
    let weight = turning_point_weight(eps, g)?;
    let a = build_symmetric_operator(&weight, eps)?;
    eigen_smallest(&a, m)
}

fn check_sweep_eps(eps: f64) -> Result<()> {
    let (lo, hi) = SWEEP_EPS_RANGE;
    if !(lo..=hi).contains(&eps) {
        return Err(Error::config(format!(
            "eps = {eps} outside the sweep range [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// How the grid is chosen per viscosity in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResolutionRule {
    /// [`crate::discretization::default_node_count`].
    Auto,
    Fixed(usize),
}

impl ResolutionRule {
    pub fn grid_for(&self, eps: f64) -> Result<Grid> {
        let n = match *self {
            ResolutionRule::Auto => crate::discretization::default_node_count(eps),
            ResolutionRule::Fixed(n) => n,
        };
        Grid::symmetric(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// `None` on success, otherwise the error message for this row.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
    /// Fit of `ln lambda_1` against `1/eps` over successful rows.
    pub fit: Option<LineFit>,
    pub note: Option<String>,
}

fn sweep_row(alpha: f64, eps: f64, rule: ResolutionRule, m: usize) -> SweepRow {
    let attempt = || -> Result<(usize, Vec<f64>)> {
        check_sweep_eps(eps)?;
        let g = rule.grid_for(eps)?;
        let p = CompositeProfile::new(alpha, 0.0, eps)?;
        let weight = symmetrization_weight(&p, &g)?;
        check_resolution(&g, eps)?;
        let a = build_symmetric_operator(&weight, eps)?;
        Ok((g.n(), eigen_smallest(&a, m)?))
    };
    match attempt() {
        Ok((n, eigenvalues)) => SweepRow {
            eps,
            n,
            eigenvalues,
            error: None,
        },
        Err(e) => SweepRow {
            eps,
            n: 0,
            eigenvalues: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// Principal eigenvalues over a list of viscosities (layer centered, `k = 0`).
/// Rows are independent; up to `jobs` run concurrently and the table keeps
/// the input order.
pub fn metastability_sweep(
    alpha: f64,
    eps_list: &[f64],
    rule: ResolutionRule,
    m: usize,
    jobs: usize,
) -> Result<SweepTable> {
    if m == 0 {
        return Err(Error::config("need at least one eigenvalue per row"));
    }
    let jobs = jobs.max(1).min(eps_list.len().max(1));
    let rows: Vec<SweepRow> = if jobs == 1 {
        eps_list
            .iter()
            .map(|&e| sweep_row(alpha, e, rule, m))
            .collect()
    } else {
        let chunk = eps_list.len().div_ceil(jobs);
        thread::scope(|scope| {
            let handles: Vec<_> = eps_list
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|&e| sweep_row(alpha, e, rule, m))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    };

    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.error.is_none() && r.eigenvalues[0] > 0.0)
        .map(|r| (1.0 / r.eps, r.eigenvalues[0].ln()))
        .unzip();
    let (fit, note) = match fit_line(&xs, &ys) {
        Ok(f) => (Some(f), None),
        Err(Error::NotEnoughPoints { got, .. }) => (
            None,
            Some(format!("NotEnoughPoints: {got} usable row(s), fit skipped")),
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SweepTable {
        alpha,
        rows,
        fit,
        note,
    })
}
