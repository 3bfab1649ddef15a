//! Domain geometry, boundary data and L2 norms.
//!
//! Everything here is an immutable value after construction.

use serde::Serialize;

use crate::asymptotics::CompositeProfile;
use crate::error::{Error, Result};

/// Uniform mesh on `[a, b]` with `n` nodes, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    dx: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::config(format!(
                "grid needs at least 3 nodes, got {n}"
            )));
        }
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::config(format!("grid needs a < b, got [{a}, {b}]")));
        }
        Ok(Self {
            a,
            b,
            n,
            dx: (b - a) / (n - 1) as f64,
        })
    }

    /// The standard domain `[-1, 1]`.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::new(-1.0, 1.0, n)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Coordinate of node `i`.
    ///
    /// Written as a convex combination of the endpoints so that on a symmetric
    /// interval `x(n-1-i) == -x(i)` holds exactly.
    pub fn x(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        if i == 0 {
            return self.a;
        }
        if i == self.n - 1 {
            return self.b;
        }
        let m = (self.n - 1) as f64;
        ((m - i as f64) * self.a + i as f64 * self.b) / m
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Trapezoid quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Trapezoid rule for samples on this grid, with compensated summation.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (i, v) in values.iter().enumerate() {
            let term = self.weight(i) * v;
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }
}

/// Convenience wrapper matching [`Grid::new`].
pub fn make_grid(a: f64, b: f64, n: usize) -> Result<Grid> {
    Grid::new(a, b, n)
}

/// Dirichlet data `u(-1) = alpha`, `u(1) = beta`, restricted to `beta = -alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPair {
    alpha: f64,
    beta: f64,
}

impl BoundaryPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::config("boundary values must be finite"));
        }
        if beta != -alpha {
            return Err(Error::IncompatibleBoundary {
                beta,
                neg_alpha: -alpha,
            });
        }
        Ok(Self { alpha, beta })
    }

    /// `(alpha, -alpha)`.
    pub fn antisymmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, -alpha)
    }

    /// Boundary data equal to the profile's own endpoint values, so that the
    /// profile is an exact equilibrium of the Dirichlet problem. Requires a
    /// centered layer (`k = 0`), otherwise the endpoint values are not
    /// antisymmetric.
    pub fn matched(profile: &CompositeProfile) -> Result<Self> {
        Self::new(profile.value(-1.0), profile.value(1.0))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

pub fn validate_bc(alpha: f64, beta: f64) -> Result<BoundaryPair> {
    BoundaryPair::new(alpha, beta)
}

/// Real samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self - other`, on the same grid.
    pub fn sub(&self, other: &Field) -> Result<Self> {
        if other.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid estimate of the integral of `f^2`.
    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        self.grid.integrate(&sq)
    }
}

/// `sqrt(∫ f² dx)` by the trapezoid rule.
pub fn l2_norm(f: &Field) -> f64 {
    f.norm_sq().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid() {
        let g = make_grid(-1.0, 1.0, 3).unwrap();
        assert_eq!(g.nodes().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.dx(), 1.0);
    }

    #[test]
    fn spacing_401() {
        let g = make_grid(-1.0, 1.0, 401).unwrap();
        assert!((g.dx() - 0.005).abs() < 1e-15);
        assert_eq!(g.x(400), 1.0);
        for i in 0..401 {
            assert!((g.x(i) - (-1.0 + i as f64 * g.dx())).abs() <= 2.0 * f64::EPSILON);
            assert_eq!(g.x(400 - i), -g.x(i));
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_grid(-1.0, 1.0, 2), Err(Error::Config(_))));
        assert!(matches!(make_grid(1.0, 1.0, 10), Err(Error::Config(_))));
        assert!(matches!(make_grid(2.0, 1.0, 10), Err(Error::Config(_))));
    }

    #[test]
    fn boundary_gate() {
        assert!(validate_bc(1.0, -1.0).is_ok());
        assert!(validate_bc(0.0, 0.0).is_ok());
        assert!(matches!(
            validate_bc(1.0, 1.0),
            Err(Error::IncompatibleBoundary { .. })
        ));
        assert!(validate_bc(1.0, -1.0 + 1e-15).is_err());
    }

    #[test]
    fn field_checks_length_and_finiteness() {
        let g = Grid::symmetric(5).unwrap();
        assert!(matches!(
            Field::new(g, vec![0.0; 4]),
            Err(Error::LengthMismatch {
                expected: 5,
                got: 4
            })
        ));
        assert!(matches!(
            Field::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { index: 2 })
        ));
    }

    #[test]
    fn norms_of_simple_functions() {
        let g = Grid::symmetric(11).unwrap();
        assert_eq!(l2_norm(&Field::zeros(g)), 0.0);
        let one = Field::from_fn(g, |_| 1.0).unwrap();
        assert!((l2_norm(&one) - 2f64.sqrt()).abs() < 1e-12);

        let g = Grid::symmetric(2001).unwrap();
        let x = Field::from_fn(g, |x| x).unwrap();
        assert!((l2_norm(&x) - (2.0f64 / 3.0).sqrt()).abs() < 1e-6);
    }
}
