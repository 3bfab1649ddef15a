//! Shared fixtures for the benchmarks in `benches/`.

use burgers_core::{composite, default_node_count, BoundaryPair, CompositeProfile, Grid};

/// Centered profile with `alpha = 1` on the default grid for `eps`, with
/// Dirichlet data matched to it.
pub fn fixture(eps: f64) -> (Grid, CompositeProfile, BoundaryPair) {
    let grid = Grid::symmetric(default_node_count(eps)).expect("default grid is valid");
    let profile = composite(1.0, 0.0, eps).expect("eps is positive");
    let bc = BoundaryPair::matched(&profile).expect("centered profile is antisymmetric");
    (grid, profile, bc)
}
