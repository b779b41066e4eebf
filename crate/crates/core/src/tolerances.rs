//! Numerical thresholds shared across modules.
//!
//! Values that a caller may override at run time (see `RunConfig`) are only
//! defaults here.

/// Quadric residual a projected point must satisfy.
pub const SURFACE_RESIDUAL: f64 = 1e-10;

/// Max |a_i - 1| for a surface to count as near-round.
pub const NEAR_ROUND: f64 = 0.1;

/// Endpoint shift allowed when the geodesic step is halved.
pub const STEP_HALVING: f64 = 1e-6;

/// Re-shooting deviation below which a polyline counts as a geodesic.
pub const GEODESIC_TEST: f64 = 1e-6;

/// Default junction balance tolerance.
pub const JUNCTION_RESIDUAL: f64 = 1e-6;

/// Opposite-pair matching tolerance for regular junctions.
pub const PAIRING: f64 = 1e-9;

/// Distance from an integer that still counts as integer density.
pub const INTEGER_DENSITY: f64 = 1e-9;

/// Spread across scales beyond which a density extrapolation is flagged.
pub const DENSITY_SPREAD: f64 = 0.05;

/// Vertex values this close to zero trigger the contour offset.
pub const CONTOUR_ZERO: f64 = 1e-12;

/// Offset applied to the whole polynomial when a grid vertex hits zero.
pub const CONTOUR_OFFSET: f64 = 1e-10;

/// Max |q| over the grid below which a polynomial is reported degenerate.
pub const NEAR_DEGENERATE: f64 = 1e-8;

/// Periodicity residual for accepting a closed geodesic.
pub const PERIODICITY: f64 = 1e-6;

/// Mass ties closer than this make a width assignment ambiguous.
pub const MASS_TIE: f64 = 1e-9;

/// Budget below which a scan is reported as low confidence.
pub const MIN_SCAN_BUDGET: usize = 1000;

/// Default zero band for eigenvalue counts on an `n`-point grid:
/// `10·(2π/n)²`, the discretization floor of the second-difference operator.
pub fn default_zero_tol(n: usize) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    10.0 * h * h
}
