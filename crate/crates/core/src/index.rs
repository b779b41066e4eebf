//! Morse index and nullity of closed geodesics from the second variation
//! of length on normal fields, `Q(f) = ∫ (f′² − K f²) ds`.
//!
//! The form is discretized on `n` equally spaced arc-length points with the
//! periodic second difference. Eigenvalues below a shift are counted by
//! Sylvester inertia of an `LDLᵀ` factorization, which for the cyclic
//! tridiagonal matrix costs `O(n)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::curve::PolyCurve;
use crate::error::{Error, Result};
use crate::surface::{principal_ellipse, EllipsoidParams};
use crate::tolerances;

/// A closed geodesic traversed `covering` times.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedGeodesic {
    surface: EllipsoidParams,
    curve: PolyCurve,
    covering: u32,
}

impl ClosedGeodesic {
    /// Checks that `curve` is closed and that re-shooting from its first
    /// vertex closes up within [`tolerances::PERIODICITY`].
    pub fn new(surface: EllipsoidParams, curve: PolyCurve, covering: u32) -> Result<Self> {
        if !curve.is_closed() {
            return Err(Error::InvalidArgument("closed geodesic needs a closed curve".into()));
        }
        if covering == 0 {
            return Err(Error::InvalidArgument("covering order must be positive".into()));
        }
        let dev = curve.geodesic_deviation(&surface, 0, curve.length());
        if dev > tolerances::PERIODICITY {
            return Err(Error::InvalidArgument(format!("re-shooting deviates by {dev:.3e}")));
        }
        Ok(Self { surface, curve, covering })
    }

    /// `γ_i^(r)`, the `r`-fold principal ellipse `{x_i = 0}`.
    pub fn principal(surface: EllipsoidParams, i: usize, covering: u32, n: usize) -> Result<Self> {
        Self::new(surface, principal_ellipse(&surface, i, n)?, covering)
    }

    pub fn surface(&self) -> &EllipsoidParams {
        &self.surface
    }

    /// One traversal.
    pub fn curve(&self) -> &PolyCurve {
        &self.curve
    }

    pub fn covering(&self) -> u32 {
        self.covering
    }

    /// Length of the covered curve.
    pub fn length(&self) -> f64 {
        self.covering as f64 * self.curve.length()
    }
}

/// The discretized index form: `A = (2I − S − Sᵀ)/h² − diag(K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexForm {
    pub h: f64,
    /// Gauss curvature at the grid points.
    pub curvature: Vec<f64>,
}

impl IndexForm {
    /// Samples `K` at `n` points spaced `h = rL/n`, starting at arc length
    /// `offset`.
    pub fn new(g: &ClosedGeodesic, n: usize, offset: f64) -> Self {
        let h = g.length() / n as f64;
        let curvature = (0..n)
            .map(|j| {
                let p = g.curve.point_at(offset + j as f64 * h);
                let x = g.surface.project(&p).map(|q| q.coords()).unwrap_or(p);
                g.surface.gauss_curvature(&x)
            })
            .collect();
        Self { h, curvature }
    }

    pub fn len(&self) -> usize {
        self.curvature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curvature.is_empty()
    }

    /// `fᵀ A f · h`, the discrete `∫ (f′² − K f²) ds`.
    pub fn quadratic(&self, f: &[f64]) -> f64 {
        let n = self.len();
        let h = self.h;
        (0..n)
            .map(|j| {
                let d = (f[(j + 1) % n] - f[j]) / h;
                (d * d - self.curvature[j] * f[j] * f[j]) * h
            })
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let w = 1.0 / (self.h * self.h);
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            a[(j, j)] = 2.0 * w - self.curvature[j];
            a[(j, (j + 1) % n)] -= w;
            a[((j + 1) % n, j)] -= w;
        }
        a
    }

    /// Number of eigenvalues of `A` below `sigma`.
    ///
    /// Nodes `0..n-1` are eliminated in order; the coupling of each to the
    /// last node is carried along (the arrowhead fill of the corner entry)
    /// and the last pivot is the Schur complement. Exact zero pivots are
    /// nudged, which moves the count only for `sigma` on an eigenvalue.
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.len();
        let w = 1.0 / (self.h * self.h);
        let diag = |j: usize| 2.0 * w - self.curvature[j] - sigma;
        let nudge = |d: f64| if d == 0.0 { f64::EPSILON * w } else { d };
        if n < 3 {
            return 0;
        }
        let mut negatives = 0;
        let mut d = nudge(diag(0));
        let mut c = -w; // coupling of node 0 to node n-1
        let mut schur = diag(n - 1) - c * c / d;
        negatives += (d < 0.0) as usize;
        for j in 1..n - 1 {
            let l = -w / d;
            d = nudge(diag(j) - l * -w);
            let coupling = if j == n - 2 { -w } else { 0.0 };
            c = coupling - l * c;
            schur -= c * c / d;
            negatives += (d < 0.0) as usize;
        }
        negatives + (schur < 0.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexResult {
    pub index: usize,
    pub nullity: usize,
    /// An eigenvalue has modulus in `[zero_tol, 2·zero_tol)`; refine.
    pub ambiguous: bool,
    pub n: usize,
    pub zero_tol: f64,
}

/// Index and nullity of a closed geodesic on an `n`-point grid.
/// `zero_tol` defaults to `10·(2π/n)²`.
pub fn index_nullity(g: &ClosedGeodesic, n: usize, zero_tol: Option<f64>) -> Result<IndexResult> {
    index_nullity_from(g, n, zero_tol, 0.0)
}

/// As [`index_nullity`], with the grid starting at arc length `offset`.
pub fn index_nullity_from(g: &ClosedGeodesic, n: usize, zero_tol: Option<f64>, offset: f64) -> Result<IndexResult> {
    let min = 256 * g.covering as usize;
    if n < min {
        return Err(Error::InvalidArgument(format!("grid size {n} below 256·r = {min}")));
    }
    g.surface.require_near_round()?;
    let tol = zero_tol.unwrap_or_else(|| tolerances::default_zero_tol(n));
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("zero tolerance {tol} must be positive")));
    }
    let form = IndexForm::new(g, n, offset);
    let below = form.count_below(-tol);
    let within = form.count_below(tol);
    let ambiguous = form.count_below(-2.0 * tol) != below || form.count_below(2.0 * tol) != within;
    Ok(IndexResult { index: below, nullity: within - below, ambiguous, n, zero_tol: tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn near_round() -> EllipsoidParams {
        EllipsoidParams::new(0.95, 1.0, 1.05).unwrap()
    }

    #[test]
    fn great_circle_spectrum() {
        let g = ClosedGeodesic::principal(EllipsoidParams::sphere(), 3, 1, 512).unwrap();
        let r = index_nullity(&g, 256, None).unwrap();
        assert_eq!((r.index, r.nullity), (1, 2));
        assert!(!r.ambiguous);
    }

    #[test]
    fn constant_field_value() {
        let g = ClosedGeodesic::principal(EllipsoidParams::sphere(), 3, 1, 512).unwrap();
        let form = IndexForm::new(&g, 512, 0.0);
        let q = form.quadratic(&vec![1.0; 512]);
        assert!((q + TAU).abs() < 1e-4, "{q}");
    }

    #[test]
    fn principal_ellipse_indices() {
        let e = near_round();
        for i in 1..=3 {
            for r in 1..=2u32 {
                let g = ClosedGeodesic::principal(e, i, r, 1024).unwrap();
                let res = index_nullity(&g, 512 * r as usize, None).unwrap();
                assert_eq!((res.index, res.nullity), (i + 2 * (r as usize - 1), 0), "γ{i}^({r})");
            }
        }
    }

    #[test]
    fn rejects_coarse_grid() {
        let g = ClosedGeodesic::principal(near_round(), 1, 2, 256).unwrap();
        assert!(index_nullity(&g, 300, None).is_err());
    }
}
