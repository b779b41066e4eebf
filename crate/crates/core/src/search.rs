//! Shooting search for short closed geodesics on near-round ellipsoids.
//!
//! Geodesics are recorded at their upward crossings of the plane `x3 = 0`,
//! which they meet along the principal ellipse `γ3`. A crossing is the pair
//! `(t, φ)`: the plane angle of the point on `γ3` and the angle of the
//! velocity from the tangent of `γ3` towards `+x3`. Closed geodesics other
//! than `γ3` itself are fixed points of a power of the return map `P`.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::curve::PolyCurve;
use crate::error::{Error, Result};
use crate::index::ClosedGeodesic;
use crate::surface::{geodesic_shoot, principal_point, principal_tangent, EllipsoidParams, TangentVector, Vec3};
use crate::tolerances;

/// Seeds per axis of the `(t, φ)` grid.
pub const GRID: usize = 64;

/// Integration step for the return map.
const STEP: f64 = 0.005;

/// Vertices of the reported curves.
const VERTICES: usize = 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct FoundGeodesic {
    pub geodesic: ClosedGeodesic,
    /// `|x_end − x_0| + |v_end − v_0|` after one traversal.
    pub residual: f64,
    /// `i` when the curve is the principal ellipse `{x_i = 0}`.
    pub principal: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicSummary {
    pub length: f64,
    pub covering: u32,
    pub residual: f64,
    pub principal: Option<usize>,
}

impl FoundGeodesic {
    pub fn summary(&self) -> GeodesicSummary {
        GeodesicSummary {
            length: self.geodesic.length(),
            covering: self.geodesic.covering(),
            residual: self.residual,
            principal: self.principal,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    /// Primitive classes and their coverings up to the cap, by length.
    pub geodesics: Vec<FoundGeodesic>,
    /// Newton solutions before deduplication.
    pub fixed_points: usize,
    /// On the round sphere every geodesic closes; the families are
    /// collapsed to one class per length.
    pub collapsed: bool,
}

impl SearchOutcome {
    /// Number of distinct primitive curves.
    pub fn primitive_classes(&self) -> usize {
        self.geodesics.iter().filter(|g| g.geodesic.covering() == 1).count()
    }
}

struct Section<'a> {
    surface: &'a EllipsoidParams,
}

impl Section<'_> {
    fn state(&self, y: [f64; 2]) -> (Vec3, Vec3) {
        let x = principal_point(self.surface, 3, y[0]);
        let t = principal_tangent(self.surface, 3, y[0]);
        (x, t * y[1].cos() + Vec3::z() * y[1].sin())
    }

    fn coords(&self, x: &Vec3, v: &Vec3) -> [f64; 2] {
        let [a, b, _] = self.surface.semi_axes();
        let t = (x[1] / b).atan2(x[0] / a).rem_euclid(TAU);
        let tangent = principal_tangent(self.surface, 3, t);
        [t, v[2].atan2(v.dot(&tangent))]
    }

    /// Next upward crossing of `x3 = 0`, with the arc length to reach it.
    fn next(&self, x: &Vec3, v: &Vec3, max_len: f64) -> Option<(Vec3, Vec3, f64)> {
        self.surface.shoot_to_event(x, v, STEP, 0.1, max_len, |x, _| x[2])
    }

    /// `m` returns from `y`: the section points visited, the end state and
    /// the total length.
    fn orbit(&self, y: [f64; 2], m: usize, cap: f64) -> Option<(Vec<[f64; 2]>, Vec3, Vec3, f64)> {
        let (mut x, mut v) = self.state(y);
        let mut total = 0.0;
        let mut points = Vec::with_capacity(m);
        for _ in 0..m {
            let (xn, vn, s) = self.next(&x, &v, cap - total)?;
            total += s;
            (x, v) = (xn, vn);
            points.push(self.coords(&x, &v));
        }
        Some((points, x, v, total))
    }

    fn displacement(&self, y: [f64; 2], m: usize, cap: f64) -> Option<[f64; 2]> {
        let (pts, ..) = self.orbit(y, m, cap)?;
        let end = pts[m - 1];
        Some([wrap(end[0] - y[0]), end[1] - y[1]])
    }
}

fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(TAU) - PI
}

fn norm2(d: [f64; 2]) -> f64 {
    d[0].hypot(d[1])
}

/// Damped Newton on `P^m(y) − y` with a forward-difference Jacobian.
fn newton(sec: &Section, mut y: [f64; 2], m: usize, cap: f64) -> Option<[f64; 2]> {
    let mut f = sec.displacement(y, m, cap)?;
    for _ in 0..40 {
        let fn0 = norm2(f);
        if fn0 < 1e-11 {
            return Some(y);
        }
        let eps = 1e-6;
        let ft = sec.displacement([y[0] + eps, y[1]], m, cap)?;
        let fp = sec.displacement([y[0], y[1] + eps], m, cap)?;
        let j = [[(ft[0] - f[0]) / eps, (fp[0] - f[0]) / eps], [(ft[1] - f[1]) / eps, (fp[1] - f[1]) / eps]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let d = [(j[1][1] * f[0] - j[0][1] * f[1]) / det, (-j[1][0] * f[0] + j[0][0] * f[1]) / det];
        let mut lambda = 1.0;
        loop {
            let cand = [(y[0] - lambda * d[0]).rem_euclid(TAU), y[1] - lambda * d[1]];
            if cand[1] > 0.0 && cand[1] < PI {
                if let Some(fc) = sec.displacement(cand, m, cap) {
                    if norm2(fc) < fn0 {
                        y = cand;
                        f = fc;
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                return (fn0 < 1e-9).then_some(y);
            }
        }
    }
    (norm2(f) < 1e-9).then_some(y)
}

/// Closed geodesics of length at most `cap`, by shooting from a 64×64 grid
/// of section points. The row `φ = 0` runs along `γ3` and is tested for
/// closure directly; other seeds that are grid-local minima of
/// `|P^m(y) − y|` are polished by Newton, for every `m` that can fit under
/// the cap.
pub fn closed_geodesic_search(surface: &EllipsoidParams, cap: f64) -> Result<SearchOutcome> {
    surface.require_near_round()?;
    if !(cap > 0.0 && cap <= 8.0 * PI + 1e-12) {
        return Err(Error::InvalidArgument(format!("length cap {cap} outside (0, 8π]")));
    }
    let sec = Section { surface };
    let ts: Vec<f64> = (0..GRID).map(|i| TAU * i as f64 / GRID as f64).collect();
    let phis: Vec<f64> = (0..GRID).map(|j| PI * j as f64 / GRID as f64).collect();

    let mut primitives: Vec<(Vec3, Vec3, f64, f64)> = Vec::new(); // (x0, v0, length, residual)
    let mut fixed_points = 0;

    // φ = 0: the geodesic is γ3 itself
    let along: Vec<Option<(Vec3, Vec3, f64, f64)>> = ts
        .par_iter()
        .map(|&t| {
            let (x0, v0) = sec.state([t, 0.0]);
            let (x1, v1, s) = surface.shoot_to_event(&x0, &v0, STEP, 1.0, cap, |x, _| (x - x0).dot(&v0))?;
            let res = (x1 - x0).norm() + (v1 - v0).norm();
            (res < tolerances::PERIODICITY).then_some((x0, v0, s, res))
        })
        .collect();
    fixed_points += along.iter().flatten().count();
    primitives.extend(along.into_iter().flatten().take(1));

    let seeds: Vec<[f64; 2]> = phis[1..].iter().flat_map(|&phi| ts.iter().map(move |&t| [t, phi])).collect();
    let first = seeds
        .par_iter()
        .map(|&y| {
            let (x, v) = sec.state(y);
            sec.next(&x, &v, cap).map(|r| r.2)
        })
        .collect::<Vec<_>>();
    let shortest = first.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    let max_m = if shortest.is_finite() { (cap / shortest).floor() as usize } else { 0 };

    for m in 1..=max_m {
        let field: Vec<f64> = seeds
            .par_iter()
            .map(|&y| sec.displacement(y, m, cap).map_or(f64::INFINITY, norm2))
            .collect();
        let at = |i: usize, j: usize| field[(j - 1) * GRID + i];
        let mut starts = Vec::new();
        for (j, &phi) in phis.iter().enumerate().skip(1) {
            for (i, &t) in ts.iter().enumerate() {
                let v = at(i, j);
                if !v.is_finite() {
                    continue;
                }
                let mut minimal = true;
                for dj in [-1i32, 0, 1] {
                    let jj = j as i32 + dj;
                    if jj < 1 || jj >= GRID as i32 {
                        continue;
                    }
                    for di in [-1i32, 0, 1] {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let ii = (i as i32 + di).rem_euclid(GRID as i32) as usize;
                        if at(ii, jj as usize) < v {
                            minimal = false;
                        }
                    }
                }
                if minimal {
                    starts.push([t, phi]);
                }
            }
        }
        let solved: Vec<Option<[f64; 2]>> = starts.par_iter().map(|&y| newton(&sec, y, m, cap)).collect();
        for y in solved.into_iter().flatten() {
            if y[1] < 1e-6 || y[1] > PI - 1e-6 {
                continue;
            }
            // fixed points of a lower power belong to a shorter primitive orbit
            if (1..m).any(|k| m % k == 0 && sec.displacement(y, k, cap).is_some_and(|d| norm2(d) < 1e-7)) {
                continue;
            }
            let Some((_, x1, v1, len)) = sec.orbit(y, m, cap) else { continue };
            let (x0, v0) = sec.state(y);
            let res = (x1 - x0).norm() + (v1 - v0).norm();
            if res < tolerances::PERIODICITY {
                fixed_points += 1;
                primitives.push((x0, v0, len, res));
            }
        }
    }

    let collapsed = surface.is_round();
    let mut classes: Vec<(PolyCurve, f64, f64)> = Vec::new();
    for (x0, v0, len, res) in primitives {
        if collapsed && classes.iter().any(|c| (c.1 - len).abs() < 1e-6) {
            continue;
        }
        let start = TangentVector { base: surface.project(&x0)?, v: v0 };
        let open = geodesic_shoot(surface, &start, len, len / VERTICES as f64)?;
        let curve = PolyCurve::new(open.vertices()[..VERTICES].to_vec(), true)?;
        if classes.iter().any(|c| same_curve(&c.0, &curve)) {
            continue;
        }
        classes.push((curve, len, res));
    }

    let mut geodesics = Vec::new();
    for (curve, len, res) in classes {
        let principal = (1..=3).find(|&i| curve.vertices().iter().all(|x| x[i - 1].abs() < 1e-6));
        let mut r = 1u32;
        while r as f64 * len <= cap {
            let geodesic = ClosedGeodesic::new(*surface, curve.clone(), r)?;
            geodesics.push(FoundGeodesic { geodesic, residual: res, principal });
            r += 1;
        }
    }
    geodesics.sort_by(|a, b| a.geodesic.length().partial_cmp(&b.geodesic.length()).unwrap());
    Ok(SearchOutcome { geodesics, fixed_points, collapsed })
}

/// Same lengths and every sampled vertex of `a` within `1e-4` of the
/// polyline `b` (orientation and starting point do not matter).
fn same_curve(a: &PolyCurve, b: &PolyCurve) -> bool {
    if (a.length() - b.length()).abs() > 1e-6 {
        return false;
    }
    let step = (a.len() / 64).max(1);
    a.vertices().iter().step_by(step).all(|p| {
        b.segments().any(|(u, w, _)| {
            let d = w - u;
            let s = ((p - u).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            (p - (u + d * s)).norm() < 1e-4
        })
    })
}
