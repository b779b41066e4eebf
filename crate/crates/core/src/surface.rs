//! Points, tangent vectors and geodesics on the ellipsoid
//! `a1·x1² + a2·x2² + a3·x3² = 1`.
//!
//! Geodesics are integrated in ambient coordinates: the only force is the
//! normal constraint force of the quadric, and after every RK4 step the
//! position is pulled back onto the surface and the velocity back onto the
//! unit tangent circle. This keeps the integrator free of chart
//! singularities.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::curve::PolyCurve;
use crate::error::{Error, Result};
use crate::tolerances;

pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidParams {
    a: [f64; 3],
}

impl EllipsoidParams {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        let a = [a1, a2, a3];
        if a.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::InvalidSurface(a));
        }
        Ok(Self { a })
    }

    /// The round unit sphere `E(1,1,1)`.
    pub const fn sphere() -> Self {
        Self { a: [1.0; 3] }
    }

    pub fn coefficients(&self) -> [f64; 3] {
        self.a
    }

    pub fn is_round(&self) -> bool {
        self.a.iter().all(|&c| c == 1.0)
    }

    pub fn is_near_round(&self) -> bool {
        self.a.iter().all(|&c| (c - 1.0).abs() <= tolerances::NEAR_ROUND)
    }

    pub fn require_near_round(&self) -> Result<()> {
        if self.is_near_round() {
            Ok(())
        } else {
            Err(Error::NotNearRound(self.a))
        }
    }

    pub fn require_round(&self) -> Result<()> {
        if self.is_round() {
            Ok(())
        } else {
            Err(Error::NotRound(self.a))
        }
    }

    /// Strictly increasing coefficients, the ordering the principal
    /// ellipse lengths are stated for.
    pub fn is_strictly_ordered(&self) -> bool {
        self.a[0] < self.a[1] && self.a[1] < self.a[2]
    }

    pub fn semi_axes(&self) -> [f64; 3] {
        self.a.map(|c| 1.0 / c.sqrt())
    }

    pub fn quadric(&self, x: &Vec3) -> f64 {
        self.a[0] * x[0] * x[0] + self.a[1] * x[1] * x[1] + self.a[2] * x[2] * x[2] - 1.0
    }

    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        Vec3::new(2.0 * self.a[0] * x[0], 2.0 * self.a[1] * x[1], 2.0 * self.a[2] * x[2])
    }

    pub fn unit_normal(&self, x: &Vec3) -> Vec3 {
        self.gradient(x).normalize()
    }

    /// Gauss curvature at a surface point, in closed form:
    /// `K = a1·a2·a3 / (a1²x1² + a2²x2² + a3²x3²)²`.
    pub fn gauss_curvature(&self, x: &Vec3) -> f64 {
        let [a1, a2, a3] = self.a;
        let q = a1 * a1 * x[0] * x[0] + a2 * a2 * x[1] * x[1] + a3 * a3 * x[2] * x[2];
        a1 * a2 * a3 / (q * q)
    }

    /// Radial map from the unit sphere onto the surface. A diffeomorphism,
    /// used to carry sphere meshes over to the ellipsoid.
    pub fn radial(&self, u: &Vec3) -> Vec3 {
        let s = self.a[0] * u[0] * u[0] + self.a[1] * u[1] * u[1] + self.a[2] * u[2] * u[2];
        u / s.sqrt()
    }

    /// Newton iteration along the quadric gradient; a fixed point for points
    /// already on the surface and a radial projection on the sphere.
    pub(crate) fn pull_back(&self, p: &Vec3) -> Vec3 {
        let mut x = *p;
        for _ in 0..60 {
            let f = self.quadric(&x);
            if f.abs() <= 1e-15 {
                break;
            }
            let g = self.gradient(&x);
            x -= g * (f / g.norm_squared());
        }
        x
    }

    pub fn project(&self, p: &Vec3) -> Result<SurfacePoint> {
        if p.norm() == 0.0 || !p.iter().all(|c| c.is_finite()) {
            return Err(Error::ZeroVector);
        }
        // Far from the surface the gradient step overshoots; start from the
        // radial image, which is already on the surface up to rounding.
        let start = if self.quadric(p).abs() > 0.5 { self.radial(p) } else { *p };
        Ok(SurfacePoint(self.pull_back(&start)))
    }

    pub fn project_tangent(&self, x: &Vec3, v: &Vec3) -> Vec3 {
        let n = self.unit_normal(x);
        v - n * n.dot(v)
    }

    /// Intrinsic distance. Exact on the round sphere; otherwise solved by
    /// shooting from `a`, seeded with the spherical guess.
    pub fn distance(&self, a: &Vec3, b: &Vec3) -> f64 {
        if self.is_round() {
            return a.dot(b).clamp(-1.0, 1.0).acos();
        }
        geodesic_distance(self, a, b)
    }

    fn acceleration(&self, x: &Vec3, v: &Vec3) -> Vec3 {
        let [a1, a2, a3] = self.a;
        let num = a1 * v[0] * v[0] + a2 * v[1] * v[1] + a3 * v[2] * v[2];
        let ax = Vec3::new(a1 * x[0], a2 * x[1], a3 * x[2]);
        -ax * (num / ax.norm_squared())
    }

    /// One RK4 step of the unit-speed geodesic flow followed by projection.
    pub(crate) fn step(&self, x: &Vec3, v: &Vec3, h: f64) -> (Vec3, Vec3) {
        let k1x = *v;
        let k1v = self.acceleration(x, v);
        let x2 = x + k1x * (h / 2.0);
        let v2 = v + k1v * (h / 2.0);
        let k2v = self.acceleration(&x2, &v2);
        let x3 = x + v2 * (h / 2.0);
        let v3 = v + k2v * (h / 2.0);
        let k3v = self.acceleration(&x3, &v3);
        let x4 = x + v3 * h;
        let v4 = v + k3v * h;
        let k4v = self.acceleration(&x4, &v4);
        let xn = x + (k1x + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0);
        let vn = v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        let xn = self.pull_back(&xn);
        let vn = self.project_tangent(&xn, &vn).normalize();
        (xn, vn)
    }

    /// Integrates `length` of arc in `steps` equal steps.
    pub(crate) fn advance(&self, x: &Vec3, v: &Vec3, length: f64, steps: usize) -> (Vec3, Vec3) {
        let h = length / steps as f64;
        let (mut x, mut v) = (*x, *v);
        for _ in 0..steps {
            (x, v) = self.step(&x, &v, h);
        }
        (x, v)
    }

    /// Integrates from `(x, v)` until `event` changes sign from negative to
    /// non-negative, ignoring the first `min_len` of arc. Returns the state
    /// at the event and the arc length travelled, or `None` past `max_len`.
    pub(crate) fn shoot_to_event<F>(
        &self,
        x: &Vec3,
        v: &Vec3,
        h: f64,
        min_len: f64,
        max_len: f64,
        event: F,
    ) -> Option<(Vec3, Vec3, f64)>
    where
        F: Fn(&Vec3, &Vec3) -> f64,
    {
        let (mut x, mut v) = (*x, *v);
        let mut s = 0.0;
        let mut g = event(&x, &v);
        while s < max_len {
            let (xn, vn) = self.step(&x, &v, h);
            let gn = event(&xn, &vn);
            if s + h > min_len && g < 0.0 && gn >= 0.0 {
                let tau = refine_root(0.0, h, g, gn, |t| {
                    let (xt, vt) = self.step(&x, &v, t);
                    event(&xt, &vt)
                });
                let (xt, vt) = self.step(&x, &v, tau);
                let total = s + tau;
                return (total <= max_len).then_some((xt, vt, total));
            }
            (x, v, g) = (xn, vn, gn);
            s += h;
        }
        None
    }
}

/// Illinois variant of regula falsi on a bracketing interval.
pub(crate) fn refine_root<F: Fn(f64) -> f64>(
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    f: F,
) -> f64 {
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    let mut side = 0i8;
    let mut t = lo;
    let mut prev = f64::NAN;
    for _ in 0..100 {
        t = (lo * fhi - hi * flo) / (fhi - flo);
        if !(t > lo.min(hi) && t < lo.max(hi)) {
            t = 0.5 * (lo + hi);
        }
        let ft = f(t);
        if ft == 0.0 || (hi - lo).abs() < 1e-15 * (1.0 + t.abs()) || (t - prev).abs() < 1e-15 {
            break;
        }
        prev = t;
        if (ft < 0.0) == (flo < 0.0) {
            lo = t;
            flo = ft;
            if side == -1 {
                fhi /= 2.0;
            }
            side = -1;
        } else {
            hi = t;
            fhi = ft;
            if side == 1 {
                flo /= 2.0;
            }
            side = 1;
        }
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint(Vec3);

impl SurfacePoint {
    pub fn new(surface: &EllipsoidParams, p: Vec3) -> Result<Self> {
        surface.project(&p)
    }

    pub fn coords(&self) -> Vec3 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub base: SurfacePoint,
    pub v: Vec3,
}

impl TangentVector {
    /// Projects `v` onto the tangent plane at `base`.
    pub fn new(surface: &EllipsoidParams, base: SurfacePoint, v: Vec3) -> Self {
        let v = surface.project_tangent(&base.coords(), &v);
        Self { base, v }
    }

    /// Unit tangent direction; fails for vectors normal to the surface.
    pub fn direction(surface: &EllipsoidParams, base: SurfacePoint, v: Vec3) -> Result<Self> {
        let t = Self::new(surface, base, v);
        let n = t.v.norm();
        if n < 1e-14 {
            return Err(Error::InvalidArgument("direction is normal to the surface".into()));
        }
        Ok(Self { base, v: t.v / n })
    }

    pub fn is_unit(&self) -> bool {
        (self.v.norm() - 1.0).abs() <= 1e-10
    }
}

/// Arc-length parametrized geodesic of the given length from a unit tangent.
///
/// The step is shortened so that it divides `length` exactly. The run is
/// repeated with half the step; if the endpoints differ by more than
/// [`tolerances::STEP_HALVING`] the step is rejected.
pub fn geodesic_shoot(
    surface: &EllipsoidParams,
    start: &TangentVector,
    length: f64,
    step: f64,
) -> Result<PolyCurve> {
    if !start.is_unit() {
        return Err(Error::InvalidArgument("start direction must be unit".into()));
    }
    if !(length > 0.0 && step > 0.0) {
        return Err(Error::InvalidArgument("length and step must be positive".into()));
    }
    let steps = (length / step).ceil().max(1.0) as usize;
    let h = length / steps as f64;
    let x0 = start.base.coords();
    let mut vertices = Vec::with_capacity(steps + 1);
    let mut arc = Vec::with_capacity(steps + 1);
    let (mut x, mut v) = (x0, start.v);
    vertices.push(x);
    arc.push(0.0);
    for i in 1..=steps {
        (x, v) = surface.step(&x, &v, h);
        vertices.push(x);
        arc.push(i as f64 * h);
    }
    let (fine, _) = surface.advance(&x0, &start.v, length, 2 * steps);
    let shift = (fine - x).norm();
    if shift > tolerances::STEP_HALVING {
        return Err(Error::StepTooLarge { step: h, shift });
    }
    PolyCurve::with_arclength(vertices, false, arc)
}

/// The coordinate axes spanning the plane `{x_i = 0}`.
fn plane_axes(i: usize) -> (usize, usize) {
    match i {
        1 => (1, 2),
        2 => (0, 2),
        _ => (0, 1),
    }
}

/// Point of the principal ellipse `{x_i = 0}` at plane angle `t`.
pub fn principal_point(surface: &EllipsoidParams, i: usize, t: f64) -> Vec3 {
    let (j, k) = plane_axes(i);
    let axes = surface.semi_axes();
    let mut x = Vec3::zeros();
    x[j] = axes[j] * t.cos();
    x[k] = axes[k] * t.sin();
    x
}

/// Unit tangent of the principal ellipse `{x_i = 0}` at plane angle `t`,
/// oriented by increasing `t`.
pub fn principal_tangent(surface: &EllipsoidParams, i: usize, t: f64) -> Vec3 {
    let (j, k) = plane_axes(i);
    let axes = surface.semi_axes();
    let mut v = Vec3::zeros();
    v[j] = -axes[j] * t.sin();
    v[k] = axes[k] * t.cos();
    v.normalize()
}

/// The closed curve `{x_i = 0} ∩ E`, sampled at `n` equally spaced plane
/// angles. `i` is 1-based.
pub fn principal_ellipse(surface: &EllipsoidParams, i: usize, n: usize) -> Result<PolyCurve> {
    if !(1..=3).contains(&i) {
        return Err(Error::InvalidArgument(format!("principal index {i} not in 1..=3")));
    }
    surface.require_near_round()?;
    if n < 64 {
        return Err(Error::InvalidArgument(format!("vertex count {n} below 64")));
    }
    let vertices = (0..n)
        .map(|m| principal_point(surface, i, TAU * m as f64 / n as f64))
        .collect();
    PolyCurve::new(vertices, true)
}

/// Shooting solve of the two-point problem; the spherical angle and the
/// tangential chord direction seed a damped Newton iteration on
/// (heading, length).
fn geodesic_distance(surface: &EllipsoidParams, a: &Vec3, b: &Vec3) -> f64 {
    let chord = b - a;
    if chord.norm() < 1e-14 {
        return 0.0;
    }
    let n = surface.unit_normal(a);
    let e1 = {
        let t = surface.project_tangent(a, &chord);
        if t.norm() < 1e-12 {
            // antipodal-ish: any tangent works as a seed
            let trial = if n[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            surface.project_tangent(a, &trial).normalize()
        } else {
            t.normalize()
        }
    };
    let e2 = n.cross(&e1);
    let mean_radius = 0.5 * (a.norm() + b.norm());
    let mut s = 2.0 * (0.5 * chord.norm() / mean_radius).min(1.0).asin() * mean_radius;
    let mut heading = 0.0f64;
    let shoot = |heading: f64, s: f64| -> Vec3 {
        let v = e1 * heading.cos() + e2 * heading.sin();
        let steps = ((s / 0.01).ceil() as usize).max(8);
        surface.advance(a, &v, s, steps).0
    };
    let nb = surface.unit_normal(b);
    let tb1 = surface.project_tangent(b, &e1).normalize();
    let tb2 = nb.cross(&tb1);
    let residual = |p: Vec3| -> [f64; 2] {
        let d = p - b;
        [d.dot(&tb1), d.dot(&tb2)]
    };
    for _ in 0..30 {
        let r = residual(shoot(heading, s));
        let rn = r[0].hypot(r[1]);
        if rn < 1e-12 {
            break;
        }
        let eps = 1e-7;
        let rh = residual(shoot(heading + eps, s));
        let rs = residual(shoot(heading, s + eps));
        let j = [
            [(rh[0] - r[0]) / eps, (rs[0] - r[0]) / eps],
            [(rh[1] - r[1]) / eps, (rs[1] - r[1]) / eps],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dh = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let ds = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut lambda = 1.0;
        loop {
            let (h2, s2) = (heading - lambda * dh, (s - lambda * ds).clamp(0.0, PI * 2.0));
            let r2 = residual(shoot(h2, s2));
            if r2[0].hypot(r2[1]) < rn || lambda < 1e-3 {
                heading = h2;
                s = s2;
                break;
            }
            lambda *= 0.5;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_point(x: f64, y: f64, z: f64) -> SurfacePoint {
        SurfacePoint::new(&EllipsoidParams::sphere(), Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn projection_examples() {
        let s = EllipsoidParams::sphere();
        let p = s.project(&Vec3::new(2.0, 0.0, 0.0)).unwrap().coords();
        assert!((p - Vec3::x()).norm() < 1e-14);
        let p = s.project(&Vec3::x()).unwrap().coords();
        assert_eq!(p, Vec3::x());
        let e = EllipsoidParams::new(0.95, 1.0, 1.05).unwrap();
        let p = e.project(&Vec3::new(1.0, 1.0, 1.0)).unwrap().coords();
        assert!(e.quadric(&p).abs() < 1e-10);
        assert_eq!(s.project(&Vec3::zeros()), Err(Error::ZeroVector));
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(EllipsoidParams::new(1.0, 0.0, 1.0).is_err());
        assert!(EllipsoidParams::new(1.0, f64::NAN, 1.0).is_err());
        assert!(EllipsoidParams::new(0.95, 1.0, 1.05).unwrap().is_near_round());
        assert!(!EllipsoidParams::new(0.8, 1.0, 1.05).unwrap().is_near_round());
    }

    #[test]
    fn great_circle_antipode() {
        let s = EllipsoidParams::sphere();
        let start = TangentVector::direction(&s, sphere_point(1.0, 0.0, 0.0), Vec3::y()).unwrap();
        let c = geodesic_shoot(&s, &start, PI, 0.01).unwrap();
        let end = *c.vertices().last().unwrap();
        assert!((end + Vec3::x()).norm() < 1e-8, "{end:?}");
        assert!((c.length() - PI).abs() < 1e-8 * PI);
    }

    #[test]
    fn symmetric_plane_is_invariant() {
        let e = EllipsoidParams::new(0.98, 1.0, 1.02).unwrap();
        let base = e.project(&Vec3::new(0.0, 0.6, 0.8)).unwrap();
        let dir = TangentVector::direction(&e, base, Vec3::new(0.0, -0.8, 0.6)).unwrap();
        let c = geodesic_shoot(&e, &dir, 5.0, 0.01).unwrap();
        let worst = c.vertices().iter().map(|p| p[0].abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn coarse_step_rejected() {
        let e = EllipsoidParams::new(0.95, 1.0, 1.05).unwrap();
        let base = e.project(&Vec3::new(0.3, 0.5, 0.8)).unwrap();
        let dir = TangentVector::direction(&e, base, Vec3::new(1.0, 0.2, -0.1)).unwrap();
        assert!(matches!(geodesic_shoot(&e, &dir, 6.0, 0.9), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn curvature_on_sphere_is_one() {
        let s = EllipsoidParams::sphere();
        assert!((s.gauss_curvature(&Vec3::new(0.6, 0.0, 0.8)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn principal_lengths_are_ordered() {
        let e = EllipsoidParams::new(0.95, 1.0, 1.05).unwrap();
        let l: Vec<f64> = (1..=3).map(|i| principal_ellipse(&e, i, 512).unwrap().length()).collect();
        assert!(l[0] < l[1] && l[1] < l[2]);
        for len in l {
            assert!(len > TAU * 0.75 && len < TAU * 1.25);
        }
        let eq = principal_ellipse(&EllipsoidParams::sphere(), 3, 256).unwrap();
        assert!((eq.length() - TAU).abs() < 1e-6);
    }

    #[test]
    fn ellipsoid_distance_matches_shooting() {
        let e = EllipsoidParams::new(0.95, 1.0, 1.05).unwrap();
        let base = e.project(&Vec3::new(0.2, 0.9, 0.3)).unwrap();
        let dir = TangentVector::direction(&e, base, Vec3::new(1.0, 0.0, -0.3)).unwrap();
        let (end, _) = e.advance(&base.coords(), &dir.v, 0.7, 200);
        let d = e.distance(&base.coords(), &end);
        assert!((d - 0.7).abs() < 1e-8, "{d}");
    }
}
