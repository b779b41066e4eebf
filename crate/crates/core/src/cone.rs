//! Cones in ℝ³ over integral 1-varifolds on the unit sphere.
//!
//! Each base segment `[a, b]` spans the planar triangle `(0, R a, R b)`, so
//! the cone over a polygonal base is a union of flat triangles and its mass
//! in any ball is computed exactly by clipping triangles against the ball.

use nalgebra::{Matrix3, Vector2};
use serde::Serialize;

use crate::curve::{varifold_density, DensityEstimate, Mass, Varifold1};
use crate::error::{Error, Result};
use crate::surface::{EllipsoidParams, Vec3};

/// Fraction of the extent below which the apex region is cut out of
/// quadratures.
pub const APEX_CUTOFF: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct ConeTriangle {
    /// Two outer vertices; the third is the origin.
    pub a: Vec3,
    pub b: Vec3,
    pub multiplicity: u32,
}

impl ConeTriangle {
    pub fn area(&self) -> f64 {
        0.5 * self.a.cross(&self.b).norm()
    }

    /// `(e1, e2, n)`: an orthonormal frame of the triangle plane plus the
    /// unit normal, or `None` for a degenerate triangle.
    fn frame(&self) -> Option<(Vec3, Vec3, Vec3)> {
        let n = self.a.cross(&self.b);
        if n.norm() < 1e-300 {
            return None;
        }
        let n = n.normalize();
        let e1 = self.a.normalize();
        Some((e1, n.cross(&e1), n))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeVarifold {
    base: Varifold1,
    extent: f64,
    triangles: Vec<ConeTriangle>,
}

impl ConeVarifold {
    pub fn base(&self) -> &Varifold1 {
        &self.base
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn triangles(&self) -> &[ConeTriangle] {
        &self.triangles
    }

    /// Mass inside the ball `B(y, r)`.
    pub fn ball_mass(&self, y: &Vec3, r: f64) -> f64 {
        pairwise_sum(self.triangles.iter().map(|t| t.multiplicity as f64 * triangle_ball_area(&Vec3::zeros(), &t.a, &t.b, y, r)))
    }
}

impl Mass for ConeVarifold {
    fn mass(&self) -> f64 {
        pairwise_sum(self.triangles.iter().map(|t| t.multiplicity as f64 * t.area()))
    }
}

/// Truncated cone of radius `extent` over a varifold on the unit sphere.
pub fn build_cone(base: &Varifold1, extent: f64) -> Result<ConeVarifold> {
    if base.pieces().is_empty() {
        return Err(Error::InvalidArgument("cone over an empty varifold".into()));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidArgument(format!("cone extent {extent} must be positive")));
    }
    for (c, _) in base.pieces() {
        if c.surface_residual(&EllipsoidParams::sphere()) > 1e-9 {
            return Err(Error::InvalidArgument("cone base must lie on the unit sphere".into()));
        }
    }
    let triangles = base
        .pieces()
        .iter()
        .flat_map(|(c, m)| {
            c.segments().map(move |(a, b, _)| ConeTriangle { a: a * extent, b: b * extent, multiplicity: *m })
        })
        .collect();
    Ok(ConeVarifold { base: base.clone(), extent, triangles })
}

/// Relative mass difference between the cone dilated by `lambda` and the
/// original, both restricted to the ball of radius `R·min(λ, 1/λ)` about
/// the origin, where both are defined.
pub fn cone_dilation_check(c: &ConeVarifold, lambda: f64) -> Result<f64> {
    if !(0.5..=2.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("dilation {lambda} outside [0.5, 2]")));
    }
    if lambda == 1.0 {
        return Ok(0.0);
    }
    let rho = c.extent * lambda.min(1.0 / lambda);
    let origin = Vec3::zeros();
    let original = c.ball_mass(&origin, rho);
    let dilated = pairwise_sum(c.triangles.iter().map(|t| {
        t.multiplicity as f64 * triangle_ball_area(&origin, &(t.a * lambda), &(t.b * lambda), &origin, rho)
    }));
    Ok((dilated - original).abs() / original)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeDensity {
    pub value: f64,
    pub ratios: Vec<(f64, f64)>,
    pub spread: f64,
    pub converged: bool,
}

/// Area ratios `‖C‖B(y,r) / πr²` at `r = |y|·{0.2, 0.1, 0.05}`,
/// extrapolated linearly to `r = 0` through the two smallest radii.
pub fn cone_density(c: &ConeVarifold, y: &Vec3) -> Result<ConeDensity> {
    let ny = y.norm();
    if !(ny > 0.1 * c.extent && ny < 0.9 * c.extent) {
        return Err(Error::InvalidArgument(format!("|y| = {ny} outside (0.1R, 0.9R)")));
    }
    let ratios: Vec<(f64, f64)> = [0.2, 0.1, 0.05]
        .iter()
        .map(|f| {
            let r = f * ny;
            (r, c.ball_mass(y, r) / (std::f64::consts::PI * r * r))
        })
        .collect();
    let DensityEstimate { value, ratios, spread, converged } = crate::curve::extrapolate(ratios);
    Ok(ConeDensity { value, ratios, spread, converged })
}

/// The base density at `y/|y|`, for comparison with [`cone_density`].
pub fn base_density(c: &ConeVarifold, y: &Vec3) -> Result<DensityEstimate> {
    let p = y.normalize();
    varifold_density(&c.base, &EllipsoidParams::sphere(), &p, &[0.2, 0.1, 0.05])
}

/// `2‖C‖B(y, r) / r²` at `r = 0.9R`; tends to the base mass as `R → ∞`.
pub fn cone_mass_growth(c: &ConeVarifold, y: &Vec3) -> Result<f64> {
    let ny = y.norm();
    if ny == 0.0 {
        return Err(Error::InvalidArgument("mass growth needs y ≠ 0".into()));
    }
    if c.extent < 20.0 * ny {
        return Err(Error::InvalidArgument(format!("extent {} below 20|y| = {}", c.extent, 20.0 * ny)));
    }
    let r = 0.9 * c.extent;
    Ok(2.0 * c.ball_mass(y, r) / (r * r))
}

/// Area of `triangle(p0, p1, p2) ∩ B(y, r)`.
pub fn triangle_ball_area(p0: &Vec3, p1: &Vec3, p2: &Vec3, y: &Vec3, r: f64) -> f64 {
    let n = (p1 - p0).cross(&(p2 - p0));
    let nn = n.norm();
    if nn < 1e-300 {
        return 0.0;
    }
    let n = n / nn;
    let h = (y - p0).dot(&n);
    if h.abs() >= r {
        return 0.0;
    }
    let rho = (r * r - h * h).sqrt();
    let c = y - n * h;
    let e1 = (p1 - p0) / (p1 - p0).norm();
    let e2 = n.cross(&e1);
    let to2 = |p: &Vec3| Vector2::new((p - c).dot(&e1), (p - c).dot(&e2));
    let (q0, q1, q2) = (to2(p0), to2(p1), to2(p2));
    (sector_clip(&q0, &q1, rho) + sector_clip(&q1, &q2, rho) + sector_clip(&q2, &q0, rho)).abs()
}

fn cross2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn angle2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    cross2(a, b).atan2(a.dot(b))
}

/// Signed area of `triangle(0, a, b) ∩ disk(0, r)`.
fn sector_clip(a: &Vector2<f64>, b: &Vector2<f64>, r: f64) -> f64 {
    let r2 = r * r;
    if a.norm_squared() <= r2 && b.norm_squared() <= r2 {
        return 0.5 * cross2(a, b);
    }
    let d = b - a;
    let qa = d.norm_squared();
    if qa < 1e-300 {
        return 0.0;
    }
    let qb = a.dot(&d);
    let qc = a.norm_squared() - r2;
    let disc = qb * qb - qa * qc;
    if disc <= 0.0 {
        return 0.5 * r2 * angle2(a, b);
    }
    let s = disc.sqrt();
    let (t1, t2) = ((-qb - s) / qa, (-qb + s) / qa);
    if t2 <= 0.0 || t1 >= 1.0 {
        return 0.5 * r2 * angle2(a, b);
    }
    let p1 = a + d * t1.max(0.0);
    let p2 = a + d * t2.min(1.0);
    0.5 * r2 * angle2(a, &p1) + 0.5 * cross2(&p1, &p2) + 0.5 * r2 * angle2(&p2, b)
}

/// Sum in a fixed binary tree over the input order, so the result does not
/// depend on how work is split.
pub fn pairwise_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    fn rec(v: &[f64]) -> f64 {
        match v.len() {
            0 => 0.0,
            1 => v[0],
            n => rec(&v[..n / 2]) + rec(&v[n / 2..]),
        }
    }
    rec(&it.collect::<Vec<_>>())
}

/// Smooth ambient vector field with its derivative.
pub trait VectorField {
    fn value(&self, x: &Vec3) -> Vec3;
    fn jacobian(&self, x: &Vec3) -> Matrix3<f64>;
    /// Upper bound for `|X|` (attained for the fields here).
    fn sup_norm(&self) -> f64;
}

/// Infinitesimal rotation `x ↦ ω × x`.
#[derive(Clone, Copy, Debug)]
pub struct Rotation {
    pub omega: Vec3,
    /// Radius of the region on which the sup norm is taken.
    pub radius: f64,
}

impl VectorField for Rotation {
    fn value(&self, x: &Vec3) -> Vec3 {
        self.omega.cross(x)
    }

    fn jacobian(&self, _x: &Vec3) -> Matrix3<f64> {
        self.omega.cross_matrix()
    }

    fn sup_norm(&self) -> f64 {
        self.omega.norm() * self.radius
    }
}

/// `w·(1 − |x − c|²/ρ²)⁴` inside `B(c, ρ)`, zero outside.
#[derive(Clone, Copy, Debug)]
pub struct Bump {
    pub center: Vec3,
    pub radius: f64,
    pub direction: Vec3,
}

impl VectorField for Bump {
    fn value(&self, x: &Vec3) -> Vec3 {
        let t = (x - self.center).norm_squared() / (self.radius * self.radius);
        if t >= 1.0 {
            return Vec3::zeros();
        }
        self.direction * (1.0 - t).powi(4)
    }

    fn jacobian(&self, x: &Vec3) -> Matrix3<f64> {
        let d = x - self.center;
        let r2 = self.radius * self.radius;
        let t = d.norm_squared() / r2;
        if t >= 1.0 {
            return Matrix3::zeros();
        }
        let grad = d * (-8.0 * (1.0 - t).powi(3) / r2);
        self.direction * grad.transpose()
    }

    fn sup_norm(&self) -> f64 {
        self.direction.norm()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Radial bands per cone triangle.
const BANDS: usize = 32;

/// Quadrature points `(x, weight)` over a cone triangle, skipping the apex
/// region `u < APEX_CUTOFF` of the radial parameter.
fn triangle_quadrature(t: &ConeTriangle) -> impl Iterator<Item = (Vec3, f64)> + '_ {
    let twice_area = t.a.cross(&t.b).norm();
    let u0 = APEX_CUTOFF;
    let band = (1.0 - u0) / BANDS as f64;
    (0..BANDS).flat_map(move |k| {
        GAUSS4.iter().flat_map(move |&(gu, wu)| {
            let u = u0 + band * (k as f64 + gu);
            GAUSS4.iter().map(move |&(gv, wv)| {
                let x = (t.a * (1.0 - gv) + t.b * gv) * u;
                (x, wu * wv * band * u * twice_area)
            })
        })
    })
}

/// `∫ div_P X` over the cone, the first variation `δC(X)`.
pub fn first_variation<X: VectorField + ?Sized>(c: &ConeVarifold, field: &X) -> f64 {
    pairwise_sum(c.triangles.iter().map(|t| {
        let Some((e1, e2, _)) = t.frame() else { return 0.0 };
        let m = t.multiplicity as f64;
        m * triangle_quadrature(t)
            .map(|(x, w)| {
                let j = field.jacobian(&x);
                w * (e1.dot(&(j * e1)) + e2.dot(&(j * e2)))
            })
            .sum::<f64>()
    }))
}

/// `∫ t·DX t` along the base segments, the first variation of a
/// 1-varifold in ℝ³.
pub fn first_variation_curves<X: VectorField + ?Sized>(v: &Varifold1, field: &X) -> f64 {
    pairwise_sum(v.pieces().iter().flat_map(|(c, m)| {
        c.segments().map(move |(a, b, _)| {
            let d = b - a;
            let len = d.norm();
            if len == 0.0 {
                return 0.0;
            }
            let t = d / len;
            *m as f64
                * GAUSS4
                    .iter()
                    .map(|&(g, w)| w * len * t.dot(&(field.jacobian(&(a + d * g)) * t)))
                    .sum::<f64>()
        })
    }))
}

/// Image of `x` and the derivative of the time-`time` flow of `field`,
/// by RK4 on the flow and its variational equation.
pub fn flow_map<X: VectorField + ?Sized>(field: &X, x: &Vec3, time: f64, steps: usize) -> (Vec3, Matrix3<f64>) {
    let h = time / steps as f64;
    let mut y = *x;
    let mut m = Matrix3::identity();
    let rhs = |y: &Vec3, m: &Matrix3<f64>| (field.value(y), field.jacobian(y) * m);
    for _ in 0..steps {
        let (k1y, k1m) = rhs(&y, &m);
        let (k2y, k2m) = rhs(&(y + k1y * (h / 2.0)), &(m + k1m * (h / 2.0)));
        let (k3y, k3m) = rhs(&(y + k2y * (h / 2.0)), &(m + k2m * (h / 2.0)));
        let (k4y, k4m) = rhs(&(y + k3y * h), &(m + k3m * h));
        y += (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (h / 6.0);
        m += (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (h / 6.0);
    }
    (y, m)
}

/// `(‖Φ_ε(C)‖ − ‖C‖) / ε` for the time-`ε` flow `Φ_ε` of `field`, with the
/// image area from the Jacobian of the flow on each triangle plane. The
/// area change is accumulated pointwise to avoid cancellation.
pub fn flow_mass_derivative<X: VectorField + ?Sized>(c: &ConeVarifold, field: &X, eps: f64) -> f64 {
    pairwise_sum(c.triangles.iter().map(|t| {
        let Some((e1, e2, _)) = t.frame() else { return 0.0 };
        let m = t.multiplicity as f64;
        m * triangle_quadrature(t)
            .map(|(x, w)| {
                let j = field.jacobian(&x);
                if j.iter().all(|v| *v == 0.0) {
                    return 0.0;
                }
                let (_, dphi) = flow_map(field, &x, eps, 4);
                let n = (dphi * e1).cross(&(dphi * e2));
                let s = n.norm_squared();
                w * (s - 1.0) / (s.sqrt() + 1.0)
            })
            .sum::<f64>()
    })) / eps
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientCheck {
    pub first_variation: f64,
    /// `(ε, finite-difference derivative, |error|)` per step size.
    pub steps: Vec<(f64, f64, f64)>,
    /// Error ratio between consecutive step sizes.
    pub ratio: f64,
}

/// Compares `δC(X)` with finite differences of mass at `ε = 1e-3, 1e-4`.
pub fn gradient_check<X: VectorField + ?Sized>(c: &ConeVarifold, field: &X) -> GradientCheck {
    let fv = first_variation(c, field);
    let steps: Vec<(f64, f64, f64)> = [1e-3, 1e-4]
        .iter()
        .map(|&eps| {
            let fd = flow_mass_derivative(c, field, eps);
            (eps, fd, (fd - fv).abs())
        })
        .collect();
    let ratio = steps[0].2 / steps[1].2;
    GradientCheck { first_variation: fv, steps, ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{sphere_circle, Cycle1};
    use crate::network::fixtures;
    use std::f64::consts::{PI, TAU};

    fn disk(extent: f64) -> ConeVarifold {
        let eq = Cycle1::new(vec![sphere_circle(Vec3::z(), 0.0, 512).unwrap()]).unwrap();
        build_cone(&eq.into_varifold(), extent).unwrap()
    }

    fn network_cone(net: &crate::network::GeodesicNetwork, extent: f64) -> ConeVarifold {
        build_cone(&Varifold1::new(net.pieces().to_vec()).unwrap(), extent).unwrap()
    }

    #[test]
    fn clip_area_oracles() {
        let o = Vec3::zeros();
        // disk fully inside the triangle plane region
        let big = triangle_ball_area(&Vec3::new(-10.0, -10.0, 0.0), &Vec3::new(10.0, -10.0, 0.0), &Vec3::new(0.0, 10.0, 0.0), &o, 1.0);
        assert!((big - PI).abs() < 1e-12);
        // ball off the plane by 0.6: disk of radius 0.8
        let off = triangle_ball_area(&Vec3::new(-10.0, -10.0, 0.0), &Vec3::new(10.0, -10.0, 0.0), &Vec3::new(0.0, 10.0, 0.0), &Vec3::new(0.0, 0.0, 0.6), 1.0);
        assert!((off - PI * 0.64).abs() < 1e-12);
        // quarter disk: corner at the center
        let q = triangle_ball_area(&o, &Vec3::new(5.0, 0.0, 0.0), &Vec3::new(0.0, 5.0, 0.0), &o, 1.0);
        assert!((q - PI / 4.0).abs() < 1e-12);
        // triangle inside the ball
        let t = triangle_ball_area(&o, &Vec3::new(0.1, 0.0, 0.0), &Vec3::new(0.0, 0.1, 0.0), &o, 1.0);
        assert!((t - 0.005).abs() < 1e-15);
    }

    #[test]
    fn cone_masses() {
        let c = disk(2.0);
        assert!((c.mass() - PI * 4.0).abs() / (PI * 4.0) < 1e-2);
        let cross = network_cone(&fixtures::crossing_circles(PI / 2.0, 256).unwrap(), 1.0);
        assert!((cross.mass() - TAU).abs() / TAU < 1e-2);
        assert!(build_cone(&Varifold1::default(), 1.0).is_err());
    }

    #[test]
    fn dilation() {
        let c = disk(1.0);
        assert_eq!(cone_dilation_check(&c, 1.0).unwrap(), 0.0);
        assert!(cone_dilation_check(&c, 2.0).unwrap() < 1e-3);
        let y = network_cone(&fixtures::y_network(128).unwrap(), 1.0);
        assert!(cone_dilation_check(&y, 1.37).unwrap() < 1e-3);
        assert!(cone_dilation_check(&y, 3.0).is_err());
    }

    #[test]
    fn densities() {
        let c = disk(1.0);
        let d = cone_density(&c, &Vec3::new(0.3, 0.2, 0.0)).unwrap();
        assert!((d.value - 1.0).abs() < 0.03);
        let cross = network_cone(&fixtures::crossing_circles(PI / 2.0, 256).unwrap(), 1.0);
        assert!((cone_density(&cross, &Vec3::new(0.0, 0.0, 0.5)).unwrap().value - 2.0).abs() < 0.06);
        let y = network_cone(&fixtures::y_network(256).unwrap(), 1.0);
        assert!((cone_density(&y, &Vec3::new(0.0, 0.0, -0.4)).unwrap().value - 1.5).abs() < 0.05);
        assert!(cone_density(&y, &Vec3::new(0.0, 0.0, 0.05)).is_err());
    }

    #[test]
    fn mass_growth() {
        let y = Vec3::new(0.3, 0.0, 0.0);
        let g = cone_mass_growth(&disk(10.0), &y).unwrap();
        assert!((g - TAU).abs() / TAU < 0.05);
        assert!(cone_mass_growth(&disk(5.0), &y).is_err());
    }

    #[test]
    fn rotation_has_no_first_variation() {
        let c = disk(1.0);
        let x = Rotation { omega: Vec3::z(), radius: 1.0 };
        assert!(first_variation(&c, &x).abs() < 1e-8);
        let v = Cycle1::new(vec![sphere_circle(Vec3::z(), 0.0, 512).unwrap()]).unwrap().into_varifold();
        assert!(first_variation_curves(&v, &x).abs() < 1e-8);
    }

    #[test]
    fn defect_produces_variation() {
        let net = fixtures::meridian_network(&[(0.0, 1), (115f64.to_radians(), 1), (240f64.to_radians(), 1)], 256).unwrap();
        let c = network_cone(&net, 1.0);
        let defect = net.junctions()[0].incident().iter().fold(Vec3::zeros(), |s, i| s + i.tangent);
        let x = Bump { center: Vec3::new(0.0, 0.0, 0.5), radius: 0.3, direction: defect.normalize() };
        let fv = first_variation(&c, &x);
        assert!(fv.abs() >= 0.01 * x.sup_norm(), "{fv}");
        // pushing along the defect shortens the arcs: mass decreases
        assert!(fv < 0.0);
    }

    #[test]
    fn flow_map_of_rotation() {
        let x = Rotation { omega: Vec3::z(), radius: 1.0 };
        let (y, m) = flow_map(&x, &Vec3::x(), 0.5, 16);
        assert!((y - Vec3::new(0.5f64.cos(), 0.5f64.sin(), 0.0)).norm() < 1e-8);
        assert!((m.determinant() - 1.0).abs() < 1e-8);
    }
}
