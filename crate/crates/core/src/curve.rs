//! Discretized curves, mod-2 one-cycles and integral 1-varifolds.
//!
//! Arc length is the chord length with one curvature correction per
//! segment: the arc of the circle through the neighbouring vertices. The
//! correction is exact for circles, so great and small circles on the
//! sphere have exact lengths at any resolution.

use crate::error::{Error, Result};
use crate::surface::{EllipsoidParams, Vec3};
use crate::tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct PolyCurve {
    vertices: Vec<Vec3>,
    closed: bool,
    /// Arc length at each vertex; closed curves carry one extra entry, the
    /// total length back at the first vertex.
    cumulative: Vec<f64>,
}

/// Curvature of the circle through three points (zero when collinear).
fn circle_curvature(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let ab = (b - a).norm();
    let bc = (c - b).norm();
    let ca = (c - a).norm();
    let denom = ab * bc * ca;
    if denom < 1e-300 {
        return 0.0;
    }
    2.0 * (b - a).cross(&(c - a)).norm() / denom
}

fn arc_from_chord(chord: f64, kappa: f64) -> f64 {
    let x = 0.5 * chord * kappa;
    if x < 1e-4 {
        chord * (1.0 + x * x / 6.0)
    } else if x < 1.0 {
        2.0 * x.asin() / kappa
    } else {
        chord
    }
}

impl PolyCurve {
    /// Builds a curve, computing arc lengths by corrected chord length.
    pub fn new(vertices: Vec<Vec3>, closed: bool) -> Result<Self> {
        let n = vertices.len();
        if n < 2 || (closed && n < 3) {
            return Err(Error::InvalidArgument(format!("curve needs more vertices, got {n}")));
        }
        let segs = if closed { n } else { n - 1 };
        let at = |i: isize| -> &Vec3 {
            if closed {
                &vertices[i.rem_euclid(n as isize) as usize]
            } else {
                &vertices[i.clamp(0, n as isize - 1) as usize]
            }
        };
        let kappa_at = |i: usize| -> f64 {
            let i = i as isize;
            if closed || (i > 0 && i < n as isize - 1) {
                circle_curvature(at(i - 1), at(i), at(i + 1))
            } else if n >= 3 {
                let j = if i == 0 { 1 } else { n as isize - 2 };
                circle_curvature(at(j - 1), at(j), at(j + 1))
            } else {
                0.0
            }
        };
        let kappas: Vec<f64> = (0..n).map(kappa_at).collect();
        let mut cumulative = Vec::with_capacity(segs + 1);
        cumulative.push(0.0);
        let mut s = 0.0;
        for i in 0..segs {
            let j = (i + 1) % n;
            let chord = (vertices[j] - vertices[i]).norm();
            if chord == 0.0 {
                return Err(Error::InvalidArgument(format!("repeated vertex at {i}")));
            }
            let kappa = 0.5 * (kappas[i] + kappas[j]);
            s += arc_from_chord(chord, kappa);
            cumulative.push(s);
        }
        Ok(Self { vertices, closed, cumulative })
    }

    /// Builds a curve with caller-supplied arc lengths (one per vertex, plus
    /// the closing total for closed curves).
    pub fn with_arclength(vertices: Vec<Vec3>, closed: bool, mut cumulative: Vec<f64>) -> Result<Self> {
        let n = vertices.len();
        if closed && cumulative.len() == n {
            let total = cumulative[n - 1] + (vertices[0] - vertices[n - 1]).norm();
            cumulative.push(total);
        }
        let expected = if closed { n + 1 } else { n };
        if n < 2 || cumulative.len() != expected {
            return Err(Error::InvalidArgument("arc length table does not match vertices".into()));
        }
        if cumulative.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("arc lengths must increase strictly".into()));
        }
        Ok(Self { vertices, closed, cumulative })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Raw polygon length without the curvature correction.
    pub fn chord_length(&self) -> f64 {
        self.segments().map(|(a, b, _)| (b - a).norm()).sum()
    }

    /// `(start, end, arc length)` for every segment.
    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3, f64)> + '_ {
        let n = self.vertices.len();
        let segs = if self.closed { n } else { n - 1 };
        (0..segs).map(move |i| {
            let j = (i + 1) % n;
            (self.vertices[i], self.vertices[j], self.cumulative[i + 1] - self.cumulative[i])
        })
    }

    /// Position at arc length `s` by linear interpolation (wrapping on
    /// closed curves).
    pub fn point_at(&self, s: f64) -> Vec3 {
        let total = self.length();
        let s = if self.closed { s.rem_euclid(total) } else { s.clamp(0.0, total) };
        let k = match self.cumulative.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(k) => k.min(self.cumulative.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.cumulative.len() - 2),
        };
        let n = self.vertices.len();
        let (a, b) = (self.vertices[k], self.vertices[(k + 1) % n]);
        let t = (s - self.cumulative[k]) / (self.cumulative[k + 1] - self.cumulative[k]);
        a + (b - a) * t
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let total = self.length();
        let mut cumulative: Vec<f64>;
        if self.closed {
            vertices[1..].reverse();
            cumulative = vec![0.0];
            let c = &self.cumulative;
            let n = vertices.len();
            for i in 1..=n {
                cumulative.push(total - c[n - i]);
            }
        } else {
            vertices.reverse();
            cumulative = self.cumulative.iter().rev().map(|c| total - c).collect();
        }
        Self { vertices, closed: self.closed, cumulative }
    }

    /// Derivative with respect to arc length at vertex `i`, from the
    /// degree-4 interpolant through five vertices (centered where possible,
    /// one-sided at the ends of open curves).
    fn derivative_at(&self, i: usize) -> Vec3 {
        let n = self.vertices.len();
        let width = 5.min(n);
        let (idx, params): (Vec<usize>, Vec<f64>) = if self.closed {
            let half = (width / 2) as isize;
            let total = self.length();
            (-half..=(width as isize - 1 - half))
                .map(|o| {
                    let raw = i as isize + o;
                    let k = raw.rem_euclid(n as isize) as usize;
                    let wraps = raw.div_euclid(n as isize) as f64;
                    (k, self.cumulative[k] + wraps * total)
                })
                .unzip()
        } else {
            let lo = i.saturating_sub(width / 2).min(n - width);
            (lo..lo + width).map(|k| (k, self.cumulative[k])).unzip()
        };
        let s0 = self.cumulative[i];
        let mut d = Vec3::zeros();
        for (a, &ka) in idx.iter().enumerate() {
            // derivative of the Lagrange basis polynomial L_a at s0
            let mut w = 0.0;
            for b in 0..idx.len() {
                if b == a {
                    continue;
                }
                let mut term = 1.0 / (params[a] - params[b]);
                for c in 0..idx.len() {
                    if c != a && c != b {
                        term *= (s0 - params[c]) / (params[a] - params[c]);
                    }
                }
                w += term;
            }
            d += self.vertices[ka] * w;
        }
        d
    }

    /// Unit tangent at vertex `i`, projected to the surface tangent plane.
    pub fn tangent_at(&self, surface: &EllipsoidParams, i: usize) -> Vec3 {
        let x = self.vertices[i];
        surface.project_tangent(&x, &self.derivative_at(i)).normalize()
    }

    /// Unit tangent pointing into the curve from its first vertex.
    pub fn start_tangent(&self, surface: &EllipsoidParams) -> Vec3 {
        self.tangent_at(surface, 0)
    }

    /// Unit tangent pointing into the curve from its last vertex.
    pub fn end_tangent(&self, surface: &EllipsoidParams) -> Vec3 {
        -self.tangent_at(surface, self.vertices.len() - 1)
    }

    /// Max quadric residual over the vertices.
    pub fn surface_residual(&self, surface: &EllipsoidParams) -> f64 {
        self.vertices.iter().map(|x| surface.quadric(x).abs()).fold(0.0, f64::max)
    }

    /// Re-shoots the geodesic from vertex `i` along the local tangent and
    /// returns the largest deviation from the vertices over `span` of arc
    /// (clamped to the curve for open curves).
    pub fn geodesic_deviation(&self, surface: &EllipsoidParams, i: usize, span: f64) -> f64 {
        let n = self.vertices.len();
        let mut x = self.vertices[i];
        let mut v = self.tangent_at(surface, i);
        let mut worst: f64 = 0.0;
        let mut travelled = 0.0;
        let mut k = i;
        while travelled < span {
            if !self.closed && k + 1 >= n {
                break;
            }
            let next = (k + 1) % n;
            let ds = if next == 0 && self.closed {
                self.length() - self.cumulative[k]
            } else {
                self.cumulative[k + 1] - self.cumulative[k]
            };
            let sub = ((ds / 0.005).ceil() as usize).max(1);
            (x, v) = surface.advance(&x, &v, ds, sub);
            worst = worst.max((x - self.vertices[next]).norm());
            travelled += ds;
            k = next;
        }
        worst
    }
}

/// Mod-2 one-cycle: a collection of closed curves.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Cycle1 {
    curves: Vec<PolyCurve>,
}

impl Cycle1 {
    pub fn new(curves: Vec<PolyCurve>) -> Result<Self> {
        if curves.iter().any(|c| !c.is_closed()) {
            return Err(Error::InvalidArgument("cycle members must be closed".into()));
        }
        Ok(Self { curves })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn curves(&self) -> &[PolyCurve] {
        &self.curves
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn into_varifold(self) -> Varifold1 {
        Varifold1 { pieces: self.curves.into_iter().map(|c| (c, 1)).collect() }
    }
}

/// Integral 1-varifold: curves with positive integer multiplicities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Varifold1 {
    pieces: Vec<(PolyCurve, u32)>,
}

impl Varifold1 {
    pub fn new(pieces: Vec<(PolyCurve, u32)>) -> Result<Self> {
        if pieces.iter().any(|(_, m)| *m == 0) {
            return Err(Error::InvalidArgument("multiplicities must be positive".into()));
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[(PolyCurve, u32)] {
        &self.pieces
    }
}

pub trait Mass {
    fn mass(&self) -> f64;
}

impl Mass for PolyCurve {
    fn mass(&self) -> f64 {
        self.length()
    }
}

impl Mass for Cycle1 {
    fn mass(&self) -> f64 {
        self.curves.iter().map(PolyCurve::length).sum()
    }
}

impl Mass for Varifold1 {
    fn mass(&self) -> f64 {
        self.pieces.iter().map(|(c, m)| *m as f64 * c.length()).sum()
    }
}

/// Length of the part of `curve` within distance `r` of `center`.
///
/// Segments straddling the boundary are split by bisection; a segment whose
/// ends are both outside is probed at its midpoint so that short passes
/// through the ball are not lost.
pub fn curve_ball_mass<D: Fn(&Vec3) -> f64>(curve: &PolyCurve, dist: &D, r: f64) -> f64 {
    let mut total = 0.0;
    let mut d_prev = None;
    for (a, b, len) in curve.segments() {
        let da = d_prev.unwrap_or_else(|| dist(&a));
        let db = dist(&b);
        d_prev = Some(db);
        total += len * inside_fraction(&a, &b, da, db, dist, r, 0);
    }
    total
}

fn inside_fraction<D: Fn(&Vec3) -> f64>(
    a: &Vec3,
    b: &Vec3,
    da: f64,
    db: f64,
    dist: &D,
    r: f64,
    depth: u32,
) -> f64 {
    let (ia, ib) = (da <= r, db <= r);
    if ia && ib {
        return 1.0;
    }
    if ia != ib {
        let (mut lo, mut hi) = (0.0f64, 1.0f64); // lo inside-side param
        let flip = !ia;
        if flip {
            (lo, hi) = (1.0, 0.0);
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let p = a + (b - a) * mid;
            if dist(&p) <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        return if flip { 1.0 - t } else { t };
    }
    if depth >= 3 {
        return 0.0;
    }
    let m = a + (b - a) * 0.5;
    let dm = dist(&m);
    if dm > r && depth > 0 {
        return 0.0;
    }
    0.5 * inside_fraction(a, &m, da, dm, dist, r, depth + 1)
        + 0.5 * inside_fraction(&m, b, dm, db, dist, r, depth + 1)
}

/// Mass of a cycle within geodesic distance `r` of `center`.
pub fn ball_mass(cycle: &Cycle1, surface: &EllipsoidParams, center: &Vec3, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!("radius {r} outside (0, π)")));
    }
    let dist = |x: &Vec3| surface.distance(center, x);
    Ok(cycle.curves().iter().map(|c| curve_ball_mass(c, &dist, r)).sum())
}

pub fn varifold_ball_mass(v: &Varifold1, surface: &EllipsoidParams, center: &Vec3, r: f64) -> f64 {
    let dist = |x: &Vec3| surface.distance(center, x);
    v.pieces().iter().map(|(c, m)| *m as f64 * curve_ball_mass(c, &dist, r)).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    /// Extrapolated `r → 0` value.
    pub value: f64,
    /// `(r, ‖V‖B(p,r) / 2r)` at every requested scale.
    pub ratios: Vec<(f64, f64)>,
    /// Max minus min of the ratios.
    pub spread: f64,
    pub converged: bool,
}

/// 1-density of `v` at `p`: mass ratios at decreasing scales, extrapolated
/// linearly in `r` through the two smallest scales.
pub fn varifold_density(
    v: &Varifold1,
    surface: &EllipsoidParams,
    p: &Vec3,
    scales: &[f64],
) -> Result<DensityEstimate> {
    if scales.len() < 2 || scales.windows(2).any(|w| w[1] >= w[0]) || scales[0] >= std::f64::consts::PI {
        return Err(Error::InvalidArgument("scales must be a decreasing list of length ≥ 2".into()));
    }
    let ratios: Vec<(f64, f64)> = scales
        .iter()
        .map(|&r| (r, varifold_ball_mass(v, surface, p, r) / (2.0 * r)))
        .collect();
    Ok(extrapolate(ratios))
}

pub(crate) fn extrapolate(ratios: Vec<(f64, f64)>) -> DensityEstimate {
    let k = ratios.len();
    let (r1, q1) = ratios[k - 1];
    let (r2, q2) = ratios[k - 2];
    let value = (r2 * q1 - r1 * q2) / (r2 - r1);
    let hi = ratios.iter().map(|x| x.1).fold(f64::MIN, f64::max);
    let lo = ratios.iter().map(|x| x.1).fold(f64::MAX, f64::min);
    let spread = hi - lo;
    DensityEstimate { value, ratios, spread, converged: spread <= tolerances::DENSITY_SPREAD }
}

/// Closed circle `{x · axis = height} ∩ S²` with `n` vertices.
pub fn sphere_circle(axis: Vec3, height: f64, n: usize) -> Result<PolyCurve> {
    let axis = axis.normalize();
    let trial = if axis[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (trial - axis * axis.dot(&trial)).normalize();
    let e2 = axis.cross(&e1);
    let rho = (1.0 - height * height).sqrt();
    let vertices = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            axis * height + (e1 * t.cos() + e2 * t.sin()) * rho
        })
        .collect();
    PolyCurve::new(vertices, true)
}

/// Great-circle arc on the unit sphere from `a` in unit direction `dir`.
pub fn sphere_arc(a: Vec3, dir: Vec3, angle: f64, n: usize) -> Result<PolyCurve> {
    let vertices: Vec<Vec3> = (0..=n)
        .map(|k| {
            let t = angle * k as f64 / n as f64;
            a * t.cos() + dir * t.sin()
        })
        .collect();
    let arc = (0..=n).map(|k| angle * k as f64 / n as f64).collect();
    PolyCurve::with_arclength(vertices, false, arc)
}
