//! Geodesic networks and the junction calculus: balance residuals,
//! triple/regular/singular classification and junction densities.
//!
//! A segment that runs through a junction is stored as two segments ending
//! there, so every incident entry is a half-branch and the density at a
//! junction is always `Σθ/2`.

use serde::Serialize;

use crate::curve::{Mass, PolyCurve};
use crate::error::{Error, Result};
use crate::surface::{EllipsoidParams, SurfacePoint, Vec3};
use crate::tolerances;

/// Which end of a segment sits at a junction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum End {
    Start,
    Finish,
}

impl End {
    pub fn flag(self) -> i32 {
        match self {
            End::Start => 1,
            End::Finish => -1,
        }
    }

    pub fn from_flag(flag: i32) -> Result<Self> {
        match flag {
            1 => Ok(End::Start),
            -1 => Ok(End::Finish),
            _ => Err(Error::InvalidArgument(format!("end flag {flag} is not ±1"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Incident {
    pub segment: usize,
    /// Outgoing unit tangent at the junction.
    pub tangent: Vec3,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Junction {
    point: SurfacePoint,
    incident: Vec<Incident>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JunctionClass {
    Triple,
    Regular,
    Singular,
}

impl Junction {
    /// Validates `m ≥ 3` and that every tangent is unit and tangent to the
    /// surface at `point`.
    pub fn new(surface: &EllipsoidParams, point: SurfacePoint, incident: Vec<Incident>) -> Result<Self> {
        if incident.len() < 3 {
            return Err(Error::InvalidArgument(format!("junction has {} segments, need ≥ 3", incident.len())));
        }
        let n = surface.unit_normal(&point.coords());
        for inc in &incident {
            if inc.multiplicity == 0 {
                return Err(Error::InvalidArgument("multiplicities must be positive".into()));
            }
            if (inc.tangent.norm() - 1.0).abs() > 1e-10 || inc.tangent.dot(&n).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "tangent of segment {} is not a unit tangent vector",
                    inc.segment
                )));
            }
        }
        Ok(Self { point, incident })
    }

    pub fn point(&self) -> Vec3 {
        self.point.coords()
    }

    pub fn incident(&self) -> &[Incident] {
        &self.incident
    }

    /// `Σθ/2` over the incident half-branches.
    pub fn density(&self) -> f64 {
        self.incident.iter().map(|i| i.multiplicity as f64).sum::<f64>() / 2.0
    }
}

/// `|Σ θ v|` over the incident tangents.
pub fn stationarity_residual(j: &Junction) -> f64 {
    j.incident
        .iter()
        .fold(Vec3::zeros(), |s, i| s + i.tangent * i.multiplicity as f64)
        .norm()
}

/// Triple when three multiplicity-one segments meet; regular when the
/// weighted tangents pair off into exact opposites; singular otherwise.
///
/// Pairing is greedy: the lowest unmatched segment id takes the lowest
/// unmatched partner whose weighted tangent cancels it within
/// [`tolerances::PAIRING`].
pub fn classify_junction(j: &Junction) -> JunctionClass {
    if j.incident.len() == 3 && j.incident.iter().all(|i| i.multiplicity == 1) {
        return JunctionClass::Triple;
    }
    let mut order: Vec<&Incident> = j.incident.iter().collect();
    order.sort_by_key(|i| i.segment);
    let weighted: Vec<Vec3> = order.iter().map(|i| i.tangent * i.multiplicity as f64).collect();
    let mut used = vec![false; order.len()];
    for a in 0..order.len() {
        if used[a] {
            continue;
        }
        used[a] = true;
        let partner = (a + 1..order.len()).find(|&b| !used[b] && (weighted[a] + weighted[b]).norm() <= tolerances::PAIRING);
        match partner {
            Some(b) => used[b] = true,
            None => return JunctionClass::Singular,
        }
    }
    JunctionClass::Regular
}

/// Region in which segment endpoints must be junctions: a geodesic ball,
/// or the whole surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Whole,
    Ball { center: Vec3, radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicNetwork {
    surface: EllipsoidParams,
    pieces: Vec<(PolyCurve, u32)>,
    junctions: Vec<Junction>,
    /// Segment ends attached to each junction, parallel to `junctions`.
    attachments: Vec<Vec<(usize, End)>>,
    region: Region,
}

/// Distance under which a segment end counts as sitting at a junction.
const ATTACH: f64 = 1e-8;

impl GeodesicNetwork {
    /// Assembles a network, reading each junction tangent off the attached
    /// segment end. Fails when an attached end is not at its junction or
    /// when an end inside `region` is left unattached.
    pub fn new(
        surface: EllipsoidParams,
        pieces: Vec<(PolyCurve, u32)>,
        junctions: Vec<(Vec3, Vec<(usize, End)>)>,
        region: Region,
    ) -> Result<Self> {
        if pieces.iter().any(|(_, m)| *m == 0) {
            return Err(Error::InvalidArgument("multiplicities must be positive".into()));
        }
        let mut built = Vec::with_capacity(junctions.len());
        let mut attachments = Vec::with_capacity(junctions.len());
        let mut attached = vec![[false; 2]; pieces.len()];
        for (p, ends) in junctions {
            let point = surface.project(&p)?;
            let mut incident = Vec::with_capacity(ends.len());
            for &(seg, end) in &ends {
                let (curve, mult) = pieces
                    .get(seg)
                    .ok_or_else(|| Error::InvalidArgument(format!("junction references missing segment {seg}")))?;
                if curve.is_closed() {
                    return Err(Error::InvalidArgument(format!("segment {seg} is closed and has no ends")));
                }
                let x = end_point(curve, end);
                if (x - point.coords()).norm() > ATTACH {
                    return Err(Error::InvalidArgument(format!("segment {seg} does not end at its junction")));
                }
                attached[seg][(end == End::Finish) as usize] = true;
                incident.push(Incident { segment: seg, tangent: end_tangent(&surface, curve, end), multiplicity: *mult });
            }
            built.push(Junction::new(&surface, point, incident)?);
            attachments.push(ends);
        }
        let net = Self { surface, pieces, junctions: built, attachments, region };
        for (seg, (curve, _)) in net.pieces.iter().enumerate() {
            if curve.is_closed() {
                continue;
            }
            for end in [End::Start, End::Finish] {
                if !attached[seg][(end == End::Finish) as usize] && net.in_region(&end_point(curve, end)) {
                    return Err(Error::InvalidArgument(format!("segment {seg} has a free end inside the region")));
                }
            }
        }
        Ok(net)
    }

    fn in_region(&self, x: &Vec3) -> bool {
        match self.region {
            Region::Whole => true,
            Region::Ball { center, radius } => self.surface.distance(&center, x) < radius - 1e-9,
        }
    }

    pub fn surface(&self) -> &EllipsoidParams {
        &self.surface
    }

    pub fn pieces(&self) -> &[(PolyCurve, u32)] {
        &self.pieces
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn attachments(&self) -> &[Vec<(usize, End)>] {
        &self.attachments
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// Largest density anywhere: junction densities and the multiplicity of
    /// interior points.
    pub fn max_density(&self) -> f64 {
        let interior = self.pieces.iter().map(|(_, m)| *m as f64).fold(0.0, f64::max);
        self.junctions.iter().map(Junction::density).fold(interior, f64::max)
    }
}

impl Mass for GeodesicNetwork {
    fn mass(&self) -> f64 {
        self.pieces.iter().map(|(c, m)| *m as f64 * c.length()).sum()
    }
}

fn end_point(curve: &PolyCurve, end: End) -> Vec3 {
    match end {
        End::Start => curve.vertices()[0],
        End::Finish => curve.vertices()[curve.len() - 1],
    }
}

/// Outgoing tangent of a segment at one of its ends. On the round sphere the
/// segment is a great-circle arc, so the tangent is read exactly from the
/// end vertex and its neighbour; elsewhere it comes from the curve's
/// interpolating derivative.
fn end_tangent(surface: &EllipsoidParams, curve: &PolyCurve, end: End) -> Vec3 {
    let v = curve.vertices();
    if surface.is_round() {
        let (x, y) = match end {
            End::Start => (v[0], v[1]),
            End::Finish => (v[v.len() - 1], v[v.len() - 2]),
        };
        let x = x.normalize();
        return (y - x * x.dot(&y)).normalize();
    }
    match end {
        End::Start => curve.start_tangent(surface),
        End::Finish => curve.end_tangent(surface),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JunctionIssue {
    pub junction: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentIssue {
    pub segment: usize,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityReport {
    pub stationary: bool,
    pub residuals: Vec<f64>,
    pub bad_junctions: Vec<JunctionIssue>,
    pub bad_segments: Vec<SegmentIssue>,
}

/// Re-shooting deviation of a segment from its first vertex over its whole
/// length (one period for closed segments).
pub fn segment_deviation(surface: &EllipsoidParams, curve: &PolyCurve) -> f64 {
    curve.geodesic_deviation(surface, 0, curve.length() - 1e-12)
}

/// Every junction balances within `tol` and every segment passes the
/// re-shooting geodesic test.
pub fn network_is_stationary(net: &GeodesicNetwork, tol: f64) -> StationarityReport {
    let residuals: Vec<f64> = net.junctions.iter().map(stationarity_residual).collect();
    let bad_junctions: Vec<JunctionIssue> = residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > tol)
        .map(|(junction, &residual)| JunctionIssue { junction, residual })
        .collect();
    let bad_segments: Vec<SegmentIssue> = net
        .pieces
        .iter()
        .enumerate()
        .map(|(segment, (c, _))| SegmentIssue { segment, deviation: segment_deviation(&net.surface, c) })
        .filter(|s| s.deviation > tolerances::GEODESIC_TEST)
        .collect();
    StationarityReport {
        stationary: bad_junctions.is_empty() && bad_segments.is_empty(),
        residuals,
        bad_junctions,
        bad_segments,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub integral: bool,
    pub densities: Vec<f64>,
    /// Junctions whose density is not a positive integer; such a network
    /// cannot be ℤ₂-almost minimising.
    pub violating: Vec<usize>,
}

pub fn integer_density_filter(net: &GeodesicNetwork) -> DensityReport {
    let densities: Vec<f64> = net.junctions.iter().map(Junction::density).collect();
    let violating: Vec<usize> = densities
        .iter()
        .enumerate()
        .filter(|(_, d)| !is_positive_integer(**d))
        .map(|(i, _)| i)
        .collect();
    DensityReport { integral: violating.is_empty(), densities, violating }
}

fn is_positive_integer(d: f64) -> bool {
    d >= 1.0 - tolerances::INTEGER_DENSITY && (d - d.round()).abs() <= tolerances::INTEGER_DENSITY
}

/// On the round sphere: total mass `< 2πd` must force every density `< d`.
/// Returns `false` only when that implication fails.
pub fn density_bound_check(net: &GeodesicNetwork, d: u32) -> Result<bool> {
    net.surface.require_round()?;
    if d == 0 {
        return Err(Error::InvalidArgument("density bound must be positive".into()));
    }
    if net.mass() >= std::f64::consts::TAU * d as f64 {
        return Ok(true);
    }
    Ok(net.max_density() < d as f64)
}

/// Builders for the standard networks on the round sphere and on
/// ellipsoids.
pub mod fixtures {
    use std::f64::consts::{PI, TAU};

    use super::*;
    use crate::curve::sphere_arc;
    use crate::surface::principal_point;

    /// Two great circles through `±z`, at longitudes `0` and `angle`, cut
    /// into four half-circles meeting at the poles.
    pub fn crossing_circles(angle: f64, n: usize) -> Result<GeodesicNetwork> {
        meridian_network(&[(0.0, 1), (angle, 1), (PI, 1), (PI + angle, 1)], n)
    }

    /// Half-meridians from the north to the south pole at the given
    /// longitudes and multiplicities, joined at both poles.
    pub fn meridian_network(meridians: &[(f64, u32)], n: usize) -> Result<GeodesicNetwork> {
        let pieces = meridians
            .iter()
            .map(|&(lon, m)| Ok((sphere_arc(Vec3::z(), Vec3::new(lon.cos(), lon.sin(), 0.0), PI, n)?, m)))
            .collect::<Result<Vec<_>>>()?;
        let k = meridians.len();
        let north = (0..k).map(|s| (s, End::Start)).collect();
        let south = (0..k).map(|s| (s, End::Finish)).collect();
        GeodesicNetwork::new(
            EllipsoidParams::sphere(),
            pieces,
            vec![(Vec3::z(), north), (-Vec3::z(), south)],
            Region::Whole,
        )
    }

    /// Three meridians at 120° meeting at both poles.
    pub fn y_network(n: usize) -> Result<GeodesicNetwork> {
        meridian_network(&[(0.0, 1), (TAU / 3.0, 1), (2.0 * TAU / 3.0, 1)], n)
    }

    /// The Y-network with the third meridian replaced by an arc that
    /// wanders in longitude and so is not a geodesic.
    pub fn bent_y_network(n: usize) -> Result<GeodesicNetwork> {
        let mut pieces: Vec<(PolyCurve, u32)> = y_network(n)?.pieces[..2].to_vec();
        let vertices = (0..=n)
            .map(|k| {
                let t = PI * k as f64 / n as f64;
                let lon = 2.0 * TAU / 3.0 + 0.3 * t.sin().powi(2) * (2.0 * t).sin();
                Vec3::new(t.sin() * lon.cos(), t.sin() * lon.sin(), t.cos())
            })
            .collect();
        pieces.push((PolyCurve::new(vertices, false)?, 1));
        let north = (0..3).map(|s| (s, End::Start)).collect();
        let south = (0..3).map(|s| (s, End::Finish)).collect();
        GeodesicNetwork::new(
            EllipsoidParams::sphere(),
            pieces,
            vec![(Vec3::z(), north), (-Vec3::z(), south)],
            Region::Whole,
        )
    }

    /// Star of great-circle arcs of length `len` leaving the north pole at
    /// the given directions (angles in the `xy`-plane) and multiplicities.
    /// The far ends lie on the boundary of the working ball.
    pub fn star(directions: &[(f64, u32)], len: f64, n: usize) -> Result<GeodesicNetwork> {
        let pieces = directions
            .iter()
            .map(|&(ang, m)| Ok((sphere_arc(Vec3::z(), Vec3::new(ang.cos(), ang.sin(), 0.0), len, n)?, m)))
            .collect::<Result<Vec<_>>>()?;
        let ends = (0..directions.len()).map(|s| (s, End::Start)).collect();
        GeodesicNetwork::new(
            EllipsoidParams::sphere(),
            pieces,
            vec![(Vec3::z(), ends)],
            Region::Ball { center: Vec3::z(), radius: len },
        )
    }

    /// The principal ellipses `{x_i = 0}` and `{x_j = 0}` cut at their two
    /// common points into four arcs.
    pub fn crossing_principal(surface: EllipsoidParams, i: usize, j: usize, n: usize) -> Result<GeodesicNetwork> {
        surface.require_near_round()?;
        if !(1..=3).contains(&i) || !(1..=3).contains(&j) || i == j {
            return Err(Error::InvalidArgument(format!("bad principal pair ({i}, {j})")));
        }
        // the shared axis is the coordinate k ∉ {i, j}
        let k = 6 - i - j;
        let mut pieces = Vec::new();
        let mut starts = Vec::new();
        for e in [i, j] {
            let base = crossing_angle(e, k);
            for half in 0..2 {
                let t0 = base + PI * half as f64;
                let vertices = (0..=n).map(|m| principal_point(&surface, e, t0 + PI * m as f64 / n as f64)).collect();
                starts.push(pieces.len());
                pieces.push((PolyCurve::new(vertices, false)?, 1));
            }
        }
        let axis = surface.semi_axes()[k - 1];
        let mut p = Vec3::zeros();
        p[k - 1] = axis;
        let top: Vec<(usize, End)> = vec![(0, End::Start), (1, End::Finish), (2, End::Start), (3, End::Finish)];
        let bottom: Vec<(usize, End)> = vec![(0, End::Finish), (1, End::Start), (2, End::Finish), (3, End::Start)];
        GeodesicNetwork::new(surface, pieces, vec![(p, top), (-p, bottom)], Region::Whole)
    }

    /// Plane angle of the ellipse `{x_e = 0}` at which it meets the positive
    /// `x_k` axis.
    fn crossing_angle(e: usize, k: usize) -> f64 {
        let (first, _) = match e {
            1 => (2, 3),
            2 => (1, 3),
            _ => (1, 2),
        };
        if k == first {
            0.0
        } else {
            PI / 2.0
        }
    }

    /// A fixture with its expected verdicts.
    #[derive(Clone, Debug)]
    pub struct Labeled {
        pub name: &'static str,
        pub network: GeodesicNetwork,
        pub classes: Vec<JunctionClass>,
        pub integral: bool,
        pub stationary: bool,
    }

    /// Twelve networks labeled by hand: crossings, Y-networks, weighted
    /// four-valent balances, stars and closed curves.
    pub fn labeled(n: usize) -> Result<Vec<Labeled>> {
        use JunctionClass::{Regular, Singular, Triple};
        let deg = |d: f64| d.to_radians();
        // 4(1,0) + 4(0,1) + (−1,0) + 5(−3/5,−4/5) = 0
        let weighted = (-4.0f64).atan2(-3.0);
        let e = EllipsoidParams::new(0.95, 1.0, 1.05)?;
        let case = |name, network, classes: &[JunctionClass], integral, stationary| Labeled {
            name,
            network,
            classes: classes.to_vec(),
            integral,
            stationary,
        };
        Ok(vec![
            case("orthogonal-crossing", crossing_circles(PI / 2.0, n)?, &[Regular, Regular], true, true),
            case("oblique-crossing", crossing_circles(PI / 3.0, n)?, &[Regular, Regular], true, true),
            case("y-network", y_network(n)?, &[Triple, Triple], false, true),
            case("bent-y", bent_y_network(n)?, &[Triple, Triple], false, false),
            case(
                "weighted-4-valent",
                meridian_network(&[(0.0, 4), (PI / 2.0, 4), (PI, 1), (weighted, 5)], n)?,
                &[Singular, Singular],
                true,
                true,
            ),
            case(
                "unbalanced-4-valent",
                meridian_network(&[(0.0, 2), (PI / 2.0, 1), (PI, 1), (3.0 * PI / 2.0, 1)], n)?,
                &[Singular, Singular],
                false,
                false,
            ),
            case("double-y-star", star(&[(0.0, 2), (TAU / 3.0, 2), (2.0 * TAU / 3.0, 2)], 1.0, n)?, &[Singular], true, true),
            case("skewed-y-star", star(&[(0.0, 1), (deg(115.0), 1), (deg(240.0), 1)], 1.0, n)?, &[Triple], false, false),
            case("six-ray-star", star(&(0..6).map(|k| (k as f64 * PI / 3.0, 1)).collect::<Vec<_>>(), 1.0, n)?, &[Regular], true, true),
            case(
                "weighted-cross-star",
                star(&[(0.0, 1), (PI / 2.0, 2), (PI, 1), (3.0 * PI / 2.0, 2)], 1.0, n)?,
                &[Regular],
                true,
                true,
            ),
            case("double-great-circle", great_circle(2, n)?, &[], true, true),
            case("principal-crossing", crossing_principal(e, 1, 2, n)?, &[Regular, Regular], true, true),
        ])
    }

    /// A closed great circle (no junctions) with multiplicity `m`.
    pub fn great_circle(m: u32, n: usize) -> Result<GeodesicNetwork> {
        let c = crate::curve::sphere_circle(Vec3::z(), 0.0, n)?;
        GeodesicNetwork::new(EllipsoidParams::sphere(), vec![(c, m)], vec![], Region::Whole)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn planar_junction(dirs: &[(f64, u32)]) -> Junction {
        let s = EllipsoidParams::sphere();
        let incident = dirs
            .iter()
            .enumerate()
            .map(|(k, &(deg, m))| {
                let a = deg.to_radians();
                Incident { segment: k, tangent: Vec3::new(a.cos(), a.sin(), 0.0), multiplicity: m }
            })
            .collect();
        Junction::new(&s, SurfacePoint::new(&s, Vec3::z()).unwrap(), incident).unwrap()
    }

    #[test]
    fn residual_examples() {
        assert!(stationarity_residual(&planar_junction(&[(0.0, 1), (90.0, 1), (180.0, 1), (270.0, 1)])) < 1e-12);
        assert!(stationarity_residual(&planar_junction(&[(0.0, 1), (120.0, 1), (240.0, 1)])) < 1e-12);
        let r = stationarity_residual(&planar_junction(&[(0.0, 1), (115.0, 1), (240.0, 1)]));
        // independent sum: (1 + cos115 + cos240, sin115 + sin240)
        let (c, s) = (1.0 + (115f64).to_radians().cos() - 0.5, (115f64).to_radians().sin() - 0.75f64.sqrt());
        assert!((r - c.hypot(s)).abs() < 1e-12 && r > 0.05);
    }

    #[test]
    fn junction_validation() {
        let s = EllipsoidParams::sphere();
        let p = SurfacePoint::new(&s, Vec3::z()).unwrap();
        let two = vec![
            Incident { segment: 0, tangent: Vec3::x(), multiplicity: 1 },
            Incident { segment: 1, tangent: -Vec3::x(), multiplicity: 1 },
        ];
        assert!(Junction::new(&s, p, two.clone()).is_err());
        let mut three = two;
        three.push(Incident { segment: 2, tangent: Vec3::z(), multiplicity: 1 });
        assert!(Junction::new(&s, p, three).is_err());
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_junction(&planar_junction(&[(0.0, 1), (90.0, 1), (180.0, 1), (270.0, 1)])), JunctionClass::Regular);
        assert_eq!(classify_junction(&planar_junction(&[(0.0, 1), (120.0, 1), (240.0, 1)])), JunctionClass::Triple);
        let dir = (-4.0f64).atan2(-3.0).to_degrees().rem_euclid(360.0);
        let j = planar_junction(&[(0.0, 4), (90.0, 4), (180.0, 1), (dir, 5)]);
        assert!(stationarity_residual(&j) < 1e-12);
        assert_eq!(classify_junction(&j), JunctionClass::Singular);
    }

    #[test]
    fn networks_on_sphere() {
        let cross = crossing_circles(FRAC_PI_2, 256).unwrap();
        let rep = network_is_stationary(&cross, 1e-6);
        assert!(rep.stationary, "{rep:?}");
        assert!(rep.residuals.iter().all(|r| *r < 1e-12));
        assert!(integer_density_filter(&cross).integral);
        assert!((cross.mass() - 2.0 * TAU).abs() < 1e-9);
        assert!(density_bound_check(&cross, 3).unwrap());

        let y = y_network(256).unwrap();
        assert!(network_is_stationary(&y, 1e-6).stationary);
        let d = integer_density_filter(&y);
        assert!(!d.integral && d.violating == vec![0, 1]);
        assert!((d.densities[0] - 1.5).abs() < 1e-15);
        assert!((y.mass() - 3.0 * PI).abs() < 1e-9);
        assert!(density_bound_check(&y, 2).unwrap());

        let bent = bent_y_network(256).unwrap();
        let rep = network_is_stationary(&bent, 1e-6);
        assert!(!rep.stationary);
        assert_eq!(rep.bad_segments.iter().map(|s| s.segment).collect::<Vec<_>>(), vec![2]);

        let double = great_circle(2, 256).unwrap();
        assert!(integer_density_filter(&double).integral);
        assert_eq!(double.max_density(), 2.0);
        assert!(density_bound_check(&great_circle(1, 256).unwrap(), 2).unwrap());
    }

    #[test]
    fn crossing_principal_ellipses() {
        let e = EllipsoidParams::new(0.95, 1.0, 1.05).unwrap();
        let net = crossing_principal(e, 1, 2, 512).unwrap();
        let rep = network_is_stationary(&net, 1e-6);
        assert!(rep.stationary, "{rep:?}");
        for j in net.junctions() {
            assert_eq!(classify_junction(j), JunctionClass::Regular);
        }
        assert!(density_bound_check(&net, 3).is_err());
    }

    #[test]
    fn labeled_fixtures_agree() {
        let cases = labeled(256).unwrap();
        assert_eq!(cases.len(), 12);
        for c in cases {
            let classes: Vec<JunctionClass> = c.network.junctions().iter().map(classify_junction).collect();
            assert_eq!(classes, c.classes, "{}", c.name);
            assert_eq!(integer_density_filter(&c.network).integral, c.integral, "{}", c.name);
            let rep = network_is_stationary(&c.network, 1e-6);
            assert_eq!(rep.stationary, c.stationary, "{}", c.name);
            if c.stationary {
                assert!(rep.residuals.iter().all(|r| *r < 1e-12), "{} {:?}", c.name, rep.residuals);
            }
        }
    }

    #[test]
    fn free_end_inside_region_is_rejected() {
        let arc = crate::curve::sphere_arc(Vec3::z(), Vec3::x(), 1.0, 32).unwrap();
        let r = GeodesicNetwork::new(EllipsoidParams::sphere(), vec![(arc, 1)], vec![], Region::Whole);
        assert!(r.is_err());
    }
}
