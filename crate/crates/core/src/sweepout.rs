//! Polynomial sweepouts: the families `F_k([q]) = ∂{q ≤ 0}` over the span of
//! `1, p_1, …, p_k`, their mass by arc-length tracing and by Crofton
//! sampling, sup-mass scans and concentration profiles.

use rayon::prelude::*;
use serde::Serialize;

use crate::contour::{Contour, ContourGrid};
use crate::curve::{ball_mass, Mass};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::rng;
use crate::surface::{EllipsoidParams, Vec3};
use crate::tolerances;
use crate::trig::{Isolation, TrigPoly};

/// `1, x1, x2, x3, x1², x1x2, x1x3, x2x3, x3²`. The square `x2²` is left
/// out: on the sphere it is `1 - x1² - x3²`.
pub const STANDARD_BASIS: [Monomial; 9] = [
    Monomial([0, 0, 0]),
    Monomial([1, 0, 0]),
    Monomial([0, 1, 0]),
    Monomial([0, 0, 1]),
    Monomial([2, 0, 0]),
    Monomial([1, 1, 0]),
    Monomial([1, 0, 1]),
    Monomial([0, 1, 1]),
    Monomial([0, 0, 2]),
];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepoutFamily {
    basis: Vec<Monomial>,
    surface: EllipsoidParams,
}

impl SweepoutFamily {
    /// `F_k` for `k = 1..=8`.
    pub fn standard(k: usize, surface: EllipsoidParams) -> Result<Self> {
        if !(1..=8).contains(&k) {
            return Err(Error::InvalidArgument(format!("family index {k} not in 1..=8")));
        }
        Ok(Self { basis: STANDARD_BASIS[..=k].to_vec(), surface })
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn surface(&self) -> &EllipsoidParams {
        &self.surface
    }

    /// Number of parameters `k` (the family is parametrized by ℝPᵏ).
    pub fn params(&self) -> usize {
        self.basis.len() - 1
    }

    pub fn degree(&self) -> u32 {
        self.basis.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn polynomial(&self, q: &ProjectiveParam) -> Polynomial {
        Polynomial::combine(&self.basis, q.coefficients())
    }
}

/// Representatives of polynomials of degree ≤ `d` restricted to the sphere:
/// monomials `x1^a x2^b x3^c` with `a + b + c ≤ d` and `b ≤ 1`, which
/// number `(d+1)²`. For `d ≤ 2` the order is that of [`STANDARD_BASIS`].
pub fn harmonic_family(d: u32) -> Result<SweepoutFamily> {
    if !(1..=4).contains(&d) {
        return Err(Error::InvalidArgument(format!("degree {d} not in 1..=4")));
    }
    let mut basis: Vec<Monomial> = STANDARD_BASIS.iter().copied().filter(|m| m.degree() <= d).collect();
    if d == 1 {
        basis.truncate(4);
    }
    for deg in 3..=d {
        for a in (0..=deg).rev() {
            for b in 0..=1u32.min(deg - a) {
                let c = deg - a - b;
                basis.push(Monomial([a as u8, b as u8, c as u8]));
            }
        }
    }
    Ok(SweepoutFamily { basis, surface: EllipsoidParams::sphere() })
}

/// A nonzero coefficient vector up to positive scale, normalized to unit
/// length with its first nonzero entry positive (the sign flip leaves the
/// mod-2 boundary unchanged).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectiveParam(Vec<f64>);

impl ProjectiveParam {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidArgument("coefficient vector must be nonzero".into()));
        }
        let sign = c.iter().find(|x| **x != 0.0).map_or(1.0, |x| x.signum());
        Ok(Self(c.into_iter().map(|x| sign * x / n).collect()))
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    /// The same polynomial as a parameter of a larger prefix family.
    pub fn padded(&self, dim: usize) -> Self {
        let mut c = self.0.clone();
        c.resize(dim.max(c.len()), 0.0);
        Self(c)
    }

    /// Distance between projective classes.
    pub fn distance(&self, other: &Self) -> f64 {
        let d: f64 = self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum();
        let s: f64 = self.0.iter().zip(&other.0).map(|(a, b)| (a + b) * (a + b)).sum();
        d.min(s).sqrt()
    }
}

/// Contours one family at one grid level, with the basis evaluated once at
/// every grid point.
pub struct SweepoutEvaluator {
    family: SweepoutFamily,
    grid: ContourGrid,
    table: Vec<f64>,
}

impl SweepoutEvaluator {
    pub fn new(family: SweepoutFamily, level: u32) -> Result<Self> {
        if level < 4 {
            return Err(Error::InvalidArgument(format!("grid level {level} below 4")));
        }
        let grid = ContourGrid::new(family.surface, level);
        let table = grid
            .points
            .iter()
            .flat_map(|x| family.basis.iter().map(move |m| m.eval(x)))
            .collect();
        Ok(Self { family, grid, table })
    }

    pub fn family(&self) -> &SweepoutFamily {
        &self.family
    }

    pub fn contour(&self, q: &ProjectiveParam) -> Contour {
        let c = q.coefficients();
        let nb = c.len();
        let values: Vec<f64> = self
            .table
            .chunks_exact(nb)
            .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
            .collect();
        let poly = self.family.polynomial(q);
        self.grid.contour(&values, |x| poly.eval(x))
    }

    pub fn mass(&self, q: &ProjectiveParam) -> f64 {
        self.contour(q).cycle.mass()
    }

    /// Mass of a contour the grid resolves; `None` when two branches of the
    /// zero set come closer than the grid spacing.
    pub fn resolved_mass(&self, q: &ProjectiveParam) -> Option<f64> {
        let c = self.contour(q);
        c.resolved().then(|| c.cycle.mass())
    }
}

/// Traced zero set of `q` for the family at grid `level`.
pub fn evaluate_cycle(family: &SweepoutFamily, q: &ProjectiveParam, level: u32) -> Result<Contour> {
    if q.coefficients().len() != family.basis.len() {
        return Err(Error::InvalidArgument("parameter length does not match the family".into()));
    }
    Ok(SweepoutEvaluator::new(family.clone(), level)?.contour(q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CroftonEstimate {
    pub mass: f64,
    pub standard_error: f64,
    pub samples: usize,
    /// Samples dropped because root isolation hit its depth limit.
    pub discarded: usize,
    pub max_count: usize,
}

/// Length of the zero set of `poly` on the unit sphere from the Crofton
/// formula: `π` times the mean number of intersections with a great circle
/// whose pole is uniform on the sphere.
pub fn crofton_mass(poly: &Polynomial, samples: usize, seed: u64) -> Result<CroftonEstimate> {
    if samples < 10_000 {
        return Err(Error::InvalidArgument(format!("{samples} samples, need at least 10^4")));
    }
    let d = poly.degree().max(1) as usize;
    let blocks = samples.div_ceil(rng::BLOCK);
    let per_block: Vec<(Vec<usize>, usize)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = rng::BLOCK.min(samples - b * rng::BLOCK);
            let poles = rng::sphere_points(seed.wrapping_add(b as u64).wrapping_mul(0x2545_f491_4f6c_dd1d), count);
            let mut counts = Vec::with_capacity(count);
            let mut dropped = 0;
            for u in poles {
                match great_circle_roots(poly, &u, d).0 {
                    Isolation::Roots(n) => counts.push(n),
                    Isolation::Exhausted => dropped += 1,
                }
            }
            (counts, dropped)
        })
        .collect();
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut max_count = 0;
    let mut discarded = 0;
    for (counts, dropped) in per_block {
        discarded += dropped;
        for c in counts {
            n += 1;
            sum += c as f64;
            sum_sq += (c * c) as f64;
            max_count = max_count.max(c);
        }
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0);
    Ok(CroftonEstimate {
        mass: std::f64::consts::PI * mean,
        standard_error: std::f64::consts::PI * (var / n as f64).sqrt(),
        samples: n,
        discarded,
        max_count,
    })
}

/// Intersections of the zero set with the great circle of pole `u`.
pub fn great_circle_roots(poly: &Polynomial, u: &Vec3, degree: usize) -> (Isolation, Vec<Vec3>) {
    let trial = if u[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (trial - u * u.dot(&trial)).normalize();
    let e2 = u.cross(&e1);
    // The frame is built from a coordinate axis, so coordinate polynomials
    // vanish at fixed angles; the phase keeps those off the subdivision grid.
    const PHASE: f64 = 0.418_879_020_478_639_1;
    let at = |t: f64| e1 * (t + PHASE).cos() + e2 * (t + PHASE).sin();
    let tp = TrigPoly::interpolate(degree, |t| poly.eval(&at(t)));
    let (iso, roots) = tp.isolate_roots(50);
    (iso, roots.into_iter().map(at).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub sup_mass: f64,
    pub argmax: ProjectiveParam,
    /// Mass of the best global sample before refinement.
    pub best_sample: f64,
    pub evaluations: usize,
    pub low_confidence: bool,
}

/// Supremum of mass over ℝPᵏ.
///
/// `budget` uniform samples are drawn (counter-indexed, so a larger budget
/// extends the same sample sequence). Only contours the grid resolves are
/// scored: a band thinner than the grid traces as a zigzag longer than the
/// true zero set. Every running-record sample is then refined by a
/// coordinate pattern search of `max(16, budget/20)` evaluations. Records
/// of a longer sequence include those of any prefix and a longer search
/// extends the same path, so the estimate never decreases with the budget.
pub fn sup_mass_scan(family: &SweepoutFamily, level: u32, budget: usize, seed: u64) -> Result<ScanResult> {
    let eval = SweepoutEvaluator::new(family.clone(), level)?;
    sup_mass_scan_with(&eval, budget, seed)
}

pub fn sup_mass_scan_with(eval: &SweepoutEvaluator, budget: usize, seed: u64) -> Result<ScanResult> {
    sup_mass_scan_from(eval, &[], budget, seed)
}

/// As [`sup_mass_scan_with`], with `starts` placed ahead of the uniform
/// samples. The sequence still extends with the budget, so monotonicity is
/// kept.
pub fn sup_mass_scan_from(eval: &SweepoutEvaluator, starts: &[ProjectiveParam], budget: usize, seed: u64) -> Result<ScanResult> {
    if budget == 0 {
        return Err(Error::InvalidArgument("scan budget must be positive".into()));
    }
    let dim = eval.family().basis.len();
    if starts.iter().any(|q| q.coefficients().len() != dim) {
        return Err(Error::InvalidArgument("start parameter length does not match the family".into()));
    }
    let uniform = (0..budget as u64).into_par_iter().map(|i| ProjectiveParam::new(rng::sphere_sample(seed, i, dim)).unwrap());
    let samples: Vec<(ProjectiveParam, Option<f64>)> = starts
        .par_iter()
        .cloned()
        .chain(uniform)
        .map(|q| {
            let m = eval.resolved_mass(&q);
            (q, m)
        })
        .collect();
    let mut records: Vec<(&ProjectiveParam, f64)> = Vec::new();
    for (q, m) in &samples {
        let Some(m) = *m else { continue };
        if records.last().is_none_or(|r| m > r.1) {
            records.push((q, m));
        }
    }
    if records.is_empty() {
        return Err(Error::InvalidArgument("no sample gave a resolved contour; raise the level".into()));
    }
    let best_sample = records.last().unwrap().1;
    let per_record = 16.max(budget / 20);
    let refined: Vec<(ProjectiveParam, f64)> = records
        .par_iter()
        .map(|(q, m)| pattern_search(eval, (*q).clone(), *m, per_record))
        .collect();
    let (argmax, sup_mass) = refined
        .into_iter()
        .fold(None::<(ProjectiveParam, f64)>, |best, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
        .unwrap();
    Ok(ScanResult {
        sup_mass,
        argmax,
        best_sample,
        evaluations: samples.len() + records.len() * per_record,
        low_confidence: budget < tolerances::MIN_SCAN_BUDGET,
    })
}

/// Scans `F_k` for each `k` in increasing order. Since `F_j ⊂ F_k` for
/// `j < k`, the best parameter found so far is carried up as a start, which
/// keeps the scans monotone in `k` and lets the larger families begin on
/// the ridge of singular zero sets where the supremum sits.
pub fn nested_scans(surface: &EllipsoidParams, ks: &[usize], level: u32, budget: usize, seed: u64) -> Result<Vec<(usize, ScanResult)>> {
    let mut out: Vec<(usize, ScanResult)> = Vec::new();
    for &k in ks {
        if out.last().is_some_and(|(j, _)| *j >= k) {
            return Err(Error::InvalidArgument("family indices must increase".into()));
        }
        let eval = SweepoutEvaluator::new(SweepoutFamily::standard(k, *surface)?, level)?;
        let starts: Vec<ProjectiveParam> = out.last().map(|(_, r)| r.argmax.padded(k + 1)).into_iter().collect();
        out.push((k, sup_mass_scan_from(&eval, &starts, budget, seed)?));
    }
    Ok(out)
}

/// Opportunistic coordinate search on the unit sphere of coefficients;
/// the step halves after a full pass without improvement.
fn pattern_search(eval: &SweepoutEvaluator, start: ProjectiveParam, m0: f64, budget: usize) -> (ProjectiveParam, f64) {
    let mut best = start;
    let mut best_m = m0;
    let mut step = 0.2;
    let mut used = 0;
    let dim = best.coefficients().len();
    'outer: while used < budget && step > 1e-7 {
        let mut improved = false;
        for j in 0..dim {
            for sign in [1.0, -1.0] {
                if used >= budget {
                    break 'outer;
                }
                let mut c = best.coefficients().to_vec();
                c[j] += sign * step;
                let Ok(q) = ProjectiveParam::new(c) else { continue };
                used += 1;
                let Some(m) = eval.resolved_mass(&q) else { continue };
                if m > best_m {
                    best = q;
                    best_m = m;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_m)
}

/// Projective distance from a quadratic parameter of `F_8` (or a prefix
/// family, padded with zeros) to the nearest product of two homogeneous
/// linear forms, i.e. to a pair of great circles.
pub fn distance_to_linear_product(q: &ProjectiveParam) -> f64 {
    let mut c = [0.0; 9];
    for (dst, src) in c.iter_mut().zip(q.coefficients()) {
        *dst = *src;
    }
    // homogenize with x1²+x2²+x3² = 1: the constant moves onto the diagonal
    let t = c[0];
    let m = nalgebra::Matrix3::new(
        c[4] + t,
        c[5] / 2.0,
        c[6] / 2.0,
        c[5] / 2.0,
        t,
        c[7] / 2.0,
        c[6] / 2.0,
        c[7] / 2.0,
        c[8] + t,
    );
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].abs().partial_cmp(&eig.eigenvalues[b].abs()).unwrap());
    let mut lambda = eig.eigenvalues;
    lambda[order[0]] = 0.0;
    if lambda[order[1]] * lambda[order[2]] > 0.0 {
        // a definite pair only vanishes at points; fall back to a square
        lambda[order[1]] = 0.0;
    }
    let v = eig.eigenvectors;
    let mp = v * nalgebra::Matrix3::from_diagonal(&lambda) * v.transpose();
    let tp = mp[(1, 1)];
    let fitted = vec![
        tp,
        0.0,
        0.0,
        0.0,
        mp[(0, 0)] - tp,
        2.0 * mp[(0, 1)],
        2.0 * mp[(0, 2)],
        2.0 * mp[(1, 2)],
        mp[(2, 2)] - tp,
    ];
    match ProjectiveParam::new(fitted) {
        Ok(f) => ProjectiveParam(c.to_vec()).distance(&f),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationProfile {
    /// `(r, max over centers of the ball mass)`.
    pub values: Vec<(f64, f64)>,
    pub centers: usize,
}

impl ConcentrationProfile {
    /// The no-concentration bound `4π sin r` holds at every radius.
    pub fn within_bound(&self) -> bool {
        self.values.iter().all(|&(r, m)| m <= 4.0 * std::f64::consts::PI * r.sin())
    }
}

/// Max ball mass of `F(q)` over sampled centers at each radius. Centers are
/// uniform samples plus every fourth vertex of the cycle (where the ball
/// mass peaks).
pub fn concentration_profile(
    family: &SweepoutFamily,
    q: &ProjectiveParam,
    radii: &[f64],
    level: u32,
    centers: usize,
    seed: u64,
) -> Result<ConcentrationProfile> {
    let contour = evaluate_cycle(family, q, level)?;
    let surface = family.surface;
    let mut pts = rng::sphere_points(seed, centers);
    for p in pts.iter_mut() {
        *p = surface.radial(p);
    }
    for c in contour.cycle.curves() {
        pts.extend(c.vertices().iter().step_by(4).copied());
    }
    let values = radii
        .iter()
        .map(|&r| {
            let max = pts
                .par_iter()
                .map(|p| ball_mass(&contour.cycle, &surface, p, r))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((r, max))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationProfile { values, centers: pts.len() })
}
