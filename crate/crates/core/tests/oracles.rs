//! Checks against values computed independently of the library.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4, SymmetricEigen};

use widthlab::index::{ClosedGeodesic, IndexForm};
use widthlab::poly::{Monomial, Polynomial};
use widthlab::rng;
use widthlab::surface::principal_ellipse;
use widthlab::sweepout::{crofton_mass, ProjectiveParam, SweepoutEvaluator, SweepoutFamily};
use widthlab::{EllipsoidParams, Vec3};

fn near_round() -> EllipsoidParams {
    EllipsoidParams::new(0.95, 1.0, 1.05).unwrap()
}

/// Ellipse perimeter from the arithmetic-geometric mean:
/// `P = 2π/M(a,b) · (a² − Σ 2^(n−1) c_n²)`.
fn agm_perimeter(a: f64, b: f64) -> f64 {
    let (mut x, mut y) = (a.max(b), a.min(b));
    let mut sum = 0.5 * (x * x - y * y);
    let mut w = 1.0;
    while (x - y).abs() > 1e-16 * x {
        let c = 0.5 * (x - y);
        (x, y) = (0.5 * (x + y), (x * y).sqrt());
        sum += w * c * c;
        w *= 2.0;
    }
    TAU / x * (a.max(b).powi(2) - sum)
}

#[test]
fn principal_ellipse_lengths_match_the_agm() {
    let e = near_round();
    let axes = e.semi_axes();
    for (i, (j, k)) in [(1, (1, 2)), (2, (0, 2)), (3, (0, 1))] {
        let exact = agm_perimeter(axes[j], axes[k]);
        // curvature-corrected chords: far below the (2π/n)²/24 polygon deficit
        for (n, tol) in [(256, 1e-7), (8192, 1e-12)] {
            let length = principal_ellipse(&e, i, n).unwrap().length();
            assert!((length - exact).abs() / exact < tol, "γ{i}, n={n}: {length} vs {exact}");
        }
    }
    assert!((agm_perimeter(1.0, 1.0) - TAU).abs() < 1e-14);
}

#[test]
fn crofton_of_a_latitude_circle() {
    for (n, h) in [0.0, 0.3, 0.7, 0.95].into_iter().enumerate() {
        let p = Polynomial::new(vec![(Monomial([0, 0, 1]), 1.0), (Monomial([0, 0, 0]), -h)]);
        let est = crofton_mass(&p, 100_000, 40 + n as u64).unwrap();
        let exact = TAU * (1.0 - h * h).sqrt();
        let allowed = (0.01 * exact).max(3.0 * est.standard_error);
        assert!((est.mass - exact).abs() <= allowed, "h={h}: {} vs {exact}", est.mass);
        assert!(est.max_count <= 2);
    }
}

#[test]
fn inertia_count_matches_dense_eigenvalues() {
    let e = near_round();
    for (i, r) in [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2)] {
        let g = ClosedGeodesic::principal(e, i, r, 1024).unwrap();
        let form = IndexForm::new(&g, 256 * r as usize, 0.37);
        let eig = SymmetricEigen::new(form.to_dense()).eigenvalues;
        for sigma in [-2.0, -0.5, -1e-3, 0.0, 0.4, 1.7, 5.0, 30.0] {
            let dense = eig.iter().filter(|&&l| l < sigma).count();
            assert_eq!(form.count_below(sigma), dense, "γ{i}^({r}) at σ = {sigma}");
        }
    }
}

/// On a great circle of the round sphere the form is `−f″ − f` and its
/// discrete spectrum is `(4/h²)·sin²(πm/n) − 1`.
#[test]
fn great_circle_spectrum_is_known_in_closed_form() {
    let s = EllipsoidParams::sphere();
    let g = ClosedGeodesic::principal(s, 3, 1, 1024).unwrap();
    let n = 300;
    let form = IndexForm::new(&g, n, 0.0);
    let h = TAU / n as f64;
    let exact: Vec<f64> = (0..n).map(|m| 4.0 / (h * h) * (PI * m as f64 / n as f64).sin().powi(2) - 1.0).collect();
    for sigma in [-0.5, 0.5, 3.5, 10.0, 100.0] {
        let count = exact.iter().filter(|&&l| l < sigma).count();
        assert_eq!(form.count_below(sigma), count, "σ = {sigma}");
    }
}

/// `K = −det[[H, ∇F], [∇Fᵀ, 0]] / |∇F|⁴` for the level set `F = 0`.
#[test]
fn gauss_curvature_matches_the_bordered_hessian() {
    let e = near_round();
    let a = e.coefficients();
    for u in rng::sphere_points(5, 200) {
        let x = e.radial(&u);
        let grad = Vec3::new(2.0 * a[0] * x[0], 2.0 * a[1] * x[1], 2.0 * a[2] * x[2]);
        let m = Matrix4::new(
            2.0 * a[0], 0.0, 0.0, grad[0],
            0.0, 2.0 * a[1], 0.0, grad[1],
            0.0, 0.0, 2.0 * a[2], grad[2],
            grad[0], grad[1], grad[2], 0.0,
        );
        let k = -m.determinant() / grad.norm_squared().powi(2);
        assert!((e.gauss_curvature(&x) - k).abs() < 1e-12 * k);
    }
}

/// Total curvature `∫K dA = 4π`, with the area element taken by finite
/// differences of the radial parametrization.
#[test]
fn gauss_bonnet_by_quadrature() {
    let e = EllipsoidParams::new(0.92, 1.0, 1.08).unwrap();
    let (nt, np) = (300, 600);
    let (dt, dp) = (PI / nt as f64, TAU / np as f64);
    let at = |t: f64, p: f64| e.radial(&Vec3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos()));
    let d = 1e-6;
    let mut total = 0.0;
    for i in 0..nt {
        let t = (i as f64 + 0.5) * dt;
        for j in 0..np {
            let p = (j as f64 + 0.5) * dp;
            let xt = (at(t + d, p) - at(t - d, p)) / (2.0 * d);
            let xp = (at(t, p + d) - at(t, p - d)) / (2.0 * d);
            total += e.gauss_curvature(&at(t, p)) * xt.cross(&xp).norm() * dt * dp;
        }
    }
    assert!((total - 4.0 * PI).abs() < 1e-4, "{total}");
}

#[test]
fn contour_mass_is_stable_under_refinement() {
    let mut compared = 0;
    for k in [2, 4, 6] {
        let fam = SweepoutFamily::standard(k, EllipsoidParams::sphere()).unwrap();
        let coarse = SweepoutEvaluator::new(fam.clone(), 6).unwrap();
        let fine = SweepoutEvaluator::new(fam, 7).unwrap();
        for i in 0..6 {
            let q = ProjectiveParam::new(rng::sphere_sample(77, i, k + 1)).unwrap();
            let (Some(m6), Some(m7)) = (coarse.resolved_mass(&q), fine.resolved_mass(&q)) else {
                continue;
            };
            assert!((m6 - m7).abs() / m7 < 3e-3, "k={k} sample {i}: {m6} vs {m7}");
            compared += 1;
        }
    }
    assert!(compared >= 12, "only {compared} resolved pairs");
}
