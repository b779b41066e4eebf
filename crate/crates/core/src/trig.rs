//! Real trigonometric polynomials on the circle and certified root
//! isolation.
//!
//! A polynomial of degree `d` in ambient coordinates restricted to a great
//! circle `θ ↦ cos θ·e1 + sin θ·e2` is a trigonometric polynomial of degree
//! at most `d`, so it has at most `2d` roots on `[0, 2π)`.

use std::f64::consts::TAU;

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    /// `a[0] + Σ_k a[k]·cos kθ + b[k]·sin kθ`; `b[0]` is unused.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Isolation {
    Roots(usize),
    /// Subdivision hit the depth limit (a near-tangency or a multiple root).
    Exhausted,
}

impl TrigPoly {
    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }

    /// Interpolates the degree-`d` trigonometric polynomial through samples
    /// of `f` at `2d+1` equally spaced angles.
    pub fn interpolate<F: Fn(f64) -> f64>(d: usize, f: F) -> Self {
        let n = 2 * d + 1;
        let samples: Vec<f64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
        let mut a = vec![0.0; d + 1];
        let mut b = vec![0.0; d + 1];
        for (j, &y) in samples.iter().enumerate() {
            let t = TAU * j as f64 / n as f64;
            a[0] += y;
            for k in 1..=d {
                let (s, c) = (k as f64 * t).sin_cos();
                a[k] += y * c;
                b[k] += y * s;
            }
        }
        a[0] /= n as f64;
        for k in 1..=d {
            a[k] *= 2.0 / n as f64;
            b[k] *= 2.0 / n as f64;
        }
        Self { a, b }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.a[0];
        for k in 1..self.a.len() {
            let (s, c) = (k as f64 * t).sin_cos();
            v += self.a[k] * c + self.b[k] * s;
        }
        v
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let mut v = 0.0;
        for k in 1..self.a.len() {
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            v += kf * (self.b[k] * c - self.a[k] * s);
        }
        v
    }

    /// `Σ k^p (|a_k| + |b_k|)`: a bound on the `p`-th derivative.
    fn derivative_bound(&self, p: i32) -> f64 {
        (1..self.a.len())
            .map(|k| (k as f64).powi(p) * (self.a[k].abs() + self.b[k].abs()))
            .sum()
    }

    /// Counts the roots on `[0, 2π)` by interval subdivision. An interval
    /// is discarded when `|T(mid)|` exceeds the slope bound times its half
    /// width, and accepted as holding exactly one root when it shows a sign
    /// change and `|T'(mid)|` exceeds the curvature bound times its half
    /// width (so `T` is monotone on it).
    pub fn isolate_roots(&self, max_depth: u32) -> (Isolation, Vec<f64>) {
        let d1 = self.derivative_bound(1);
        let d2 = self.derivative_bound(2);
        if d1 == 0.0 {
            return (Isolation::Roots(0), vec![]);
        }
        let start = 16usize.max(4 * self.degree());
        let mut roots = Vec::new();
        let mut stack: Vec<(f64, f64, u32)> = (0..start)
            .rev()
            .map(|j| (TAU * j as f64 / start as f64, TAU * (j + 1) as f64 / start as f64, 0))
            .collect();
        while let Some((lo, hi, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let fm = self.eval(mid);
            if fm.abs() > d1 * half {
                continue;
            }
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            if self.derivative(mid).abs() > d2 * half {
                // monotone on [lo, hi]: one root iff the signs differ, with
                // zero counted as positive so shared endpoints agree
                if (flo >= 0.0) != (fhi >= 0.0) {
                    roots.push(self.polish(lo, hi, flo, fhi));
                }
                continue;
            }
            if depth >= max_depth {
                return (Isolation::Exhausted, roots);
            }
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (Isolation::Roots(roots.len()), roots)
    }

    /// Bisection to a small bracket followed by one Newton step.
    fn polish(&self, mut lo: f64, mut hi: f64, flo: f64, _fhi: f64) -> f64 {
        let pos_lo = flo >= 0.0;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if (self.eval(mid) >= 0.0) == pos_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let d = self.derivative(t);
        let t1 = if d != 0.0 { t - self.eval(t) / d } else { t };
        if (lo..=hi).contains(&t1) { t1 } else { t }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_for_low_degree() {
        let f = |t: f64| 0.3 + 2.0 * t.cos() - (2.0 * t).sin();
        let p = TrigPoly::interpolate(2, f);
        for t in [0.1, 1.7, 4.0] {
            assert!((p.eval(t) - f(t)).abs() < 1e-13);
        }
        assert!((p.a[1] - 2.0).abs() < 1e-13 && (p.b[2] + 1.0).abs() < 1e-13);
    }

    #[test]
    fn counts_roots_of_cos_k() {
        for k in 1..=4usize {
            let p = TrigPoly::interpolate(k, |t| (k as f64 * t + 0.1).cos());
            let (iso, roots) = p.isolate_roots(40);
            assert_eq!(iso, Isolation::Roots(2 * k));
            for r in roots {
                assert!(p.eval(r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_roots_for_positive_poly() {
        let p = TrigPoly::interpolate(2, |t| 2.0 + t.cos() * (2.0 * t).sin());
        assert_eq!(p.isolate_roots(40).0, Isolation::Roots(0));
    }

    #[test]
    fn double_root_exhausts() {
        // 1 - cos θ has a double root at 0
        let p = TrigPoly::interpolate(1, |t| 1.0 - t.cos());
        assert_eq!(p.isolate_roots(30).0, Isolation::Exhausted);
    }

    #[test]
    fn close_roots_are_separated() {
        // cos θ - cos(1e-3): roots at ±1e-3
        let c = (1e-3f64).cos();
        let p = TrigPoly::interpolate(1, |t| t.cos() - c);
        let (iso, _) = p.isolate_roots(60);
        assert_eq!(iso, Isolation::Roots(2));
    }
}
