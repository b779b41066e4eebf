//! Marching triangles on the icosahedral grid carried to the surface.
//!
//! Each triangle whose vertex signs differ contributes one segment between
//! the crossing points on its two sign-changing edges. Crossing points are
//! polished onto the zero set along the (radially mapped) great-circle arc
//! of the edge. Segments are stitched through shared edges; since the grid
//! is a closed surface every traced component is a closed curve.

use std::sync::Arc;

use crate::curve::{Cycle1, PolyCurve};
use crate::mesh::Icosphere;
use crate::surface::{refine_root, EllipsoidParams, Vec3};
use crate::tolerances;

#[derive(Debug, Clone)]
pub struct ContourGrid {
    pub mesh: Arc<Icosphere>,
    pub surface: EllipsoidParams,
    /// Mesh vertices mapped onto the surface.
    pub points: Vec<Vec3>,
}

#[derive(Debug, Clone)]
pub struct Contour {
    pub cycle: Cycle1,
    /// Offset added to the function because a grid vertex was (near) zero.
    pub offset: f64,
    /// Max |f| over the grid.
    pub max_abs: f64,
    /// Segments joining two branches of the zero set, seen as opposite
    /// surface gradients at their ends. They appear when a band of one sign
    /// is thinner than the grid, and inflate the traced length.
    pub folds: usize,
}

impl Contour {
    pub fn perturbed(&self) -> bool {
        self.offset != 0.0
    }

    pub fn near_degenerate(&self) -> bool {
        self.max_abs < tolerances::NEAR_DEGENERATE
    }

    /// The grid separates every branch of the zero set.
    pub fn resolved(&self) -> bool {
        self.folds == 0
    }
}

const NONE: u32 = u32::MAX;

impl ContourGrid {
    pub fn new(surface: EllipsoidParams, level: u32) -> Self {
        let mesh = Icosphere::cached(level);
        let points = mesh.vertices.iter().map(|u| surface.radial(u)).collect();
        Self { mesh, surface, points }
    }

    /// Zero set of `f`, given its values at [`Self::points`].
    pub fn contour<F: Fn(&Vec3) -> f64>(&self, values: &[f64], f: F) -> Contour {
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut offset = 0.0;
        if values.iter().any(|v| v.abs() < tolerances::CONTOUR_ZERO) {
            offset = tolerances::CONTOUR_OFFSET;
            while values.iter().any(|v| v + offset == 0.0) {
                offset += tolerances::CONTOUR_OFFSET;
            }
        }
        let positive: Vec<bool> = values.iter().map(|v| v + offset >= 0.0).collect();
        let mesh = &self.mesh;

        let mut crossing_of_edge = vec![NONE; mesh.edges.len()];
        let mut crossings: Vec<u32> = Vec::new();
        for (e, &[a, b]) in mesh.edges.iter().enumerate() {
            if positive[a as usize] != positive[b as usize] {
                crossing_of_edge[e] = crossings.len() as u32;
                crossings.push(e as u32);
            }
        }
        if crossings.is_empty() {
            return Contour { cycle: Cycle1::empty(), offset, max_abs, folds: 0 };
        }

        let mut links = vec![[NONE; 2]; crossings.len()];
        let mut segments: Vec<(u32, u32)> = Vec::new();
        let mut link = |from: u32, to: u32| {
            let slot = &mut links[from as usize];
            if slot[0] == NONE {
                slot[0] = to;
            } else {
                slot[1] = to;
            }
        };
        for fe in &mesh.face_edges {
            let hit: Vec<u32> = fe
                .iter()
                .map(|&e| crossing_of_edge[e as usize])
                .filter(|&c| c != NONE)
                .collect();
            if hit.len() == 2 {
                link(hit[0], hit[1]);
                link(hit[1], hit[0]);
                segments.push((hit[0], hit[1]));
            }
        }

        let g = |x: &Vec3| f(x) + offset;
        let points: Vec<Vec3> = crossings
            .iter()
            .map(|&e| {
                let [a, b] = mesh.edges[e as usize];
                self.crossing_point(a as usize, b as usize, values[a as usize] + offset, values[b as usize] + offset, &g)
            })
            .collect();

        let normals: Vec<Option<Vec3>> = points.iter().map(|x| self.surface_gradient(x, &g)).collect();
        // crossings at an angle below 60° count too; they are as unresolved
        let folds = segments
            .iter()
            .filter(|&&(a, b)| match (normals[a as usize], normals[b as usize]) {
                (Some(na), Some(nb)) => na.dot(&nb) < -0.5,
                _ => false,
            })
            .count();

        let mut visited = vec![false; crossings.len()];
        let mut curves = Vec::new();
        for start in 0..crossings.len() {
            if visited[start] {
                continue;
            }
            let mut loop_pts: Vec<Vec3> = Vec::new();
            let (mut prev, mut cur) = (NONE, start as u32);
            while !visited[cur as usize] {
                visited[cur as usize] = true;
                let p = points[cur as usize];
                if loop_pts.last().is_none_or(|q: &Vec3| (p - q).norm() > 1e-9) {
                    loop_pts.push(p);
                }
                let [n0, n1] = links[cur as usize];
                let next = if n0 != prev { n0 } else { n1 };
                prev = cur;
                cur = next;
                if cur == NONE {
                    break;
                }
            }
            while loop_pts.len() > 1 && (loop_pts[0] - loop_pts[loop_pts.len() - 1]).norm() <= 1e-9 {
                loop_pts.pop();
            }
            if loop_pts.len() >= 3 {
                if let Ok(c) = PolyCurve::new(loop_pts, true) {
                    curves.push(c);
                }
            }
        }
        let cycle = Cycle1::new(curves).expect("traced loops are closed");
        Contour { cycle, offset, max_abs, folds }
    }

    /// Unit tangential gradient of `g` at `x`, by central differences.
    fn surface_gradient<G: Fn(&Vec3) -> f64>(&self, x: &Vec3, g: &G) -> Option<Vec3> {
        const H: f64 = 1e-6;
        let mut grad = Vec3::zeros();
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = H;
            grad[i] = (g(&(x + e)) - g(&(x - e))) / (2.0 * H);
        }
        let t = self.surface.project_tangent(x, &grad);
        let n = t.norm();
        (n > 1e-12).then(|| t / n)
    }

    fn crossing_point<G: Fn(&Vec3) -> f64>(&self, a: usize, b: usize, fa: f64, fb: f64, g: &G) -> Vec3 {
        let ua = self.mesh.vertices[a];
        let ub = self.mesh.vertices[b];
        let at = |s: f64| self.surface.radial(&(ua * (1.0 - s) + ub * s).normalize());
        let s = refine_root(0.0, 1.0, fa, fb, |s| g(&at(s)));
        at(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Mass;
    use std::f64::consts::TAU;

    fn contour_of<F: Fn(&Vec3) -> f64>(grid: &ContourGrid, f: F) -> Contour {
        let values: Vec<f64> = grid.points.iter().map(&f).collect();
        grid.contour(&values, f)
    }

    #[test]
    fn equator_and_latitude() {
        let grid = ContourGrid::new(EllipsoidParams::sphere(), 4);
        let c = contour_of(&grid, |x| x[2]);
        assert!(c.perturbed());
        assert_eq!(c.cycle.curves().len(), 1);
        assert!((c.cycle.mass() - TAU).abs() < 1e-3, "{}", c.cycle.mass());
        let c = contour_of(&grid, |x| x[2] - 0.5);
        assert!((c.cycle.mass() - TAU * 3f64.sqrt() / 2.0).abs() < 1e-3);
    }

    #[test]
    fn thin_band_is_unresolved() {
        let grid = ContourGrid::new(EllipsoidParams::sphere(), 4);
        // two circles x1 = ±0.01, far closer than the grid spacing
        let thin = contour_of(&grid, |x| x[0] * x[0] - 1e-4);
        assert!(!thin.resolved());
        let wide = contour_of(&grid, |x| x[0] * x[0] - 0.09);
        assert!(wide.resolved(), "{}", wide.folds);
        assert!((wide.cycle.mass() - 2.0 * TAU * 0.91f64.sqrt()).abs() < 2e-3);
        // an orthogonal crossing is resolved
        let cross = contour_of(&grid, |x| x[0] * x[1] + 1e-3);
        assert!(cross.resolved(), "{}", cross.folds);
    }

    #[test]
    fn constant_sign_gives_empty_cycle() {
        let grid = ContourGrid::new(EllipsoidParams::sphere(), 3);
        let c = contour_of(&grid, |x| 2.0 + x[0]);
        assert!(c.cycle.is_empty());
    }

    #[test]
    fn ellipsoid_contour_lies_on_surface() {
        let e = EllipsoidParams::new(0.95, 1.0, 1.05).unwrap();
        let grid = ContourGrid::new(e, 4);
        let c = contour_of(&grid, |x| x[0] + 0.3 * x[1] * x[2] - 0.1);
        for curve in c.cycle.curves() {
            assert!(curve.surface_residual(&e) < 1e-10);
        }
    }
}
