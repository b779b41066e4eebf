//! Geodesic icosahedral subdivision of the unit sphere.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::surface::Vec3;

#[derive(Debug)]
pub struct Icosphere {
    pub level: u32,
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    /// Endpoints of every undirected edge.
    pub edges: Vec<[u32; 2]>,
    /// Edge ids of each face, in the order (v0v1, v1v2, v2v0).
    pub face_edges: Vec<[u32; 3]>,
}

const MAX_CACHED_LEVEL: usize = 9;

impl Icosphere {
    pub fn new(level: u32) -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vec3> = [
            (-1.0, phi, 0.0),
            (1.0, phi, 0.0),
            (-1.0, -phi, 0.0),
            (1.0, -phi, 0.0),
            (0.0, -1.0, phi),
            (0.0, 1.0, phi),
            (0.0, -1.0, -phi),
            (0.0, 1.0, -phi),
            (phi, 0.0, -1.0),
            (phi, 0.0, 1.0),
            (-phi, 0.0, -1.0),
            (-phi, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
        .collect();
        let mut faces: Vec<[u32; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut midpoint: HashMap<(u32, u32), u32> = HashMap::with_capacity(faces.len() * 3 / 2);
            let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
                let key = (a.min(b), a.max(b));
                *midpoint.entry(key).or_insert_with(|| {
                    verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalize());
                    (verts.len() - 1) as u32
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for &[a, b, c] in &faces {
                let ab = mid(a, b, &mut vertices);
                let bc = mid(b, c, &mut vertices);
                let ca = mid(c, a, &mut vertices);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let mut edge_id: HashMap<(u32, u32), u32> = HashMap::with_capacity(faces.len() * 3 / 2);
        let mut edges = Vec::with_capacity(faces.len() * 3 / 2);
        let face_edges = faces
            .iter()
            .map(|f| {
                let mut ids = [0u32; 3];
                for k in 0..3 {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    ids[k] = *edge_id.entry(key).or_insert_with(|| {
                        edges.push([key.0, key.1]);
                        (edges.len() - 1) as u32
                    });
                }
                ids
            })
            .collect();
        Self { level, vertices, faces, edges, face_edges }
    }

    /// Shared mesh for `level`, built on first use.
    pub fn cached(level: u32) -> Arc<Self> {
        static CACHE: [OnceLock<Arc<Icosphere>>; MAX_CACHED_LEVEL + 1] =
            [const { OnceLock::new() }; MAX_CACHED_LEVEL + 1];
        match CACHE.get(level as usize) {
            Some(cell) => cell.get_or_init(|| Arc::new(Self::new(level))).clone(),
            None => Arc::new(Self::new(level)),
        }
    }

    /// Mean edge length (angle on the unit sphere).
    pub fn mean_edge(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| self.vertices[a as usize].dot(&self.vertices[b as usize]).clamp(-1.0, 1.0).acos())
            .sum();
        total / self.edges.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_characteristic_is_two() {
        for level in 0..4 {
            let m = Icosphere::new(level);
            let chi = m.vertices.len() as i64 - m.edges.len() as i64 + m.faces.len() as i64;
            assert_eq!(chi, 2);
            assert_eq!(m.faces.len(), 20 * 4usize.pow(level));
        }
    }

    #[test]
    fn every_edge_has_two_faces() {
        let m = Icosphere::new(2);
        let mut count = vec![0; m.edges.len()];
        for fe in &m.face_edges {
            for &e in fe {
                count[e as usize] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 2));
    }
}
