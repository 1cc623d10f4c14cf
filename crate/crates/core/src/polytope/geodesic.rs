//! Geodesic icospheres: every icosahedron face is split into `f²` triangles
//! whose vertices are projected to the unit sphere, giving `10f² + 2` points.
//! Every mesh triangle of these meshes spans a supporting plane of the point
//! set, so the mesh is the convex hull and its inradius is the smallest
//! triangle-plane distance.

use std::collections::HashMap;

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalise(a: Vec3) -> Vec3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let raw: [Vec3; 12] = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let faces = vec![
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
    (raw.iter().map(|&v| normalise(v)).collect(), faces)
}

#[derive(Clone, Debug)]
pub struct Icosphere {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl Icosphere {
    pub fn new(frequency: usize) -> Self {
        assert!(frequency >= 1);
        let f = frequency;
        let (base, faces) = icosahedron();
        let mut vertices: Vec<Vec3> = Vec::new();
        let mut index: HashMap<[i64; 3], usize> = HashMap::new();
        let mut point = |a: Vec3, b: Vec3, c: Vec3, i: usize, j: usize| -> usize {
            let k = f - i - j;
            let x = normalise([
                (i as f64 * a[0] + j as f64 * b[0] + k as f64 * c[0]) / f as f64,
                (i as f64 * a[1] + j as f64 * b[1] + k as f64 * c[1]) / f as f64,
                (i as f64 * a[2] + j as f64 * b[2] + k as f64 * c[2]) / f as f64,
            ]);
            let key = x.map(|v| (v * 1e9).round() as i64);
            *index.entry(key).or_insert_with(|| {
                vertices.push(x);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(20 * f * f);
        for face in &faces {
            let [a, b, c] = face.map(|i| base[i]);
            for i in 0..=f {
                for j in 0..=f - i {
                    if i + j < f {
                        triangles.push([point(a, b, c, i, j), point(a, b, c, i + 1, j), point(a, b, c, i, j + 1)]);
                    }
                    if i + j + 1 < f {
                        triangles.push([
                            point(a, b, c, i + 1, j),
                            point(a, b, c, i + 1, j + 1),
                            point(a, b, c, i, j + 1),
                        ]);
                    }
                }
            }
        }
        Self { vertices, triangles }
    }

    /// Outward unit normal and origin distance of each triangle plane.
    pub fn planes(&self) -> Vec<(Vec3, f64)> {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                let mut n = normalise(cross(sub(b, a), sub(c, a)));
                if dot(n, a) < 0.0 {
                    n = n.map(|x| -x);
                }
                (n, dot(n, a))
            })
            .collect()
    }

    /// Largest amount by which any vertex sticks out of any triangle plane;
    /// `≤ 0` (up to round-off) when every triangle supports the hull.
    pub fn max_plane_violation(&self) -> f64 {
        self.planes()
            .iter()
            .map(|&(n, d)| {
                self.vertices
                    .iter()
                    .map(|&v| dot(n, v) - d)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inradius(&self) -> f64 {
        self.planes().iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }
}

/// Frequency giving `count = 10f² + 2` vertices, if any.
pub fn frequency_for(count: usize) -> Option<usize> {
    let f2 = count.checked_sub(2)?;
    if f2 % 10 != 0 {
        return None;
    }
    let f = ((f2 / 10) as f64).sqrt().round() as usize;
    (f >= 1 && 10 * f * f + 2 == count).then_some(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_convexity() {
        for (f, n) in [(1, 12), (2, 42), (4, 162), (8, 642), (10, 1002), (16, 2562)] {
            let ico = Icosphere::new(f);
            assert_eq!(ico.vertices.len(), n);
            assert_eq!(ico.triangles.len(), 20 * f * f);
            assert!(ico.max_plane_violation() < 1e-12, "f={f}");
            assert_eq!(frequency_for(n), Some(f));
        }
        assert_eq!(frequency_for(100), None);
    }

    #[test]
    fn inradius_matches_reference() {
        // regular icosahedron with unit circumradius
        let r = ((5.0 + 2.0 * 5f64.sqrt()) / 15.0).sqrt();
        assert!((Icosphere::new(1).inradius() - r).abs() < 1e-13);
        assert!((1.0 / r - 1.258_408_572_364_819).abs() < 1e-12);
        // values from an independent Qhull computation on the same point sets
        assert!((Icosphere::new(2).inradius() - 0.934_172_358_962_715_6).abs() < 1e-12);
        assert!((Icosphere::new(10).inradius() - 0.997_094_749_269_860_3).abs() < 1e-12);
    }
}
