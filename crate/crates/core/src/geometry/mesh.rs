use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;

use super::sdf::Aabb;

/// Triangle soup with counter-clockwise (outward) winding.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub triangles: Vec<[Vector3<f64>; 3]>,
}

impl TriangleMesh {
    pub fn new(triangles: Vec<[Vector3<f64>; 3]>) -> Self {
        Self { triangles }
    }

    pub fn from_indexed(vertices: &[Vector3<f64>], faces: &[[usize; 3]]) -> Self {
        Self::new(
            faces
                .iter()
                .map(|f| [vertices[f[0]], vertices[f[1]], vertices[f[2]]])
                .collect(),
        )
    }

    /// Axis-aligned box centred on the origin, 12 triangles.
    pub fn cuboid(half: Vector3<f64>) -> Self {
        let v = |x: f64, y: f64, z: f64| Vector3::new(x * half.x, y * half.y, z * half.z);
        let verts = [
            v(-1.0, -1.0, -1.0),
            v(1.0, -1.0, -1.0),
            v(1.0, 1.0, -1.0),
            v(-1.0, 1.0, -1.0),
            v(-1.0, -1.0, 1.0),
            v(1.0, -1.0, 1.0),
            v(1.0, 1.0, 1.0),
            v(-1.0, 1.0, 1.0),
        ];
        let faces = [
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [2, 3, 7],
            [2, 7, 6],
            [1, 2, 6],
            [1, 6, 5],
            [0, 4, 7],
            [0, 7, 3],
        ];
        Self::from_indexed(&verts, &faces)
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|[a, b, c]| 0.5 * (b - a).cross(&(c - a)).norm())
            .sum()
    }

    pub fn bounds(&self) -> Option<Aabb> {
        let first = self.triangles.first()?[0];
        let (mut min, mut max) = (first, first);
        for t in &self.triangles {
            for v in t {
                min = min.inf(v);
                max = max.sup(v);
            }
        }
        Some(Aabb { min, max })
    }

    /// Generalized winding number: ~1 inside a closed outward-wound surface,
    /// ~0 outside.
    pub fn winding_number(&self, p: &Vector3<f64>) -> f64 {
        let mut total = 0.0;
        for [a, b, c] in &self.triangles {
            let (a, b, c) = (a - p, b - p, c - p);
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(&b.cross(&c));
            let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
            total += 2.0 * libm::atan2(num, den);
        }
        total / (4.0 * PI)
    }

    pub fn unsigned_distance(&self, p: &Vector3<f64>) -> f64 {
        libm::sqrt(
            self.triangles
                .iter()
                .map(|t| (closest_point_on_triangle(p, t) - p).norm_squared())
                .fold(f64::INFINITY, libm::fmin),
        )
    }

    /// Negative inside, by winding number.
    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        let d = self.unsigned_distance(p);
        if self.winding_number(p) > 0.5 {
            -d
        } else {
            d
        }
    }
}

/// Closest point on a triangle by Voronoi-region classification.
pub fn closest_point_on_triangle(p: &Vector3<f64>, [a, b, c]: &[Vector3<f64>; 3]) -> Vector3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}
