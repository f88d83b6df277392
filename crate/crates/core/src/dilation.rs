//! Dilation field from instantaneous indenter penetration of the grid points.

use alloc::vec::Vec;

use crate::error::Result;
use crate::geometry::Sdf;
use crate::numeric::KahanSum2;
use crate::types::{FieldUnit, MarkerField, Pose, TactileGrid};

/// Grid points strictly inside the indenter, in grid index order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactSet {
    pub indices: Vec<usize>,
    /// `-φ_I` at each listed point; strictly positive.
    pub penetrations: Vec<f64>,
}

impl ContactSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Penetration-weighted mean position of the contact taxels.
    pub fn weighted_centroid(&self, grid: &TactileGrid) -> Option<[f64; 2]> {
        if self.is_empty() {
            return None;
        }
        let mut acc = KahanSum2::default();
        let mut w = crate::numeric::KahanSum::new();
        for (&i, &pen) in self.indices.iter().zip(&self.penetrations) {
            let p = grid.point_xy(i);
            acc.add([pen * p[0], pen * p[1]]);
            w.add(pen);
        }
        let [sx, sy] = acc.value();
        let w = w.value();
        Some([sx / w, sy / w])
    }
}

/// Grid points with `φ_I < 0`, where `pose` places the indenter in the
/// elastomer frame. Points exactly on the surface are not in contact.
pub fn find_contacts(grid: &TactileGrid, indenter: &Sdf, pose: &Pose) -> Result<ContactSet> {
    let to_local = pose.inverse();
    let mut set = ContactSet::default();
    for i in 0..grid.len() {
        let local = to_local.transform_point(&grid.point(i));
        let phi = indenter.eval(&local)?;
        if phi < 0.0 {
            set.indices.push(i);
            set.penetrations.push(-phi);
        }
    }
    Ok(set)
}

/// Sum over contacts of `pen_c · v_c · exp(-λ_d |v_c|²)` with
/// `v_c = (x, y) - p_c`, evaluated at every grid point. Meters in, meters out.
pub fn dilation_field(grid: &TactileGrid, contacts: &ContactSet, lambda_d: f64) -> MarkerField {
    let mut field = MarkerField::zeros(*grid, FieldUnit::Meters);
    if contacts.is_empty() {
        return field;
    }
    let centers: Vec<[f64; 2]> = contacts.indices.iter().map(|&i| grid.point_xy(i)).collect();
    for (q, out) in field.vectors.iter_mut().enumerate() {
        let xy = grid.point_xy(q);
        let mut acc = KahanSum2::default();
        for (c, &pen) in centers.iter().zip(&contacts.penetrations) {
            let v = [xy[0] - c[0], xy[1] - c[1]];
            let w = pen * libm::exp(-lambda_d * (v[0] * v[0] + v[1] * v[1]));
            acc.add([w * v[0], w * v[1]]);
        }
        *out = acc.value();
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::norm2;
    use alloc::vec;

    const R: f64 = 0.0175;

    fn sphere_at(x: f64, y: f64, depth: f64) -> Pose {
        Pose::from_translation(x, y, R - depth)
    }

    #[test]
    fn separated_indenter_has_no_contacts() {
        let g = TactileGrid::default();
        let c = find_contacts(&g, &Sdf::sphere(R), &Pose::from_translation(0.0, 0.0, 0.1)).unwrap();
        assert!(c.is_empty());
        assert_eq!(dilation_field(&g, &c, 1e4), MarkerField::zeros(g, FieldUnit::Meters));
    }

    #[test]
    fn centred_sphere_contacts_form_a_disc() {
        let g = TactileGrid::default();
        let pose = Pose::from_translation(0.0, 0.0, 0.0);
        let c = find_contacts(&g, &Sdf::sphere(R), &pose).unwrap();
        let expected: Vec<usize> = (0..g.len())
            .filter(|&i| norm2(g.point_xy(i)) < R)
            .collect();
        assert_eq!(c.indices, expected);
        assert!(c.penetrations.iter().all(|p| *p > 0.0));
    }

    #[test]
    fn surface_point_is_not_in_contact() {
        // the grid point at the origin lies exactly on the sphere surface
        let g = TactileGrid::centered(1, 1, 0.01, 0.0);
        let c = find_contacts(&g, &Sdf::sphere(0.01), &Pose::from_translation(0.0, 0.0, 0.01)).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn centred_press_is_symmetric() {
        let g = TactileGrid::default();
        let c = find_contacts(&g, &Sdf::sphere(R), &sphere_at(0.0, 0.0, 0.002)).unwrap();
        let f = dilation_field(&g, &c, 2e4);
        let centre = f.vectors[3 * 9 + 4];
        assert!(norm2(centre) < 1e-18);
        let sx: f64 = f.vectors.iter().map(|v| v[0]).sum();
        let sy: f64 = f.vectors.iter().map(|v| v[1]).sum();
        assert!(sx.abs() < 1e-15 && sy.abs() < 1e-15);
    }

    /// Plain double loop, no compensation.
    #[allow(clippy::needless_range_loop)]
    fn oracle(grid: &TactileGrid, idx: &[usize], pen: &[f64], lambda: f64) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; grid.len()];
        for q in 0..grid.len() {
            let r = q / grid.cols;
            let col = q % grid.cols;
            let x = grid.origin[0] + col as f64 * grid.spacing[0];
            let y = grid.origin[1] + r as f64 * grid.spacing[1];
            for (k, &i) in idx.iter().enumerate() {
                let cx = grid.origin[0] + (i % grid.cols) as f64 * grid.spacing[0];
                let cy = grid.origin[1] + (i / grid.cols) as f64 * grid.spacing[1];
                let (vx, vy) = (x - cx, y - cy);
                let e = (-lambda * (vx * vx + vy * vy)).exp();
                out[q][0] += pen[k] * vx * e;
                out[q][1] += pen[k] * vy * e;
            }
        }
        out
    }

    #[test]
    fn single_contact_matches_scalar_oracle() {
        let g = TactileGrid::default();
        let c = ContactSet {
            indices: vec![31],
            penetrations: vec![1e-3],
        };
        let f = dilation_field(&g, &c, 3e4);
        let o = oracle(&g, &c.indices, &c.penetrations, 3e4);
        for (a, b) in f.vectors.iter().zip(&o) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn field_is_linear_in_penetration_and_order_free() {
        let g = TactileGrid::default();
        let c = find_contacts(&g, &Sdf::sphere(R), &sphere_at(0.003, -0.002, 0.0015)).unwrap();
        let f = dilation_field(&g, &c, 1.5e4);
        let scaled = ContactSet {
            indices: c.indices.clone(),
            penetrations: c.penetrations.iter().map(|p| p * 3.0).collect(),
        };
        let f3 = dilation_field(&g, &scaled, 1.5e4);
        for (a, b) in f.vectors.iter().zip(&f3.vectors) {
            assert!((3.0 * a[0] - b[0]).abs() <= 1e-15 * b[0].abs().max(1e-9));
            assert!((3.0 * a[1] - b[1]).abs() <= 1e-15 * b[1].abs().max(1e-9));
        }
        let mut rev = c.clone();
        rev.indices.reverse();
        rev.penetrations.reverse();
        let fr = dilation_field(&g, &rev, 1.5e4);
        assert!(f.max_abs_diff(&fr) < 1e-12);
    }

    #[test]
    fn falloff_is_monotone_beyond_the_peak() {
        // isolated contact on a fine 1-D grid
        let g = TactileGrid::centered(1, 201, 1e-4, 0.0);
        let c = ContactSet {
            indices: vec![100],
            penetrations: vec![1e-3],
        };
        let lambda = 2e4;
        let f = dilation_field(&g, &c, lambda);
        // |v| exp(-λ|v|²) peaks at |v| = 1/sqrt(2λ)
        let peak = 1.0 / (2.0 * lambda).sqrt();
        let mut prev = f64::INFINITY;
        for i in 101..201 {
            let d = (i - 100) as f64 * 1e-4;
            let m = norm2(f.vectors[i]);
            if d > peak {
                assert!(m < prev);
            }
            prev = m;
        }
    }
}
