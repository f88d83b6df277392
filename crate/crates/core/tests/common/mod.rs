#![allow(dead_code)]

use hydroshear_core::geometry::{sample_surface, Sdf, SurfaceSamples};
use hydroshear_core::hydroshear::{HydroShear, TrackerOptions, TrackerState};
use hydroshear_core::{HydroParams, MarkerField, Pose, Scene, TactileGrid, UnitQuaternion, Vector3};

/// 35 mm spherical indenter.
pub const R: f64 = 0.0175;

pub fn sphere_scene(count: usize) -> Scene {
    Scene::sampled(TactileGrid::default(), Sdf::sphere(R), count, 3).unwrap()
}

pub fn params(scene: &Scene, stiffness: f64, friction: f64) -> HydroParams {
    HydroParams::single_tracker(2e4, 1.5e4, stiffness, friction, scene.mean_area())
}

/// Sphere centre placed so its lowest point is `depth` below the membrane.
pub fn at(x: f64, y: f64, depth: f64) -> Pose {
    Pose::from_translation(x, y, R - depth)
}

/// Straight vertical approach from 1 mm above contact to `depth`.
pub fn press(x: f64, y: f64, depth: f64, steps: usize) -> Vec<Pose> {
    (0..=steps)
        .map(|i| at(x, y, -1e-3 + (depth + 1e-3) * i as f64 / steps as f64))
        .collect()
}

/// Appends a straight in-plane slide by `(dx, dy)` at constant depth.
pub fn slide(poses: &mut Vec<Pose>, dx: f64, dy: f64, steps: usize) {
    let start = *poses.last().unwrap();
    for i in 1..=steps {
        let s = i as f64 / steps as f64;
        poses.push(Pose::new(
            start.rotation,
            start.translation + Vector3::new(dx * s, dy * s, 0.0),
        ));
    }
}

pub fn run(model: &HydroShear, poses: &[Pose]) -> TrackerState {
    let mut st = model.new_state();
    for p in poses {
        model.step(&mut st, p).unwrap();
    }
    st
}

pub fn final_shear(model: &HydroShear, poses: &[Pose]) -> MarkerField {
    let st = run(model, poses);
    model.shear(&st, poses.last().unwrap()).unwrap()
}

pub fn no_substeps() -> TrackerOptions {
    TrackerOptions {
        substep_threshold: 0.0,
    }
}

/// Reflection of a pose through the plane x = 0.
pub fn mirror_pose(p: &Pose) -> Pose {
    let q = p.rotation.quaternion();
    let r = UnitQuaternion::new_normalize(nalgebra::Quaternion::new(q.w, q.i, -q.j, -q.k));
    Pose::new(r, Vector3::new(-p.translation.x, p.translation.y, p.translation.z))
}

/// Surface samples closed under x -> -x: the first half is drawn, the second
/// half mirrors it.
pub fn mirrored_samples(shape: &Sdf, half: usize) -> SurfaceSamples {
    let s = sample_surface(shape, half, 5).unwrap();
    let flip = |v: &Vector3<f64>| Vector3::new(-v.x, v.y, v.z);
    let mut points = s.points.clone();
    let mut normals = s.normals.clone();
    points.extend(s.points.iter().map(flip));
    normals.extend(s.normals.iter().map(flip));
    let mut areas = s.areas.clone();
    areas.extend(s.areas.iter().copied());
    SurfaceSamples::new(points, normals, areas).unwrap()
}

/// One surface point at the local origin with an outward normal pointing
/// down towards the membrane.
pub fn single_point(area: f64) -> SurfaceSamples {
    SurfaceSamples::new(vec![Vector3::zeros()], vec![-Vector3::z()], vec![area]).unwrap()
}

pub fn rel_diff(a: &MarkerField, b: &MarkerField) -> f64 {
    a.add(&b.scaled(-1.0)).unwrap().norm() / b.norm()
}
