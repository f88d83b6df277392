mod common;

use common::*;
use hydroshear_core::geometry::Sdf;
use hydroshear_core::hydroshear::{
    gravity_augmented_field, recover_forces_from_offsets, total_field, HydroShear, TrackerState,
};
use hydroshear_core::{Error, FieldUnit, HydroParams, MarkerField, Pose, Scene, TactileGrid, Vector3};
use proptest::prelude::*;

fn point_scene(area: f64) -> Scene {
    Scene::new(TactileGrid::default(), Sdf::sphere(R), single_point(area)).unwrap()
}

fn point_pose(x: f64, z: f64) -> Pose {
    Pose::from_translation(x, 0.0, z)
}

#[test]
fn never_in_contact_stays_zero() {
    let scene = sphere_scene(512);
    let model = HydroShear::new(&scene, params(&scene, 5e5, 0.5));
    let mut st = model.new_state();
    for i in 0..40 {
        let t = i as f64 / 39.0;
        let p = Pose::from_axis_angle(Vector3::new(0.2, 1.0, 0.1), t, Vector3::new(0.01 * t, -0.005, R + 2e-3 + 1e-3 * t));
        model.step(&mut st, &p).unwrap();
        let mut zero = TrackerState::new(scene.surface.len());
        zero.prev_pose = st.prev_pose;
        zero.step_index = st.step_index;
        zero.points = st.points.clone();
        zero.normals = st.normals.clone();
        zero.phi = st.phi.clone();
        assert_eq!(st, zero);
        assert_eq!(model.shear(&st, &p).unwrap(), MarkerField::zeros(scene.grid, FieldUnit::Meters));
    }
}

#[test]
fn single_point_press_is_a_linear_spring() {
    let area = 2e-6;
    let scene = point_scene(area);
    let mut p = params(&scene, 4e5, 0.5);
    p.normal_stiffness = 7e5;
    let model = HydroShear::new(&scene, p);
    let delta = 1.2e-3;
    let poses = [point_pose(0.0, 1e-3), point_pose(0.0, -0.4 * delta), point_pose(0.0, -delta), point_pose(0.0, -delta)];
    let st = run(&model, &poses);
    let expected = 7e5 * area * delta;
    assert!((st.normal_force[0] - expected).abs() <= 1e-12 * expected);
    assert_eq!(st.tangential_force[0], Vector3::zeros());
    // the projection tracker has unit stiffness
    assert!((st.normal_offset[0] - delta).abs() <= 1e-15);
    assert!((st.force(0) - Vector3::new(0.0, 0.0, expected)).norm() <= 1e-12 * expected);
}

#[test]
fn long_slide_saturates_the_cone() {
    let area = 2e-6;
    let scene = point_scene(area);
    let p = params(&scene, 4e5, 0.4);
    let model = HydroShear::new(&scene, p);
    let mut poses = vec![point_pose(0.0, 1e-3), point_pose(0.0, -1e-3)];
    for i in 1..=20 {
        poses.push(point_pose(2e-4 * i as f64, -1e-3));
    }
    let st = run(&model, &poses);
    let f_n = st.normal_force[0];
    let f_t = st.tangential_force[0];
    assert!(st.force_clipped[0]);
    assert!((f_t.norm() - 0.4 * f_n).abs() <= 1e-15 * f_n);
    // restoring: opposes the motion
    assert!(f_t.x < 0.0 && f_t.y == 0.0);
}

#[test]
fn lift_off_zeroes_force_and_offset() {
    let scene = sphere_scene(1024);
    let model = HydroShear::new(&scene, params(&scene, 5e5, 0.5));
    let mut poses = press(0.0, 0.0, 2e-3, 10);
    slide(&mut poses, 1e-3, 0.0, 5);
    let mut st = run(&model, &poses);
    let was: Vec<usize> = (0..st.len()).filter(|&j| st.in_contact(j)).collect();
    assert!(!was.is_empty());
    // partial lift: the shallow points leave
    model.step(&mut st, &at(1e-3, 0.0, 0.5e-3)).unwrap();
    let mut left = 0;
    for &j in &was {
        if st.phi[j] > 0.0 {
            left += 1;
            assert_eq!(st.normal_force[j], 0.0);
            assert_eq!(st.tangential_force[j], Vector3::zeros());
            assert_eq!(st.offset(j), Vector3::zeros());
        }
    }
    assert!(left > 0);
}

#[test]
fn recovered_forces_match_the_dual_tracker() {
    let scene = sphere_scene(2048);
    let area = scene.surface.uniform_area().unwrap();
    let p = HydroParams::single_tracker(2e4, 1.5e4, 5e5, 1e5, area);
    let model = HydroShear::new(&scene, p);
    let mut poses = press(0.001, -0.002, 2e-3, 10);
    slide(&mut poses, 4e-4, 3e-4, 8);
    let st = run(&model, &poses);
    let rec = recover_forces_from_offsets(&st, &p).unwrap();
    let mut checked = 0;
    for (j, r) in rec.iter().enumerate() {
        let f = st.force(j);
        assert!((r - f).norm() <= 1e-9 * f.norm().max(1e-300), "point {j}");
        checked += usize::from(f.norm() > 0.0);
    }
    assert!(checked > 10);

    let mut bad = p;
    bad.normal_stiffness = 2.0 * p.stiffness;
    assert!(matches!(recover_forces_from_offsets(&st, &bad), Err(Error::Configuration(_))));

    let unit = HydroParams::single_tracker(2e4, 1.5e4, 1.0, 1e5, 1.0);
    let zero = TrackerState::new(4);
    assert!(recover_forces_from_offsets(&zero, &unit).unwrap().iter().all(|v| *v == Vector3::zeros()));
    let rec = recover_forces_from_offsets(&st, &unit).unwrap();
    assert!((0..st.len()).all(|j| rec[j] == st.offset(j)));
}

#[test]
fn shear_of_one_source_matches_closed_form() {
    let area = 2e-6;
    let scene = point_scene(area);
    let p = params(&scene, 4e5, 0.6);
    let model = HydroShear::new(&scene, p);
    let poses = [
        point_pose(0.003, 1e-3),
        point_pose(0.003, -1.5e-3),
        Pose::from_translation(0.0035, 0.0002, -1.5e-3),
    ];
    let st = run(&model, &poses);
    let f = model.shear(&st, poses.last().unwrap()).unwrap();
    let o = st.points[0];
    let oh = st.projected_point(0);
    let ft = st.tangential_force[0];
    assert!(ft.norm() > 0.0);
    let w = -o.z;
    let mut scale = 0.0f64;
    for q in 0..scene.grid.len() {
        let [x, y] = scene.grid.point_xy(q);
        let e = (-p.lambda_s * ((x - oh.x).powi(2) + (y - oh.y).powi(2))).exp();
        let expected = [w * -ft.x * e, w * -ft.y * e];
        scale = scale.max(expected[0].abs()).max(expected[1].abs());
        assert!((f.vectors[q][0] - expected[0]).abs() <= 1e-12 * scale.max(1e-30));
        assert!((f.vectors[q][1] - expected[1]).abs() <= 1e-12 * scale.max(1e-30));
    }
}

#[test]
fn total_is_elementwise_sum() {
    let scene = sphere_scene(1024);
    let model = HydroShear::new(&scene, params(&scene, 5e5, 0.5));
    let mut poses = press(0.0, 0.0, 2e-3, 10);
    slide(&mut poses, 5e-4, 0.0, 5);
    let st = run(&model, &poses);
    let pose = poses.last().unwrap();
    let d = model.dilation(pose).unwrap();
    let s = model.shear(&st, pose).unwrap();
    let z = MarkerField::zeros(scene.grid, FieldUnit::Meters);
    assert_eq!(total_field(&d, &z).unwrap(), d);
    assert_eq!(total_field(&z, &s).unwrap(), s);
    let t = total_field(&d, &s).unwrap();
    for q in 0..t.vectors.len() {
        assert_eq!(t.vectors[q], [d.vectors[q][0] + s.vectors[q][0], d.vectors[q][1] + s.vectors[q][1]]);
    }
    let other = MarkerField::zeros(TactileGrid::centered(2, 2, 0.01, 0.0), FieldUnit::Meters);
    assert_eq!(total_field(&d, &other), Err(Error::GridMismatch));
}

#[test]
fn gravity_field_is_pure_and_matches_clone_and_step() {
    let scene = sphere_scene(1024);
    let p = params(&scene, 5e5, 0.8);
    let model = HydroShear::new(&scene, p);
    let mut poses = press(0.0, 0.0, 2e-3, 10);
    slide(&mut poses, 3e-4, 0.0, 4);
    let st = run(&model, &poses);
    let pose = *poses.last().unwrap();
    let before = st.clone();

    let same = gravity_augmented_field(&st, &pose, &Pose::identity(), &scene.surface, &scene.elastomer, &scene.grid, &p, &model.options).unwrap();
    assert_eq!(same, model.shear(&st, &pose).unwrap());

    let g = Pose::from_translation(0.0, 0.0, -5e-4);
    let f = gravity_augmented_field(&st, &pose, &g, &scene.surface, &scene.elastomer, &scene.grid, &p, &model.options).unwrap();
    assert_eq!(st, before);

    let mut probe = st.clone();
    let target = g.compose(&pose);
    model.step(&mut probe, &target).unwrap();
    let oracle = model.shear(&probe, &target).unwrap();
    assert!(f.max_abs_diff(&oracle) <= 1e-12 * oracle.norm().max(1e-30));
    assert!(f != model.shear(&st, &pose).unwrap());
}

#[test]
fn sticking_translation_moves_markers_with_the_indenter() {
    let scene = sphere_scene(2048);
    let model = HydroShear::new(&scene, params(&scene, 5e5, 1e5));
    let dir = [30f64.to_radians().cos(), 30f64.to_radians().sin()];
    let mut poses = press(0.0, 0.0, 2.5e-3, 10);
    slide(&mut poses, 5e-4 * dir[0], 5e-4 * dir[1], 10);
    let st = run(&model, &poses);
    assert!(!st.force_clipped.iter().any(|c| *c));
    let f = model.shear(&st, poses.last().unwrap()).unwrap();
    let patch = scene.contacts(poses.last().unwrap()).unwrap();
    assert!(patch.len() >= 3);
    let (mut mx, mut my) = (0.0, 0.0);
    for &i in &patch.indices {
        mx += f.vectors[i][0];
        my += f.vectors[i][1];
    }
    let cs = (mx * dir[0] + my * dir[1]) / (mx * mx + my * my).sqrt();
    assert!(cs >= 0.99, "{cs}");
}

/// Linear crossing of the membrane along the segment between two samples.
fn crossing(a: Vector3<f64>, b: Vector3<f64>) -> Vector3<f64> {
    a + (b - a) * (a.z / (a.z - b.z))
}

#[test]
fn stick_holds_projection_and_slip_bounds_the_gap() {
    let scene = sphere_scene(2048);
    let p = params(&scene, 5e5, 0.5);
    let model = HydroShear::new(&scene, p);
    let mut poses = press(0.0, 0.0, 2e-3, 10);
    slide(&mut poses, 2e-3, 0.0, 40);

    let m = scene.surface.len();
    let mut st = model.new_state();
    let mut entry: Vec<Option<Vector3<f64>>> = vec![None; m];
    let mut ever_clipped = vec![false; m];
    let mut stuck_checked = 0;
    let mut slip_checked = 0;
    for pose in &poses {
        let prev_points = st.points.clone();
        let prev_phi = st.phi.clone();
        model.step(&mut st, pose).unwrap();
        for j in 0..m {
            if !st.in_contact(j) {
                entry[j] = None;
                ever_clipped[j] = false;
                continue;
            }
            if entry[j].is_none() {
                entry[j] = Some(if prev_phi[j] < 0.0 { prev_points[j] } else { crossing(prev_points[j], st.points[j]) });
            }
            ever_clipped[j] |= st.offset_clipped[j];
            let o_hat = st.projected_point(j);
            if !ever_clipped[j] {
                assert!((o_hat - entry[j].unwrap()).norm() < 1e-9, "stuck point {j} drifted");
                stuck_checked += 1;
            } else {
                let f_n = st.normal_offset[j];
                let gap_t = st.tangential_offset[j].norm();
                assert!(gap_t <= p.projection_friction * f_n + 1e-12);
                let gap = (o_hat - st.points[j]).norm();
                assert!(gap <= (1.0 + p.projection_friction.powi(2)).sqrt() * f_n * (1.0 + 1e-12));
                if st.offset_clipped[j] {
                    assert!((gap_t - p.projection_friction * f_n).abs() <= 1e-12 * f_n);
                    slip_checked += 1;
                }
            }
        }
    }
    assert!(stuck_checked > 100 && slip_checked > 100, "{stuck_checked} {slip_checked}");
}

/// Press 1.5 mm, slide +x by 30 µm and back. Longer slides unload the
/// shallowest edge points through the normal clamp, which is itself
/// path-dependent even without friction.
fn closed_loop(friction: f64) -> (MarkerField, MarkerField, MarkerField, bool) {
    let scene = sphere_scene(2048);
    let model = HydroShear::new(&scene, params(&scene, 5e5, friction));
    let press_only = press(0.0, 0.0, 1.5e-3, 10);
    let mut looped = press_only.clone();
    slide(&mut looped, 3e-5, 0.0, 20);
    slide(&mut looped, -3e-5, 0.0, 20);
    let mut st = model.new_state();
    let mut slipped = false;
    for p in &looped {
        model.step(&mut st, p).unwrap();
        slipped |= st.force_clipped.iter().any(|c| *c);
    }
    let a = final_shear(&model, &press_only);
    let b = model.shear(&st, looped.last().unwrap()).unwrap();
    let d = b.add(&a.scaled(-1.0)).unwrap();
    (a, b, d, slipped)
}

#[test]
fn closed_slide_with_slip_leaves_residual_shear() {
    let (a, b, d, slipped) = closed_loop(0.5);
    assert!(slipped);
    let tol = 1e-12 * a.norm().max(b.norm());
    assert!(b.norm() > 10.0 * tol);
    assert!(d.norm() > 10.0 * tol, "{}", d.norm());
    assert!(d.norm() > 1e-3 * a.norm());

    let (a, _, d, slipped) = closed_loop(1e5);
    assert!(!slipped);
    assert!(d.norm() <= 1e-8 * a.norm(), "{}", d.norm() / a.norm());
}

#[test]
fn mirrored_trajectory_mirrors_the_field() {
    let samples = mirrored_samples(&Sdf::sphere(R), 1024);
    let scene = Scene::new(TactileGrid::default(), Sdf::sphere(R), samples).unwrap();
    let model = HydroShear::new(&scene, params(&scene, 5e5, 0.5));
    let mut poses = press(0.002, 0.001, 2e-3, 8);
    slide(&mut poses, 1.5e-3, -1e-3, 12);
    let last = *poses.last().unwrap();
    poses.push(Pose::from_axis_angle(Vector3::new(0.3, 0.2, 1.0), 0.08, last.translation + Vector3::new(5e-4, 0.0, -2e-4)));
    let mirrored: Vec<Pose> = poses.iter().map(mirror_pose).collect();
    let a = {
        let st = run(&model, &poses);
        total_field(&model.dilation(poses.last().unwrap()).unwrap(), &model.shear(&st, poses.last().unwrap()).unwrap()).unwrap()
    };
    let b = {
        let st = run(&model, &mirrored);
        let p = mirrored.last().unwrap();
        total_field(&model.dilation(p).unwrap(), &model.shear(&st, p).unwrap()).unwrap()
    };
    let g = scene.grid;
    assert!(a.norm() > 0.0);
    for r in 0..g.rows {
        for c in 0..g.cols {
            let u = a.vectors[r * g.cols + c];
            let v = b.vectors[r * g.cols + (g.cols - 1 - c)];
            assert!((u[0] + v[0]).abs() <= 1e-9 && (u[1] - v[1]).abs() <= 1e-9);
        }
    }
}

#[test]
fn one_step_contact_entry_matches_fine_substeps() {
    let scene = sphere_scene(2048);
    let model = HydroShear::new(&scene, params(&scene, 5e5, 0.5)).with_options(no_substeps());
    let cases = [
        (at(0.0, 0.0, -1e-3), at(0.0, 0.0, 1.5e-3)),
        (at(-1e-3, 0.0, -1e-3), at(1e-3, 5e-4, 1.5e-3)),
        (at(0.0, 0.0, -1e-3), Pose::from_axis_angle(Vector3::y(), 0.05, Vector3::new(1e-3, 0.0, R - 1.5e-3))),
    ];
    for (a, b) in cases {
        let one = final_shear(&model, &[a, b]);
        let fine: Vec<Pose> = (0..=1000).map(|i| a.interpolate(&b, i as f64 / 1000.0)).collect();
        let oracle = final_shear(&model, &fine);
        assert!(rel_diff(&one, &oracle) < 0.01);
    }
}

#[test]
fn halving_the_step_halves_the_error() {
    let scene = sphere_scene(2048);
    let model = HydroShear::new(&scene, params(&scene, 5e5, 0.5)).with_options(no_substeps());
    let traj = |n: usize| -> Vec<Pose> {
        (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                let z = R + 1e-3 - 3e-3 * (1.2 * t).min(1.0);
                Pose::from_axis_angle(Vector3::new(0.3, 1.0, 0.2), 0.08 * t, Vector3::new(2e-3 * (3.0 * t).sin(), 1e-3 * t, z))
            })
            .collect()
    };
    let oracle = final_shear(&model, &traj(1000));
    let errs: Vec<f64> = [20, 40, 80].iter().map(|&n| rel_diff(&final_shear(&model, &traj(n)), &oracle)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..2.6).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn teleport_is_substepped() {
    let scene = sphere_scene(1024);
    let p = params(&scene, 5e5, 0.5);
    let guarded = HydroShear::new(&scene, p);
    let mut poses = press(0.0, 0.0, 2e-3, 10);
    let last = *poses.last().unwrap();
    poses.push(Pose::new(last.rotation, last.translation + Vector3::new(0.012, 0.0, 0.0)));
    let jumped = final_shear(&guarded, &poses);
    let mut fine = press(0.0, 0.0, 2e-3, 10);
    slide(&mut fine, 0.012, 0.0, 3);
    let stepped = final_shear(&guarded.with_options(no_substeps()), &fine);
    assert!(jumped.max_abs_diff(&stepped) <= 1e-12 * stepped.norm());
}

#[test]
fn mismatched_state_is_rejected() {
    let scene = sphere_scene(256);
    let model = HydroShear::new(&scene, params(&scene, 5e5, 0.5));
    let mut st = TrackerState::new(3);
    assert!(matches!(model.step(&mut st, &Pose::identity()), Err(Error::DimensionMismatch { .. })));
}

#[derive(Debug, Clone)]
enum Move {
    Press(f64),
    Slide(f64, f64),
    Twist(f64),
    Roll(f64, f64),
}

fn arb_move() -> impl Strategy<Value = Move> {
    prop_oneof![
        (-1.5e-3..1.5e-3f64).prop_map(Move::Press),
        ((-1e-3..1e-3f64), (-1e-3..1e-3f64)).prop_map(|(x, y)| Move::Slide(x, y)),
        (-0.05..0.05f64).prop_map(Move::Twist),
        ((-0.05..0.05f64), (0.0..std::f64::consts::PI)).prop_map(|(a, h)| Move::Roll(a, h)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn friction_cone_and_reset_hold_after_every_step(moves in prop::collection::vec(arb_move(), 5..40), mu in 0.05..2.0f64) {
        let scene = sphere_scene(256);
        let p = params(&scene, 5e5, mu);
        let model = HydroShear::new(&scene, p);
        let mut pose = at(0.0, 0.0, -5e-4);
        let mut st = model.new_state();
        model.step(&mut st, &pose).unwrap();
        for m in moves {
            let delta = match m {
                Move::Press(dz) => Pose::from_translation(0.0, 0.0, -dz),
                Move::Slide(x, y) => Pose::from_translation(x, y, 0.0),
                Move::Twist(a) => Pose::from_axis_angle(Vector3::z(), a, Vector3::zeros()),
                Move::Roll(a, h) => Pose::from_axis_angle(Vector3::new(h.cos(), h.sin(), 0.0), a, Vector3::zeros()),
            };
            // rotate about the lowest point of the sphere
            let pivot = pose.translation - Vector3::new(0.0, 0.0, R);
            let t = delta.rotation * (pose.translation - pivot) + pivot + delta.translation;
            pose = Pose::new(delta.rotation * pose.rotation, t);
            pose.translation.z = pose.translation.z.clamp(R - 4e-3, R + 2e-3);
            model.step(&mut st, &pose).unwrap();
            for j in 0..st.len() {
                prop_assert!(st.normal_force[j] >= 0.0);
                prop_assert!(st.tangential_force[j].norm() <= mu * st.normal_force[j] + 1e-9);
                prop_assert!(st.tangential_offset[j].norm() <= mu * st.normal_offset[j] + 1e-9);
                if st.phi[j] > 0.0 {
                    prop_assert_eq!(st.force(j), Vector3::zeros());
                    prop_assert_eq!(st.offset(j), Vector3::zeros());
                }
            }
        }
    }
}
