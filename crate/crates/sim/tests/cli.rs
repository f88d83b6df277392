use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hydroshear_core::calibration::SyntheticConfig;
use hydroshear_sim::config::load_params;
use hydroshear_sim::io::{read_samples, read_sdf};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hydroshear"));
    c.env_remove("HYDROSHEAR_CONFIG");
    c
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    bin().args(args.iter().map(|a| a.as_ref())).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn sphere_config(dir: &Path) -> PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(
        &p,
        "[indenter]\nshape = \"sphere\"\nradius = 0.0175\n\n[surface]\ncount = 256\nseed = 2\n",
    )
    .unwrap();
    p
}

fn press_trajectory(dir: &Path) -> PathBuf {
    let p = dir.join("press.traj");
    let mut s = String::from("# hydroshear-trajectory v1 frame=elastomer\n");
    for i in 0..6 {
        let z = 0.0175 + 0.001 - 0.0005 * i as f64;
        s.push_str(&format!("{:?} 1 0 0 0 {:?} 0 {z:?}\n", 0.01 * i as f64, 2e-4 * i as f64));
    }
    std::fs::write(&p, s).unwrap();
    p
}

#[test]
fn help_and_version_succeed_and_bad_usage_exits_one() {
    assert_eq!(code(&run(&[&"--help"])), 0);
    assert_eq!(code(&run(&[&"--version"])), 0);
    assert_eq!(code(&run(&[&"simulate", &"--help"])), 0);
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&[&"frobnicate"])), 1);
    assert_eq!(code(&run(&[&"simulate", &"--trajectory", &"x"])), 1);
    assert_eq!(code(&run(&[&"bench", &"--config", &"x", &"--models", &"nope"])), 1);
}

#[test]
fn simulate_writes_one_field_per_pose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(dir.path());
    let traj = press_trajectory(dir.path());
    let out = dir.path().join("out");
    let o = run(&[&"simulate", &"--config", &cfg, &"--trajectory", &traj, &"--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let n = std::fs::read_dir(&out).unwrap().count();
    assert_eq!(n, 6);

    // the config can come from the environment
    let fin = dir.path().join("final.field");
    let o = bin()
        .env("HYDROSHEAR_CONFIG", &cfg)
        .args(["simulate", "--final-only", "--trajectory"])
        .arg(&traj)
        .arg("--out")
        .arg(&fin)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        std::fs::read(&fin).unwrap(),
        std::fs::read(out.join("field_00005.field")).unwrap()
    );
}

#[test]
fn simulate_data_errors_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(dir.path());
    let traj = press_trajectory(dir.path());
    let text = std::fs::read_to_string(&traj).unwrap();
    let broken = dir.path().join("broken.traj");
    std::fs::write(&broken, text.replacen("1 0 0 0", "1 0 0 zero", 2)).unwrap();
    let out = dir.path().join("o");

    let o = run(&[&"simulate", &"--config", &cfg, &"--trajectory", &broken, &"--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("broken.traj:2:"), "{}", stderr(&o));

    let missing = dir.path().join("absent.toml");
    let o = run(&[&"simulate", &"--config", &missing, &"--trajectory", &traj, &"--out", &out]);
    assert_eq!(code(&o), 2);

    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "[indenter]\nshape = \"sphere\"\nradius = 0.0175\n\n[grid]\nrows = -3\n").unwrap();
    let o = run(&[&"simulate", &"--config", &bad_cfg, &"--trajectory", &traj, &"--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.toml:6:"), "{}", stderr(&o));

    let neg = dir.path().join("neg.toml");
    std::fs::write(&neg, "[indenter]\nshape = \"sphere\"\nradius = -1.0\n").unwrap();
    let o = run(&[&"simulate", &"--config", &neg, &"--trajectory", &traj, &"--out", &out]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gen_dataset_then_calibrate_recovers_the_truth() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    let o = run(&[&"gen-dataset", &"--out", &ds, &"--samples", &"256"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(ds.join("truth.toml").is_file());

    let params = dir.path().join("params.toml");
    let o = run(&[&"calibrate", &"--dataset", &ds, &"--out", &params]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fitted = load_params(&params).unwrap().hydroshear.unwrap();
    let truth = SyntheticConfig::default().truth;
    for (got, want, tol) in [
        (fitted.lambda_d, truth.lambda_d, 0.01),
        (fitted.lambda_s, truth.lambda_s, 0.01),
        (fitted.stiffness, truth.stiffness, 0.01),
        (fitted.friction, truth.friction, 0.02),
    ] {
        assert!((got - want).abs() <= tol * want, "{got} vs {want}");
    }
    let report = std::fs::read_to_string(&params).unwrap();
    assert!(report.contains("[calibration]"));
}

#[test]
fn calibrate_degenerate_bracket_writes_params_and_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    assert_eq!(code(&run(&[&"gen-dataset", &"--out", &ds, &"--samples", &"256"])), 0);
    let settings = dir.path().join("calib.toml");
    std::fs::write(&settings, "[brackets]\nfriction = [20.0, 50.0]\n").unwrap();
    let params = dir.path().join("params.toml");
    let o = run(&[&"calibrate", &"--dataset", &ds, &"--config", &settings, &"--out", &params]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(params.is_file());
    assert!(stderr(&o).contains("friction"));
}

#[test]
fn calibrate_without_data_exits_two_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.toml");
    let o = run(&[&"calibrate", &"--dataset", &dir.path(), &"--out", &params]);
    assert_eq!(code(&o), 2);
    assert!(!params.exists());

    let ds = dir.path().join("ds");
    assert_eq!(code(&run(&[&"gen-dataset", &"--out", &ds, &"--samples", &"256"])), 0);
    let settings = dir.path().join("calib.toml");
    std::fs::write(&settings, "shear_kinds = [\"twist\"]\nunknown_key = 1\n").unwrap();
    let o = run(&[&"calibrate", &"--dataset", &ds, &"--config", &settings, &"--out", &params]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("calib.toml:2:"), "{}", stderr(&o));
    assert!(!params.exists());
}

#[test]
fn compare_reports_pairs_groups_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    assert_eq!(code(&run(&[&"gen-dataset", &"--out", &ds, &"--samples", &"256"])), 0);
    let plots = dir.path().join("plots");
    let o = run(&[&"compare", &"--pred", &ds, &"--truth", &ds, &"--plot", &plots]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("group dilation"));
    assert!(out.contains("overall"));
    assert!(out.lines().filter(|l| l.contains("rmse_px=0.000000")).count() > 3);
    assert!(plots.join("dilation_000.svg").is_file());
    assert!(plots.join("dilation_000.csv").is_file());

    let lonely = dir.path().join("lonely");
    std::fs::create_dir(&lonely).unwrap();
    std::fs::copy(ds.join("dilation_000.field"), lonely.join("other_000.field")).unwrap();
    let o = run(&[&"compare", &"--pred", &lonely, &"--truth", &ds]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bench_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(dir.path());
    let csv = dir.path().join("bench.csv");
    let o = run(&[
        &"bench", &"--config", &cfg, &"--env-counts", &"2,4", &"--steps", &"2", &"--warmup", &"1",
        &"--models", &"hydroshear,penalty", &"--records", &csv,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(stdout(&o).contains("scaling exponent"));
}

fn cube_stl(dir: &Path) -> PathBuf {
    let h = 0.01;
    let v = |x: f64, y: f64, z: f64| format!("      vertex {:?} {:?} {:?}\n", x * h, y * h, z * h);
    let faces: [[[f64; 3]; 3]; 12] = [
        [[-1., -1., -1.], [-1., 1., -1.], [1., 1., -1.]],
        [[-1., -1., -1.], [1., 1., -1.], [1., -1., -1.]],
        [[-1., -1., 1.], [1., -1., 1.], [1., 1., 1.]],
        [[-1., -1., 1.], [1., 1., 1.], [-1., 1., 1.]],
        [[-1., -1., -1.], [1., -1., -1.], [1., -1., 1.]],
        [[-1., -1., -1.], [1., -1., 1.], [-1., -1., 1.]],
        [[-1., 1., -1.], [-1., 1., 1.], [1., 1., 1.]],
        [[-1., 1., -1.], [1., 1., 1.], [1., 1., -1.]],
        [[-1., -1., -1.], [-1., -1., 1.], [-1., 1., 1.]],
        [[-1., -1., -1.], [-1., 1., 1.], [-1., 1., -1.]],
        [[1., -1., -1.], [1., 1., -1.], [1., 1., 1.]],
        [[1., -1., -1.], [1., 1., 1.], [1., -1., 1.]],
    ];
    let mut s = String::from("solid cube\n");
    for f in faces {
        s.push_str("  facet normal 0 0 0\n    outer loop\n");
        for p in f {
            s.push_str(&v(p[0], p[1], p[2]));
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    s.push_str("endsolid cube\n");
    let p = dir.join("cube.stl");
    std::fs::write(&p, s).unwrap();
    p
}

#[test]
fn sample_surface_handles_analytic_and_mesh_indenters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sphere_config(dir.path());
    let out = dir.path().join("s.samples");
    let o = run(&[&"sample-surface", &"--config", &cfg, &"--out", &out, &"--count", &"50"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_samples(&out).unwrap().len(), 50);

    let sdf = dir.path().join("x.sdf");
    let o = run(&[&"sample-surface", &"--config", &cfg, &"--out", &out, &"--sdf-out", &sdf]);
    assert_eq!(code(&o), 1);

    cube_stl(dir.path());
    let mesh_cfg = dir.path().join("mesh.toml");
    std::fs::write(&mesh_cfg, "[indenter]\nshape = \"mesh\"\npath = \"cube.stl\"\ncell = 0.001\n").unwrap();
    let o = run(&[&"sample-surface", &"--config", &mesh_cfg, &"--out", &out, &"--count", &"80", &"--sdf-out", &sdf]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let samples = read_samples(&out).unwrap();
    assert!((samples.total_area() - 6.0 * 4e-4).abs() < 0.05 * 6.0 * 4e-4);
    let g = read_sdf(&sdf).unwrap();
    assert!(g.extrapolate);

    // the written lattice works as an indenter on its own
    let lattice_cfg = dir.path().join("lattice.toml");
    std::fs::write(&lattice_cfg, "[indenter]\nshape = \"lattice\"\npath = \"x.sdf\"\n").unwrap();
    let o = run(&[&"sample-surface", &"--config", &lattice_cfg, &"--out", &out, &"--count", &"20"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let missing_cfg = dir.path().join("missing.toml");
    std::fs::write(&missing_cfg, "[indenter]\nshape = \"mesh\"\npath = \"nope.stl\"\n").unwrap();
    let o = run(&[&"sample-surface", &"--config", &missing_cfg, &"--out", &out]);
    assert_eq!(code(&o), 2);
}
