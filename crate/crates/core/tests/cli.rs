use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chinpaint::io::{encode_pgm, write_image, Pgm};
use chinpaint::ScalarField;

fn fixture(dir: &Path) {
    let n = 32;
    let f = ScalarField::from_fn(n, n, 1.0, |x, y| {
        let hole = (13.0..19.0).contains(&x) && (13.0..19.0).contains(&y);
        if !hole && (10.0..18.0).contains(&x) {
            1.0
        } else {
            0.0
        }
    })
    .unwrap();
    write_image(&dir.join("image.pgm"), &f, false).unwrap();
    let mask = Pgm {
        width: n,
        height: n,
        maxval: 255,
        pixels: (0..n * n)
            .map(|i| {
                let (x, y) = (i % n, i / n);
                if (13..19).contains(&x) && (13..19).contains(&y) {
                    0
                } else {
                    255
                }
            })
            .collect(),
    };
    fs::write(dir.join("mask.pgm"), encode_pgm(&mask)).unwrap();
}

fn chinpaint(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chinpaint"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn base<'a>(mode: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        mode,
        "--input",
        "image.pgm",
        "--mask",
        "mask.pgm",
        "--output",
        out,
    ]
}

#[test]
fn inpaint_converges_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let mut args = base("inpaint", "run");
    args.extend(["--tol", "1e-5"]);
    let out = chinpaint(dir.path(), &args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = dir.path().join("run");
    for name in ["result.pgm", "mode_0.f64", "diagnostics.csv"] {
        assert!(run.join(name).exists(), "{name}");
    }
    let csv = fs::read_to_string(run.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("step,time,E1,E2,residual,mass\n"));
    let last = csv.lines().last().unwrap();
    let residual: f64 = last.split(',').nth(4).unwrap().parse().unwrap();
    assert!(residual <= 1e-5);
}

#[test]
fn zero_noise_galerkin_matches_inpaint() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let mut a = base("inpaint", "det");
    a.extend(["--max-steps", "300"]);
    let mut b = base("galerkin", "gal");
    b.extend(["--max-steps", "300", "--sigma", "0", "--order", "1"]);
    let ca = chinpaint(dir.path(), &a).status.code();
    let cb = chinpaint(dir.path(), &b).status.code();
    assert_eq!(ca, cb);
    let ra = fs::read(dir.path().join("det/result.pgm")).unwrap();
    let rb = fs::read(dir.path().join("gal/result.pgm")).unwrap();
    assert_eq!(ra, rb);
    assert!(dir.path().join("gal/variance.f64").exists());
    assert!(dir.path().join("gal/stddev.pgm").exists());
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    for out in ["a", "b"] {
        let mut args = base("mc", out);
        args.extend([
            "--samples",
            "8",
            "--max-steps",
            "20",
            "--sigma",
            "0.1",
            "--seed",
            "3",
        ]);
        assert_eq!(chinpaint(dir.path(), &args).status.code(), Some(0));
    }
    for name in ["mode_0.f64", "variance.f64", "stderr.f64"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn input_errors_exit_one_and_name_the_culprit() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let out = chinpaint(
        dir.path(),
        &["inpaint", "--input", "image.pgm", "--mask", "gone.pgm"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gone.pgm"));

    let mut args = base("inpaint", "x");
    args.extend(["--lambda", "3"]);
    let out = chinpaint(dir.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));

    fs::write(
        dir.path().join("run.cfg"),
        "mode = inpaint\ninput = image.pgm\nmask = mask.pgm\neps = -1\n",
    )
    .unwrap();
    let out = chinpaint(dir.path(), &["--config", "run.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps"));
}

#[test]
fn budget_exhaustion_exits_two_with_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let mut args = base("perturb", "p");
    args.extend(["--max-steps", "3", "--delta", "0.5"]);
    let out = chinpaint(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("delta"), "{err}");
    assert!(err.contains("ordering ratio"));
    let csv = fs::read_to_string(dir.path().join("p/diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("p/mode_1.f64").exists());
}

#[test]
fn gray_mode_runs() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let mut args = base("inpaint-gray", "g");
    args.extend(["--gray-levels", "3", "--max-steps", "20", "--pgm16"]);
    let out = chinpaint(dir.path(), &args);
    assert!(matches!(out.status.code(), Some(0 | 2)));
    let pgm = fs::read(dir.path().join("g/result.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n32 32\n65535\n"));
    assert!(dir.path().join("g/mode_2.f64").exists());
}
