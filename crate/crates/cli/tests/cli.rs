use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pnpcomp::io::{read_pgm, write_pgm};
use pnpcomp::ImageBuffer;
use tempfile::TempDir;

fn pnpcomp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pnpcomp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn test_image(dir: &Path) -> PathBuf {
    let img = ImageBuffer::from_fn(24, 20, |r, c| {
        (40.0 + 6.0 * r as f64 + 3.0 * c as f64 + if (r / 6 + c / 5) % 2 == 0 { 30.0 } else { 0.0 })
            .round()
    })
    .unwrap();
    let p = dir.join("in.pgm");
    write_pgm(&p, &img).unwrap();
    p
}

#[test]
fn metrics_of_identical_images() {
    let dir = TempDir::new().unwrap();
    let img = test_image(dir.path());
    let p = img.to_str().unwrap();
    let o = pnpcomp(&["metrics", p, p], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "psnr=inf ssim=1");
}

/// Least-squares slope and intercept of the two-level quantizer over
/// `[x0 - δ, x0 + δ]` by dense midpoint sampling.
fn two_level_oracle(x0: f64, delta: f64) -> (f64, f64) {
    let n = 200_000;
    let (mut sx, mut sq, mut sxx, mut sxq) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let x = x0 - delta + (i as f64 + 0.5) * 2.0 * delta / n as f64;
        let q = if x > 0.0 { 0.5 } else { -0.5 };
        sx += x;
        sq += q;
        sxx += x * x;
        sxq += x * q;
    }
    let nf = n as f64;
    let a = (sxq - sx * sq / nf) / (sxx - sx * sx / nf);
    (a, (sq - a * sx) / nf)
}

#[test]
fn quantizer_sweep_csv() {
    let dir = TempDir::new().unwrap();
    let o = pnpcomp(
        &["analyze-quantizer", "--kind", "two-level", "--x0", "0:0.05:2", "--delta", "0.05:0.05:3"],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0,delta,a,b,lmse"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 41 * 60);
    for row in rows.iter().step_by(37) {
        let (a, b) = two_level_oracle(row[0], row[1]);
        assert!((row[2] - a).abs() < 1e-4, "{row:?} vs a={a}");
        assert!((row[3] - b).abs() < 1e-4, "{row:?} vs b={b}");
    }
}

#[test]
fn rotated_transform_gains_match_scalar_sweep() {
    let dir = TempDir::new().unwrap();
    let o = pnpcomp(
        &["analyze-transform", "--basis", "rotation45", "--quantizers", "two-level", "--x0", "0.3,-0.1", "--delta", "0.5:0.5:1.5"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("delta,lmse,g1,g2"));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let coeffs = [s * (0.3 - 0.1), s * (-0.3 - 0.1)];
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        for (k, c) in coeffs.iter().enumerate() {
            let (a, _) = two_level_oracle(*c, v[0]);
            assert!((v[2 + k] - a).abs() < 1e-4, "{line}");
        }
    }
}

#[test]
fn copy_codec_leaves_input_unchanged() {
    let dir = TempDir::new().unwrap();
    let input = test_image(dir.path());
    let o = pnpcomp(
        &[
            "postprocess", "--input", input.to_str().unwrap(), "--codec", "cmd:\"cp {in} {out}\"",
            "--denoiser", "identity", "--lambda", "0.5", "--beta", "2", "--mu", "0.01", "--delta-tilde", "4", "--block", "1x1",
            "--output", "out.pgm", "--log", "state.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(dir.path().join("out.pgm")).unwrap(),
        fs::read(&input).unwrap()
    );
    let log = fs::read_to_string(dir.path().join("state.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "iter,delta_u,objective,psnr_vs_input");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,0,0,"));
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let input = test_image(dir.path());
    let first = pnpcomp(
        &[
            "postprocess", "--input", input.to_str().unwrap(), "--codec", "pair:96",
            "--area", "rotated", "--mu", "0.002", "--output", "a.pgm", "--log", "a.csv",
        ],
        dir.path(),
    );
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let manifest = fs::read_to_string(dir.path().join("a.pgm.manifest")).unwrap();
    assert!(manifest.contains("linearization=pair-rotated:96"));
    assert!(manifest.contains("mu=0.002\n"));

    let second = pnpcomp(
        &["postprocess", "--from-manifest", "a.pgm.manifest", "--output", "b.pgm", "--log", "b.csv"],
        dir.path(),
    );
    assert!(second.status.success(), "{}", String::from_utf8_lossy(&second.stderr));
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.pgm"), read("b.pgm"));
    assert_eq!(read("a.csv"), read("b.csv"));
    let again = fs::read_to_string(dir.path().join("b.pgm.manifest")).unwrap();
    assert_eq!(
        again.replace("b.pgm", "a.pgm").replace("b.csv", "a.csv"),
        manifest
    );
    assert!(read_pgm(dir.path().join("b.pgm")).is_ok());
}

#[test]
fn jacobian_dump_and_call_count() {
    let dir = TempDir::new().unwrap();
    let input = test_image(dir.path());
    let o = pnpcomp(
        &["jacobian", "--input", input.to_str().unwrap(), "--codec", "dct:1", "--limit", "1", "--count-calls"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# block row=0 col=0 size=8x8\n64 64\n"));
    // one base evaluation plus two per step and nominal block position
    assert_eq!(text.lines().last(), Some(format!("codec_calls={}", 1 + 2 * 5 * 64).as_str()));
}

#[test]
fn exit_codes_by_failure_category() {
    let dir = TempDir::new().unwrap();
    let input = test_image(dir.path());
    let inp = input.to_str().unwrap();
    let code = |args: &[&str]| pnpcomp(args, dir.path()).status.code();
    let explicit = ["--lambda", "1", "--beta", "1", "--mu", "0", "--delta-tilde", "2", "--block", "1x1"];
    let with = |head: &[&'static str], tail: &[&'static str]| -> Vec<String> {
        head.iter().chain(tail).map(|s| s.to_string()).collect()
    };

    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["postprocess", "--input", inp, "--codec", "dct:1", "--output", "o.pgm"]), Some(2));
    assert_eq!(code(&["metrics", "missing.pgm", inp]), Some(3));

    let failing_codec = with(&["postprocess", "--codec", "cmd:false {in} {out}", "--output", "o.pgm"], &explicit);
    let mut args: Vec<&str> = failing_codec.iter().map(String::as_str).collect();
    args.extend(["--input", inp]);
    assert_eq!(code(&args), Some(4));

    let failing_denoiser = with(
        &["postprocess", "--codec", "identity", "--denoiser", "cmd:false {in} {out}", "--output", "o.pgm"],
        &explicit,
    );
    let mut args: Vec<&str> = failing_denoiser.iter().map(String::as_str).collect();
    args.extend(["--input", inp]);
    assert_eq!(code(&args), Some(5));
}
