//! End-to-end tests of the `fracstef` binary: modes, artifacts, exit codes,
//! and the byte-determinism contract on CSV outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracstef"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fracstef-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

fn run_mode(mode: &str, cfg: &Path, out: &Path) -> Output {
    bin()
        .arg(mode)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn zero_data_stefan_run_emits_flat_front() {
    let dir = tmp_dir("zero");
    let cfg = write_config(
        &dir,
        "alpha = 0.75\nu0 = zero\nn = 33\ndt = 0.03125\nt = 0.5\n",
    );
    let out = dir.join("out");
    let res = run_mode("solve-stefan", &cfg, &out);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));

    let front = std::fs::read_to_string(out.join("front.csv")).unwrap();
    let mut lines = front.lines();
    assert_eq!(lines.next().unwrap(), "t,s,sdot,flux,integral_residual");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        let s: f64 = cols[1].parse().unwrap();
        assert_eq!(s, 1.0, "front moved on zero data: {line}");
    }
    assert!(out.join("field.csv").exists());
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("status: PASS"));
}

#[test]
fn identical_configs_are_byte_identical() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, "alpha = 0.7\nn = 33\ndt = 0.03125\ntheta = 0.5\n");
    let (out1, out2) = (dir.join("a"), dir.join("b"));
    assert!(run_mode("solve-stefan", &cfg, &out1).status.success());
    assert!(run_mode("solve-stefan", &cfg, &out2).status.success());
    for name in ["front.csv", "field.csv"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn validation_errors_exit_2() {
    let dir = tmp_dir("validation");
    // theta out of range.
    let cfg = write_config(&dir, "alpha = 0.75\ntheta = 1.5\n");
    let res = run_mode("solve-stefan", &cfg, &dir.join("out"));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("theta"));

    // missing alpha.
    let cfg = write_config(&dir, "b = 1.0\n");
    let res = run_mode("solve-stefan", &cfg, &dir.join("out"));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("alpha"));

    // unknown mode.
    let res = run_mode("solve-nothing", &cfg, &dir.join("out"));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn solver_nonconvergence_exits_3() {
    let dir = tmp_dir("nonconv");
    // One iteration cannot reach a 1e-8 fixed point with real data.
    let cfg = write_config(
        &dir,
        "alpha = 0.75\nn = 33\ndt = 0.03125\nfp_max_iters = 1\n",
    );
    let res = run_mode("solve-stefan", &cfg, &dir.join("out"));
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn mbp_mode_runs_with_prescribed_front() {
    let dir = tmp_dir("mbp");
    let cfg = write_config(
        &dir,
        "alpha = 0.75\nn = 65\ndt = 0.015625\nfront = linear\nfront_rate = 0.5\n",
    );
    let out = dir.join("out");
    let res = run_mode("solve-mbp", &cfg, &out);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let front = std::fs::read_to_string(out.join("front.csv")).unwrap();
    let last = front.lines().last().unwrap();
    let s_final: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((s_final - 1.25).abs() < 1e-12, "prescribed front end {s_final}");
}

#[test]
fn opcheck_mode_emits_order_table() {
    let dir = tmp_dir("opcheck");
    let cfg = write_config(&dir, "alpha = 0.75\nalphas = 0.75\nns = 65,129,257\n");
    let out = dir.join("out");
    let res = run_mode("opcheck", &cfg, &out);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let table = std::fs::read_to_string(out.join("opcheck.csv")).unwrap();
    assert!(table.starts_with("alpha,beta,n,err_integral,err_caputo"));
    // 1 alpha x 3 betas x 3 resolutions.
    assert_eq!(table.lines().count(), 1 + 9);
}

#[test]
fn monotonicity_mode_orders_fronts() {
    let dir = tmp_dir("mono");
    let cfg = write_config(
        &dir,
        "alpha = 0.75\nn = 33\ndt = 0.03125\nthetas = 0.5,1.0\n",
    );
    let out = dir.join("out");
    let res = run_mode("monotonicity", &cfg, &out);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("monotonicity.csv").exists());
    assert!(out.join("front_theta_0.5.csv").exists());
    assert!(out.join("front_theta_1.csv").exists());
}

#[test]
fn convergence_mode_reports_refinement_ratio() {
    let dir = tmp_dir("conv");
    let cfg = write_config(&dir, "alpha = 0.75\nn = 33\ndt = 0.015625\nt = 0.5\n");
    let out = dir.join("out");
    let res = run_mode("convergence", &cfg, &out);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let table = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(table.starts_with("level,n,dt,max_integral_residual"));
    assert_eq!(table.lines().count(), 3);
    // Level 1 runs at the halved mesh: n doubles in cell count.
    assert!(table.lines().nth(2).unwrap().starts_with("1,65,"));
}

#[test]
fn sweep_respects_thread_cap() {
    let dir = tmp_dir("threads");
    let cfg = write_config(
        &dir,
        "alpha = 0.75\nn = 33\ndt = 0.03125\nthetas = 0.5,1.0\n",
    );
    let out = dir.join("out");
    let res = bin()
        .arg("monotonicity")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("FRACSTEF_THREADS", "1")
        .output()
        .expect("binary runs");
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn fuzz_corpus_seeds_never_panic_the_parsers() {
    // The checked-in fuzz seeds must stay valid harness inputs: feed them
    // through the same entry points the fuzz targets use.
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let config_dir = root.join("config_parse");
    let mut seen = 0;
    for entry in std::fs::read_dir(&config_dir).expect("corpus dir checked in") {
        let bytes = std::fs::read(entry.unwrap().path()).unwrap();
        if let Ok(text) = std::str::from_utf8(&bytes) {
            if let Ok(raw) = fracstef_cli::config::parse_config_str(text) {
                let _ = fracstef_cli::config::resolve_config(
                    fracstef_cli::config::Mode::SolveStefan,
                    raw,
                );
            }
        }
        seen += 1;
    }
    assert!(seen >= 3, "expected checked-in config seeds, found {seen}");

    let samples_dir = root.join("samples_parse");
    let mut seen = 0;
    for entry in std::fs::read_dir(&samples_dir).expect("corpus dir checked in") {
        let bytes = std::fs::read(entry.unwrap().path()).unwrap();
        if let Ok(text) = std::str::from_utf8(&bytes) {
            let _ = fracstef_cli::samples::parse_samples_str(text);
        }
        seen += 1;
    }
    assert!(seen >= 2, "expected checked-in sample seeds, found {seen}");
}

#[test]
fn custom_samples_round_trip() {
    let dir = tmp_dir("custom");
    // Admissible data on a 9-node grid: a small bump vanishing at the ends.
    let n = 9;
    let mut body = String::from("# custom u0\n");
    for i in 0..n {
        let p = i as f64 / (n - 1) as f64;
        body.push_str(&format!("{}\n", 0.05 * (std::f64::consts::PI * p).sin().powi(2)));
    }
    let samples = dir.join("u0.txt");
    std::fs::write(&samples, body).unwrap();
    let cfg = write_config(
        &dir,
        &format!(
            "alpha = 0.75\nn = {n}\ndt = 0.0625\nu0 = custom\nu0_file = {}\n",
            samples.display()
        ),
    );
    let res = run_mode("solve-stefan", &cfg, &dir.join("out"));
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
}
