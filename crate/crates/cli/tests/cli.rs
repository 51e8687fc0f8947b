//! End-to-end checks of the command-line surface: exit codes, file
//! round-trips and overwrite semantics.

use std::path::{Path, PathBuf};
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_predictorlab")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("predictorlab-cli-{tag}"));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn simulate_shipped_config_succeeds() {
    let dir = temp_dir("simulate");
    let out = dir.join("trace.csv");
    let output = Command::new(exe())
        .args([
            "simulate",
            "--config",
            configs_dir().join("example4.toml").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--t-end",
            "1.0",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "t,x1,x2,z1,z2,w,u,y,d,xi,m24,m214,m223,m224");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("first hold index covered by the theory: 28"));
    assert!(stdout.contains("decay fit"));
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = temp_dir("malformed");
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "plant = \"example4\"\nnot-a-section = true\n").unwrap();
    let out = dir.join("never.csv");
    let output = Command::new(exe())
        .args([
            "simulate",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!out.exists(), "no output file on config error");
}

#[test]
fn overwrite_semantics() {
    let dir = temp_dir("overwrite");
    let out = dir.join("trace.csv");
    let run = |t_end: &str| {
        let status = Command::new(exe())
            .args([
                "simulate",
                "--config",
                configs_dir().join("example4.toml").to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--t-end",
                t_end,
            ])
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(&out).unwrap().lines().count()
    };
    let long = run("1.0");
    let short = run("0.5");
    assert!(short < long, "re-running must overwrite, not append");
}

#[test]
fn check_strict_exits_3_on_failed_margins() {
    // The shipped benchmark configuration fails the conservative
    // certificates, so strict mode reports condition failure.
    let output = Command::new(exe())
        .args([
            "check",
            "--config",
            configs_dir().join("example4.toml").to_str().unwrap(),
            "--strict",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{output:?}");
    let non_strict = Command::new(exe())
        .args([
            "check",
            "--config",
            configs_dir().join("example4.toml").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(non_strict.status.code(), Some(0));
    let table = String::from_utf8_lossy(&non_strict.stdout);
    assert!(table.contains("lyapunov-sufficient"));
    assert!(table.contains("holding-with-predictor"));
}

#[test]
fn predict_prints_components_and_rejects_exact_on_nonlinear() {
    let output = Command::new(exe())
        .args([
            "predict",
            "--config",
            configs_dir().join("example4.toml").to_str().unwrap(),
            "--state",
            "1.0,1.0",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    let first: f64 = lines[0].parse().unwrap();
    assert!((first - 1.8439).abs() < 1e-3);
    let second: f64 = lines[1].parse().unwrap();
    assert!(second.abs() < 1e-12);

    let exact = Command::new(exe())
        .args([
            "predict",
            "--config",
            configs_dir().join("example4.toml").to_str().unwrap(),
            "--state",
            "1.0,1.0",
            "--exact",
        ])
        .output()
        .unwrap();
    assert_eq!(exact.status.code(), Some(2));
}

#[test]
fn config_dump_round_trips() {
    let dir = temp_dir("dump");
    let dumped = dir.join("dumped.toml");
    let status = Command::new(exe())
        .args([
            "config-dump",
            "--config",
            configs_dir().join("example4.toml").to_str().unwrap(),
            "--out",
            dumped.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    // The dumped file parses to the same scenario and dumps identically.
    let redumped = Command::new(exe())
        .args(["config-dump", "--config", dumped.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(redumped.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&redumped.stdout),
        std::fs::read_to_string(&dumped).unwrap()
    );
}

#[test]
fn sweep_rejects_empty_axes_and_repeats_identically() {
    let dir = temp_dir("sweep");
    let base = dir.join("base.toml");
    let scenario = std::fs::read_to_string(configs_dir().join("example4.toml"))
        .unwrap()
        .replace("t-end = 40.0", "t-end = 4.0");
    std::fs::write(&base, scenario).unwrap();

    let empty = dir.join("empty.toml");
    std::fs::write(&empty, "base = \"base.toml\"\naxes = []\n").unwrap();
    let output = Command::new(exe())
        .args(["sweep", "--config", empty.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let spec = dir.join("sweep.toml");
    std::fs::write(
        &spec,
        "base = \"base.toml\"\n[[axes]]\nparam = \"t2\"\nvalues = [0.01, 0.02]\n",
    )
    .unwrap();
    let out_a = dir.join("a.csv");
    let out_b = dir.join("b.csv");
    for out in [&out_a, &out_b] {
        let status = Command::new(exe())
            .args([
                "sweep",
                "--config",
                spec.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap(),
        "sweep output must be byte-stable"
    );
}

#[test]
fn divergent_run_exits_4_with_partial_trace() {
    let dir = temp_dir("diverge");
    let cfg = dir.join("diverge.toml");
    let scenario = std::fs::read_to_string(configs_dir().join("example4.toml"))
        .unwrap()
        .replace(
            "d = { kind = \"zero\" }",
            "d = { kind = \"constant\", value = 1.0e13 }",
        )
        .replace("enabled = true", "enabled = false");
    std::fs::write(&cfg, scenario).unwrap();
    let out = dir.join("partial.csv");
    let output = Command::new(exe())
        .args([
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "{output:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().count() > 1, "partial trace must be written");
}
