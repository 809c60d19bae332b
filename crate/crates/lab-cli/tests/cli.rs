use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sslab"))
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("sslab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn spectrum_matches_golden_file() {
    let out = tmp("golden");
    let st = bin()
        .args(["spectrum", "--set", "grid.radial=64", "--set", "grid.angular=3", "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    let golden = read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/spectrum_n2_p3_r64.csv"));
    let fresh = read(&out.join("eigenvalues.csv"));
    let rows = |t: &str| -> Vec<Vec<String>> {
        t.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(String::from).collect()).collect()
    };
    let (g, f) = (rows(&golden), rows(&fresh));
    assert_eq!(g.len(), f.len());
    assert_eq!(g[0], f[0]);
    for (a, b) in g.iter().zip(&f).skip(1) {
        assert_eq!(a[0..2], b[0..2]);
        for c in [2, 3] {
            let (x, y): (f64, f64) = (a[c].parse().unwrap(), b[c].parse().unwrap());
            assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "row {}: {x} vs {y}", a[0]);
        }
    }
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tmp("det-a"), tmp("det-b"));
    for dir in [&a, &b] {
        let st = bin()
            .args(["zero-stability", "--seed", "5", "--set", "zero.count=3", "--set", "zero.s_max=4.0"])
            .args(["--set", "zero.fit_window=[1.0, 4.0]", "--out"])
            .arg(dir)
            .output()
            .unwrap()
            .status;
        assert!(st.success());
    }
    for f in ["runs.csv", "plot_norms.csv", "summary.json", "config.toml"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let json: serde_json::Value = serde_json::from_str(&read(&a.join("summary.json"))).unwrap();
    assert_eq!(json["seed"], 5);
    assert!(read(&a.join("runs.csv")).starts_with(&format!("# config_hash={}", json["config_hash"].as_str().unwrap())));
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
}

#[test]
fn config_file_and_tables_run() {
    let dir = tmp("tables");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("t.toml");
    std::fs::write(&cfg, "[tables]\ngamma = 1.0\nbeta = 1.0\n").unwrap();
    let out = bin().arg("tables").arg("--config").arg(&cfg).arg("--out").arg(dir.join("o")).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("regime finite"), "{stdout}");
    assert!(dir.join("o/plot_integral.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn failures_exit_nonzero_with_stage() {
    let dir = tmp("fail");
    let out = bin().args(["modulate", "--set", "grid.radial=3", "--out"]).arg(&dir).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[config]"));
    let out = bin().args(["evolve", "--config", "/nonexistent/x.toml"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[config]"));
    // far from the soliton: modulation cannot converge within the band
    let out = bin()
        .args(["modulate", "--set", "perturbation.mode=\"random\"", "--set", "perturbation.amplitude=50.0", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[modulate]"), "{}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn modulate_and_evolve_write_reports() {
    let dir = tmp("mod");
    let st = bin()
        .args(["modulate", "--set", "perturbation.mode=\"unstable\"", "--out"])
        .arg(dir.join("m"))
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    let j: serde_json::Value = serde_json::from_str(&read(&dir.join("m/summary.json"))).unwrap();
    assert!(j["result"]["residuals"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() <= 1e-10));
    let st = bin()
        .args(["evolve", "--set", "evolve.s_max=1.0", "--set", "perturbation.mode=\"none\"", "--out"])
        .arg(dir.join("e"))
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    let track = read(&dir.join("e/track.csv"));
    assert!(track.lines().nth(1).unwrap().starts_with("s,nu,abs_d,zeta,d1,d2,norm_q,h1,h2,energy"));
    let _ = std::fs::remove_dir_all(&dir);
}
