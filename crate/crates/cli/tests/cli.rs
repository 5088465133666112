use std::process::Command;

fn beamkf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beamkf"))
}

#[test]
fn config_then_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let printed = beamkf().args(["config", "--preset", "desk"]).output().unwrap();
    assert!(printed.status.success());
    let cfg = dir.path().join("desk.toml");
    std::fs::write(&cfg, &printed.stdout).unwrap();

    let out = dir.path().join("out");
    let run = beamkf()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--trials", "1", "--dims", "2,4", "--beamformer", "geb-seq,dft", "--plot"])
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 5);
    for name in ["mse_vs_dim.csv", "mse_vs_time.csv", "beam_pattern.csv", "selection_trace.csv", "plot.py"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let dims = std::fs::read_to_string(out.join("mse_vs_dim.csv")).unwrap();
    // Header plus two kinds at two dimensions.
    assert_eq!(dims.lines().count(), 5);
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("geb-seq") && stderr.contains("dft"));
}

#[test]
fn invalid_config_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "snr_db = 30\nbogus = 1\n").unwrap();
    let run = beamkf()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("bad.toml"));
}

#[test]
fn run_needs_a_source() {
    let dir = tempfile::tempdir().unwrap();
    let run = beamkf().arg("run").arg("--out").arg(dir.path()).output().unwrap();
    assert!(!run.status.success());
}

#[test]
fn unknown_beamformer_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let run = beamkf()
        .args(["run", "--preset", "desk", "--beamformer", "magic", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!run.status.success());
}
