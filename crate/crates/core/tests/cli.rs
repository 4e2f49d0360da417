use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kpp-sharp"))
}

#[test]
fn wave_prints_the_speed_and_writes_the_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["wave", "--m", "2", "--tol", "1e-6", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("c* = 1.000"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("wave_m2.csv")).unwrap();
    assert!(csv.lines().count() > 10);
}

#[test]
fn verify_ode_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["verify", "ode", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("ode.csv").exists());
    assert!(dir.path().join("checks.csv").exists());
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["wave", "--config"])
        .arg(dir.path().join("absent.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(bin().arg("nonsense").status().unwrap().code(), Some(2));
}

#[test]
fn flow_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, kpp_sharp::config::PRESETS[4].1).unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = bin()
            .args(["flow", "--eps", "0.02", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&path)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert!(a.starts_with("t,marker_index,x,y"));
}

#[test]
fn front_methods_write_trajectories() {
    for method in ["markers", "levelset"] {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let status = bin()
            .args(["front", "--preset", "ac6", "--method", method, "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "{method}");
        assert!(std::fs::read_to_string(path).unwrap().lines().count() > 100);
    }
}
