use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattice-spectral"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn kagome_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "spectrum",
        "--lattice",
        "kagome",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spectrum.json")).unwrap())
            .unwrap();
    let iv = &v["intervals"][0];
    assert!((iv["lo"].as_f64().unwrap() + 1.0).abs() <= 1e-4);
    assert!((iv["hi"].as_f64().unwrap() - 0.5).abs() <= 1e-4);
    assert!(dir.path().join("config.json").exists());
}

#[test]
fn ucp_square_exhaustive() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "ucp",
        "--lattice",
        "square",
        "--R",
        "1",
        "--mode",
        "exhaustive",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ucp.json")).unwrap()).unwrap();
    assert_eq!(v["two_points"]["verdict"], "holds");
}

#[test]
fn excluded_energy_exits_two_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "connect",
        "--lattice",
        "hexagonal",
        "--lambda",
        "0",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn malformed_input_exits_two() {
    assert_eq!(run(&["spectrum", "--grid", "8"]).status.code(), Some(2));
    assert_eq!(
        run(&["spectrum", "--lattice", "cubic"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["fermi", "--lattice", "square"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\"lattice\": \"square\", \"tol\": -1}").unwrap();
    assert_eq!(
        run(&["info", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    fs::write(&cfg, "not json").unwrap();
    assert_eq!(
        run(&["info", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn flags_override_config_and_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        "{\"lattice\": \"square\", \"lambda\": 0.1, \"seed\": 3}",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = run(&[
        "fermi",
        "--config",
        cfg.to_str().unwrap(),
        "--lambda=-0.25",
        "--grid",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let echo: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["lambda"], -0.25);
    assert_eq!(echo["seed"], 3);
    assert_eq!(echo["grid"], 32);
    let csv = fs::read_to_string(out.join("fermi.csv")).unwrap();
    assert!(csv.starts_with("x1,x2,abs_p,grad_norm,singular\n"));
    assert!(csv.lines().count() > 10);
}

#[test]
fn outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["connect", "ucp"] {
        for dir in [&a, &b] {
            let o = run(&[
                cmd,
                "--lattice",
                "square",
                "--lambda",
                "0.3",
                "--R",
                "2",
                "--mode",
                "random",
                "--seed",
                "7",
                "--out",
                &out_arg(dir.path()),
            ]);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{cmd}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
    }
    let echo = |d: &Path| {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(d.join("config.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("out");
        v
    };
    assert_eq!(echo(a.path()), echo(b.path()));
    for name in ["path.csv", "ucp.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn thresholds_and_info() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "thresholds",
        "--lattice",
        "hexagonal",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("thresholds.json")).unwrap())
            .unwrap();
    let got: Vec<f64> = v["thresholds"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let want = [-1.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0];
    assert_eq!(got.len(), want.len());
    assert!(got.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-5));

    let o = run(&["info", "--lattice", "ladder", "--d", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["summary"]["d"], 3);
}

#[test]
fn connect_rejects_lattices_without_paths() {
    assert_eq!(
        run(&["connect", "--lattice", "kagome", "--lambda", "0.1"])
            .status
            .code(),
        Some(2)
    );
}
