use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gaqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaqed"))
        .args(args)
        .output()
        .expect("run gaqed")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn entries(dir: &Path) -> Vec<String> {
    match fs::read_dir(dir) {
        Ok(rd) => rd
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect(),
        Err(_) => Vec::new(),
    }
}

#[test]
fn malformed_config_exits_2_without_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "n = = 6\n").unwrap();
    let out = tmp.path().join("out");
    let r = gaqed(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(entries(&out).is_empty());
}

#[test]
fn unknown_key_and_bad_value_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    assert_eq!(
        gaqed(&["spectrum", "--set", "colour=red", "--out", &out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gaqed(&["dynamics", "--set", "g=-1", "--out", &out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gaqed(&["dynamics", "--set", "dt=0.05", "--out", &out])
            .status
            .code(),
        Some(2)
    );
    assert!(entries(tmp.path()).is_empty());
}

#[test]
fn magic_requires_small_atom() {
    let tmp = tempfile::tempdir().unwrap();
    let r = gaqed(&["magic", "--set", "t_max=1", "--out", &out_arg(tmp.path())]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("small atom"));
    assert!(entries(tmp.path()).is_empty());
}

#[test]
fn no_bic_for_odd_separation() {
    let tmp = tempfile::tempdir().unwrap();
    let r = gaqed(&[
        "bound-states",
        "--set",
        "n=5",
        "--set",
        "g=1.5",
        "--set",
        "n_sites=401",
        "--out",
        &out_arg(tmp.path()),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    assert!(String::from_utf8_lossy(&r.stdout).contains("no BIC"));
    let csv = fs::read_to_string(tmp.path().join("bound_states.csv")).unwrap();
    assert!(!csv.lines().any(|l| l.starts_with("BIC,")));
    assert!(csv.lines().any(|l| l.starts_with("BOC_upper,")));
}

#[test]
fn zero_horizon_gives_header_only_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let r = gaqed(&[
        "dynamics",
        "--set",
        "t_max=0",
        "--out",
        &out_arg(tmp.path()),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let exact = fs::read_to_string(tmp.path().join("exact.csv")).unwrap();
    assert_eq!(exact.lines().count(), 1);
    assert!(exact.starts_with("t,p_e,"));
    let ww = fs::read_to_string(tmp.path().join("nonmarkov.csv")).unwrap();
    assert_eq!(ww.lines().count(), 1);
}

#[test]
fn output_is_deterministic_and_manifest_reproduces_it() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    let args = [
        "--set",
        "n=4",
        "--set",
        "g_s=0.1",
        "--set",
        "m=2",
        "--set",
        "t_max=5",
        "--set",
        "delta_points=11",
    ];
    for dir in [&a, &b] {
        let mut v = vec!["magic", "--out"];
        let d = out_arg(dir);
        v.push(&d);
        v.extend(args);
        assert_eq!(gaqed(&v).status.code(), Some(0));
    }
    let manifest = a.join("manifest.json");
    let r = gaqed(&[
        "magic",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        &out_arg(&c),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.len() >= 4);
    for name in outputs {
        let name = name.as_str().unwrap();
        let first = fs::read(a.join(name)).unwrap();
        assert_eq!(
            first,
            fs::read(b.join(name)).unwrap(),
            "{name} differs between runs"
        );
        assert_eq!(
            first,
            fs::read(c.join(name)).unwrap(),
            "{name} differs when rerun from the manifest"
        );
    }
    let dark = fs::read_to_string(a.join("dark_state.csv")).unwrap();
    assert!(dark.contains("plateau,6.40000000000000e-1"));
}

#[test]
fn spectrum_defaults_show_three_branches() {
    let tmp = tempfile::tempdir().unwrap();
    let r = gaqed(&[
        "spectrum",
        "--set",
        "g_points=6",
        "--set",
        "n_sites=61",
        "--out",
        &out_arg(tmp.path()),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let branches = fs::read_to_string(tmp.path().join("branches.csv")).unwrap();
    let mut lines = branches.lines();
    assert_eq!(lines.next(), Some("g,e_upper,e_lower,e_bic"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn toml_config_is_read_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "n = 4\ng = 0.2\nmargin = 3\n").unwrap();
    let out = tmp.path().join("out");
    let r = gaqed(&[
        "bound-states",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "g=0.3",
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["params"]["n"], "4");
    assert_eq!(m["params"]["g"], "0.3");
    let csv = fs::read_to_string(out.join("bound_states.csv")).unwrap();
    // Two BOCs over sites -3..=7; N = 4 has no BIC.
    assert_eq!(csv.lines().count(), 1 + 2 * 11);
}
