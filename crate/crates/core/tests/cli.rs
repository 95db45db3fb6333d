use std::path::Path;
use std::process::Command;

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lattice-waves")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).to_string_lossy().into_owned()
}

#[test]
fn exit_codes_follow_the_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    let out = out.to_str().unwrap();
    let conf = config("correctors.conf");

    let (code, stdout) = cli(&["correctors", "--config", &conf, "--out", out]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("[PASS] max_multiplier"));
    for f in ["manifest.json", "resolved.conf", "summary.json", "correctors.csv"] {
        assert!(Path::new(out).join(f).exists(), "{f}");
    }

    let (code, stdout) = cli(&["correctors", "--config", &conf, "--out", out, "--override", "checks.max_scheme_gap=1e-12"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("[FAIL] scheme_gap"));

    let (code, _) = cli(&["correctors", "--config", &conf, "--out", out, "--override", "checks.nope=1"]);
    assert_eq!(code, 2);
}

#[test]
fn resolved_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let (code, _) = cli(&["wave-scan", "--config", &config("wave-scan.conf"), "--out", a.to_str().unwrap(), "--override", "sim.t_end=40"]);
    assert_eq!(code, 0);
    let resolved = a.join("resolved.conf");
    let (code, _) = cli(&["wave-scan", "--config", resolved.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(code, 0);
    for f in ["profile.csv", "front_1d.csv", "scan.csv", "resolved.conf"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}
