//! End-to-end checks of the `volwing` binary: output and exit codes.

use std::process::{Command, Output};

const CW_PATH: &str =
    "model = cw\nsigma = 0.2\nalpha = 1.5\nformula = cw-right\nregime = right-atypical\n\
    path = fixed-t-kappa-grid\nt = 0.25\nkappas = 0.5, 1, 2, 4\n";

fn volwing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volwing"))
        .args(args)
        .output()
        .unwrap()
}

fn field(out: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{key}\t")))
        .unwrap();
    line.split('\t').nth(1).unwrap().parse().unwrap()
}

#[test]
fn price_and_impvol_black_scholes() {
    let out = volwing(&["price", "bs:sigma=0.2", "--kappa", "0.1", "--t", "1"]);
    assert!(out.status.success());
    let call = field(&out, "call");
    let put = field(&out, "put");
    assert!((call - put - (1.0 - 0.1f64.exp())).abs() < 1e-14);
    let out = volwing(&["impvol", "bs:sigma=0.2", "--kappa", "-0.3", "--t", "0.5"]);
    assert!((field(&out, "sigma") - 0.2).abs() < 1e-12);
}

#[test]
fn regime_mismatch_exits_with_2() {
    let out = volwing(&[
        "smile",
        "bs:sigma=0.2",
        "--kappa",
        "0.5",
        "--t",
        "0.1",
        "--formula",
        "cw-right",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn accuracy_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    std::fs::write(&cfg, format!("{CW_PATH}max_gap = 1e-9\n")).unwrap();
    let out = volwing(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn bad_input_exits_with_1() {
    let out = volwing(&["price", "vasicek:a=1", "--kappa", "0.1", "--t", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = volwing(&["price", "bs:sigma=0.2", "--kappa", "0.1", "--t", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = volwing(&["price", "bs:sigma=0.2", "--kappa", "0.1", "--t", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cw.cfg");
    let table = dir.path().join("cw.csv");
    std::fs::write(&cfg, format!("{CW_PATH}max_gap = 0.05\n")).unwrap();
    let out = volwing(&[
        "verify",
        cfg.to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("kappa,t,exact_price,exact_vol,asym_vol,ratio,formula,capped")
    );
    assert_eq!(lines.count(), 4);
}
