//! Frozen command-line outputs. The numbers in the golden files are also
//! checked against the Fock-space oracle, so a regenerated file cannot
//! silently drift.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use zalmtwin_cli::validate::oracle_of;
use zalmtwin_core::source::SourceParams;
use zalmtwin_oracle::{oracle_fidelity, oracle_pgen, oracle_pgen_dark, oracle_spin_spin, BellSign};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/v1").join(name)
}

fn run(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_zalmtwin")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

const SWEEP: [&str; 13] = [
    "sweep",
    "--from",
    "0.01",
    "--to",
    "0.2",
    "--steps",
    "5",
    "--metrics",
    "pgen,pgen_dark,fidelity,trace",
    "--bsm-efficiency",
    "0.9",
    "--dark-click-prob",
    "0.001",
];

fn sweep_params(mu: f64) -> SourceParams {
    SourceParams {
        mean_photon: mu,
        bsm_efficiency: 0.9,
        dark_click_prob: 0.001,
        ..SourceParams::default()
    }
}

#[test]
fn csv_sweep_matches_golden() {
    let golden = std::fs::read(data("sweep_mean_photon.csv")).unwrap();
    assert_eq!(run(&SWEEP), golden);
}

#[test]
fn json_sweep_matches_golden() {
    let golden = std::fs::read(data("sweep_mean_photon.json")).unwrap();
    let mut args = SWEEP.to_vec();
    args.extend(["--format", "json"]);
    assert_eq!(run(&args), golden);
}

#[test]
fn golden_sweep_agrees_with_oracle() {
    let mut reader = csv::Reader::from_path(data("sweep_mean_photon.csv")).unwrap();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let num = |k: usize| rec[k].parse::<f64>().unwrap();
        let p = sweep_params(num(0));
        let o = oracle_of(&p);
        let pattern = p.herald_pattern.clicks();
        let pgen = oracle_pgen(&o, pattern).value;
        let dark = oracle_pgen_dark(&o, pattern, p.dark_click_prob).value;
        let fid = oracle_fidelity(&o, pattern, BellSign::Plus).value;
        assert!((num(1) - pgen).abs() < 1e-9 * pgen);
        assert!((num(2) - dark).abs() < 1e-9 * dark);
        assert!((num(3) - fid).abs() < 1e-9);
        assert!((num(4) - 1.0).abs() < 1e-12);
        assert_eq!(&rec[6], "");
    }
}

#[test]
fn metrics_match_golden_and_oracle() {
    let args = [
        "metrics",
        "--mean-photon",
        "0.05",
        "--bsm-efficiency",
        "0.9",
        "--click-pattern",
        "1,0,1,1,0,0,1,0",
    ];
    let golden = std::fs::read(data("metrics_click.json")).unwrap();
    assert_eq!(run(&args), golden);

    let v: Value = serde_json::from_slice(&golden).unwrap();
    let p = SourceParams {
        mean_photon: 0.05,
        bsm_efficiency: 0.9,
        ..SourceParams::default()
    };
    let rho = oracle_spin_spin(&oracle_of(&p), [1, 0, 1, 1, 0, 0, 1, 0]).value;
    for r in 0..4 {
        for c in 0..4 {
            let cell = &v["spin_dm"][r][c];
            let re = cell[0].as_f64().unwrap();
            let im = cell[1].as_f64().unwrap();
            assert!((re - rho[r][c].re).abs() < 1e-12 && (im - rho[r][c].im).abs() < 1e-12);
        }
    }
}

#[test]
fn validate_exits_zero_when_engine_agrees() {
    let out = Command::new(env!("CARGO_BIN_EXE_zalmtwin")).args(["validate", "--quick"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("5/5 checks passed"), "{text}");
}

#[test]
fn bad_arguments_fail() {
    let out = Command::new(env!("CARGO_BIN_EXE_zalmtwin"))
        .args(["sweep", "--from", "1", "--to", "0", "--steps", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_zalmtwin"))
        .args(["metrics", "--bsm-efficiency", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"field\":\"bsm_efficiency\""));
}
