use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command as Process, Output};

use kmshadow_cli::config::{GridInput, Settings};
use kmshadow_cli::preset::PRESETS;
use kmshadow_cli::{Command, RunConfig};
use serde::Deserialize;

const BIN: &str = env!("CARGO_BIN_EXE_kmshadow");
const CRATE_DIR: &str = env!("CARGO_MANIFEST_DIR");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestSweep {
    parameter: String,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRange {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    command: String,
    kappa: f64,
    mu: f64,
    m: f64,
    rho: f64,
    branches: usize,
    constellation: Option<String>,
    snr_db: ManifestRange,
    sweep: ManifestSweep,
}

fn kmshadow(args: &[&str]) -> Output {
    Process::new(BIN)
        .args(args)
        .env_remove("KMSHADOW_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV with `#` comments, split into cells.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let body = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, body)
}

fn is_twelve_digit_float(s: &str) -> bool {
    let s = s.strip_prefix('-').unwrap_or(s);
    let Some((mantissa, exp)) = s.split_once('e') else {
        return false;
    };
    let exp = exp.strip_prefix('-').unwrap_or(exp);
    let digits: Vec<char> = mantissa.chars().collect();
    digits.len() == 13
        && digits[1] == '.'
        && digits.iter().enumerate().all(|(i, c)| i == 1 || c.is_ascii_digit())
        && !exp.is_empty()
        && exp.chars().all(|c| c.is_ascii_digit())
}

#[test]
fn builtin_presets_match_checked_in_manifest() {
    let text = std::fs::read_to_string(Path::new(CRATE_DIR).join("presets.toml")).unwrap();
    let manifest: BTreeMap<String, ManifestEntry> = toml::from_str(&text).unwrap();
    assert_eq!(manifest.len(), PRESETS.len());
    for p in &PRESETS {
        let e = manifest.get(p.name).unwrap_or_else(|| panic!("{} missing from manifest", p.name));
        assert_eq!(Command::from_name(&e.command), Some(p.command), "{}", p.name);
        assert_eq!((e.kappa, e.mu, e.m, e.rho), (p.kappa, p.mu, p.m, p.rho), "{}", p.name);
        assert_eq!(e.branches, p.branches, "{}", p.name);
        assert_eq!(e.constellation.as_deref(), p.constellation, "{}", p.name);
        assert_eq!((e.snr_db.start, e.snr_db.stop, e.snr_db.step), (p.snr_db.start, p.snr_db.stop, p.snr_db.step));
        assert_eq!(e.sweep.parameter, p.sweep.parameter, "{}", p.name);
        assert_eq!(e.sweep.values, p.sweep.values, "{}", p.name);
    }
}

#[test]
fn schema_lists_exactly_the_accepted_keys() {
    let text = std::fs::read_to_string(Path::new(CRATE_DIR).join("config.schema.json")).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(schema["additionalProperties"], serde_json::Value::Bool(false));
    let keys: Vec<&str> = schema["properties"].as_object().unwrap().keys().map(String::as_str).collect();
    let sample = |k: &str| -> &str {
        match k {
            "preset" => "\"fig1\"",
            "snr_db" => "[0.0, 10.0]",
            "constellation" => "\"qpsk\"",
            "out" => "\"x.csv\"",
            "iid" | "paper_fidelity" => "true",
            "kappa" | "mu" | "m" | "rho" | "tol" => "0.5",
            _ => "3",
        }
    };
    let doc: String = keys.iter().map(|k| format!("{k} = {}\n", sample(k))).collect();
    let parsed = Settings::from_toml_str(&doc).unwrap_or_else(|e| panic!("schema key rejected: {e}"));
    // every Settings field is reachable from the schema
    let s = parsed;
    let set = [
        s.preset.is_some(),
        s.kappa.is_some(),
        s.mu.is_some(),
        s.m.is_some(),
        s.rho.is_some(),
        s.branches.is_some(),
        s.snr_db.is_some(),
        s.constellation.is_some(),
        s.trials.is_some(),
        s.seed.is_some(),
        s.tol.is_some(),
        s.max_terms.is_some(),
        s.bins.is_some(),
        s.iid.is_some(),
        s.paper_fidelity.is_some(),
        s.threads.is_some(),
        s.out.is_some(),
    ];
    assert!(set.iter().all(|&b| b), "schema misses a setting: {set:?}");
    assert!(Settings::from_toml_str("not_a_key = 1").is_err());
}

#[test]
fn example_config_resolves() {
    let s = Settings::from_file(&Path::new(CRATE_DIR).join("config.example.toml")).unwrap();
    assert!(matches!(s.snr_db, Some(GridInput::Range { .. })));
    let cfg = RunConfig::resolve(Command::Ser, s).unwrap();
    assert_eq!(cfg.params.branches(), 4);
    assert_eq!(cfg.snr_grid_db.len(), 21);
    assert_eq!(cfg.seed, 42);
}

#[test]
fn capacity_csv_schema_and_formatting() {
    let out = kmshadow(&["capacity", "--preset", "fig6", "--snr-db", "-5:5:5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("reconstruction"));
    let (header, body) = rows(&text);
    assert_eq!(header, ["snr_db", "capacity_series", "capacity_quadrature"]);
    assert_eq!(body.len(), 3);
    for row in &body {
        for cell in row {
            assert!(is_twelve_digit_float(cell), "bad float '{cell}'");
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(kmshadow(&["ser", "--bogus"]).status.code(), Some(1));
    assert_eq!(kmshadow(&["ser", "--preset", "fig9"]).status.code(), Some(1));
    assert_eq!(kmshadow(&["ser", "--kappa", "1"]).status.code(), Some(1));
    assert_eq!(kmshadow(&["ser", "--preset", "fig4"]).status.code(), Some(1), "QAM is not PSK");
    assert_eq!(kmshadow(&["ser", "--preset", "fig2", "--rho", "1"]).status.code(), Some(1));
    let conv = kmshadow(&["capacity", "--preset", "fig5", "--rho", "0.9", "--max-terms", "5", "--snr-db", "10"]);
    assert_eq!(conv.status.code(), Some(2), "{}", String::from_utf8_lossy(&conv.stderr));
    assert_eq!(kmshadow(&["selftest"]).status.code(), Some(0));
    assert_eq!(kmshadow(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_directory_from_environment_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let status = Process::new(BIN)
        .args(["capacity", "--preset", "fig6", "--snr-db", "0"])
        .env("KMSHADOW_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let written = std::fs::read_to_string(dir.path().join("capacity_fig6.csv")).unwrap();
    assert!(written.contains("capacity_series"));

    let explicit = dir.path().join("nested/cap.csv");
    let status = Process::new(BIN)
        .args(["capacity", "--preset", "fig6", "--snr-db", "0", "--out"])
        .arg(&explicit)
        .env("KMSHADOW_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&explicit).unwrap(), written);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "preset = \"fig6\"\nbranches = 3\nsnr_db = [0.0, 10.0]\n").unwrap();
    let out = kmshadow(&["capacity", "--config", path.to_str().unwrap(), "--snr-db", "10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("L=3"));
    assert_eq!(rows(&text).1.len(), 1);
    std::fs::write(&path, "kapa = 1.0\n").unwrap();
    assert_eq!(kmshadow(&["capacity", "--config", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn single_branch_iid_column_matches_analytic() {
    let out = kmshadow(&["pdf", "--L", "1", "--iid", "--kappa", "2", "--mu", "2", "--m", "2", "--trials", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, body) = rows(&stdout(&out));
    assert_eq!(header, ["gamma", "analytic_pdf", "mc_density", "mc_stderr", "iid_pdf"]);
    assert_eq!(body.len(), 60);
    for row in body {
        let a: f64 = row[1].parse().unwrap();
        let b: f64 = row[4].parse().unwrap();
        assert!((a / b - 1.0).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn seeded_runs_are_byte_identical_across_thread_counts() {
    let args = ["ber", "--preset", "fig4", "--trials", "30000", "--seed", "9", "--snr-db", "0:10:5"];
    let a = kmshadow(&args);
    let b = kmshadow(&args);
    let with = |t: &str| {
        let mut v = vec!["--threads", t];
        v.extend_from_slice(&args);
        kmshadow(&v)
    };
    let (c, d) = (with("1"), with("3"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert_eq!(a.stdout, d.stdout);
    let other_seed = kmshadow(&["ber", "--preset", "fig4", "--trials", "30000", "--seed", "10", "--snr-db", "0:10:5"]);
    assert_ne!(a.stdout, other_seed.stdout);
}
