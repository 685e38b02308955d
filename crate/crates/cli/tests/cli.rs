use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn dfpep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfpep")).args(args).output().expect("spawn dfpep")
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    dfpep(&args)
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn rows(path: &Path) -> Vec<HashMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| headers.iter().map(String::from).zip(r.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const ATTRACTIVE: &str = r#""potential": {"p1": 0, "p2": -6, "p3": 0.5, "q": 1, "alpha": 0.3},
  "scheme": {"greene_aldrich": true}, "context": "nonrelativistic""#;

#[test]
fn exit_code_zero_on_success() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "ok.json", &format!(r#"{{{ATTRACTIVE}, "states": [{{"n": 0, "l": 1, "d": 3}}]}}"#));
    let out = run("spectrum", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_code_two_on_bad_config() {
    let tmp = TempDir::new().unwrap();
    let unknown = write_config(&tmp, "unknown.json", &format!(r#"{{{ATTRACTIVE}, "colour": "red"}}"#));
    let missing = write_config(&tmp, "missing.json", r#"{"potential": {"p1": 1}}"#);
    let q0 = write_config(&tmp, "q0.json", r#"{"potential": {"p1": 1, "p2": 2, "p3": 1, "q": 0, "alpha": 0.1}}"#);
    for cfg in [&unknown, &missing, &q0] {
        let out = run("spectrum", cfg, &tmp.path().join("out"), &[]);
        assert_eq!(out.status.code(), Some(2), "{}", cfg.display());
        assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
    }
    let no_config = dfpep(&["spectrum", "--out", tmp.path().join("out").to_str().unwrap()]);
    assert_eq!(no_config.status.code(), Some(2));
    let relativistic = write_config(&tmp, "rel.json", r#"{"potential": {"p1": 1, "p2": 2, "p3": 1, "alpha": 0.1}}"#);
    assert_eq!(run("oracle-compare", &relativistic, &tmp.path().join("out"), &[]).status.code(), Some(2));
}

#[test]
fn exit_code_three_keeps_partial_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "partial.json",
        r#"{"potential": {"p1": 0, "p2": -6, "p3": -50, "q": 1, "alpha": 0.3},
            "scheme": {"greene_aldrich": true}, "context": "nonrelativistic",
            "states": [{"n": 0, "l": 1, "d": 3}]}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = run("spectrum", &cfg, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(3));
    let mirror = json(&out_dir.join("spectrum.json"));
    assert_eq!(mirror["failures"].as_array().unwrap().len(), 1);
    assert!(out_dir.join("spectrum.csv").exists());
}

#[test]
fn spectrum_output_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("spectrum", &preset("table1.json"), &a, &[]).status.code(), Some(0));
    assert_eq!(run("spectrum", &preset("table1.json"), &b, &[]).status.code(), Some(0));
    for file in ["spectrum.csv", "spectrum.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }
}

#[test]
fn empty_state_list_gives_header_only_csv() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "empty.json", r#"{"potential": {"p1": 1, "p2": 2, "p3": 1, "alpha": 0.1}, "states": []}"#);
    let out_dir = tmp.path().join("out");
    assert_eq!(run("spectrum", &cfg, &out_dir, &[]).status.code(), Some(0));
    let text = fs::read_to_string(out_dir.join("spectrum.csv")).unwrap();
    assert_eq!(text, "n,l,D,branch,E,residual,validity_flags\n");
}

#[test]
fn table1_preset_rows_depend_only_on_kappa() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    assert_eq!(run("spectrum", &preset("table1.json"), &out_dir, &[]).status.code(), Some(0));
    let table = rows(&out_dir.join("spectrum.csv"));
    assert!(!table.is_empty());
    let kappa = |r: &HashMap<String, String>| {
        let (d, l) = (num(r, "D") as i64, num(r, "l") as i64);
        (d + 2 * l - 1) * (d + 2 * l - 3)
    };
    let mut by_key: HashMap<(String, i64, String), Vec<f64>> = HashMap::new();
    for r in &table {
        assert!(num(r, "residual").abs() < 1e-9, "{r:?}");
        by_key.entry((r["n"].clone(), kappa(r), r["branch"].clone())).or_default().push(num(r, "E"));
    }
    // (l, D) = (1, 3) and (0, 5) share kappa = 8.
    let shared = &by_key[&("0".to_string(), 8, "positive".to_string())];
    assert!(shared.len() >= 2);
    for energies in by_key.values() {
        assert!(energies.iter().all(|e| e.to_bits() == energies[0].to_bits()), "{energies:?}");
    }
}

#[test]
fn validate_table1_reports_printed_values_verbatim() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let out = dfpep(&["validate-table1", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let data = json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/table1.json"));
    let printed: HashMap<(u64, u64, u64), (f64, f64)> = data["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let key = (e["n"].as_u64().unwrap(), e["l"].as_u64().unwrap(), e["d"].as_u64().unwrap());
            (key, (e["positive"].as_f64().unwrap(), e["negative"].as_f64().unwrap()))
        })
        .collect();
    let report = rows(&out_dir.join("table1_report.csv"));
    assert_eq!(report.len(), 3 * printed.len());
    for r in &report {
        let key = (num(r, "n") as u64, num(r, "l") as u64, num(r, "D") as u64);
        assert_eq!((num(r, "printed_positive"), num(r, "printed_negative")), printed[&key]);
        if !r["solver_residual_max"].is_empty() {
            assert!(num(r, "solver_residual_max") < 1e-9, "{r:?}");
        }
    }
    let summary = json(&out_dir.join("table1_report.json"));
    assert!(summary["best_candidate"].is_object());
}

#[test]
fn figure_presets_record_reference_energy_and_node_count() {
    for (fig, n, energy) in [("fig4", 0, 5.29524), ("fig5", 1, 5.18775), ("fig6", 2, 5.02272)] {
        let tmp = TempDir::new().unwrap();
        let out_dir = tmp.path().join("out");
        let out = run("wavefunction", &preset(&format!("{fig}.json")), &out_dir, &[]);
        assert_eq!(out.status.code(), Some(0), "{fig}: {}", String::from_utf8_lossy(&out.stderr));
        let meta = json(&out_dir.join("wavefunction.meta.json"));
        assert_eq!(meta["details"]["reference_energy"].as_f64(), Some(energy));
        let curves = json(&out_dir.join("wavefunction.json"));
        let curve = &curves["curves"][0];
        assert_eq!(curve["nodes"].as_u64(), Some(n), "{fig}");
        assert_eq!(curve["decayed"], Value::Bool(true));
        let samples = rows(&out_dir.join(curve["file"].as_str().unwrap()));
        let h = num(&samples[1], "r") - num(&samples[0], "r");
        let norm: f64 = samples.iter().map(|s| num(s, "F").powi(2) * h).sum();
        assert!((norm - 1.0).abs() < 1e-2, "{fig}: norm {norm}");
    }
}

#[test]
fn oracle_scan_gap_shrinks_with_alpha() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run("oracle-compare", &preset("oracle_alpha_scan.json"), &out_dir, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "csv"))
        .unwrap();
    let table = rows(&csv);
    for n in ["0", "1"] {
        let gaps: Vec<f64> = table.iter().filter(|r| r["n"] == n).map(|r| num(r, "gap")).collect();
        assert_eq!(gaps.len(), 5);
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "n = {n}: {gaps:?}");
    }
    for r in &table {
        assert!(num(r, "analytic_rel_gap").abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn oracle_kappa_zero_rows_have_no_gap() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "k0.json",
        &format!(r#"{{{ATTRACTIVE}, "states": [{{"n": 0, "l": 0, "d": 3}}, {{"n": 0, "l": 0, "d": 1}}]}}"#),
    );
    let out_dir = tmp.path().join("out");
    assert_eq!(run("oracle-compare", &cfg, &out_dir, &[]).status.code(), Some(0));
    let csv = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "csv"))
        .unwrap();
    let table = rows(&csv);
    assert_eq!(table.len(), 2);
    for r in &table {
        assert_eq!(num(r, "gap"), 0.0, "{r:?}");
        assert!(num(r, "analytic_rel_gap").abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn thermo_preset_writes_every_figure() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run("thermo", &preset("thermo.json"), &out_dir, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for fig in 7..=14 {
        let table = rows(&out_dir.join(format!("thermo_fig{fig}.csv")));
        assert!(!table.is_empty(), "fig{fig}");
        assert!(table.iter().all(|r| !r["sum"].is_empty()), "fig{fig}");
    }

    let printed = tmp.path().join("printed");
    let out = run("thermo", &preset("thermo.json"), &printed, &["--bounds", "printed"]);
    assert_eq!(out.status.code(), Some(0));
    let table = rows(&printed.join("thermo_fig7.csv"));
    assert!(table.iter().all(|r| r["integral"].is_empty() && r["note"].contains("integral")), "{:?}", table[0]);
}
