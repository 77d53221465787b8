use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use topowg::artifacts::{
    to_json, DisorderSummary, ErrorReport, MatrixArtifact, Provenance, S21Sidecar, TableArtifact, TransferBudget,
};
use topowg::config::{parse_config, ConfigErrorKind, Location};
use topowg_core::band_structure::{dispersion_full, k_grid};
use topowg_core::circuit_model::CircuitParams;
use topowg_core::dynamics::{transfer_protocol, TransferParams};
use topowg_core::to_hz;

fn topowg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topowg"))
        .args(args)
        .arg("--output")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn error_report(out: &Output) -> ErrorReport {
    let err = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(err.trim()).unwrap_or_else(|e| panic!("stderr is not an error report ({e}): {err}"))
}

/// Parses a file under the given schema and checks it serializes back to the
/// same bytes.
fn round_trip<T: serde::Serialize + serde::de::DeserializeOwned>(dir: &Path, name: &str) -> T {
    let text = read(dir, name);
    let v: T = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name} does not re-parse: {e}"));
    assert_eq!(to_json(&v), text, "{name} changed on re-serialization");
    v
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn device1_block_gives_published_elements() {
    let doc = parse_config(topowg::Preset::Device1.text()).unwrap();
    let c = doc.section("circuit").unwrap();
    let expect = [("L0", 1.9e-9), ("C0", 250e-15), ("Cv", 35e-15), ("Cw", 19.2e-15), ("Mv", -38e-12), ("Mw", -32e-12)];
    for (k, v) in expect {
        let got = c.real(k).unwrap();
        assert!((got - v).abs() <= 1e-12 * v.abs(), "{k}: {got} vs {v}");
    }
}

#[test]
fn presets_parse() {
    for p in [topowg::Preset::Device1, topowg::Preset::Device2, topowg::Preset::Teststructure] {
        parse_config(p.text()).unwrap_or_else(|e| panic!("{}: {e}", p.name()));
    }
}

#[test]
fn missing_unit_exits_2_with_location() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "[circuit]\nL0 = 1.9\n");
    let out = topowg(d.path(), &["dispersion", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_report(&out);
    assert_eq!(e.code, "UnitError");
    assert_eq!(e.module, "cli");
    assert_eq!(e.location, Some(Location { line: 2, column: 6 }));
    assert!(!d.path().join("dispersion.csv").exists());
}

#[test]
fn unknown_key_and_missing_key_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "[circuit]\nL0 = 1.9nH\nC00 = 1fF\n");
    let out = topowg(d.path(), &["dispersion", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_report(&out);
    assert_eq!((e.code.as_str(), e.location), ("SchemaError", Some(Location { line: 3, column: 1 })));

    let cfg = write_cfg(d.path(), "[circuit]\nL0 = 1.9nH\n");
    let out = topowg(d.path(), &["dispersion", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_report(&out).message.contains("C0"));
}

#[test]
fn usage_error_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let out = topowg(d.path(), &["dispersion", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let text = format!("{}\n[grid]\ndt = 5ns\n", topowg::Preset::Device2.text());
    let cfg = write_cfg(d.path(), &text);
    let out = topowg(d.path(), &["transfer", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let e = error_report(&out);
    assert_eq!(e.module, "dynamics");
    assert!(e.location.is_none());
}

#[test]
fn superradiance_topological_pair_has_two_roots() {
    let d = tempfile::tempdir().unwrap();
    let out = topowg(d.path(), &["superradiance", "--dn", "2", "--phase", "topological"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&read(d.path(), "superradiance.csv"));
    assert_eq!(rows[0], ["root", "k_d", "frequency_hz"]);
    assert_eq!(rows.len() - 1, 2);
    let p: Provenance = round_trip(d.path(), "superradiance.provenance.json");
    assert_eq!(p.summary["count"], 2);
    assert_eq!(p.config_source, "preset:device1");
}

#[test]
fn dispersion_csv_matches_library() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        d.path(),
        "[circuit]\nL0 = 1.9nH\nC0 = 250fF\nCv = 35fF\nCw = 19.2fF\nMv = -38pH\nMw = -32pH\n[grid]\nn_k = 65\n",
    );
    let out = topowg(d.path(), &["dispersion", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = read(d.path(), "dispersion.csv");
    assert!(text.contains("\r\n"));
    let rows = csv_rows(&text);
    let k = k_grid(65);
    let full = dispersion_full(&CircuitParams::device1(), &k).unwrap();
    assert_eq!(rows.len(), 66);
    for (i, r) in rows[1..].iter().enumerate() {
        assert_eq!(r[0].parse::<f64>().unwrap(), k[i]);
        assert_eq!(r[1].parse::<f64>().unwrap(), to_hz(full.omega_plus[i]));
        assert_eq!(r[2].parse::<f64>().unwrap(), to_hz(full.omega_minus[i]));
    }
}

#[test]
fn transfer_budget_matches_library() {
    let d = tempfile::tempdir().unwrap();
    let out = topowg(d.path(), &["transfer"]);
    assert_eq!(out.status.code(), Some(0));
    let b: TransferBudget = round_trip(d.path(), "transfer.budget.json");
    let lib = transfer_protocol(&TransferParams::device2(), 0.05e-9, 20).unwrap();
    assert!((b.final_population - lib.final_population).abs() < 1e-12);
    assert!((b.leakage - lib.budget.leakage).abs() < 1e-12);
    assert!((b.prep - 0.016).abs() < 1e-12);
    let rows = csv_rows(&read(d.path(), "transfer.csv"));
    assert_eq!(rows[0], ["time_ns", "pop_QL", "pop_EL", "pop_ER", "pop_QR"]);
    let last: f64 = rows.last().unwrap()[4].parse().unwrap();
    assert!((last - b.final_population).abs() < 1e-15);
}

const SMALL_DISORDER: &str = "[circuit]
L0 = 1.9nH
C0 = 253fF
Cv = 17fF
Cw = 33fF
Mv = -32pH
Mw = -38pH
[disorder]
scenario = mutual-inductance
r = 0.3
realizations = 6
n_cells = 12
boundary = matched
seed = 7
";

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), SMALL_DISORDER);
    let a = d.path().join("a");
    let b = d.path().join("b");
    assert_eq!(topowg(&a, &["disorder", "--config", &cfg, "--jobs", "1"]).status.code(), Some(0));
    assert_eq!(topowg(&b, &["disorder", "--config", &cfg, "--jobs", "4"]).status.code(), Some(0));
    assert_eq!(read(&a, "disorder.csv"), read(&b, "disorder.csv"));
    assert_eq!(read(&a, "disorder.summary.json"), read(&b, "disorder.summary.json"));
    let s: DisorderSummary = round_trip(&a, "disorder.summary.json");
    assert_eq!((s.seed, s.n_realizations, s.failed_count), (7, 6, 0));
    let pa: Provenance = round_trip(&a, "disorder.provenance.json");
    let pb: Provenance = round_trip(&b, "disorder.provenance.json");
    assert_eq!(pa.config_sha256, pb.config_sha256);
    assert_eq!(pa.config_sha256.len(), 64);
    assert_eq!((pa.seed, pa.jobs, pb.jobs), (Some(7), Some(1), Some(4)));
}

#[test]
fn seed_flag_overrides_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), SMALL_DISORDER);
    let a = d.path().join("a");
    let b = d.path().join("b");
    topowg(&a, &["disorder", "--config", &cfg]);
    topowg(&b, &["disorder", "--config", &cfg, "--seed", "8"]);
    assert_ne!(read(&a, "disorder.csv"), read(&b, "disorder.csv"));
    let p: Provenance = round_trip(&b, "disorder.provenance.json");
    assert_eq!(p.seed, Some(8));
}

#[test]
fn json_artifacts_re_parse() {
    let d = tempfile::tempdir().unwrap();
    let grid = "[grid]\nn_k = 65\nn_points = 21\nn_tunings = 9\nn_probe = 11\nn_detunings = 3\nn_durations = 4\n";
    let d1 = write_cfg(d.path(), &format!("{}{grid}", topowg::Preset::Device1.text()));
    for cmd in [
        "dispersion",
        "band-edges",
        "zak",
        "finite-modes",
        "coupling-matrix",
        "kappa-profile",
        "superradiance",
        "jg-curves",
    ] {
        let out = topowg(d.path(), &[cmd, "--config", &d1, "--format", "json"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let t: TableArtifact = round_trip(d.path(), &format!("{cmd}.json"));
        assert!(t.rows.iter().all(|r| r.len() == t.columns.len()), "{cmd}");
        let p: Provenance = round_trip(d.path(), &format!("{cmd}.provenance.json"));
        assert_eq!(p.format, "json");
        assert_eq!(p.artifacts[0], format!("{cmd}.json"));
    }
    let out = topowg(d.path(), &["bound-state", "--qubit", "Q4B", "--config", &d1, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    round_trip::<TableArtifact>(d.path(), "bound-state.json");

    let out = topowg(d.path(), &["s21", "--config", &d1, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let m: MatrixArtifact = round_trip(d.path(), "s21.json");
    assert_eq!((m.row_values.len(), m.column_values.len()), (9, 11));
    round_trip::<S21Sidecar>(d.path(), "s21.params.json");

    let d2 = write_cfg(d.path(), &format!("{}{grid}", topowg::Preset::Device2.text()));
    let out = topowg(d.path(), &["chevron", "--config", &d2, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let m: MatrixArtifact = round_trip(d.path(), "chevron.json");
    assert_eq!(m.values.len(), 3);
    assert!(m.values.iter().flatten().all(|v| v.is_some_and(|p| (0.0..=1.0).contains(&p))));
}

#[test]
fn edge_splitting_preset_recovers_localization() {
    let d = tempfile::tempdir().unwrap();
    let out = topowg(d.path(), &["edge-splitting"]);
    assert_eq!(out.status.code(), Some(0));
    let p: Provenance = round_trip(d.path(), "edge-splitting.provenance.json");
    let xi = p.summary["xi_fit"].as_f64().unwrap();
    assert!((xi - 1.7523).abs() < 1e-3, "xi_fit {xi}");
    assert_eq!(p.config_source, "preset:teststructure");
}

#[test]
fn bound_state_requires_a_choice_among_qubits() {
    let d = tempfile::tempdir().unwrap();
    let out = topowg(d.path(), &["bound-state"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_report(&out).message.contains("--qubit"));
}

#[test]
fn out_of_chain_qubit_is_range_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        d.path(),
        "[ssh]\nf0 = 6.6GHz\nJ = 350MHz\ndelta = 0.25\n[chain]\nn_cells = 4\n[qubit.q]\ncell = 9\nsublattice = A\nfrequency = 6.6GHz\ng = 50MHz\n",
    );
    let out = topowg(d.path(), &["bound-state", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_report(&out);
    assert_eq!((e.code.as_str(), e.location), ("RangeError", Some(Location { line: 8, column: 8 })));
}

proptest! {
    #[test]
    fn unit_suffixes_normalize(x in 0.001f64..1000.0, i in 0usize..4) {
        let (unit, scale) = [("pH", 1e-12), ("nH", 1e-9), ("uH", 1e-6), ("H", 1.0)][i];
        let doc = parse_config(&format!("[circuit]\nL0 = {x}{unit}\n")).unwrap();
        let v = doc.section("circuit").unwrap().real("L0").unwrap();
        prop_assert!((v - x * scale).abs() <= 1e-15 * (x * scale));
    }

    #[test]
    fn frequencies_accept_every_prefix(x in 1.0f64..1e3, i in 0usize..4) {
        let (unit, scale) = [("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)][i];
        let doc = parse_config(&format!("[ssh]\nJ = {x} {unit}\n")).unwrap();
        prop_assert_eq!(doc.section("ssh").unwrap().real("J").unwrap(), x * scale);
    }

    #[test]
    fn negative_capacitance_is_range_error(x in 0.001f64..1e3) {
        let e = parse_config(&format!("[circuit]\nCv = -{x}fF\n")).unwrap_err();
        prop_assert_eq!(e.kind, ConfigErrorKind::Range);
        prop_assert_eq!(e.location, Some(Location { line: 2, column: 6 }));
    }

    #[test]
    fn csv_floats_round_trip(x in proptest::num::f64::NORMAL) {
        prop_assert_eq!(topowg::artifacts::float(x).parse::<f64>().unwrap(), x);
    }
}
