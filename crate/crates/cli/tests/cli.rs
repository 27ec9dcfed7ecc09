use std::path::{Path, PathBuf};
use std::process::Command;

use fluxonium_cli::run;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

/// Runs in-process with `--out` pointed at a temp file; returns the exit
/// code and the parsed document (if written).
fn run_doc(args: &[&str]) -> (i32, Option<toml::Table>, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.toml");
    let mut argv = vec!["fluxonium".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let code = run(argv);
    let doc = std::fs::read_to_string(&out)
        .ok()
        .map(|s| s.parse::<toml::Table>().unwrap());
    (code, doc, dir)
}

fn result(doc: &toml::Table) -> &toml::Table {
    doc["result"].as_table().unwrap()
}

fn float(t: &toml::Table, path: &[&str]) -> f64 {
    let (last, head) = path.split_last().unwrap();
    let table = head.iter().fold(t, |t, k| t[*k].as_table().unwrap());
    table[*last].as_float().unwrap()
}

#[test]
fn spectrum_plot_has_requested_rows_and_minimum_at_sweet_spot() {
    let dir = tempfile::tempdir().unwrap();
    let plot: PathBuf = dir.path().join("s.csv");
    let (code, doc, _d) = run_doc(&["spectrum", "--plot", plot.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&plot).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "phi_ext_rad,f01_GHz,f02_GHz");
    assert_eq!(lines.len(), 2 + 101);
    let r = result(doc.as_ref().unwrap());
    assert_eq!(r["min_phi_ext"].as_float().unwrap().abs(), 0.0);
    assert!(r["min_f01"].as_float().unwrap() > 0.0);
}

#[test]
fn trap_from_current() {
    let (code, doc, _d) = run_doc(&["trap", "--prebias-current", "500e-9", "--calib", "540e-9"]);
    assert_eq!(code, 0);
    let r = result(doc.as_ref().unwrap());
    assert_eq!(r["n"].as_integer(), Some(1));
    assert_eq!(r["phi_trap"].as_float(), Some(std::f64::consts::PI));
}

#[test]
fn trap_negative_current_and_timeline() {
    let (code, doc, _d) = run_doc(&["trap", "--prebias-current", "-1.2e-6", "--calib", "540e-9"]);
    assert_eq!(code, 0);
    assert_eq!(result(doc.as_ref().unwrap())["n"].as_integer(), Some(-2));

    let tl = fixture("timeline.csv");
    let (code, doc, _d) = run_doc(&["trap", "--timeline", &tl, "--t-c", "1.0", "--calib", "540e-9"]);
    assert_eq!(code, 0);
    let r = result(doc.as_ref().unwrap());
    assert_eq!(r["crossing_time"].as_float(), Some(25.0));
    assert_eq!(r["n"].as_integer(), Some(1));
}

#[test]
fn trap_with_ring_reports_ring_state() {
    let (code, doc, _d) = run_doc(&[
        "trap",
        "--prebias-current",
        "500e-9",
        "--calib",
        "540e-9",
        "--l-kinetic",
        "1e-9",
        "--l-geometric",
        "1e-10",
    ]);
    assert_eq!(code, 0);
    let r = result(doc.as_ref().unwrap());
    assert_eq!(r["n"].as_integer(), Some(1));
    assert!(r.contains_key("i_s") && r.contains_key("e_ring"));
}

#[test]
fn fit_noise_recovers_device_parameters() {
    let data = fixture("coherence.csv");
    let (code, doc, _d) = run_doc(&["fit-noise", "--data", &data]);
    assert_eq!(code, 0);
    let r = result(doc.as_ref().unwrap());
    let p = r["parameters"].as_table().unwrap();
    let want = [
        ("tan_delta_c", 2.0e-6),
        ("a_phi_e", 6.6e-6),
        ("a_phi_r", 4.6e-6),
    ];
    for (k, v) in want {
        let got = p[k].as_float().unwrap();
        assert!((got - v).abs() / v < 0.02, "{k}: {got} vs {v}");
    }
    let d = r["derived"].as_table().unwrap();
    for (k, v) in [("gamma_misc_e_over_2pi_khz", 4.4), ("gamma_misc_r_over_2pi_khz", 14.0)] {
        let got = d[k].as_float().unwrap();
        assert!((got - v).abs() / v < 0.02, "{k}: {got} vs {v}");
    }
}

#[test]
fn fit_decay_models() {
    let (code, doc, _d) = run_doc(&["fit-decay", "exp", "--data", &fixture("t1_decay.csv")]);
    assert_eq!(code, 0);
    let t1 = float(doc.as_ref().unwrap(), &["result", "derived", "t1"]);
    assert!((t1 - 35.0).abs() < 1.0, "{t1}");

    let (code, doc, _d) = run_doc(&["fit-decay", "ramsey", "--data", &fixture("ramsey.csv")]);
    assert_eq!(code, 0);
    let doc = doc.unwrap();
    let dw = float(&doc, &["result", "parameters", "delta_omega"]);
    assert!((dw - 2.0 * std::f64::consts::PI * 0.4).abs() < 0.01, "{dw}");
    let t2r = float(&doc, &["result", "derived", "t2r"]);
    assert!((t2r - 12.0).abs() < 0.5, "{t2r}");
}

#[test]
fn calibrate_recovers_period() {
    let (code, doc, _d) = run_doc(&["calibrate", "--data", &fixture("transmon.csv")]);
    assert_eq!(code, 0);
    let period = float(doc.as_ref().unwrap(), &["result", "parameters", "current_period"]);
    assert!((period - 540e-9).abs() < 1e-12, "{period}");
}

#[test]
fn same_seed_gives_identical_documents() {
    let data = fixture("t1_decay.csv");
    let args = ["fit-decay", "gauss", "--data", data.as_str(), "--seed", "7"];
    let (c1, d1, _a) = run_doc(&args);
    let (c2, d2, _b) = run_doc(&args);
    assert_eq!((c1, c2), (0, 0));
    let (d1, d2) = (d1.unwrap(), d2.unwrap());
    // the --out path differs between runs; everything else must match
    assert_eq!(d1["result"], d2["result"]);
    assert_eq!(d1["provenance"]["inputs"], d2["provenance"]["inputs"]);
    assert_eq!(d1["provenance"]["seed"].as_integer(), Some(7));
}

#[test]
fn documents_are_byte_identical_on_stdout() {
    let bin = env!("CARGO_BIN_EXE_fluxonium");
    let go = || {
        Command::new(bin)
            .args(["spectrum", "--steps", "11", "--seed", "3"])
            .output()
            .unwrap()
    };
    let (a, b) = (go(), go());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("[provenance]") && text.contains("seed = 3"));
}

#[test]
fn input_hash_is_recorded() {
    let data = fixture("t1_decay.csv");
    let (_, doc, _d) = run_doc(&["fit-decay", "exp", "--data", &data]);
    let doc = doc.unwrap();
    let h = doc["provenance"]["inputs"][data.as_str()].as_str().unwrap();
    assert!(h.starts_with("sha256:") && h.len() == 7 + 64);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| {
        let mut argv = vec!["fluxonium"];
        argv.extend_from_slice(args);
        run(argv)
    };
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["spectrum", "--steps", "1"]), 2);
    assert_eq!(code(&["spectrum", "--phi-trap", "nope"]), 2);
    assert_eq!(code(&["trap", "--prebias-current", "1e-7"]), 2);
    assert_eq!(code(&["trap", "--prebias-current", "1e-7", "--calib", "-5e-7"]), 2);
    assert_eq!(code(&["fit-decay", "exp", "--data", &fixture("bad_header.csv")]), 3);
    assert_eq!(code(&["fit-decay", "exp", "--data", &fixture("non_numeric.csv")]), 3);
    assert_eq!(code(&["fit-decay", "exp", "--data", "/nonexistent/x.csv"]), 3);
    assert_eq!(code(&["fit-noise", "--data", &fixture("t1_decay.csv")]), 3);
    // window that excludes the minimum
    assert_eq!(code(&["sweet-spot", "--lo", "0.5", "--hi", "1.0"]), 4);
}

#[test]
fn coherence_budget_plot_columns() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("b.csv");
    let (code, doc, _d) = run_doc(&[
        "coherence-budget",
        "--noise",
        "device2",
        "--device",
        "device2",
        "--steps",
        "5",
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&plot).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("delta_phi_ext_rad,f01_GHz,gamma1_1/us"));
    assert_eq!(text.lines().count(), 2 + 5);
    let r = result(doc.as_ref().unwrap());
    assert_eq!(r["rows"].as_integer(), Some(5));
    assert!(r["nearest_sweet_spot"]["t2e"].as_float().unwrap() > 0.0);
}
