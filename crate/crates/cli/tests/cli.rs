//! End-to-end runs of the `homogenizer` binary.

use std::path::Path;
use std::process::{Command, Output};

use homogenizer::{
    analysis::find_min_reservoir, exact_metrics, metrics::record_at, run_protocol, Coupling, TaskDirection,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homogenizer"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// A parsed CSV body: header plus rows, comment lines dropped.
struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Csv {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().expect("header").split(',').map(str::to_owned).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
        Csv { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    fn get(&self, row: usize, name: &str) -> &str {
        &self.rows[row][self.col(name)]
    }

    fn real(&self, row: usize, name: &str) -> f64 {
        self.get(row, name).parse().unwrap()
    }

    fn int(&self, row: usize, name: &str) -> usize {
        self.get(row, name).parse().unwrap()
    }
}

fn direction(label: &str) -> TaskDirection {
    label.parse().unwrap()
}

#[test]
fn surface_grid_has_one_row_per_point_in_order() {
    let csv = Csv::parse(&stdout(&["surface", "--direction", "m2p", "--eta", "0.01", "--N", "1..60", "--n", "1..60"]));
    assert_eq!(csv.header, ["engine", "direction", "eta", "N", "n", "epsilon", "log_delta", "R"]);
    assert_eq!(csv.rows.len(), 3600);
    let keys: Vec<(usize, usize)> = (0..csv.rows.len()).map(|i| (csv.int(i, "N"), csv.int(i, "n"))).collect();
    let mut expected = keys.clone();
    expected.sort();
    assert_eq!(keys, expected);

    // Spot checks against an independent recurrence run.
    let trace = run_protocol(TaskDirection::MixedToPure, 60, 60, Coupling::new(0.01).unwrap()).unwrap();
    for i in [0, 59, 1234, 3599] {
        let rec = record_at(&trace, csv.int(i, "N"), csv.int(i, "n"));
        assert_eq!(csv.real(i, "epsilon"), rec.epsilon);
        assert_eq!(csv.real(i, "log_delta"), rec.log_delta);
        assert_eq!(csv.real(i, "R"), rec.relative_deterioration);
    }
}

#[test]
fn exact_surface_matches_library() {
    let csv = Csv::parse(&stdout(&["exact", "--direction", "p2m", "--eta", "0.3", "--N", "2..3", "--n", "2..4"]));
    assert_eq!(csv.rows.len(), 6);
    assert!(csv.rows.iter().all(|r| r[0] == "exact"));
    let lib = exact_metrics(TaskDirection::PureToMixed, 3, 4, Coupling::new(0.3).unwrap()).unwrap();
    let last = csv.rows.len() - 1;
    assert_eq!((csv.int(last, "N"), csv.int(last, "n")), (3, 4));
    assert_eq!(csv.real(last, "R"), lib[3].relative_deterioration);
}

#[test]
fn surface_with_both_engines_interleaves_by_point() {
    let csv = Csv::parse(&stdout(&["surface", "--engine", "both", "--eta", "0.1", "--N", "1..2", "--n", "1..2"]));
    assert_eq!(csv.rows.len(), 2 * 2 * 4);
    assert_eq!(csv.get(0, "engine"), "approx");
    assert_eq!(csv.get(1, "engine"), "exact");
    // A single reservoir qubit is described exactly by the recurrence.
    assert!((csv.real(0, "R") - csv.real(1, "R")).abs() < 1e-12);
}

#[test]
fn compare_reports_both_engines_on_the_diagonal() {
    let csv = Csv::parse(&stdout(&["compare", "--eta", "0.01", "--k", "3"]));
    assert_eq!(csv.rows.len(), 6);
    for i in 0..6 {
        let k = csv.int(i, "N");
        assert_eq!(k, csv.int(i, "n"));
        let exact_r = csv.real(i, "R_exact");
        let approx_r = csv.real(i, "R_approx");
        assert!(exact_r.is_finite() && approx_r.is_finite());
        assert!(((exact_r - approx_r).abs() / exact_r - csv.real(i, "rel_gap")).abs() < 1e-15);
        let dir = direction(csv.get(i, "direction"));
        let oracle = exact_metrics(dir, k, k, Coupling::new(0.01).unwrap()).unwrap();
        assert_eq!(exact_r, oracle[k - 1].relative_deterioration);
    }
}

#[test]
fn resources_are_monotone_and_ordered() {
    let csv = Csv::parse(&stdout(&["resources", "--eta", "0.3", "--eps", "0.1", "--n", "1..30", "--direction", "both"]));
    assert_eq!(csv.rows.len(), 30);
    let p: Vec<usize> = (0..30).map(|i| csv.int(i, "N_min_p2m")).collect();
    let m: Vec<usize> = (0..30).map(|i| csv.int(i, "N_min_m2p")).collect();
    assert_eq!((p[0], m[0]), (6, 18));
    assert!(p.windows(2).all(|w| w[1] >= w[0]));
    assert!(m.windows(2).all(|w| w[1] >= w[0]));
    assert!(p.iter().zip(&m).all(|(a, b)| b >= a));
    let c = Coupling::new(0.3).unwrap();
    for n in [7, 30] {
        let oracle = find_min_reservoir(TaskDirection::MixedToPure, c, 0.1, n).unwrap().found();
        assert_eq!(Some(m[n - 1]), oracle);
    }
}

#[test]
fn lifetime_inverts_resources() {
    let csv = Csv::parse(&stdout(&["lifetime", "--eta", "0.3", "--eps", "0.1", "--N", "5..20"]));
    assert_eq!(csv.rows.len(), 16);
    for i in 0..csv.rows.len() {
        let n_res = csv.int(i, "N");
        let p = csv.int(i, "n_max_p2m");
        let m = csv.int(i, "n_max_m2p");
        assert!(m <= p, "N={n_res}");
    }
    // N = 6 is the smallest reservoir serving the first pure-to-mixed use.
    assert_eq!(csv.int(0, "n_max_p2m"), 0);
    assert!(csv.int(1, "n_max_p2m") >= 1);
}

#[test]
fn classify_matches_expected_verdicts() {
    let csv = Csv::parse(&stdout(&["classify", "--eta", "0.01,0.1", "--k", "60"]));
    assert_eq!(csv.header, ["engine", "direction", "eta", "k_max", "verdict", "argmin_k", "min_log_R"]);
    let verdict = |dir: &str, eta: f64| {
        (0..csv.rows.len())
            .find(|&i| csv.get(i, "direction") == dir && csv.real(i, "eta") == eta)
            .map(|i| csv.get(i, "verdict").to_owned())
            .unwrap()
    };
    assert_eq!(verdict("p2m", 0.01), "converging");
    assert_eq!(verdict("m2p", 0.01), "diverging");
    assert_ne!(verdict("p2m", 0.1), "converging");
}

#[test]
fn entropy_boundary_is_reservoir_size() {
    let csv = Csv::parse(&stdout(&["entropy", "--eta", "0.1", "--N", "1..5", "--n", "0..4"]));
    assert_eq!(csv.rows.len(), 25);
    for i in 0..csv.rows.len() {
        if csv.int(i, "n") == 0 {
            assert_eq!(csv.real(i, "S_tot"), csv.int(i, "N") as f64);
        }
    }
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["surface", "--eta", "0.01,0.1", "--N", "1..25", "--n", "1..25"];
    let reference = stdout(&args);
    for threads in ["1", "2", "7"] {
        let mut with_threads = args.to_vec();
        with_threads.extend(["--threads", threads]);
        assert_eq!(stdout(&with_threads), reference, "threads = {threads}");
    }
    let resources = ["resources", "--eta", "0.3,0.2", "--eps", "0.1", "--n", "1..12"];
    assert_eq!(stdout(&[&resources[..], &["--threads", "1"]].concat()), stdout(&resources));
}

#[test]
fn metadata_header_records_version_hash_and_tolerances() {
    let text = stdout(&["classify", "--eta", "0.1", "--k", "20"]);
    let meta: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(meta.iter().any(|l| l.starts_with("# version: homogenizer ")));
    let hash = meta.iter().find_map(|l| l.strip_prefix("# config_sha256: ")).unwrap();
    assert_eq!(hash.len(), 64);
    assert!(meta.iter().any(|l| l.starts_with("# tolerances:") && l.contains("weak_compare_gap=5e-8")));
    let other = stdout(&["classify", "--eta", "0.1", "--k", "21"]);
    assert!(!other.contains(hash));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["surface", "--eta", "0.1", "--N", "1..3"]), 2);
    assert_eq!(code(&["surface", "--eta", "3.0", "--N", "1..3", "--n", "1..3"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["surface", "--eta", "0.1", "--N", "1..3", "--n", "x"]), 2);
    assert_eq!(code(&["resources", "--eta", "0.1", "--eps", "0.7", "--n", "1..3"]), 2);
    assert_eq!(code(&["classify", "--eta", "0.1", "--k", "3"]), 2);
    assert_eq!(code(&["surface", "--eta", "0.1", "--N", "1..100", "--n", "1..100", "--grid-cap", "1000"]), 3);
    assert_eq!(code(&["exact", "--eta", "0.1", "--N", "1..11", "--n", "1"]), 3);
    assert_eq!(code(&["compare", "--eta", "0.1", "--k", "4", "--exact-cap", "3"]), 3);
    assert_eq!(code(&["classify", "--eta", "0.1", "--k", "20"]), 0);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "direction = \"p2m\"\neta = [0.1]\nN = \"1..4\"\nn = \"1..3\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = Csv::parse(&stdout(&["surface", "--config", cfg]));
    assert_eq!(from_file.rows.len(), 12);
    assert!(from_file.rows.iter().all(|r| r[1] == "p2m"));

    let overridden = Csv::parse(&stdout(&["surface", "--config", cfg, "--direction", "m2p", "--n", "1..2"]));
    assert_eq!(overridden.rows.len(), 8);
    assert!(overridden.rows.iter().all(|r| r[1] == "m2p"));

    // Same resolved run, same bytes, whichever way it was specified.
    let flags = stdout(&["surface", "--direction", "p2m", "--eta", "0.1", "--N", "1..4", "--n", "1..3"]);
    assert_eq!(stdout(&["surface", "--config", cfg]), flags);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "etta = 0.1\n").unwrap();
    assert_eq!(run(&["surface", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn json_output_and_sidecar_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.json");
    let status = bin()
        .args(["compare", "--eta", "0.01", "--k", "3", "--format", "json", "--output"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["R_exact"].is_f64() && r["R_approx"].is_f64()));

    let meta_path = Path::new(&format!("{}.meta.json", out.display())).to_owned();
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(meta_path).unwrap()).unwrap();
    assert_eq!(meta["command"], "compare");
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn csv_written_to_file_equals_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let args = ["surface", "--eta", "0.2", "--N", "1..3", "--n", "1..3"];
    let status = bin().args(args).arg("--output").arg(&out).status().unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&args));
}

#[test]
fn reals_have_seventeen_significant_digits() {
    let csv = Csv::parse(&stdout(&["surface", "--eta", "0.1", "--N", "2", "--n", "3"]));
    for name in ["eta", "epsilon", "log_delta", "R"] {
        let s = csv.get(0, name);
        let mantissa = s.split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{name} = {s}");
    }
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 9, "{text}");
    assert!(out.status.success());
}

/// The column sets a downstream plotting tool reads.
#[test]
fn csv_schemas_are_fixed() {
    let header = |args: &[&str]| Csv::parse(&stdout(args)).header.join(",");
    assert_eq!(
        header(&["surface", "--eta", "0.1", "--N", "1", "--n", "1"]),
        "engine,direction,eta,N,n,epsilon,log_delta,R"
    );
    assert_eq!(
        header(&["exact", "--eta", "0.1", "--N", "1", "--n", "1"]),
        "engine,direction,eta,N,n,epsilon,log_delta,R"
    );
    assert_eq!(
        header(&["compare", "--eta", "0.1", "--k", "1"]),
        "engine,direction,eta,N,n,epsilon_approx,log_delta_approx,R_approx,epsilon_exact,log_delta_exact,R_exact,rel_gap"
    );
    assert_eq!(header(&["entropy", "--eta", "0.1", "--N", "1", "--n", "0"]), "engine,direction,eta,N,n,S_tot");
    assert_eq!(
        header(&["resources", "--eta", "0.1", "--eps", "0.1", "--n", "1"]),
        "engine,eta,epsilon_star,n,N_min_p2m,N_min_m2p"
    );
    assert_eq!(
        header(&["lifetime", "--eta", "0.1", "--eps", "0.1", "--N", "1"]),
        "engine,eta,epsilon_star,N,n_max_p2m,n_max_m2p"
    );
    assert_eq!(
        header(&["classify", "--eta", "0.1", "--k", "10"]),
        "engine,direction,eta,k_max,verdict,argmin_k,min_log_R"
    );
}
