use std::path::Path;
use std::process::{Command, Output};

use combtn_cli::commands::print_verify;
use combtn_core::verify::{verify_with, Formulas, Grid};
use combtn_core::{costmodel, NetworkParams, Result as CoreResult};

fn combtn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combtn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const EXAMPLE: [&str; 10] = [
    "--teeth",
    "50",
    "--tooth-len",
    "5",
    "--dim-raw",
    "100",
    "--dim-comp",
    "30",
    "--bond",
    "10",
];

#[test]
fn cost_example_table() {
    let o = combtn(&[&["cost"][..], &EXAMPLE].concat());
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for v in ["1519410", "1438010", "1443010", "81400"] {
        assert!(s.contains(v), "missing {v} in\n{s}");
    }
    let o = combtn(&[&["cost"][..], &EXAMPLE, &["--basis", "printed"]].concat());
    assert!(stdout(&o).contains("76400"));
}

#[test]
fn cost_rejects_d_above_raw_dim() {
    let o = combtn(&["cost", "--teeth", "3", "--tooth-len", "2", "--dim-raw", "2", "--dim-comp", "3", "--bond", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d <= D"));
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(combtn(&["cost", "--teeth", "many"]).status.code(), Some(2));
    assert_eq!(combtn(&["threshold", "--teeth", "1", "--dim-comp", "30"]).status.code(), Some(2));
    assert_eq!(combtn(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn threshold_example_text_and_json() {
    let o = combtn(&["threshold", "--teeth", "50", "--dim-comp", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("x- = 1.04"));
    assert!(s.contains("x+ = 28.92"));
    assert!(s.contains("28.83") && s.contains("0.09"));
    assert!(s.contains("CombWindow"));

    let o = combtn(&["threshold", "--teeth", "50", "--dim-comp", "30", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let obj = v.as_object().unwrap();
    assert_eq!(obj.len(), 4);
    assert!((obj["x_minus"].as_f64().unwrap() - 1.037308).abs() < 1e-9);
    assert!((obj["x_plus"].as_f64().unwrap() - 28.921026).abs() < 1e-9);
    assert_eq!(obj["regime"], "CombWindow");
    assert_eq!(obj["discriminant"].as_f64().unwrap(), 1791364.0);
    assert!(stderr(&o).contains("28.83"));
}

#[test]
fn threshold_without_roots() {
    let o = combtn(&["threshold", "--teeth", "50", "--dim-comp", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no real roots; MPS always cheaper"));
    let o = combtn(&["threshold", "--teeth", "50", "--dim-comp", "3", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["x_minus"].is_null() && v["x_plus"].is_null());
    assert_eq!(v["regime"], "MpsAlwaysCheaper");
}

#[test]
fn sweep_files_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let svg = dir.path().join(format!("{tag}.svg"));
        let o = combtn(&[
            "sweep",
            "--teeth",
            "50",
            "--d-min",
            "1",
            "--d-max",
            "60",
            "--out",
            csv.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        (std::fs::read(csv).unwrap(), std::fs::read_to_string(svg).unwrap())
    };
    let (csv_a, svg_a) = run("a");
    let (csv_b, svg_b) = run("b");
    assert_eq!(csv_a, csv_b);
    assert_eq!(svg_a, svg_b);

    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,x_minus,x_plus,regime"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 60);
    assert_eq!(rows[0], "1,,,MpsAlwaysCheaper");
    assert!(rows[4].starts_with("5,1.408528,3.549805,"));

    assert!(svg_a.starts_with("<svg"));
    assert_eq!(svg_a.matches("<polyline").count(), 2);
    assert!(svg_a.contains(">d</text>") && svg_a.contains(">x</text>"));
    assert!(svg_a.contains(">x-</text>") && svg_a.contains(">x+</text>"));
}

#[test]
fn sweep_to_stdout() {
    let o = combtn(&["sweep", "--teeth", "10", "--d-min", "2", "--d-max", "4", "--step", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn unwritable_paths_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("out.csv");
    let bad = bad.to_str().unwrap();
    let o = combtn(&["sweep", "--teeth", "50", "--d-min", "5", "--d-max", "6", "--out", bad]);
    assert_eq!(o.status.code(), Some(1));
    let o = combtn(&["sweep", "--teeth", "50", "--d-min", "5", "--d-max", "6", "--svg", bad]);
    assert_eq!(o.status.code(), Some(1));
    let o = combtn(&[
        "bench", "--teeth", "2", "--tooth-len", "1", "--dim-raw", "2", "--dim-comp", "2", "--bond-list", "2",
        "--reps", "3", "--out", bad,
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_small_grid_passes() {
    let o = combtn(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("result: PASS"));
    assert!(s.contains("162 tuples"));
}

fn corrupted_regular(p: &NetworkParams) -> CoreResult<u64> {
    let c = costmodel::c_regular(p)?;
    Ok(if p.bond_dim == 3 { c + 1 } else { c })
}

#[test]
fn corrupted_formula_fails_with_tuple() {
    let formulas = Formulas {
        c_regular: corrupted_regular,
        ..Formulas::default()
    };
    let report = verify_with(Grid::Small, 42, &formulas);
    let mut buf = Vec::new();
    let err = print_verify(&report, &mut buf).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let msg = err.to_string();
    assert!(msg.contains("mps-cost") && msg.contains("x=3"), "{msg}");
    assert!(String::from_utf8(buf).unwrap().contains("FAIL"));
}

fn write(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

const SMALL_COMB: [&str; 10] = [
    "--teeth",
    "2",
    "--tooth-len",
    "2",
    "--dim-raw",
    "3",
    "--dim-comp",
    "2",
    "--bond",
    "2",
];

#[test]
fn contract_zero_data_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("zeros.csv");
    write(&data, &"0,0,0\n".repeat(4));
    for kind in ["mps", "comb"] {
        let o = combtn(&[&["contract", "--kind", kind, "--data", data.to_str().unwrap()][..], &SMALL_COMB].concat());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("scalar: 0.0\n"), "{}", stdout(&o));
    }
}

#[test]
fn contract_reports_counts() {
    let o = combtn(&[&["contract", "--kind", "comb", "--json"][..], &SMALL_COMB].concat());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["measured_mults"], 66);
    assert_eq!(v["analytic_printed"], 74);
    assert_eq!(v["residual_printed_minus_measured"], 8);

    let o = combtn(&[&["contract", "--kind", "mps", "--orthonormal-u"][..], &SMALL_COMB].concat());
    let s = stdout(&o);
    assert!(s.contains("measured multiplications: "), "{s}");
    assert!(s.contains("residual (printed - measured): 0"));
}

#[test]
fn contract_example_comb_count() {
    let o = combtn(&[&["contract", "--kind", "comb", "--json"][..], &EXAMPLE].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["measured_mults"], 1438010);
    assert_eq!(v["analytic_printed"], 1443010);
}

#[test]
fn malformed_data_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    write(&data, "1,2,3\n4,5,6\n7,oops,9\n1,1,1\n");
    let o = combtn(&[&["contract", "--kind", "mps", "--data", data.to_str().unwrap()][..], &SMALL_COMB].concat());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("row 3, column 2"), "{e}");

    write(&data, "1,2,3\n4,5\n");
    let o = combtn(&[&["contract", "--kind", "comb", "--data", data.to_str().unwrap()][..], &SMALL_COMB].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2"));
}

#[test]
fn bench_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let o = combtn(&[
        "bench",
        "--teeth",
        "3",
        "--tooth-len",
        "2",
        "--dim-raw",
        "4",
        "--dim-comp",
        "2",
        "--bond-list",
        "2,3,4",
        "--reps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,x,measured_mults,median_ns,reps"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], if i < 3 { "mps" } else { "comb" });
        let x: usize = row[1].parse().unwrap();
        let p = NetworkParams::new(4, 2, x, 3, 2).unwrap();
        let want = if i < 3 { costmodel::c_regular(&p) } else { costmodel::c_comb_schedule(&p) }.unwrap();
        assert_eq!(row[2].parse::<u64>().unwrap(), want);
        assert_eq!(row[4], "3");
    }

    let o = combtn(&[
        "bench", "--teeth", "3", "--tooth-len", "2", "--dim-raw", "4", "--dim-comp", "2", "--bond-list", "2",
        "--reps", "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
