//! File formats: the data-matrix CSV read by `contract`, and the sweep and
//! bench CSVs. Output formatting is fixed so files are byte-stable: roots at
//! six decimals, counts as plain integers, empty fields for absent roots.

use std::fmt::Write as _;
use std::path::Path;

use combtn_core::SweepRow;

use crate::CliError;

/// Reads `rows × cols` decimal values, no header, comma-separated.
pub fn read_data_matrix(path: &Path, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_data_matrix(file, rows, cols).map_err(|message| CliError::Data {
        path: path.to_path_buf(),
        message,
    })
}

/// Row and column numbers in error messages are 1-based.
pub fn parse_data_matrix(input: impl std::io::Read, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::with_capacity(rows);
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| format!("row {row}: {e}"))?;
        if record.len() != cols {
            return Err(format!("row {row}: expected {cols} columns (D), found {}", record.len()));
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(c, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("row {row}, column {}: '{field}' is not a finite number", c + 1)),
            })
            .collect::<Result<Vec<f64>, String>>()?;
        out.push(values);
    }
    if out.len() != rows {
        return Err(format!("expected {rows} rows (M·N), found {}", out.len()));
    }
    Ok(out)
}

fn root(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("d,x_minus,x_plus,regime\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.d, root(r.x_minus), root(r.x_plus), r.regime.name()).unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub kind: &'static str,
    pub bond: usize,
    pub measured_mults: u64,
    pub median_ns: u128,
    pub reps: usize,
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("kind,x,measured_mults,median_ns,reps\n");
    for r in rows {
        writeln!(s, "{},{},{},{},{}", r.kind, r.bond, r.measured_mults, r.median_ns, r.reps).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_matrix() {
        let m = parse_data_matrix("1, 2,3\n4,5,6e-1\n".as_bytes(), 2, 3).unwrap();
        assert_eq!(m, vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 0.6]]);
    }

    #[test]
    fn reports_first_bad_cell() {
        let err = parse_data_matrix("1,2,3\n4,x,6\n".as_bytes(), 2, 3).unwrap_err();
        assert!(err.starts_with("row 2, column 2"), "{err}");
        let err = parse_data_matrix("1,2,3\n4,5\n".as_bytes(), 2, 3).unwrap_err();
        assert!(err.starts_with("row 2: expected 3 columns"), "{err}");
        let err = parse_data_matrix("1,2,3\n".as_bytes(), 2, 3).unwrap_err();
        assert!(err.contains("expected 2 rows"), "{err}");
        let err = parse_data_matrix("1,nan,3\n".as_bytes(), 1, 3).unwrap_err();
        assert!(err.starts_with("row 1, column 2"), "{err}");
    }

    #[test]
    fn sweep_rows_format() {
        let rows = combtn_core::costmodel::threshold_sweep(50, 4.0, 5.0, 1.0).unwrap();
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "4,,,MpsAlwaysCheaper");
        assert!(lines[2].starts_with("5,") && lines[2].ends_with(",CombWindow"));
        assert_eq!(lines[2].split(',').nth(1).unwrap().split('.').nth(1).unwrap().len(), 6);
    }
}
