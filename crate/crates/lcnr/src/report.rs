//! Report directory: per-row errors, summary statistics, worst cases,
//! scenario tables and plots.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use lcnr_core::eval::{summarize, worst_k, EvalRow, Summary};
use lcnr_core::train::EpochRecord;

use crate::error::{CliError, Result};
use crate::plot::{scatter_svg, trace_svg};

pub const ROWS_HEADER: [&str; 5] = ["label", "real_mm", "predicted_mm", "error_percent", "clamping"];
pub const WORST_K: usize = 4;

/// Everything written by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub rows: Vec<EvalRow>,
    pub summary: Summary,
    pub worst: Vec<EvalRow>,
    /// Written files, in creation order.
    pub artifacts: Vec<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(CliError::io(path))
}

fn csv_text(header: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Internal(format!("csv encoding: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in records {
        w.write_record(&r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(format!("csv encoding: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn row_record(r: &EvalRow) -> Vec<String> {
    vec![
        r.label.clone(),
        r.real_mm.to_string(),
        r.predicted_mm.to_string(),
        r.error_percent.to_string(),
        r.clamping.clone(),
    ]
}

pub fn rows_csv(rows: &[EvalRow]) -> Result<String> {
    csv_text(&ROWS_HEADER, rows.iter().map(row_record))
}

fn parse_f64(raw: &str, what: &str, origin: &str, line: usize) -> Result<f64> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("{origin}: line {line}: bad {what} {raw:?}")))
}

/// Parses `rows.csv`, checking every stored error against the positions.
pub fn read_rows_from<R: Read>(input: R, origin: &str) -> Result<Vec<EvalRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
    if header.iter().ne(ROWS_HEADER) {
        return Err(CliError::Validation(format!("{origin}: header must be {}", ROWS_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::Validation(format!("{origin}: line {line}: {e}")))?;
        let row = EvalRow::with_error(
            &rec[0],
            parse_f64(&rec[1], "real_mm", origin, line)?,
            parse_f64(&rec[2], "predicted_mm", origin, line)?,
            parse_f64(&rec[3], "error_percent", origin, line)?,
            &rec[4],
        )
        .map_err(|e| CliError::Validation(format!("{origin}: line {line}: {e}")))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_rows(path: &Path) -> Result<Vec<EvalRow>> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    read_rows_from(file, &path.display().to_string())
}

pub fn summary_csv(s: &Summary) -> Result<String> {
    csv_text(
        &["n", "residual_std_mm", "rmse_mm", "mean_residual_mm"],
        std::iter::once(vec![
            s.n.to_string(),
            s.residual_std_mm.to_string(),
            s.rmse_mm.to_string(),
            s.mean_residual_mm.to_string(),
        ]),
    )
}

pub fn scatter_csv(rows: &[EvalRow]) -> Result<String> {
    csv_text(
        &["real_mm", "predicted_mm"],
        rows.iter().map(|r| vec![r.real_mm.to_string(), r.predicted_mm.to_string()]),
    )
}

/// Rows per block of the two-block scenario table.
fn block_len(n: usize) -> usize {
    n.div_ceil(2)
}

const BLOCK_FIELDS: [&str; 5] = ["label", "real", "predicted", "error", "clamping"];

/// Two side-by-side blocks; the second block holds rows `ceil(n/2)..`.
pub fn scenario_table_csv(rows: &[EvalRow]) -> Result<String> {
    let header: Vec<String> = (1..=2)
        .flat_map(|b| BLOCK_FIELDS.iter().map(move |f| format!("{f}_{b}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let half = block_len(rows.len());
    let records = (0..half).map(|i| {
        let mut rec = row_record(&rows[i]);
        match rows.get(half + i) {
            Some(r) => rec.extend(row_record(r)),
            None => rec.extend(std::iter::repeat_n(String::new(), BLOCK_FIELDS.len())),
        }
        rec
    });
    csv_text(&header, records)
}

pub fn read_scenario_table(text: &str) -> Result<Vec<EvalRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::Validation(format!("scenario table: line {line}: {e}")))?;
        for (b, out) in [(0, &mut first), (1, &mut second)] {
            let f = |j: usize| rec.get(b * BLOCK_FIELDS.len() + j).unwrap_or("");
            if f(1).is_empty() {
                continue;
            }
            out.push(
                EvalRow::with_error(
                    f(0),
                    parse_f64(f(1), "real", "scenario table", line)?,
                    parse_f64(f(2), "predicted", "scenario table", line)?,
                    parse_f64(f(3), "error", "scenario table", line)?,
                    f(4),
                )
                .map_err(|e| CliError::Validation(format!("scenario table: line {line}: {e}")))?,
            );
        }
    }
    first.extend(second);
    Ok(first)
}

fn position(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Aligned text rendering of the scenario table, errors to 3 decimals.
pub fn scenario_table_text(rows: &[EvalRow]) -> String {
    let half = block_len(rows.len());
    let cell = |r: Option<&EvalRow>| match r {
        Some(r) => format!("{:>9} {:>11} {:>8.3}", position(r.real_mm), format!("{:.3}", r.predicted_mm), r.error_percent),
        None => String::new(),
    };
    let mut out = String::new();
    let head = format!("{:>9} {:>11} {:>8}", "Real", "Predicted", "Error%");
    let _ = writeln!(out, "{head}   |{head}");
    for i in 0..half {
        let _ = writeln!(out, "{}   |{}", cell(rows.get(i)), cell(rows.get(half + i)).trim_end());
    }
    out
}

pub fn trace_csv(records: &[EpochRecord]) -> Result<String> {
    let mut buf = Vec::new();
    crate::checkpoint::write_trace_to(&mut buf, records).map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

/// Trace chart and its CSV under `dir`. Fails on an empty trace.
pub fn write_trace_plot(dir: &Path, records: &[EpochRecord], title: &str) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(CliError::Validation("cannot plot an empty training trace".into()));
    }
    let epochs: Vec<f64> = records.iter().map(|r| r.epoch as f64).collect();
    let sat: Vec<f64> = records.iter().map(|r| r.sat_train).collect();
    let rmse: Vec<f64> = records.iter().map(|r| r.rmse_val).collect();
    let svg = dir.join("trace.svg");
    let csv = dir.join("trace.csv");
    write_file(&svg, &trace_svg(&epochs, &sat, &rmse, title))?;
    write_file(&csv, &trace_csv(records)?)?;
    Ok(vec![svg, csv])
}

/// Writes the full report for `rows` (and optionally a training trace)
/// into `dir`, creating it if needed.
pub fn write_report(dir: &Path, rows: &[EvalRow], trace: Option<&[EpochRecord]>, title: &str) -> Result<ReportBundle> {
    if rows.is_empty() {
        return Err(CliError::Validation("no rows to report".into()));
    }
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let summary = summarize(rows)?;
    let worst = worst_k(rows, WORST_K);
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.real_mm, r.predicted_mm)).collect();
    let files = [
        ("rows.csv", rows_csv(rows)?),
        ("summary.csv", summary_csv(&summary)?),
        ("worst4.csv", rows_csv(&worst)?),
        ("scatter.svg", scatter_svg(&points, title)),
        ("scatter.csv", scatter_csv(rows)?),
        ("scenario_table.csv", scenario_table_csv(rows)?),
        ("scenario_table.txt", scenario_table_text(rows)),
    ];
    let mut artifacts = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        write_file(&path, &body)?;
        artifacts.push(path);
    }
    if let Some(t) = trace {
        artifacts.extend(write_trace_plot(dir, t, title)?);
    }
    Ok(ReportBundle {
        rows: rows.to_vec(),
        summary,
        worst,
        artifacts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table6_like(n: usize) -> Vec<EvalRow> {
        (0..n)
            .map(|i| {
                let real = 56.0 + 37.0 * i as f64;
                EvalRow::new(format!("s{}", i + 1), real, real - 3.395 + (i % 5) as f64, "perfect")
            })
            .collect()
    }

    #[test]
    fn rows_round_trip() {
        let rows = table6_like(9);
        let text = rows_csv(&rows).unwrap();
        assert_eq!(read_rows_from(text.as_bytes(), "rows").unwrap(), rows);
    }

    #[test]
    fn tampered_error_is_rejected() {
        let text = "label,real_mm,predicted_mm,error_percent,clamping\na,56,52.605,0.5,perfect\n";
        assert_eq!(read_rows_from(text.as_bytes(), "rows").unwrap_err().exit_code(), 5);
    }

    #[test]
    fn scenario_table_has_two_blocks_of_thirteen() {
        let rows = table6_like(26);
        let csv = scenario_table_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 14);
        assert_eq!(read_scenario_table(&csv).unwrap(), rows);
        let txt = scenario_table_text(&rows);
        assert_eq!(txt.lines().count(), 14);
        assert!(txt.lines().nth(1).unwrap().contains("52.605"));
        assert!(txt.lines().nth(1).unwrap().contains("0.340"));
    }

    #[test]
    fn odd_row_count_leaves_last_cell_empty() {
        let rows = table6_like(5);
        let csv = scenario_table_csv(&rows).unwrap();
        assert_eq!(read_scenario_table(&csv).unwrap(), rows);
    }

    #[test]
    fn report_files_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let rows = table6_like(6);
        let a = write_report(&dir.path().join("a"), &rows, None, "t").unwrap();
        let b = write_report(&dir.path().join("b"), &rows, None, "t").unwrap();
        assert_eq!(a.worst.len(), 4);
        assert!(a.worst.windows(2).all(|w| w[0].error_percent >= w[1].error_percent));
        for (x, y) in a.artifacts.iter().zip(&b.artifacts) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
        let scatter = std::fs::read_to_string(dir.path().join("a/scatter.csv")).unwrap();
        assert_eq!(scatter.lines().count(), rows.len() + 1);
        assert!(write_report(dir.path(), &[], None, "t").is_err());
        assert!(write_trace_plot(dir.path(), &[], "t").is_err());
    }
}
