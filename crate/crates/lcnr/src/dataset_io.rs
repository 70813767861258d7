//! Dataset CSV and severity anchor files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use lcnr_core::dataset::{DamageScenario, RfsSample, RfsSynthesizer, Source};
use lcnr_core::MODES;

use crate::error::{CliError, Result};

pub const DATASET_HEADER: [&str; 14] = [
    "scenario_id",
    "clamp_severity",
    "crack_x_mm",
    "crack_depth_ratio",
    "crack_severity",
    "rfs_m1",
    "rfs_m2",
    "rfs_m3",
    "rfs_m4",
    "rfs_m5",
    "rfs_m6",
    "rfs_m7",
    "rfs_m8",
    "source",
];

/// A dataset line. `rfs` is `None` when all eight RFS fields are empty,
/// which fixture files use for positions whose shifts are to be synthesised.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub scenario_id: u64,
    pub scenario: DamageScenario,
    pub rfs: Option<[f64; MODES]>,
    pub source: Source,
}

pub fn write_dataset_to<W: Write>(out: W, samples: &[RfsSample]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DATASET_HEADER)?;
    let mut rec = Vec::with_capacity(DATASET_HEADER.len());
    for s in samples {
        rec.clear();
        rec.push(s.scenario_id.to_string());
        rec.push(s.scenario.clamp_severity.to_string());
        rec.push(s.scenario.crack_position_mm.to_string());
        rec.push(s.scenario.crack_depth_ratio.to_string());
        rec.push(s.scenario.crack_severity.to_string());
        rec.extend(s.rfs.iter().map(f64::to_string));
        rec.push(s.source.as_str().to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(path: &Path, samples: &[RfsSample]) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    write_dataset_to(std::io::BufWriter::new(file), samples).map_err(|e| csv_error(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path)(io),
        other => CliError::Validation(format!("{}: {other:?}", path.display())),
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or("").trim();
    raw.parse().map_err(|_| {
        CliError::Validation(format!(
            "line {line}: column `{}` has invalid value {raw:?}",
            DATASET_HEADER[i]
        ))
    })
}

/// Parses a dataset; `origin` names the source in messages.
pub fn read_dataset_from<R: Read>(input: R, origin: &str) -> Result<Vec<DatasetRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r
        .headers()
        .map_err(|e| CliError::Validation(format!("{origin}: {e}")))?
        .clone();
    if header.is_empty() {
        log::warn!("{origin}: empty dataset file");
        return Ok(Vec::new());
    }
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != DATASET_HEADER {
        return Err(CliError::Validation(format!(
            "{origin}: line 1: expected header `{}`",
            DATASET_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != DATASET_HEADER.len() {
            return Err(CliError::Validation(format!(
                "{origin}: line {line}: expected {} fields, found {}",
                DATASET_HEADER.len(),
                rec.len()
            )));
        }
        let scenario = DamageScenario {
            clamp_severity: field(&rec, 1, line)?,
            crack_position_mm: field(&rec, 2, line)?,
            crack_depth_ratio: field(&rec, 3, line)?,
            crack_severity: field(&rec, 4, line)?,
        };
        let blank = (5..5 + MODES).filter(|&i| rec[i].trim().is_empty()).count();
        let rfs = match blank {
            MODES => None,
            0 => {
                let mut v = [0.0; MODES];
                for (j, slot) in v.iter_mut().enumerate() {
                    *slot = field(&rec, 5 + j, line)?;
                }
                Some(v)
            }
            _ => {
                return Err(CliError::Validation(format!(
                    "{origin}: line {line}: RFS columns must be all filled or all empty"
                )))
            }
        };
        let source_raw = rec[13].trim();
        let source = Source::parse(source_raw).ok_or_else(|| {
            CliError::Validation(format!("{origin}: line {line}: unknown source {source_raw:?}"))
        })?;
        let row = DatasetRow {
            scenario_id: field(&rec, 0, line)?,
            scenario,
            rfs,
            source,
        };
        if let Some(rfs) = row.rfs {
            let sample = RfsSample {
                scenario_id: row.scenario_id,
                scenario: row.scenario,
                rfs,
                source: row.source,
            };
            sample
                .validate()
                .map_err(|e| CliError::Validation(format!("{origin}: line {line}: {e}")))?;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        log::warn!("{origin}: dataset has no rows");
    }
    Ok(rows)
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRow>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    read_dataset_from(std::io::BufReader::new(file), &path.display().to_string())
}

/// Converts rows to samples. Rows without RFS are synthesised with `synth`
/// (with a warning) or rejected when it is `None`.
pub fn into_samples(rows: &[DatasetRow], synth: Option<&RfsSynthesizer>) -> Result<Vec<RfsSample>> {
    rows.iter()
        .map(|r| {
            let rfs = match (r.rfs, synth) {
                (Some(v), _) => v,
                (None, Some(s)) => {
                    log::warn!(
                        "scenario {}: no RFS given, synthesising analytic values at x = {} mm",
                        r.scenario_id,
                        r.scenario.crack_position_mm
                    );
                    s.synthesize(&r.scenario)?
                }
                (None, None) => {
                    return Err(CliError::Validation(format!(
                        "scenario {}: RFS values are missing",
                        r.scenario_id
                    )))
                }
            };
            Ok(RfsSample {
                scenario_id: r.scenario_id,
                scenario: r.scenario,
                rfs,
                source: r.source,
            })
        })
        .collect()
}

pub fn read_samples(path: &Path) -> Result<Vec<RfsSample>> {
    into_samples(&read_dataset(path)?, None).map_err(|e| e.in_file(path))
}

/// `depth_ratio,severity` pairs, one per line; `#` starts a comment.
pub fn parse_anchors(text: &str, origin: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("depth_ratio") {
            continue;
        }
        let bad = || CliError::Config(format!("{origin}: line {}: expected `depth_ratio,severity`", i + 1));
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        out.push((a, b));
    }
    Ok(out)
}

pub fn read_anchors(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_anchors(&text, &path.display().to_string())
}
