//! Checkpoint files (JSON) and trace files (CSV).

use std::io::{Read, Write};
use std::path::Path;

use lcnr_core::train::{EpochRecord, ModelCheckpoint, CHECKPOINT_FORMAT};
use serde::{Deserialize, Serialize};

use crate::dataset_io::csv_error;
use crate::error::{CliError, Result};

pub const TRACE_HEADER: [&str; 5] = ["epoch", "sat_train", "sat_test", "rmse_train", "rmse_val"];

#[derive(Serialize)]
struct EnvelopeRef<'a> {
    format: &'a str,
    version: &'a str,
    checkpoint: &'a ModelCheckpoint,
}

#[derive(Deserialize)]
struct Envelope {
    format: String,
    #[allow(dead_code)]
    version: String,
    checkpoint: ModelCheckpoint,
}

pub fn checkpoint_to_string(ckpt: &ModelCheckpoint) -> Result<String> {
    let env = EnvelopeRef {
        format: CHECKPOINT_FORMAT,
        version: env!("CARGO_PKG_VERSION"),
        checkpoint: ckpt,
    };
    serde_json::to_string(&env).map_err(|e| CliError::Internal(format!("serialising checkpoint: {e}")))
}

pub fn checkpoint_from_str(text: &str) -> Result<ModelCheckpoint> {
    let env: Envelope =
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("not a model checkpoint: {e}")))?;
    if env.format != CHECKPOINT_FORMAT {
        return Err(CliError::Validation(format!(
            "checkpoint format {:?}, expected {CHECKPOINT_FORMAT:?}",
            env.format
        )));
    }
    let ckpt = env.checkpoint;
    ckpt.model.architecture.validate()?;
    if ckpt.model.param_count() != ckpt.model.architecture.param_count() {
        return Err(CliError::Validation("checkpoint weights do not match its architecture".into()));
    }
    Ok(ckpt)
}

pub fn save_checkpoint(path: &Path, ckpt: &ModelCheckpoint) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(ckpt)?).map_err(CliError::io(path))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelCheckpoint> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    checkpoint_from_str(&text).map_err(|e| e.in_file(path))
}

pub fn write_trace_to<W: Write>(out: W, records: &[EpochRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record([
            r.epoch.to_string(),
            r.sat_train.to_string(),
            r.sat_test.to_string(),
            r.rmse_train.to_string(),
            r.rmse_val.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, records: &[EpochRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(CliError::io(path))?;
    write_trace_to(std::io::BufWriter::new(file), records).map_err(|e| csv_error(path, e))
}

/// Reads a trace; `loss_train` is not stored and comes back as `1 - sat_train`.
pub fn read_trace_from<R: Read>(input: R, origin: &str) -> Result<Vec<EpochRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(CliError::Validation(format!(
            "{origin}: trace header must be {}",
            TRACE_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::Validation(format!("{origin}: line {line}: {e}")))?;
        let field = |j: usize| -> Result<f64> {
            rec[j].parse().map_err(|_| {
                CliError::Validation(format!("{origin}: line {line}: bad {} {:?}", TRACE_HEADER[j], &rec[j]))
            })
        };
        let epoch = rec[0]
            .parse()
            .map_err(|_| CliError::Validation(format!("{origin}: line {line}: bad epoch {:?}", &rec[0])))?;
        let sat_train = field(1)?;
        out.push(EpochRecord {
            epoch,
            sat_train,
            sat_test: field(2)?,
            rmse_train: field(3)?,
            rmse_val: field(4)?,
            loss_train: 1.0 - sat_train,
        });
    }
    Ok(out)
}

pub fn read_trace(path: &Path) -> Result<Vec<EpochRecord>> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    read_trace_from(file, &path.display().to_string())
}
