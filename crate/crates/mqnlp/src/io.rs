//! File formats: JSON Lines sample files, feature CSVs and history CSVs.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use mqnlp_core::data::{check_sample, DataError, Dataset, Sample};
use mqnlp_core::multimodal::{ImageFeatures, TaskLayout};
use mqnlp_core::training::History;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: feature vector has {found} values, expected {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl IoError {
    fn file(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
        move |source| IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    fn schema(line: usize, message: impl Into<String>) -> IoError {
        IoError::Schema {
            line,
            message: message.into(),
        }
    }
}

/// On-disk shape of one sample; unknown keys are rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    layout: TaskLayout,
    sentences: Vec<String>,
    features: Vec<Vec<f64>>,
    label: u8,
}

impl From<Record> for Sample {
    fn from(r: Record) -> Sample {
        Sample {
            id: r.id,
            layout: r.layout,
            sentences: r.sentences,
            features: r.features,
            label: r.label,
        }
    }
}

/// Parses a JSON Lines sample file. The feature width is taken from
/// `feature_dim` or, when absent, from the first sample. Blank lines are
/// skipped; line numbers in errors are 1-based.
pub fn read_dataset(
    input: impl BufRead,
    provenance: &str,
    feature_dim: Option<usize>,
) -> Result<Dataset, IoError> {
    let mut samples = Vec::new();
    let mut ids = BTreeSet::new();
    let mut dim = feature_dim;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|e| IoError::schema(line_no, e.to_string()))?;
        let sample = Sample::from(record);
        let expected = *dim.get_or_insert_with(|| sample.features.first().map_or(0, Vec::len));
        check_sample(&sample, expected).map_err(|e| match e {
            DataError::DimensionMismatch {
                expected, found, ..
            } => IoError::DimensionMismatch {
                line: line_no,
                expected,
                found,
            },
            other => IoError::schema(line_no, other.to_string()),
        })?;
        if !ids.insert(sample.id.clone()) {
            return Err(IoError::schema(line_no, format!("duplicate sample id `{}`", sample.id)));
        }
        if let Some(first) = samples.first().map(|s: &Sample| s.layout) {
            if sample.layout != first {
                return Err(IoError::schema(
                    line_no,
                    format!("layout `{}` differs from earlier `{first}` samples", sample.layout),
                ));
            }
        }
        samples.push(sample);
    }
    let dim = dim.unwrap_or(0);
    Dataset::new(samples, dim, provenance).map_err(|e| IoError::schema(0, e.to_string()))
}

pub fn load_dataset(path: &Path) -> Result<Dataset, IoError> {
    let file = File::open(path).map_err(IoError::file(path))?;
    read_dataset(BufReader::new(file), &path.display().to_string(), None)
}

/// Writes one JSON object per sample, LF-terminated.
pub fn write_dataset(d: &Dataset, mut out: impl Write) -> Result<(), IoError> {
    for s in &d.samples {
        let record = Record {
            id: s.id.clone(),
            layout: s.layout,
            sentences: s.sentences.clone(),
            features: s.features.clone(),
            label: s.label,
        };
        serde_json::to_writer(&mut out, &record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_dataset(d: &Dataset, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(IoError::file(path))?;
    write_dataset(d, BufWriter::new(file))
}

/// Reads a feature CSV with header `image_id,f0,…,f{dim-1}`. Lines starting
/// with `#` are comments.
pub fn read_features(input: impl Read) -> Result<Vec<ImageFeatures>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(input);
    let header = reader.headers()?.clone();
    let dim = header.len().saturating_sub(1);
    let header_ok = header.get(0) == Some("image_id")
        && header
            .iter()
            .skip(1)
            .enumerate()
            .all(|(i, h)| h == format!("f{i}"));
    if !header_ok || dim == 0 {
        return Err(IoError::schema(1, "expected header `image_id,f0,...`"));
    }
    let mut rows = Vec::new();
    let mut ids = BTreeSet::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != dim + 1 {
            return Err(IoError::DimensionMismatch {
                line,
                expected: dim,
                found: record.len().saturating_sub(1),
            });
        }
        let id = record[0].to_string();
        let values = record
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::schema(line, e.to_string()))?;
        let features = ImageFeatures::new(id.clone(), values)
            .map_err(|e| IoError::schema(line, e.to_string()))?;
        if !ids.insert(id.clone()) {
            return Err(IoError::schema(line, format!("duplicate image id `{id}`")));
        }
        rows.push(features);
    }
    Ok(rows)
}

pub fn load_features(path: &Path) -> Result<Vec<ImageFeatures>, IoError> {
    read_features(File::open(path).map_err(IoError::file(path))?)
}

pub fn write_features(rows: &[ImageFeatures], out: impl Write) -> Result<(), IoError> {
    let dim = rows.first().map_or(0, |r| r.values.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["image_id".to_string()];
    header.extend((0..dim).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for r in rows {
        if r.values.len() != dim {
            return Err(IoError::DimensionMismatch {
                line: 0,
                expected: dim,
                found: r.values.len(),
            });
        }
        let mut fields = vec![r.image_id.clone()];
        fields.extend(r.values.iter().map(f64::to_string));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// `epoch,train_loss,train_acc,val_acc`, one row per recorded epoch.
pub fn write_history(h: &History, out: impl Write) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for r in &h.records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_history(h: &History, path: &Path) -> Result<(), IoError> {
    write_history(h, File::create(path).map_err(IoError::file(path))?)
}
