//! Persistence: atomic file writes, embedding text files and metrics output.

use std::fs::{self, File};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::dataset::NodeDictionary;
use crate::embedding::Embedding;
use crate::experiment::{BenchRecord, MetricsRecord};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("embedding header says {expected}, found {found}")]
    HeaderMismatch { expected: String, found: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("embedding contains non-finite values")]
    NonFinite,
    #[error("dictionary has {dictionary} nodes but the embedding has {rows} rows")]
    DictionaryMismatch { dictionary: usize, rows: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Writes `path` through a temporary sibling that is renamed into place, so
/// readers never observe a partial file.
pub fn write_atomic<F>(path: &Path, body: F) -> io::Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        let f = w.into_inner().map_err(|e| e.into_error())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Text embedding: first line `V d`, then `original_id v_1 ... v_d` with nine
/// significant digits per value.
pub fn write_embedding<T: Scalar, W: Write>(
    mut out: W,
    emb: &Embedding<T>,
    dict: &NodeDictionary,
) -> Result<(), IoError> {
    if !emb.is_finite() {
        return Err(IoError::NonFinite);
    }
    if dict.len() != emb.rows() {
        return Err(IoError::DictionaryMismatch {
            dictionary: dict.len(),
            rows: emb.rows(),
        });
    }
    writeln!(out, "{} {}", emb.rows(), emb.dims())?;
    for v in 0..emb.rows() {
        out.write_all(dict.original(v).as_bytes())?;
        for x in emb.row(v) {
            write!(out, " {:.8e}", x.as_f64())?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn export_embedding<T: Scalar>(
    path: &Path,
    emb: &Embedding<T>,
    dict: &NodeDictionary,
) -> Result<(), IoError> {
    if !emb.is_finite() {
        return Err(IoError::NonFinite);
    }
    let mut inner = None;
    write_atomic(path, |w| {
        if let Err(e) = write_embedding(&mut *w, emb, dict) {
            let msg = e.to_string();
            inner = Some(e);
            return Err(io::Error::other(msg));
        }
        Ok(())
    })
    .map_err(|e| inner.take().unwrap_or(IoError::Io(e)))
}

/// Reads a text embedding; rows keep file order and ids are returned as a dictionary.
pub fn read_embedding<R: BufRead>(reader: R) -> Result<(NodeDictionary, Embedding<f64>), IoError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.ok_or_else(|| IoError::Malformed {
        line: 1,
        message: "missing `V d` header".into(),
    })?;
    let parsed: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|_| IoError::Malformed {
            line: 1,
            message: "header must be `V d`".into(),
        })?;
    let [rows, dims] = parsed[..] else {
        return Err(IoError::Malformed {
            line: 1,
            message: "header must be `V d`".into(),
        });
    };
    let mut ids = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dims);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.split_whitespace();
        let id = f.next().expect("non-empty line");
        let before = data.len();
        for tok in f {
            data.push(tok.parse::<f64>().map_err(|_| IoError::Malformed {
                line: line_no,
                message: format!("bad value `{tok}`"),
            })?);
        }
        if data.len() - before != dims {
            return Err(IoError::HeaderMismatch {
                expected: format!("{dims} values per row"),
                found: format!("{} on line {line_no}", data.len() - before),
            });
        }
        ids.push(id.to_string());
    }
    if ids.len() != rows {
        return Err(IoError::HeaderMismatch {
            expected: format!("{rows} rows"),
            found: ids.len().to_string(),
        });
    }
    let dict = NodeDictionary::from_ids(ids.iter().cloned());
    if dict.len() != rows {
        return Err(IoError::Malformed {
            line: 0,
            message: "duplicate node id".into(),
        });
    }
    Ok((dict, Embedding::from_vec(rows, dims, data)))
}

pub fn import_embedding(path: &Path) -> Result<(NodeDictionary, Embedding<f64>), IoError> {
    read_embedding(io::BufReader::new(File::open(path)?))
}

/// `metrics.jsonl` and `metrics.csv` carry reproducible fields only;
/// wall-clock numbers go to `timing.csv`.
pub fn write_metrics(dir: &Path, records: &[MetricsRecord]) -> Result<(), IoError> {
    fs::create_dir_all(dir)?;
    let lines: Vec<String> = records
        .iter()
        .map(|r| serde_json::to_string(&r.without_timing()))
        .collect::<Result<_, _>>()?;
    write_atomic(&dir.join("metrics.jsonl"), |w| {
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })?;
    write_atomic(&dir.join("metrics.csv"), |w| {
        writeln!(w, "{}", MetricsRecord::CSV_HEADER)?;
        for r in records {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    })?;
    write_atomic(&dir.join("timing.csv"), |w| {
        writeln!(w, "{}", MetricsRecord::TIMING_CSV_HEADER)?;
        for r in records {
            writeln!(w, "{}", r.timing_csv_row())?;
        }
        Ok(())
    })?;
    Ok(())
}

pub fn write_bench(path: &Path, records: &[BenchRecord]) -> io::Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{}", BenchRecord::CSV_HEADER)?;
        for r in records {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    })
}
