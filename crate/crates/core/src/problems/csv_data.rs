use std::path::Path;

use crate::error::{Error, Result};

/// Label-folded samples read from a dense CSV file.
///
/// Each line holds the features followed by a label in `{0, 1}`; label `0`
/// maps to `-1` and `1` to `+1`, and the row is multiplied by that sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub d: usize,
    /// Row-major `n x d` label-folded rows.
    pub rows: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Required number of feature columns (label excluded).
    pub features: Option<usize>,
    /// Append a constant-one feature before folding in the label.
    pub bias: bool,
}

fn format_error(path: &Path, row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

pub fn load_dense_csv(path: impl AsRef<Path>, options: LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_or_format(path, e))?;
    let mut rows = Vec::new();
    let mut width: Option<usize> = None;
    let mut n = 0;
    for (r, record) in reader.records().enumerate() {
        let line = r + 1;
        let record = record.map_err(|e| io_or_format(path, e))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < 2 {
            return Err(format_error(path, line, 1, "need at least one feature and a label"));
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(format_error(
                    path,
                    line,
                    record.len().min(w) + 1,
                    format!("expected {w} columns, found {}", record.len()),
                ))
            }
            _ => {}
        }
        let mut values = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| format_error(path, line, c + 1, format!("not a number: `{field}`")))?;
            if !v.is_finite() {
                return Err(format_error(path, line, c + 1, "non-finite value"));
            }
            values.push(v);
        }
        let label = values.pop().unwrap_or_default();
        let sign = match label {
            0.0 => -1.0,
            1.0 => 1.0,
            _ => {
                return Err(format_error(
                    path,
                    line,
                    record.len(),
                    format!("label must be 0 or 1, got {label}"),
                ))
            }
        };
        if options.bias {
            values.push(1.0);
        }
        rows.extend(values.iter().map(|v| v * sign));
        n += 1;
    }
    let Some(w) = width else {
        return Err(format_error(path, 0, 0, "file contains no samples"));
    };
    let raw_features = w - 1;
    if let Some(expected) = options.features {
        if expected != raw_features {
            return Err(format_error(
                path,
                1,
                w,
                format!("expected {expected} feature columns, found {raw_features}"),
            ));
        }
    }
    Ok(Dataset {
        n,
        d: raw_features + usize::from(options.bias),
        rows,
    })
}

fn io_or_format(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            _ => unreachable!(),
        }
    } else {
        format_error(path, line, 0, e.to_string())
    }
}

/// Writes `features` (row-major `n x d`) with `{0, 1}` labels as the last column.
pub fn write_dense_csv(path: impl AsRef<Path>, features: &[f64], labels: &[u8], d: usize) -> Result<()> {
    let path = path.as_ref();
    if d == 0 || features.len() != labels.len() * d {
        return Err(Error::invalid("feature matrix does not match label count"));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| io_or_format(path, e))?;
    for (row, label) in features.chunks(d).zip(labels) {
        if *label > 1 {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        let mut fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        fields.push(label.to_string());
        w.write_record(&fields).map_err(|e| io_or_format(path, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
