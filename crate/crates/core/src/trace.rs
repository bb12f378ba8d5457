//! CSV encoding of run traces.
//!
//! Header: `n,x_0..x_{d-1},y_0..,z_0..,residual,df_target,lemma_arg_slack,projection_cert_slack`.
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly. Missing diagnostics are empty fields.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::solver::TraceRow;
use crate::vector::Vector;

pub fn header(dim: usize) -> Vec<String> {
    let mut cols = vec!["n".to_string()];
    for prefix in ["x", "y", "z"] {
        cols.extend((0..dim).map(|i| format!("{prefix}_{i}")));
    }
    cols.extend(
        ["residual", "df_target", "lemma_arg_slack", "projection_cert_slack"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols
}

/// 17 significant digits in scientific notation.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("trace CSV: {e}"))
}

pub fn write_csv<W: Write>(rows: &[TraceRow], dim: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(dim)).map_err(csv_error)?;
    for row in rows {
        for v in [&row.x, &row.y, &row.z] {
            v.check_dim(dim)?;
        }
        let mut rec = vec![row.n.to_string()];
        for v in [&row.x, &row.y, &row.z] {
            rec.extend(v.iter().map(|c| format_real(*c)));
        }
        rec.push(format_real(row.residual));
        for opt in [row.df_target, row.lemma_arg_slack] {
            rec.push(opt.map(format_real).unwrap_or_default());
        }
        rec.push(format_real(row.projection_cert_slack));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("trace CSV: {e}")))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    let head = r.headers().map_err(csv_error)?.clone();
    let fixed = 1 + 4;
    if head.len() < fixed + 3 || (head.len() - fixed) % 3 != 0 {
        return Err(Error::InvalidInput(format!("trace header has {} columns", head.len())));
    }
    let dim = (head.len() - fixed) / 3;
    let expected = header(dim);
    if head.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::InvalidInput("unexpected trace header".into()));
    }
    let real = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("trace value '{s}': {e}")))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let n = rec[0]
            .parse::<usize>()
            .map_err(|e| Error::InvalidInput(format!("trace index '{}': {e}", &rec[0])))?;
        let vector = |offset: usize| -> Result<Vector> {
            Vector::new((0..dim).map(|i| real(&rec[offset + i])).collect::<Result<_>>()?)
        };
        let optional = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                real(s).map(Some)
            }
        };
        let tail = 1 + 3 * dim;
        rows.push(TraceRow {
            n,
            x: vector(1)?,
            y: vector(1 + dim)?,
            z: vector(1 + 2 * dim)?,
            residual: real(&rec[tail])?,
            df_target: optional(&rec[tail + 1])?,
            lemma_arg_slack: optional(&rec[tail + 2])?,
            projection_cert_slack: real(&rec[tail + 3])?,
        });
    }
    Ok(rows)
}
