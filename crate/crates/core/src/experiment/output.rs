use std::path::Path;

use super::{CellKey, CellResult, CellSummary, Condition, Stat};
use crate::error::{Error, Result};

pub const DETAIL_HEADER: [&str; 8] = [
    "variant",
    "method",
    "condition",
    "trial",
    "iteration",
    "ari_a",
    "ari_b",
    "kappa",
];
pub const SUMMARY_HEADER: [&str; 9] = [
    "variant",
    "method",
    "condition",
    "ari_a_mean",
    "ari_a_sd",
    "ari_b_mean",
    "ari_b_sd",
    "kappa_mean",
    "kappa_sd",
];

/// Six significant digits, plain decimal notation.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// One row per (cell, trial, iteration), ordered by cell then trial then iteration.
pub fn write_detail_csv(path: &Path, results: &[CellResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(DETAIL_HEADER).map_err(|e| csv_error(path, e))?;
    for cell in results {
        for (trial, records) in cell.trials.iter().enumerate() {
            for r in records {
                w.write_record([
                    cell.key.variant.to_string(),
                    cell.key.method.to_string(),
                    cell.key.condition.to_string(),
                    trial.to_string(),
                    r.iteration.to_string(),
                    format_sig6(r.ari_a),
                    format_sig6(r.ari_b),
                    r.kappa.map(format_sig6).unwrap_or_default(),
                ])
                .map_err(|e| csv_error(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary_csv(path: &Path, summaries: &[CellSummary]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_error(path, e))?;
    for s in summaries {
        w.write_record([
            s.key.variant.to_string(),
            s.key.method.to_string(),
            s.key.condition.to_string(),
            format_sig6(s.ari_a.mean),
            format_sig6(s.ari_a.sd),
            format_sig6(s.ari_b.mean),
            format_sig6(s.ari_b.sd),
            s.kappa.map(|k| format_sig6(k.mean)).unwrap_or_default(),
            s.kappa.map(|k| format_sig6(k.sd)).unwrap_or_default(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_summary(path: &Path) -> Result<Vec<CellSummary>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().ne(SUMMARY_HEADER) {
        return Err(format_err(format!("unexpected header {headers:?}")));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| format_err(format!("row {}: `{}` is not a number", line + 1, &rec[i])))
        };
        let condition: u8 = rec[2]
            .parse()
            .map_err(|_| format_err(format!("row {}: bad condition", line + 1)))?;
        let key = CellKey {
            variant: rec[0].parse()?,
            method: rec[1].parse()?,
            condition: Condition::new(condition)?,
        };
        let kappa = if rec[7].is_empty() {
            None
        } else {
            Some(Stat {
                mean: num(7)?,
                sd: num(8)?,
            })
        };
        out.push(CellSummary {
            key,
            ari_a: Stat {
                mean: num(3)?,
                sd: num(4)?,
            },
            ari_b: Stat {
                mean: num(5)?,
                sd: num(6)?,
            },
            kappa,
        });
    }
    Ok(out)
}
