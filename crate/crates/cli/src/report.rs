//! Reading report CSVs back into `ChangeReport`s.

use std::path::Path;

use anyhow::{bail, Context, Result};
use bsc::{ChangeReport, CodeLenBreakdown, REPORT_CSV_HEADER};
use serde::Deserialize;

#[derive(Deserialize)]
struct Row {
    t: usize,
    k_hat: usize,
    k_concat: Option<usize>,
    phi: Option<f64>,
    epsilon: Option<f64>,
    alarm: u8,
    l_k: f64,
    l_z: f64,
    l_y: f64,
    l_x: f64,
    summary_total: f64,
    data_total: f64,
}

pub fn read_reports(path: &Path) -> Result<Vec<ChangeReport>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != REPORT_CSV_HEADER {
        bail!("{}: unexpected header {header:?}", path.display());
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            let row: Row = row.with_context(|| format!("{}: row {}", path.display(), i + 2))?;
            Ok(ChangeReport {
                t: row.t,
                k_hat: row.k_hat,
                k_concat: row.k_concat,
                phi: row.phi,
                epsilon: row.epsilon,
                alarm: row.alarm != 0,
                breakdown: CodeLenBreakdown::new(row.l_k, row.l_z, row.l_y, row.l_x),
                summary_total: row.summary_total,
                data_total: row.data_total,
            })
        })
        .collect()
}
