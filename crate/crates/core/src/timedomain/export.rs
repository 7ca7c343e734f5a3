use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Grid1D, Medium, TimeAxis};
use crate::error::{invalid, Result};
use crate::history::FieldHistory;

use super::Scheme;

/// JSON sidecar written next to a snapshot CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub model: String,
    pub medium: Medium,
    pub grid: Grid1D,
    pub time: TimeAxis,
    pub scheme: Scheme,
    pub stride: usize,
    pub seed: Option<u64>,
}

fn io_err(e: impl std::fmt::Display) -> crate::error::Error {
    invalid(format!("write failed: {e}"))
}

/// Writes every `stride`-th snapshot (plus the last) as rows
/// `t,x,u,u_t,u_tt`, and the sidecar as `<path>.json`.
pub fn write_snapshots_csv(
    path: &Path,
    history: &FieldHistory,
    scheme: Scheme,
    stride: usize,
    seed: Option<u64>,
) -> Result<()> {
    if stride == 0 {
        return Err(invalid("snapshot stride must be at least 1"));
    }
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["t", "x", "u", "u_t", "u_tt"]).map_err(io_err)?;
    let last = history.len() - 1;
    for n in (0..=last).filter(|n| n % stride == 0 || *n == last) {
        let t = history.time.t(n);
        for i in 0..history.grid.n_nodes() {
            w.serialize((
                t,
                history.grid.x(i),
                history.u()[n][i],
                history.ut()[n][i],
                history.utt()[n][i],
            ))
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;

    let sidecar = SnapshotSidecar {
        model: history.model.clone(),
        medium: history.medium,
        grid: history.grid,
        time: history.time,
        scheme,
        stride,
        seed,
    };
    let mut json_path = path.as_os_str().to_owned();
    json_path.push(".json");
    let f = File::create(&json_path).map_err(io_err)?;
    let mut bw = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut bw, &sidecar).map_err(io_err)?;
    bw.write_all(b"\n").map_err(io_err)?;
    Ok(())
}

/// Two columns `x,p` (or one labelled column per profile when several are given).
pub fn write_pressure_csv(path: &Path, grid: &Grid1D, labels: &[String], profiles: &[Vec<f64>]) -> Result<()> {
    if labels.len() != profiles.len() {
        return Err(invalid("one label per profile"));
    }
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    let mut header = vec!["x".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header).map_err(io_err)?;
    for i in 0..grid.n_nodes() {
        let mut row = vec![format!("{:e}", grid.x(i))];
        for p in profiles {
            row.push(format!("{:e}", p[i]));
        }
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}
