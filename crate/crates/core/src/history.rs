use serde::{Deserialize, Serialize};

use crate::domain::{Grid1D, Medium, TimeAxis};
use crate::error::{check_len, invalid, Result};

/// Time-indexed snapshots of a field and its first two time derivatives.
///
/// `u[n][i]` is the value at `t_n`, node `i`. Snapshot count is
/// `time.n_steps() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHistory {
    pub model: String,
    pub medium: Medium,
    pub grid: Grid1D,
    pub time: TimeAxis,
    u: Vec<Vec<f64>>,
    ut: Vec<Vec<f64>>,
    utt: Vec<Vec<f64>>,
}

impl FieldHistory {
    pub fn new(
        model: impl Into<String>,
        medium: Medium,
        grid: Grid1D,
        time: TimeAxis,
        u: Vec<Vec<f64>>,
        ut: Vec<Vec<f64>>,
        utt: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n_snap = time.n_steps() + 1;
        check_len("u snapshots", u.len(), n_snap)?;
        check_len("u_t snapshots", ut.len(), n_snap)?;
        check_len("u_tt snapshots", utt.len(), n_snap)?;
        for s in u.iter().chain(&ut).chain(&utt) {
            check_len("snapshot", s.len(), grid.n_nodes())?;
        }
        Ok(Self {
            model: model.into(),
            medium,
            grid,
            time,
            u,
            ut,
            utt,
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn ut(&self) -> &[Vec<f64>] {
        &self.ut
    }

    pub fn utt(&self) -> &[Vec<f64>] {
        &self.utt
    }

    pub fn final_u(&self) -> &[f64] {
        self.u.last().expect("history is never empty")
    }

    pub fn final_ut(&self) -> &[f64] {
        self.ut.last().expect("history is never empty")
    }

    /// Snapshot-wise `self - other` on a shared grid and time axis.
    pub fn difference(&self, other: &FieldHistory) -> Result<FieldHistory> {
        if self.grid != other.grid || self.time != other.time {
            return Err(invalid("histories live on different grids or time axes"));
        }
        let sub = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
                .collect()
        };
        Ok(FieldHistory {
            model: format!("{} - {}", self.model, other.model),
            medium: self.medium,
            grid: self.grid,
            time: self.time,
            u: sub(&self.u, &other.u),
            ut: sub(&self.ut, &other.ut),
            utt: sub(&self.utt, &other.utt),
        })
    }

    /// Every entry multiplied by `s`.
    pub fn scaled(&self, s: f64) -> FieldHistory {
        let sc = |a: &[Vec<f64>]| -> Vec<Vec<f64>> {
            a.iter().map(|x| x.iter().map(|v| s * v).collect()).collect()
        };
        FieldHistory {
            model: self.model.clone(),
            medium: self.medium,
            grid: self.grid,
            time: self.time,
            u: sc(&self.u),
            ut: sc(&self.ut),
            utt: sc(&self.utt),
        }
    }

    /// First `steps` steps only (`steps + 1` snapshots).
    pub fn truncated(&self, steps: usize) -> Result<FieldHistory> {
        if steps == 0 || steps > self.time.n_steps() {
            return Err(invalid(format!(
                "cannot truncate {} steps to {steps}",
                self.time.n_steps()
            )));
        }
        if steps == self.time.n_steps() {
            return Ok(self.clone());
        }
        let time = TimeAxis::new(self.time.t(steps), steps)?;
        Ok(FieldHistory {
            model: self.model.clone(),
            medium: self.medium,
            grid: self.grid,
            time,
            u: self.u[..=steps].to_vec(),
            ut: self.ut[..=steps].to_vec(),
            utt: self.utt[..=steps].to_vec(),
        })
    }

    /// True when every stored value is finite.
    pub fn all_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.ut)
            .chain(&self.utt)
            .all(|s| s.iter().all(|v| v.is_finite()))
    }
}
