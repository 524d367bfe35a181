//! CSV rows for per-trial results, per-cell summaries and bound curves.

use anyhow::{Context, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

pub const RESULT_HEADER: &str = "cell_id,method,lambda,sigma,mag,n,m,d,trial,seed,ev,opt,status,runtime_ms";

/// An optional number written as `NA` when absent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metric(pub Option<f64>);

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("NA"),
        }
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "NA" {
            return Ok(Metric(None));
        }
        s.parse().map(|v| Metric(Some(v))).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub cell_id: usize,
    pub method: String,
    pub lambda: f64,
    pub sigma: Metric,
    pub mag: Metric,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub trial: usize,
    pub seed: u64,
    pub ev: Metric,
    pub opt: Metric,
    pub status: String,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell_id: usize,
    pub method: String,
    pub lambda: f64,
    pub sigma: Metric,
    pub mag: Metric,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub trials: usize,
    /// Trials that finished and could be scored.
    pub scored: usize,
    pub mean_ev: Metric,
    pub std_ev: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub lambda: f64,
    pub bound: f64,
    pub model: String,
    pub t_hat_ratio: f64,
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_rows(rows, f)
}

/// Appends result rows, writing the header only when the file is new or
/// empty.
pub fn append_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = csv::WriterBuilder::new().has_headers(fresh).from_writer(f);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// Mean and population standard deviation of the scored trials of each
/// `(cell, method)` group. `rows` must already be sorted by cell and method.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let first = &rows[start];
        let end = start
            + rows[start..]
                .iter()
                .take_while(|r| r.cell_id == first.cell_id && r.method == first.method)
                .count();
        let evs: Vec<f64> = rows[start..end]
            .iter()
            .filter(|r| r.status == "ok")
            .filter_map(|r| r.ev.0)
            .collect();
        let (mean, std) = if evs.is_empty() {
            (None, None)
        } else {
            let k = evs.len() as f64;
            let mean = evs.iter().sum::<f64>() / k;
            let var = evs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / k;
            (Some(mean), Some(var.sqrt()))
        };
        out.push(SummaryRow {
            cell_id: first.cell_id,
            method: first.method.clone(),
            lambda: first.lambda,
            sigma: first.sigma,
            mag: first.mag,
            n: first.n,
            m: first.m,
            d: first.d,
            trials: end - start,
            scored: evs.len(),
            mean_ev: Metric(mean),
            std_ev: Metric(std),
        });
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(trial: usize, ev: Option<f64>, status: &str) -> ResultRow {
        ResultRow {
            cell_id: 0,
            method: "hrpca".into(),
            lambda: 0.1,
            sigma: Metric(Some(2.0)),
            mag: Metric(None),
            n: 10,
            m: 3,
            d: 1,
            trial,
            seed: u64::MAX,
            ev: Metric(ev),
            opt: Metric(Some(0.1 + 0.2)),
            status: status.into(),
            runtime_ms: 1.5,
        }
    }

    #[test]
    fn header_is_fixed() {
        let mut buf = Vec::new();
        write_rows(&[row(0, None, "ok")], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), RESULT_HEADER);
        assert!(text.contains(",NA,"));
    }

    #[test]
    fn rows_round_trip_losslessly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rows = vec![row(0, Some(1.0 / 3.0), "ok"), row(1, None, "ill_conditioned")];
        append_results(&rows[..1], &path).unwrap();
        append_results(&rows[1..], &path).unwrap();
        let back: Vec<ResultRow> = read_csv(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn summary_skips_failed_trials() {
        let rows = vec![row(0, Some(0.5), "ok"), row(1, Some(1.0), "ok"), row(2, None, "invalid_argument")];
        let s = summarize(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].trials, 3);
        assert_eq!(s[0].scored, 2);
        assert_eq!(s[0].mean_ev.0, Some(0.75));
        assert_eq!(s[0].std_ev.0, Some(0.25));
    }
}
