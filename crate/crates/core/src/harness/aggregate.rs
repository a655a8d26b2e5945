use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::Method;
use super::experiment::ResultRecord;
use crate::error::{Error, Result};
use crate::spectral::Scheme;

/// Mean and standard error over trials for one (antennas, scheme, method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub antennas: u32,
    pub scheme: Scheme,
    pub method: Method,
    pub trials: usize,
    pub se_mean: f64,
    pub se_stderr: f64,
    pub coalition_size_mean: f64,
    pub coalition_size_stderr: f64,
    pub searches_mean: f64,
    pub searches_stderr: f64,
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups records by (antennas, scheme, method), sorted by that key.
pub fn aggregate(records: &[ResultRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to aggregate".into()));
    }
    let mut groups: BTreeMap<(u32, Scheme, Method), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.antennas, r.scheme, r.method))
            .or_default()
            .push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((antennas, scheme, method), rs)| {
            let col = |f: fn(&ResultRecord) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (se_mean, se_stderr) = mean_stderr(&col(|r| r.mean_se));
            let (coalition_size_mean, coalition_size_stderr) =
                mean_stderr(&col(|r| r.mean_coalition_size));
            let (searches_mean, searches_stderr) = mean_stderr(&col(|r| r.mean_searches));
            SummaryRow {
                antennas,
                scheme,
                method,
                trials: rs.len(),
                se_mean,
                se_stderr,
                coalition_size_mean,
                coalition_size_stderr,
                searches_mean,
                searches_stderr,
            }
        })
        .collect())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
