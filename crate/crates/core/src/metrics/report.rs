//! Metric report CSV: `metric,basis_name,dataset,t,delta_v,value,stderr,seed_count`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    pub basis_name: String,
    pub dataset: String,
    pub t: usize,
    pub delta_v: String,
    pub value: f64,
    pub stderr: f64,
    pub seed_count: usize,
}

pub fn write_metric_report(path: impl AsRef<Path>, rows: &[MetricRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metric_report(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let rows = vec![MetricRecord {
            metric: "stability".into(),
            basis_name: "label".into(),
            dataset: "pairs".into(),
            t: 1,
            delta_v: "euclidean".into(),
            value: 0.1 + 0.2,
            stderr: 0.0,
            seed_count: 5,
        }];
        write_metric_report(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("metric,basis_name,dataset,t,delta_v,value,stderr,seed_count\n"));
        assert_eq!(read_metric_report(&path).unwrap(), rows);
    }
}
