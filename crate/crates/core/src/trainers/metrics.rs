use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Exact CSV column order.
pub const METRICS_COLUMNS: [&str; 16] = [
    "step",
    "algorithm",
    "arew_mode",
    "lambda_inj",
    "flip_alpha",
    "mean_reward",
    "as_proxy_mean",
    "bt_proxy_mean",
    "I_th_est",
    "C_BT_est",
    "acc_q",
    "acc_u",
    "clip_frac",
    "grad_norm_q",
    "grad_norm_u",
    "seed",
];

/// One row per training step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: usize,
    pub algorithm: String,
    pub arew_mode: String,
    pub lambda_inj: f64,
    pub flip_alpha: f64,
    pub mean_reward: f64,
    /// Per-turn AS proxy, averaged over the batch.
    pub as_proxy_mean: f64,
    /// Per-turn BT proxy, averaged over the batch.
    pub bt_proxy_mean: f64,
    #[serde(rename = "I_th_est")]
    pub i_th_est: f64,
    #[serde(rename = "C_BT_est")]
    pub c_bt_est: f64,
    pub acc_q: f64,
    pub acc_u: f64,
    pub clip_frac: f64,
    pub grad_norm_q: f64,
    pub grad_norm_u: f64,
    pub seed: u64,
}

/// CSV writer that always emits the header, even for an empty run.
pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        inner.write_record(METRICS_COLUMNS)?;
        Ok(Self { inner })
    }

    /// Writes and flushes one row.
    pub fn write(&mut self, record: &MetricsRecord) -> Result<()> {
        self.inner.serialize(record)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| crate::error::Error::Io(e.into_error()))
    }
}

/// Rows of a metrics CSV; fails when the header differs from [`METRICS_COLUMNS`].
pub fn read_metrics(data: impl std::io::Read) -> Result<Vec<MetricsRecord>> {
    let mut reader = csv::Reader::from_reader(data);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != METRICS_COLUMNS {
        return Err(crate::error::Error::Usage(format!("unexpected metrics header {header:?}")));
    }
    reader.deserialize().map(|r| r.map_err(Into::into)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> MetricsRecord {
        MetricsRecord {
            step: 0,
            algorithm: "ppo".into(),
            arew_mode: "off".into(),
            lambda_inj: 0.5,
            flip_alpha: 0.0,
            mean_reward: 0.25,
            as_proxy_mean: 0.1,
            bt_proxy_mean: 0.0,
            i_th_est: 0.05,
            c_bt_est: 0.01,
            acc_q: f64::NAN,
            acc_u: 1.0,
            clip_frac: 0.0,
            grad_norm_q: 0.3,
            grad_norm_u: 0.2,
            seed: 7,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        w.write(&row()).unwrap();
        let bytes = w.into_inner().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with(&METRICS_COLUMNS.join(",")));
        let back = read_metrics(bytes.as_slice()).unwrap();
        assert_eq!(back.len(), 1);
        assert!(back[0].acc_q.is_nan());
        assert_eq!(back[0].seed, 7);
    }

    #[test]
    fn empty_run_has_header_only() {
        let bytes = MetricsWriter::new(Vec::new()).unwrap().into_inner().unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap().trim_end(), METRICS_COLUMNS.join(","));
    }
}
