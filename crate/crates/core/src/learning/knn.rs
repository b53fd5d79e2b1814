//! k-nearest-neighbour classifier.
//!
//! Euclidean distance on the encoded matrix, with columns whose provenance is
//! numeric z-scored using training statistics. Equal distances are ordered
//! by training row index.

use serde::{Deserialize, Serialize};

use crate::encoding::{ColumnRole, EncodedMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    width: usize,
    /// Per-column `(shift, scale)`; identity for non-numeric columns.
    scaling: Vec<(f64, f64)>,
    train: Vec<f64>,
    labels: Vec<u8>,
}

impl KnnModel {
    pub(crate) fn fit(x: &EncodedMatrix, y: &[u8], params: &KnnParams) -> KnnModel {
        let n = x.rows() as f64;
        let scaling: Vec<(f64, f64)> = x
            .provenance()
            .iter()
            .enumerate()
            .map(|(c, src)| {
                if src.role != ColumnRole::Numeric {
                    return (0.0, 1.0);
                }
                let mean = (0..x.rows()).map(|i| x.get(i, c)).sum::<f64>() / n;
                let var = (0..x.rows()).map(|i| (x.get(i, c) - mean).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                (mean, if sd > 0.0 { sd } else { 1.0 })
            })
            .collect();
        let mut train = Vec::with_capacity(x.values().len());
        for i in 0..x.rows() {
            train.extend(x.row(i).iter().zip(&scaling).map(|(v, (m, s))| (v - m) / s));
        }
        KnnModel { k: params.k, width: x.cols(), scaling, train, labels: y.to_vec() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Fraction of positive labels among the `k` nearest training rows.
    pub fn predict_accept_row(&self, row: &[f64]) -> f64 {
        let q: Vec<f64> = row.iter().zip(&self.scaling).map(|(v, (m, s))| (v - m) / s).collect();
        let mut dist: Vec<(f64, usize)> = self
            .train
            .chunks(self.width.max(1))
            .take(self.labels.len())
            .enumerate()
            .map(|(i, t)| (t.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(dist.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        let pos = dist[..k].iter().filter(|(_, i)| self.labels[*i] == 1).count();
        pos as f64 / k as f64
    }
}
