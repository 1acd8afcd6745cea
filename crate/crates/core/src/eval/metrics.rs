use serde::Serialize;

use crate::error::{Error, Result};

/// Accuracy of predicted distances against exact ones over a set of pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub mae: f64,
    /// Fraction, not percent. Pairs with zero true distance are left out.
    pub mape: f64,
    /// `NaN` when either side has zero variance.
    pub pearson: f64,
    pub n: usize,
    /// Pairs excluded from the MAPE term.
    pub zero_truth: usize,
}

/// Metrics over paired slices; pair `i` is `(truth[i], pred[i])`.
pub fn metrics(truth: &[f64], pred: &[f64]) -> Result<MetricReport> {
    if truth.len() != pred.len() {
        return Err(Error::Shape {
            op: "metrics",
            detail: format!("{} truths vs {} predictions", truth.len(), pred.len()),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("metric pairs"));
    }
    let n = truth.len() as f64;
    let mae = truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).sum::<f64>() / n;
    let (mut ape, mut counted) = (0.0, 0usize);
    for (t, p) in truth.iter().zip(pred) {
        if *t > 0.0 {
            ape += (t - p).abs() / t;
            counted += 1;
        }
    }
    let mape = if counted > 0 { ape / counted as f64 } else { f64::NAN };
    Ok(MetricReport {
        mae,
        mape,
        pearson: pearson(truth, pred),
        n: truth.len(),
        zero_truth: truth.len() - counted,
    })
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.len() < 2 {
        return f64::NAN;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return f64::NAN;
    }
    cov / (va * vb).sqrt()
}
