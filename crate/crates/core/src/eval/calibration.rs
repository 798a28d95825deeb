use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Number of equal-width probability bins.
pub const BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Mean prediction inside the bin; `None` when empty.
    pub predicted_mean: Option<f64>,
    /// Fraction of positive labels inside the bin; `None` when empty.
    pub empirical_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub bins: Vec<CalibrationBin>,
    /// Count-weighted least-squares line through the non-empty bins; absent
    /// when fewer than two distinct bin means exist.
    pub line: Option<LineFit>,
}

fn bin_index(p: f64) -> usize {
    ((p * BINS as f64).floor().max(0.0) as usize).min(BINS - 1)
}

/// Reliability curve over the bins `[0, 0.05), [0.05, 0.1), …, [0.95, 1]`.
pub fn calibration(preds: &[f64], labels: &[bool]) -> Result<CalibrationCurve, EvalError> {
    if preds.len() != labels.len() {
        return Err(EvalError::Length {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sum_p = [0.0; BINS];
    let mut pos = [0usize; BINS];
    let mut count = [0usize; BINS];
    for (&p, &y) in preds.iter().zip(labels) {
        let b = bin_index(p);
        sum_p[b] += p;
        pos[b] += usize::from(y);
        count[b] += 1;
    }
    let bins: Vec<CalibrationBin> = (0..BINS)
        .map(|b| {
            let n = count[b];
            let (predicted_mean, empirical_rate) = if n == 0 {
                (None, None)
            } else {
                (Some(sum_p[b] / n as f64), Some(pos[b] as f64 / n as f64))
            };
            CalibrationBin {
                lo: b as f64 / BINS as f64,
                hi: (b + 1) as f64 / BINS as f64,
                count: n,
                predicted_mean,
                empirical_rate,
            }
        })
        .collect();
    let line = weighted_line(&bins);
    Ok(CalibrationCurve { bins, line })
}

fn weighted_line(bins: &[CalibrationBin]) -> Option<LineFit> {
    let points: Vec<(f64, f64, f64)> = bins
        .iter()
        .filter_map(|b| Some((b.predicted_mean?, b.empirical_rate?, b.count as f64)))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let w: f64 = points.iter().map(|p| p.2).sum();
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / w;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / w;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * w {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

impl CalibrationCurve {
    /// CSV `lo,hi,count,pred_mean,emp_rate`; empty bins leave the last two blank.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["lo", "hi", "count", "pred_mean", "emp_rate"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for b in &self.bins {
            out.write_record([
                b.lo.to_string(),
                b.hi.to_string(),
                b.count.to_string(),
                opt(b.predicted_mean),
                opt(b.empirical_rate),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
