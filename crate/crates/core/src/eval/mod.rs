//! Train/test protocol and probabilistic scoring.

mod calibration;
mod metrics;
mod split;
mod team;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::LineupId;

pub use calibration::{calibration, CalibrationBin, CalibrationCurve, LineFit, BINS};
pub use metrics::{accuracy, brier, climatology};
pub use split::{split, SplitSpec, MIN_LABELED};
pub use team::{
    pearson, rating_record_correlation, read_team_records, similarity_distance_diag, team_rating, TeamRating,
    TeamRecord, MIN_RATED_MINUTES,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{preds} predictions but {labels} labels")]
    Length { preds: usize, labels: usize },
    #[error("no observations")]
    Empty,
    #[error("train fraction must lie in (0, 1), got {0}")]
    TrainFraction(f64),
    #[error("no testable labels: every record is tied")]
    NoLabels,
    #[error("only {0} labelled records; at least {MIN_LABELED} are needed to split")]
    TooFew(usize),
    #[error("no lineup with more than {MIN_RATED_MINUTES} minutes")]
    NoQualifyingLineups,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Predicted probability that `lineup_a` (the lower id) outperformed `lineup_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPrediction {
    pub lineup_a: LineupId,
    pub lineup_b: LineupId,
    pub probability: f64,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub accuracy: f64,
    pub brier: f64,
    /// Base-rate probability of the test labels.
    pub climatology_probability: f64,
    pub brier_climatology: f64,
    pub bins: Vec<CalibrationBin>,
    pub calibration_slope: Option<f64>,
    pub calibration_intercept: Option<f64>,
    pub n_test: usize,
    /// Test pairs where at least one lineup had no learned representation.
    pub n_unseen: usize,
    pub predictions: Vec<PairPrediction>,
}

impl EvalReport {
    pub fn from_predictions(
        method: impl Into<String>,
        predictions: Vec<PairPrediction>,
        n_unseen: usize,
    ) -> Result<Self, EvalError> {
        let preds: Vec<f64> = predictions.iter().map(|p| p.probability).collect();
        let labels: Vec<bool> = predictions.iter().map(|p| p.label).collect();
        let curve = calibration(&preds, &labels)?;
        let (climatology_probability, brier_climatology) = climatology(&labels)?;
        Ok(Self {
            method: method.into(),
            accuracy: accuracy(&preds, &labels)?,
            brier: brier(&preds, &labels)?,
            climatology_probability,
            brier_climatology,
            calibration_slope: curve.line.map(|l| l.slope),
            calibration_intercept: curve.line.map(|l| l.intercept),
            bins: curve.bins,
            n_test: predictions.len(),
            n_unseen,
            predictions,
        })
    }

    pub fn calibration_curve(&self) -> CalibrationCurve {
        CalibrationCurve {
            bins: self.bins.clone(),
            line: self
                .calibration_slope
                .zip(self.calibration_intercept)
                .map(|(slope, intercept)| LineFit { slope, intercept }),
        }
    }
}
