use super::EvalError;

fn check(preds: &[f64], labels: &[bool]) -> Result<(), EvalError> {
    if preds.len() != labels.len() {
        return Err(EvalError::Length {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Squared error of one prediction. Written per label so that
/// `(p, true)` and `(1 - p, false)` produce bit-identical terms.
fn squared_error(p: f64, label: bool) -> f64 {
    let e = if label { 1.0 - p } else { p };
    e * e
}

/// Mean squared difference between predicted probabilities and outcomes.
pub fn brier(preds: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    check(preds, labels)?;
    let sum: f64 = preds.iter().zip(labels).map(|(&p, &y)| squared_error(p, y)).sum();
    Ok(sum / preds.len() as f64)
}

/// Fraction of correct calls. A prediction of exactly 0.5 always counts as wrong.
pub fn accuracy(preds: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    check(preds, labels)?;
    let correct = preds
        .iter()
        .zip(labels)
        .filter(|(&p, &y)| if y { p > 0.5 } else { p < 0.5 })
        .count();
    Ok(correct as f64 / preds.len() as f64)
}

/// Base-rate forecast: the positive-label fraction and its Brier score.
pub fn climatology(labels: &[bool]) -> Result<(f64, f64), EvalError> {
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    let rate = labels.iter().filter(|&&y| y).count() as f64 / labels.len() as f64;
    let preds = vec![rate; labels.len()];
    Ok((rate, brier(&preds, labels)?))
}
