use crate::error::{Error, Result};

/// Mean absolute error `Σ|p − t| / count`.
pub fn mae(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::InvalidArgument(format!(
            "mae needs equal lengths, got {} and {}",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("mae of an empty list".into()));
    }
    let total: f64 = predictions.iter().zip(truths).map(|(p, t)| (p - t).abs()).sum();
    Ok(total / predictions.len() as f64)
}
