//! Exponentially weighted moving average for smoothing learning curves.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EwmaError {
    #[error("smoothing factor {0} is outside (0, 1]")]
    Alpha(f64),
    #[error("series is empty")]
    Empty,
}

/// `y₀ = x₀`, `yₜ = α·xₜ + (1 − α)·yₜ₋₁`.
pub fn ewma(series: &[f64], alpha: f64) -> Result<Vec<f64>, EwmaError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(EwmaError::Alpha(alpha));
    }
    let (&first, rest) = series.split_first().ok_or(EwmaError::Empty)?;
    let mut out = Vec::with_capacity(series.len());
    out.push(first);
    let mut y = first;
    for &x in rest {
        // Equal inputs leave the average unchanged exactly.
        if x != y {
            y = alpha * x + (1.0 - alpha) * y;
        }
        out.push(y);
    }
    Ok(out)
}
