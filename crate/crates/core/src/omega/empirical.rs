use crate::omega::{OmegaValue, ReturnSeries, Threshold};

/// Empirical Omega: `Σ max(r − θ, 0) / Σ max(θ − r, 0)`, the definition with the
/// empirical CDF plugged in.
pub fn omega_empirical(series: &ReturnSeries, theta: Threshold) -> OmegaValue {
    let theta = theta.value();
    let mut gains = 0.0;
    let mut losses = 0.0;
    for &r in series.returns() {
        gains += (r - theta).max(0.0);
        losses += (theta - r).max(0.0);
    }
    OmegaValue::from_parts(gains, losses)
}

/// Gain–loss ratio: total positive returns over total absolute negative returns.
pub fn gain_loss_ratio(series: &ReturnSeries) -> OmegaValue {
    let gains: f64 = series.returns().iter().filter(|r| **r > 0.0).sum();
    let losses: f64 = series.returns().iter().filter(|r| **r < 0.0).map(|r| -r).sum();
    OmegaValue::from_parts(gains, losses)
}
