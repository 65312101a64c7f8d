use serde::Serialize;

use crate::error::{invalid, Result};

/// Least-squares line through `(log₂ x, log₂ y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
    pub config_hash: Option<String>,
}

impl FitReport {
    pub fn with_hash(mut self, hash: impl Into<String>) -> Self {
        self.config_hash = Some(hash.into());
        self
    }

    /// Fitted `y` at `x`.
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.log2()).exp2()
    }
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<FitReport> {
    if points.len() < 3 {
        return Err(invalid(format!("need at least 3 points for a fit, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(invalid(format!("log-log fit needs positive finite data, got ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.log2(), y.log2())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) {
        return Err(invalid("log-log fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitReport { slope, intercept, r_squared, points: logs, config_hash: None })
}
