use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mse: f64,
    pub nmxm: f64,
}

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::InvalidParams(
            "metrics need at least one sample".into(),
        ));
    }
    Ok(())
}

pub fn mse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    check(estimate, truth)?;
    let sum: f64 = estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t) * (e - t))
        .sum();
    Ok(sum / estimate.len() as f64)
}

/// Normalised maximum cross-correlation magnitude over lags in
/// `[-max_lag, max_lag]` samples. Two all-zero series count as identical.
pub fn nmxm(a: &[f64], b: &[f64], max_lag: usize) -> Result<f64> {
    check(a, b)?;
    let na: f64 = a.iter().map(|v| v * v).sum();
    let nb: f64 = b.iter().map(|v| v * v).sum();
    if na == 0.0 && nb == 0.0 {
        return Ok(1.0);
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let n = a.len() as isize;
    let lag = max_lag.min(a.len() - 1) as isize;
    let mut best = 0.0f64;
    for l in -lag..=lag {
        let mut s = 0.0;
        for i in 0.max(-l)..n.min(n - l) {
            s += a[i as usize] * b[(i + l) as usize];
        }
        best = best.max(s.abs());
    }
    Ok((best / (na * nb).sqrt()).min(1.0))
}

/// Lag bound of two seconds at the given frame rate.
pub fn default_max_lag(frame_rate: f64) -> usize {
    (2.0 * frame_rate).round() as usize
}

pub fn metrics(estimate: &[f64], truth: &[f64], max_lag: usize) -> Result<Metrics> {
    Ok(Metrics {
        mse: mse(estimate, truth)?,
        nmxm: nmxm(estimate, truth, max_lag)?,
    })
}
