//! Observed orders of convergence.

use serde::Serialize;

/// Errors at or below this are round-off, not discretization error.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RateError {
    #[error("need at least three usable points, got {usable} ({excluded} below the noise floor)")]
    InsufficientData { usable: usize, excluded: usize },
    #[error("error {value:e} at h = {h} is not positive")]
    NonPositiveError { h: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    /// RMS residual of the log-log line.
    pub residual: f64,
    /// `h` of points dropped below [`NOISE_FLOOR`].
    pub excluded: Vec<f64>,
}

/// Least-squares slope of `log e` against `log h`. Points with
/// `0 ≤ e ≤ NOISE_FLOOR` are excluded and listed; negative or non-finite
/// errors are rejected.
pub fn fit_rate(h: &[f64], errors: &[f64]) -> Result<RateFit, RateError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (&hi, &e) in h.iter().zip(errors) {
        if !(e >= 0.0) || !e.is_finite() {
            return Err(RateError::NonPositiveError { h: hi, value: e });
        }
        if e <= NOISE_FLOOR {
            excluded.push(hi);
            continue;
        }
        xs.push(hi.ln());
        ys.push(e.ln());
    }
    let n = xs.len();
    let distinct = {
        let mut s = xs.clone();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s.len()
    };
    if n < 3 || distinct < 2 {
        return Err(RateError::InsufficientData { usable: n, excluded: excluded.len() });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / n as f64).sqrt();
    Ok(RateFit { slope, residual, excluded })
}

/// Pairwise orders `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`; `None` where an
/// error is not above the noise floor.
pub fn pairwise_eoc(h: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    h.windows(2)
        .zip(errors.windows(2))
        .map(|(hw, ew)| {
            (ew[0] > NOISE_FLOOR && ew[1] > NOISE_FLOOR).then(|| (ew[0] / ew[1]).ln() / (hw[0] / hw[1]).ln())
        })
        .collect()
}
