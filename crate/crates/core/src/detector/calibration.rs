//! Empirical threshold calibration under H0.
//!
//! No closed-form null distribution of the statistic is available, so the
//! threshold is the empirical `(1 - PFA)` quantile of simulated H0
//! statistics, taken with the conservative "higher" rule (the smallest
//! order statistic at or above the interpolation point).

use rayon::prelude::*;

use crate::{IsacError, Result};

/// Below this many expected exceedances the quantile is poorly resolved.
pub const MIN_EXPECTED_EXCEEDANCES: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Log-domain threshold compared against `T`.
    pub threshold: f64,
    pub trials: usize,
    pub pfa_target: f64,
    /// Fraction of the calibration statistics at or above the threshold.
    pub in_sample_pfa: f64,
    pub warning: Option<String>,
}

/// `(1 - pfa)` quantile of `samples` with higher interpolation.
pub fn quantile_threshold(samples: &[f64], pfa: f64) -> Result<Calibration> {
    if samples.is_empty() {
        return Err(IsacError::Config(
            "threshold calibration needs at least one trial".into(),
        ));
    }
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(IsacError::Config(format!(
            "pfa must lie in (0, 1), got {pfa}"
        )));
    }
    if samples.iter().any(|t| !t.is_finite()) {
        return Err(IsacError::Numerical(
            "non-finite statistic in calibration set".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let position = (1.0 - pfa) * (n - 1) as f64;
    let index = (position.ceil() as usize).min(n - 1);
    let threshold = sorted[index];
    let warning = (n as f64 * pfa < MIN_EXPECTED_EXCEEDANCES).then(|| {
        format!("{n} calibration trials resolve PFA {pfa} with fewer than {MIN_EXPECTED_EXCEEDANCES} exceedances")
    });
    Ok(Calibration {
        threshold,
        trials: n,
        pfa_target: pfa,
        in_sample_pfa: empirical_pfa(&sorted, threshold),
        warning,
    })
}

/// Fraction of statistics with `T >= threshold`.
pub fn empirical_pfa(statistics: &[f64], threshold: f64) -> f64 {
    if statistics.is_empty() {
        return 0.0;
    }
    statistics.iter().filter(|t| **t >= threshold).count() as f64 / statistics.len() as f64
}

/// Draws `trials` H0 statistics with `sample(trial_id)` in parallel on the
/// current rayon pool and returns the calibrated threshold. Results are
/// collected in trial order, so the outcome does not depend on scheduling.
pub fn calibrate_threshold<F>(pfa: f64, trials: usize, sample: F) -> Result<Calibration>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    let stats = (0..trials as u64)
        .into_par_iter()
        .map(sample)
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    quantile_threshold(&stats, pfa)
}
