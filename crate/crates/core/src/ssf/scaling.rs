//! Delay and angle scaling to the requested spreads.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::metrics::{angular_spread, delay_spread};

use super::AngleDim;

/// `arg exp(jx)`: reduce an angle to `(−π, π]`. Values already in range are
/// returned unchanged.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Scale initial delays so the mean (over frequencies) ratio of requested to
/// estimated delay spread is applied. Returns the delays and the factor.
pub fn scale_delays(init_tau: &[f64], powers: &[Vec<f64>], ds_target: &[f64]) -> Result<(Vec<f64>, f64)> {
    let factor = mean_ratio(powers, ds_target, |p| delay_spread(init_tau, p), "delay spread")?;
    Ok((init_tau.iter().map(|t| t * factor).collect(), factor))
}

/// Result of [`scale_angles`].
#[derive(Debug, Clone, PartialEq)]
pub struct AngleScaling {
    pub angles: Vec<f64>,
    /// Applied factor, after the cap.
    pub factor: f64,
    /// Factor before the cap.
    pub requested_factor: f64,
}

impl AngleScaling {
    pub fn capped(&self) -> bool {
        self.requested_factor > self.factor
    }
}

/// Scale initial angles by `s = mean_f(AS_target_f / AS_est_f)`, capped per
/// dimension, and wrap onto the circle.
pub fn scale_angles(
    init_angles: &[f64],
    powers: &[Vec<f64>],
    as_target: &[f64],
    dim: AngleDim,
) -> Result<AngleScaling> {
    let requested = mean_ratio(
        powers,
        as_target,
        |p| angular_spread(init_angles, p),
        dim.spread_name(),
    )?;
    let factor = requested.min(dim.max_scale());
    Ok(AngleScaling {
        angles: init_angles.iter().map(|a| wrap_angle(a * factor)).collect(),
        factor,
        requested_factor: requested,
    })
}

fn mean_ratio<F>(powers: &[Vec<f64>], targets: &[f64], estimate: F, what: &'static str) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if powers.len() != targets.len() || powers.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} power rows for {} {what} targets",
            powers.len(),
            targets.len()
        )));
    }
    let mut acc = 0.0;
    for (p, &t) in powers.iter().zip(targets) {
        let est = estimate(p)?;
        if !(est > 0.0) {
            return Err(Error::ZeroSpread(what));
        }
        acc += t / est;
    }
    Ok(acc / targets.len() as f64)
}
