//! Initial (dimensionless) delays and angles from the field bank.
//!
//! Delays are unit-mean exponential, NLOS angles uniform on (−π/2, π/2).
//! Both ends of the link contribute one field value each, summed before the
//! erfc map, so the result is symmetric under TX/RX exchange.

use std::f64::consts::FRAC_PI_2;

use crate::corr_field::FieldSet;
use crate::error::Result;
use crate::geom::LinkGeometry;

use super::InitialPaths;

/// Map two normal field values (one per link end) to `U(0,1)`.
///
/// `rho_tr` is the field correlation at the TX–RX distance; dividing by
/// `sqrt(rho_tr + 1)` keeps the variance of the sum fixed when the two
/// ends are close.
pub fn reciprocal_uniform(a: f64, b: f64, rho_tr: f64) -> f64 {
    0.5 * libm::erfc(-(a + b) / (2.0 * (rho_tr + 1.0).sqrt()))
}

/// Initial NLOS delay from the delay-field values at TX and RX.
pub fn initial_delay(a: f64, b: f64, rho_tr: f64) -> f64 {
    -reciprocal_uniform(a, b, rho_tr).max(f64::MIN_POSITIVE).ln()
}

/// Initial NLOS angle from `X^A` at one end and `X^B` at the other.
pub fn initial_angle(a: f64, b: f64) -> f64 {
    FRAC_PI_2 * libm::erfc(-(a + b) / 2.0) - FRAC_PI_2
}

/// Initial delays, LOS first (always 0).
pub fn gen_initial_delays(fields: &FieldSet, geom: &LinkGeometry) -> Result<Vec<f64>> {
    geom.validate()?;
    let rho = fields.delay_acf().target(geom.distance_3d());
    let mut tau = Vec::with_capacity(fields.path_count());
    tau.push(0.0);
    tau.extend(fields.nlos().iter().map(|p| {
        initial_delay(p.delay.value_at(&geom.tx), p.delay.value_at(&geom.rx), rho)
    }));
    Ok(tau)
}

/// Initial departure/arrival azimuths and elevations, LOS first (all 0).
pub fn gen_initial_angles(
    fields: &FieldSet,
    geom: &LinkGeometry,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    geom.validate()?;
    let n = fields.path_count();
    let mut phi_d = vec![0.0; n];
    let mut phi_a = vec![0.0; n];
    let mut theta_d = vec![0.0; n];
    let mut theta_a = vec![0.0; n];
    for (i, p) in fields.nlos().iter().enumerate() {
        let l = i + 1;
        let (az_a_tx, az_a_rx) = (p.azimuth_a.value_at(&geom.tx), p.azimuth_a.value_at(&geom.rx));
        let (az_b_tx, az_b_rx) = (p.azimuth_b.value_at(&geom.tx), p.azimuth_b.value_at(&geom.rx));
        let (el_a_tx, el_a_rx) = (
            p.elevation_a.value_at(&geom.tx),
            p.elevation_a.value_at(&geom.rx),
        );
        let (el_b_tx, el_b_rx) = (
            p.elevation_b.value_at(&geom.tx),
            p.elevation_b.value_at(&geom.rx),
        );
        phi_d[l] = initial_angle(az_a_tx, az_b_rx);
        phi_a[l] = initial_angle(az_b_tx, az_a_rx);
        theta_d[l] = initial_angle(el_a_tx, el_b_rx);
        theta_a[l] = initial_angle(el_b_tx, el_a_rx);
    }
    Ok((phi_d, phi_a, theta_d, theta_a))
}

/// Delays and angles together.
pub fn initial_paths(fields: &FieldSet, geom: &LinkGeometry) -> Result<InitialPaths> {
    let tau = gen_initial_delays(fields, geom)?;
    let (phi_d, phi_a, theta_d, theta_a) = gen_initial_angles(fields, geom)?;
    Ok(InitialPaths {
        tau,
        phi_d,
        phi_a,
        theta_d,
        theta_a,
    })
}
