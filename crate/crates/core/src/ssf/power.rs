//! Frequency-dependent power shaping and K-factor application.

use crate::error::{Error, Result};

use super::{InitialPaths, LsfSample, ScalingCoeffs};

const DS_BAR_MIN: f64 = 0.15;
const DS_BAR_MAX: f64 = 0.85;
const AS_BAR_MIN: f64 = 0.25;

/// Normalize per-frequency delay spreads into `[0.15, 0.85]`.
///
/// `ds_f / (max ds + min ds)`, clamped. A single frequency maps to 0.5.
pub fn normalize_ds(ds: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = min_max(ds, "delay spread")?;
    Ok(ds
        .iter()
        .map(|&d| (d / (hi + lo)).clamp(DS_BAR_MIN, DS_BAR_MAX))
        .collect())
}

/// Normalize per-frequency angular spreads: `max(0.75·AS_f / max AS, 0.25)`.
pub fn normalize_as(spreads: &[f64]) -> Result<Vec<f64>> {
    let (_, hi) = min_max(spreads, "angular spread")?;
    Ok(spreads
        .iter()
        .map(|&a| (0.75 * a / hi).max(AS_BAR_MIN))
        .collect())
}

fn min_max(values: &[f64], what: &str) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("empty {what} list")));
    }
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidArgument(format!("{what} must be positive, got {bad}")));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

pub(crate) fn g_ds(ds_bar: f64) -> f64 {
    -1.5 * (1.2 * ds_bar - 0.15).ln()
}

pub(crate) fn g_azimuth(as_bar: f64) -> f64 {
    -2.2 * (1.5 * as_bar - 0.35).ln()
}

pub(crate) fn g_elevation(as_bar: f64) -> f64 {
    -3.4 * (1.2 * as_bar - 0.1).ln()
}

/// Per-frequency power shaping coefficients from the requested spreads.
pub fn compute_scaling_coeffs(lsf: &LsfSample) -> Result<ScalingCoeffs> {
    lsf.validate()?;
    let ds_bar = normalize_ds(&lsf.column(|v| v.ds))?;
    let asd_bar = normalize_as(&lsf.column(|v| v.asd))?;
    let asa_bar = normalize_as(&lsf.column(|v| v.asa))?;
    let esd_bar = normalize_as(&lsf.column(|v| v.esd))?;
    let esa_bar = normalize_as(&lsf.column(|v| v.esa))?;
    let coeffs = ScalingCoeffs {
        g_ds: ds_bar.iter().map(|&x| g_ds(x)).collect(),
        g_asd: asd_bar.iter().map(|&x| g_azimuth(x)).collect(),
        g_asa: asa_bar.iter().map(|&x| g_azimuth(x)).collect(),
        g_esd: esd_bar.iter().map(|&x| g_elevation(x)).collect(),
        g_esa: esa_bar.iter().map(|&x| g_elevation(x)).collect(),
    };
    let all = [&coeffs.g_ds, &coeffs.g_asd, &coeffs.g_asa, &coeffs.g_esd, &coeffs.g_esa];
    if all.iter().any(|g| g.iter().any(|x| !x.is_finite())) {
        // unreachable with the clamps above
        return Err(Error::InvalidArgument("non-finite power shaping coefficient".into()));
    }
    Ok(coeffs)
}

/// Shaped initial powers, indexed `[f][l]`.
///
/// The exponent is summed pairwise (departure + arrival) so that exchanging
/// the two link ends leaves every power bit-identical.
pub fn gen_initial_powers(init: &InitialPaths, coeffs: &ScalingCoeffs) -> Vec<Vec<f64>> {
    (0..coeffs.g_ds.len())
        .map(|f| {
            (0..init.len())
                .map(|l| {
                    let delay = init.tau[l] * coeffs.g_ds[f];
                    let az = init.phi_d[l] * init.phi_d[l] * coeffs.g_asd[f]
                        + init.phi_a[l] * init.phi_a[l] * coeffs.g_asa[f];
                    let el = init.theta_d[l].abs() * coeffs.g_esd[f]
                        + init.theta_a[l].abs() * coeffs.g_esa[f];
                    (-(delay + az + el)).exp()
                })
                .collect()
        })
        .collect()
}

/// Set the LOS power to `kf_f` times the NLOS sum, then normalize each
/// frequency to unit total power.
pub fn apply_kf(p_tilde: &[Vec<f64>], kf: &[f64]) -> Result<Vec<Vec<f64>>> {
    if p_tilde.len() != kf.len() {
        return Err(Error::InvalidArgument(format!(
            "{} power rows for {} K-factors",
            p_tilde.len(),
            kf.len()
        )));
    }
    p_tilde
        .iter()
        .zip(kf)
        .map(|(row, &k)| {
            if row.len() < 2 {
                return Err(Error::InvalidArgument("need at least 2 paths".into()));
            }
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::InvalidArgument(format!("invalid K-factor {k}")));
            }
            let nlos: f64 = row[1..].iter().sum();
            if !(nlos > 0.0) {
                return Err(Error::ZeroPower);
            }
            let los = k * nlos;
            let total = los + nlos;
            let mut out = Vec::with_capacity(row.len());
            out.push(los / total);
            out.extend(row[1..].iter().map(|p| p / total));
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssf::LsfValues;
    use approx::assert_abs_diff_eq;

    fn flat(ds: f64, az: f64, el: f64, f: usize) -> LsfSample {
        LsfSample::new(vec![LsfValues { ds, asd: az, asa: az, esd: el, esa: el, kf: 2.0 }; f]).unwrap()
    }

    #[test]
    fn normalize_ds_examples() {
        assert_eq!(normalize_ds(&[3e-7]).unwrap(), vec![0.5]);
        assert_eq!(normalize_ds(&[1e-7, 1e-7]).unwrap(), vec![0.5, 0.5]);
        let v = normalize_ds(&[10e-9, 990e-9]).unwrap();
        assert_abs_diff_eq!(v[0], 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.85, epsilon = 1e-15);
        assert!(normalize_ds(&[]).is_err());
        assert!(normalize_ds(&[1e-7, 0.0]).is_err());
    }

    #[test]
    fn normalize_as_examples() {
        assert_eq!(normalize_as(&[0.3, 0.3]).unwrap(), vec![0.75, 0.75]);
        let v = normalize_as(&[0.1, 0.6]).unwrap();
        assert_abs_diff_eq!(v[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.75, epsilon = 1e-15);
        let v = normalize_as(&[0.4, 0.6]).unwrap();
        assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn flat_frequency_constants() {
        for f in [1, 3] {
            let c = compute_scaling_coeffs(&flat(1e-7, 0.5, 0.2, f)).unwrap();
            for i in 0..f {
                // -1.5 ln 0.45, -2.2 ln 0.775, -3.4 ln 0.8
                assert_abs_diff_eq!(c.g_ds[i], 1.197_761_544_326_657_6, epsilon = 1e-12);
                assert_abs_diff_eq!(c.g_asd[i], 0.560_762_949_183_338_1, epsilon = 1e-12);
                assert_abs_diff_eq!(c.g_asa[i], c.g_asd[i], epsilon = 0.0);
                assert_abs_diff_eq!(c.g_esd[i], 0.758_688_074_468_313_4, epsilon = 1e-12);
                assert_abs_diff_eq!(c.g_esa[i], c.g_esd[i], epsilon = 0.0);
            }
        }
    }

    #[test]
    fn coefficients_stay_finite_at_clamp_edges() {
        let lsf = LsfSample::new(vec![
            LsfValues { ds: 1e-9, asd: 0.001, asa: 0.001, esd: 0.001, esa: 0.001, kf: 1.0 },
            LsfValues { ds: 1e-5, asd: 2.0, asa: 2.0, esd: 2.0, esa: 2.0, kf: 1.0 },
        ])
        .unwrap();
        let c = compute_scaling_coeffs(&lsf).unwrap();
        assert!(c.g_ds[0] > c.g_ds[1]);
        assert!(c.g_asd[0] > c.g_asd[1]);
        assert!(c.g_esd[0] > c.g_esd[1]);
    }

    fn init(tau: Vec<f64>) -> InitialPaths {
        let n = tau.len();
        InitialPaths {
            tau,
            phi_d: vec![0.0; n],
            phi_a: vec![0.0; n],
            theta_d: vec![0.0; n],
            theta_a: vec![0.0; n],
        }
    }

    fn coeffs(g: f64) -> ScalingCoeffs {
        ScalingCoeffs { g_ds: vec![g], g_asd: vec![g], g_asa: vec![g], g_esd: vec![g], g_esa: vec![g] }
    }

    #[test]
    fn initial_power_examples() {
        let p = gen_initial_powers(&init(vec![0.0, 1.0]), &coeffs(1.2));
        assert_eq!(p[0][0], 1.0);
        assert_abs_diff_eq!(p[0][1], (-1.2f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(p[0][1], 0.301_194_211_912_202_1, epsilon = 1e-12);

        let mut i = init(vec![0.0, 0.4, 2.0]);
        i.phi_d[1] = 0.7;
        i.theta_a[2] = -0.3;
        let p = gen_initial_powers(&i, &coeffs(0.0));
        assert!(p[0].iter().all(|&x| x == 1.0));
    }

    #[test]
    fn squared_azimuth_absolute_elevation() {
        let mut i = init(vec![0.0, 0.0]);
        i.phi_d[1] = -0.5;
        i.theta_d[1] = -0.5;
        let c = ScalingCoeffs { g_ds: vec![0.0], g_asd: vec![1.0], g_asa: vec![0.0], g_esd: vec![0.0], g_esa: vec![0.0] };
        assert_abs_diff_eq!(gen_initial_powers(&i, &c)[0][1], (-0.25f64).exp(), epsilon = 1e-15);
        let c = ScalingCoeffs { g_ds: vec![0.0], g_asd: vec![0.0], g_asa: vec![0.0], g_esd: vec![1.0], g_esa: vec![0.0] };
        assert_abs_diff_eq!(gen_initial_powers(&i, &c)[0][1], (-0.5f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn kf_examples() {
        let p = apply_kf(&[vec![1.0, 0.3]], &[1.0]).unwrap();
        assert_abs_diff_eq!(p[0][0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[0][1], 0.5, epsilon = 1e-15);

        let kf = 10f64.powf(0.9);
        let p = apply_kf(&[vec![1.0, 0.2, 0.05, 0.1]], &[kf]).unwrap();
        assert_abs_diff_eq!(p[0][0], kf / (kf + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(p[0][0], 0.888_2, epsilon = 1e-4);

        let p = apply_kf(&[vec![1.0, 0.2, 0.6]], &[0.0]).unwrap();
        assert_eq!(p[0][0], 0.0);
        assert_abs_diff_eq!(p[0][1] + p[0][2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn kf_rejects_zero_nlos_power() {
        assert!(matches!(apply_kf(&[vec![1.0, 0.0, 0.0]], &[3.0]), Err(Error::ZeroPower)));
        assert!(apply_kf(&[vec![1.0]], &[3.0]).is_err());
    }
}
