//! Small-scale fading path generation.
//!
//! The pipeline turns a field bank, a link geometry and per-frequency
//! large-scale parameters into a [`PathTable`]:
//!
//! 1. initial delays and angles from the correlated fields ([`initial`]);
//! 2. frequency-dependent power shaping and K-factor ([`power`]);
//! 3. delay and angle scaling to the requested spreads ([`scaling`]);
//! 4. LOS angles and rotation of all directions onto them ([`los`]).
//!
//! No step sorts or re-indexes paths: path `l` keeps its identity for any
//! TX/RX displacement, and path 0 is always the LOS path.

pub mod initial;
pub mod los;
pub mod power;
pub mod scaling;

use serde::{Deserialize, Serialize};

use crate::corr_field::FieldSet;
use crate::error::{Error, Result};
use crate::geom::LinkGeometry;

pub use initial::{gen_initial_angles, gen_initial_delays, initial_paths, reciprocal_uniform};
pub use los::{los_angles, rotate_to_los, rotation_matrix, to_spherical, to_unit_vector, LosAngles};
pub use power::{apply_kf, compute_scaling_coeffs, gen_initial_powers, normalize_as, normalize_ds};
pub use scaling::{scale_angles, scale_delays, wrap_angle, AngleScaling};

/// Azimuth or elevation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleDim {
    Azimuth,
    Elevation,
}

impl AngleDim {
    /// Upper limit of the angle scaling factor.
    pub fn max_scale(self) -> f64 {
        match self {
            AngleDim::Azimuth => 3.0,
            AngleDim::Elevation => 1.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AngleDim::Azimuth => "azimuth",
            AngleDim::Elevation => "elevation",
        }
    }

    pub(crate) fn spread_name(self) -> &'static str {
        match self {
            AngleDim::Azimuth => "azimuth spread",
            AngleDim::Elevation => "elevation spread",
        }
    }
}

/// Large-scale parameters at one frequency. Spreads in seconds / radians,
/// K-factor as a linear power ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsfValues {
    pub ds: f64,
    pub asd: f64,
    pub asa: f64,
    pub esd: f64,
    pub esa: f64,
    pub kf: f64,
}

/// Large-scale parameters of one link for all `F` frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsfSample {
    values: Vec<LsfValues>,
}

impl LsfSample {
    pub fn new(values: Vec<LsfValues>) -> Result<Self> {
        let s = Self { values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidArgument("LSF sample has no frequencies".into()));
        }
        for (f, v) in self.values.iter().enumerate() {
            let named = [("ds", v.ds), ("asd", v.asd), ("asa", v.asa), ("esd", v.esd), ("esa", v.esa), ("kf", v.kf)];
            for (name, x) in named {
                if !(x.is_finite() && x > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "LSF {name} at frequency index {f} must be positive, got {x}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn frequency_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[LsfValues] {
        &self.values
    }

    pub fn column(&self, get: impl Fn(&LsfValues) -> f64) -> Vec<f64> {
        self.values.iter().map(get).collect()
    }

    /// Parameters seen from the other end of the link: departure and
    /// arrival spreads exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|v| LsfValues {
                    asd: v.asa,
                    asa: v.asd,
                    esd: v.esa,
                    esa: v.esd,
                    ..*v
                })
                .collect(),
        }
    }
}

/// Frequency-independent initial delays (dimensionless) and angles (rad).
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPaths {
    pub tau: Vec<f64>,
    pub phi_d: Vec<f64>,
    pub phi_a: Vec<f64>,
    pub theta_d: Vec<f64>,
    pub theta_a: Vec<f64>,
}

impl InitialPaths {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Same paths seen from the other end of the link.
    pub fn swapped(&self) -> Self {
        Self {
            tau: self.tau.clone(),
            phi_d: self.phi_a.clone(),
            phi_a: self.phi_d.clone(),
            theta_d: self.theta_a.clone(),
            theta_a: self.theta_d.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.tau.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 paths, got {n}")));
        }
        if [&self.phi_d, &self.phi_a, &self.theta_d, &self.theta_a]
            .iter()
            .any(|v| v.len() != n)
        {
            return Err(Error::InvalidArgument("initial path arrays differ in length".into()));
        }
        Ok(())
    }
}

/// Per-frequency power shaping coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCoeffs {
    pub g_ds: Vec<f64>,
    pub g_asd: Vec<f64>,
    pub g_asa: Vec<f64>,
    pub g_esd: Vec<f64>,
    pub g_esa: Vec<f64>,
}

/// Generated paths: `L` paths, `F` frequencies.
///
/// Delays and angles are shared by all frequencies; `powers[f][l]` sums to
/// one over `l` for every `f`. Index 0 is the LOS path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTable {
    /// Seconds.
    pub delays: Vec<f64>,
    /// Linear power, `[frequency][path]`.
    pub powers: Vec<Vec<f64>>,
    pub aod_az: Vec<f64>,
    pub aoa_az: Vec<f64>,
    pub aod_el: Vec<f64>,
    pub aoa_el: Vec<f64>,
}

impl PathTable {
    pub fn path_count(&self) -> usize {
        self.delays.len()
    }

    pub fn frequency_count(&self) -> usize {
        self.powers.len()
    }
}

/// Scaling factors applied by the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleFactors {
    pub asd: AngleScaling,
    pub asa: AngleScaling,
    pub esd: AngleScaling,
    pub esa: AngleScaling,
}

/// A [`PathTable`] plus the intermediate values that produced it.
#[derive(Debug, Clone)]
pub struct Generation {
    pub table: PathTable,
    pub coeffs: ScalingCoeffs,
    pub delay_factor: f64,
    pub angles: AngleFactors,
    pub los: LosAngles,
}

/// Run the whole pipeline for one link.
pub fn generate_paths(fields: &FieldSet, geom: &LinkGeometry, lsf: &LsfSample) -> Result<PathTable> {
    let init = initial_paths(fields, geom)?;
    Ok(finish_paths(&init, geom, lsf)?.table)
}

/// Everything after the initial delays and angles. Split out so that sweeps
/// over large-scale parameters can reuse one set of field evaluations.
pub fn finish_paths(init: &InitialPaths, geom: &LinkGeometry, lsf: &LsfSample) -> Result<Generation> {
    init.validate()?;
    lsf.validate()?;
    geom.validate()?;

    let coeffs = compute_scaling_coeffs(lsf)?;
    let p_tilde = gen_initial_powers(init, &coeffs);
    let powers = apply_kf(&p_tilde, &lsf.column(|v| v.kf))?;

    let (delays, delay_factor) = scale_delays(&init.tau, &powers, &lsf.column(|v| v.ds))?;
    let asd = scale_angles(&init.phi_d, &powers, &lsf.column(|v| v.asd), AngleDim::Azimuth)?;
    let asa = scale_angles(&init.phi_a, &powers, &lsf.column(|v| v.asa), AngleDim::Azimuth)?;
    let esd = scale_angles(&init.theta_d, &powers, &lsf.column(|v| v.esd), AngleDim::Elevation)?;
    let esa = scale_angles(&init.theta_a, &powers, &lsf.column(|v| v.esa), AngleDim::Elevation)?;

    let los = los_angles(geom)?;
    let (mut aod_az, mut aod_el) = rotate_to_los(&asd.angles, &esd.angles, los.az_d, los.el_d);
    let (mut aoa_az, mut aoa_el) = rotate_to_los(&asa.angles, &esa.angles, los.az_a, los.el_a);
    // the LOS path sits exactly on the LOS direction
    aod_az[0] = los.az_d;
    aod_el[0] = los.el_d;
    aoa_az[0] = los.az_a;
    aoa_el[0] = los.el_a;

    Ok(Generation {
        table: PathTable {
            delays,
            powers,
            aod_az,
            aoa_az,
            aod_el,
            aoa_el,
        },
        coeffs,
        delay_factor,
        angles: AngleFactors { asd, asa, esd, esa },
        los,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lsf_validation() {
        let ok = LsfValues { ds: 1e-7, asd: 0.2, asa: 0.5, esd: 0.01, esa: 0.1, kf: 3.0 };
        assert!(LsfSample::new(vec![ok]).is_ok());
        assert!(LsfSample::new(vec![]).is_err());
        assert!(LsfSample::new(vec![LsfValues { kf: 0.0, ..ok }]).is_err());
        assert!(LsfSample::new(vec![LsfValues { asa: f64::NAN, ..ok }]).is_err());
        let s = LsfSample::new(vec![ok]).unwrap().swapped();
        assert_eq!(s.values()[0].asd, 0.5);
        assert_eq!(s.values()[0].esa, 0.01);
    }

    #[test]
    fn angle_dim_caps() {
        assert_eq!(AngleDim::Azimuth.max_scale(), 3.0);
        assert_eq!(AngleDim::Elevation.max_scale(), 1.5);
    }
}
