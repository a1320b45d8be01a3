//! Spread estimators, empirical CDFs and the maximum-AS sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corr_field::FieldSet;
use crate::error::{Error, Result};
use crate::geom::{LinkGeometry, Position};
use crate::lsf::ConditionConfig;
use crate::seed;
use crate::ssf::{self, wrap_angle, AngleDim, LsfSample, LsfValues, PathTable};

fn total_power(p: &[f64]) -> Result<f64> {
    let total: f64 = p.iter().sum();
    if total > 0.0 && total.is_finite() {
        Ok(total)
    } else {
        Err(Error::ZeroPower)
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{a} values for {b} powers")))
    }
}

/// Power-weighted rms spread of `values` (mean removed).
fn weighted_rms(values: &[f64], p: &[f64], total: f64) -> f64 {
    let mean = values.iter().zip(p).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values
        .iter()
        .zip(p)
        .map(|(v, w)| w * (v - mean) * (v - mean))
        .sum::<f64>()
        / total;
    var.max(0.0).sqrt()
}

/// RMS delay spread of delays `tau` with powers `p`.
pub fn delay_spread(tau: &[f64], p: &[f64]) -> Result<f64> {
    check_lengths(tau.len(), p.len())?;
    let total = total_power(p)?;
    Ok(weighted_rms(tau, p, total))
}

/// Power-weighted circular mean direction `arg Σ p·exp(jφ)`.
pub fn mean_angle(phi: &[f64], p: &[f64]) -> f64 {
    let (s, c) = phi
        .iter()
        .zip(p)
        .fold((0.0, 0.0), |(s, c), (a, w)| (s + w * a.sin(), c + w * a.cos()));
    s.atan2(c)
}

/// RMS angular spread: angles are re-centred on the power-weighted circular
/// mean and wrapped to `(−π, π]` before the weighted rms is taken. Invariant
/// under a common rotation of all angles.
pub fn angular_spread(phi: &[f64], p: &[f64]) -> Result<f64> {
    check_lengths(phi.len(), p.len())?;
    let total = total_power(p)?;
    let delta = mean_angle(phi, p);
    let shifted: Vec<f64> = phi.iter().map(|a| wrap_angle(a - delta)).collect();
    Ok(weighted_rms(&shifted, p, total))
}

/// LOS power over the NLOS sum. Zero NLOS power yields `+∞`.
pub fn kf_estimate(p: &[f64]) -> Result<f64> {
    if p.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 paths, got {}", p.len())));
    }
    let nlos: f64 = p[1..].iter().sum();
    if nlos > 0.0 {
        Ok(p[0] / nlos)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Spreads recomputed from generated paths at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadValues {
    /// Seconds.
    pub ds: f64,
    /// Radians.
    pub asd: f64,
    pub asa: f64,
    pub esd: f64,
    pub esa: f64,
    /// Linear.
    pub kf: f64,
}

/// Per-frequency spreads of a [`PathTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    pub per_frequency: Vec<SpreadValues>,
}

impl SpreadReport {
    pub fn from_table(table: &PathTable) -> Result<Self> {
        let per_frequency = table
            .powers
            .iter()
            .map(|p| {
                Ok(SpreadValues {
                    ds: delay_spread(&table.delays, p)?,
                    asd: angular_spread(&table.aod_az, p)?,
                    asa: angular_spread(&table.aoa_az, p)?,
                    esd: angular_spread(&table.aod_el, p)?,
                    esa: angular_spread(&table.aoa_el, p)?,
                    kf: kf_estimate(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { per_frequency })
    }

    /// Output minus requested value, per frequency and parameter.
    pub fn residuals(&self, lsf: &LsfSample) -> Vec<SpreadValues> {
        self.per_frequency
            .iter()
            .zip(lsf.values())
            .map(|(o, i)| SpreadValues {
                ds: o.ds - i.ds,
                asd: o.asd - i.asd,
                asa: o.asa - i.asa,
                esd: o.esd - i.esd,
                esa: o.esa - i.esa,
                kf: o.kf - i.kf,
            })
            .collect()
    }
}

/// Largest angular spread reachable by scaling `init_angles` with a factor
/// in `[0, cap]`, per frequency. Grid search over the factor.
pub fn as_ceiling(init_angles: &[f64], powers: &[Vec<f64>], dim: AngleDim) -> Result<Vec<f64>> {
    const STEPS: usize = 300;
    let cap = dim.max_scale();
    powers
        .iter()
        .map(|p| {
            let mut best: f64 = 0.0;
            for i in 1..=STEPS {
                let s = cap * i as f64 / STEPS as f64;
                let scaled: Vec<f64> = init_angles.iter().map(|a| wrap_angle(a * s)).collect();
                best = best.max(angular_spread(&scaled, p)?);
            }
            Ok(best)
        })
        .collect()
}

/// Sorted samples with step-CDF probabilities `i/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empty sample set".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidArgument("NaN sample".into()));
        }
        let mut values = samples.to_vec();
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let probs = (1..=values.len()).map(|i| i as f64 / n).collect();
        Ok(Self { values, probs })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Fraction of samples `> x`.
    pub fn fraction_above(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Smallest sample whose CDF reaches `q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let idx = self.probs.partition_point(|&p| p < q - 1e-12);
        self.values[idx.min(self.values.len() - 1)]
    }

    /// Sample median: middle element, or mean of the two middle elements.
    pub fn median(&self) -> f64 {
        let n = self.values.len();
        if n % 2 == 1 {
            self.values[n / 2]
        } else {
            0.5 * (self.values[n / 2 - 1] + self.values[n / 2])
        }
    }
}

pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(samples)
}

/// Settings for [`max_as_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub seeds: usize,
    pub master_seed: u64,
    pub n_sinusoids: usize,
    /// Requested delay spread, seconds. Has no effect on the angles.
    pub ds: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            seeds: 100,
            master_seed: 0,
            n_sinusoids: crate::corr_field::DEFAULT_SINUSOIDS,
            ds: 100e-9,
        }
    }
}

/// One point of the achieved-AS-vs-KF curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub kf_db: f64,
    /// Radians, averaged over seeds and over departure and arrival.
    pub achieved_as: f64,
}

/// Request `target_as` in all four angular spreads at each K-factor of the
/// grid and record the spread the pipeline actually achieves in `dim`.
///
/// The link is horizontal so the LOS rotation is a pure azimuth shift and
/// the elevations are not mixed with the azimuths.
pub fn max_as_sweep(
    kf_grid_db: &[f64],
    target_as: f64,
    dim: AngleDim,
    cfg: &ConditionConfig,
    opts: &SweepOptions,
) -> Result<Vec<SweepPoint>> {
    if kf_grid_db.is_empty() {
        return Err(Error::InvalidArgument("empty K-factor grid".into()));
    }
    if opts.seeds == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one seed".into()));
    }
    let geom = LinkGeometry::new(Position::new(0.0, 0.0, 10.0), Position::new(100.0, 0.0, 10.0))?;
    let (delay_acf, angle_acf) = (cfg.delay_acf()?, cfg.angle_acf()?);
    let lsfs = kf_grid_db
        .iter()
        .map(|&kf_db| {
            LsfSample::new(vec![LsfValues {
                ds: opts.ds,
                asd: target_as,
                asa: target_as,
                esd: target_as,
                esa: target_as,
                kf: 10f64.powf(kf_db / 10.0),
            }])
        })
        .collect::<Result<Vec<_>>>()?;

    let per_seed = (0..opts.seeds)
        .into_par_iter()
        .map(|i| {
            let fields = FieldSet::new(
                seed::derive(opts.master_seed, &[i as u64]),
                cfg.path_count,
                delay_acf,
                angle_acf,
                opts.n_sinusoids,
            )?;
            let init = ssf::initial_paths(&fields, &geom)?;
            lsfs.iter()
                .map(|lsf| {
                    let t = ssf::finish_paths(&init, &geom, lsf)?.table;
                    let (dep, arr) = match dim {
                        AngleDim::Azimuth => (&t.aod_az, &t.aoa_az),
                        AngleDim::Elevation => (&t.aod_el, &t.aoa_el),
                    };
                    Ok(0.5 * (angular_spread(dep, &t.powers[0])? + angular_spread(arr, &t.powers[0])?))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(kf_grid_db
        .iter()
        .enumerate()
        .map(|(k, &kf_db)| SweepPoint {
            kf_db,
            achieved_as: per_seed.iter().map(|v| v[k]).sum::<f64>() / opts.seeds as f64,
        })
        .collect())
}
