//! Large-scale parameter sampling from a scenario config.
//!
//! Each parameter is normal in a transformed domain: `log10(seconds)` for the
//! delay spread, `log10(degrees)` for the four angular spreads and dB for the
//! K-factor. Mean and standard deviation are affine in `log10(1 + f_GHz)`,
//! the 2-D link distance and the BS/UT height difference, matching the way
//! scenario tables are usually published.
//!
//! One standard-normal deviate per parameter is shared by all frequencies of
//! a link, so the frequency trend encoded in the config holds link by link.

use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corr_field::{AcfSpec, DEFAULT_DECORRELATION_M, DEFAULT_SINUSOIDS};
use crate::error::{Error, Result};
use crate::geom::LinkGeometry;
use crate::ssf::{LsfSample, LsfValues};

/// Propagation condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Condition {
    Los,
    Nlos,
}

impl Condition {
    pub const BOTH: [Condition; 2] = [Condition::Los, Condition::Nlos];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Los => "LOS",
            Condition::Nlos => "NLOS",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `constant + log_freq·log10(1+fc) + distance_km·d2D/1000
///  + height_diff_m·|h_ut − h_bs| + height_excess_m·max(h_ut − h_bs, 0)`,
/// optionally floored.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Affine {
    pub constant: f64,
    pub log_freq: f64,
    pub distance_km: f64,
    pub height_diff_m: f64,
    pub height_excess_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    pub fn eval(&self, at: &EvalPoint) -> f64 {
        let v = self.constant
            + self.log_freq * at.log_freq
            + self.distance_km * at.distance_2d_m / 1000.0
            + self.height_diff_m * at.height_diff_m.abs()
            + self.height_excess_m * at.height_diff_m.max(0.0);
        match self.floor {
            Some(fl) => v.max(fl),
            None => v,
        }
    }
}

/// Inputs to the affine terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub log_freq: f64,
    pub distance_2d_m: f64,
    /// `h_ut − h_bs`, meters.
    pub height_diff_m: f64,
}

/// Distribution of one parameter in its transformed domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDistribution {
    pub mu: Affine,
    #[serde(default)]
    pub sigma: Affine,
    /// Upper limit in linear units (seconds, degrees or linear KF).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

impl ParamDistribution {
    pub fn fixed(mu: f64) -> Self {
        Self {
            mu: Affine::constant(mu),
            sigma: Affine::default(),
            cap: None,
        }
    }

    pub fn normal(mu: f64, sigma: f64) -> Self {
        Self {
            mu: Affine::constant(mu),
            sigma: Affine::constant(sigma),
            cap: None,
        }
    }
}

/// Decorrelation distances of the delay and angle fields, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Decorrelation {
    pub delay: f64,
    pub angle: f64,
}

impl Default for Decorrelation {
    fn default() -> Self {
        Self {
            delay: DEFAULT_DECORRELATION_M,
            angle: DEFAULT_DECORRELATION_M,
        }
    }
}

/// Parameters of one propagation condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    /// Total number of paths, LOS path included.
    pub path_count: usize,
    #[serde(default)]
    pub decorrelation_m: Decorrelation,
    /// log10(seconds)
    pub ds: ParamDistribution,
    /// log10(degrees)
    pub asd: ParamDistribution,
    pub asa: ParamDistribution,
    pub esd: ParamDistribution,
    pub esa: ParamDistribution,
    /// dB
    pub kf: ParamDistribution,
}

impl ConditionConfig {
    pub fn delay_acf(&self) -> Result<AcfSpec> {
        AcfSpec::new(self.decorrelation_m.delay)
    }

    pub fn angle_acf(&self) -> Result<AcfSpec> {
        AcfSpec::new(self.decorrelation_m.angle)
    }
}

/// A scenario: frequencies plus LOS and/or NLOS parameter sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub frequencies_ghz: Vec<f64>,
    /// Frequencies below this are evaluated at this value in the
    /// `log10(1 + f)` term.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_frequency_ghz: Option<f64>,
    #[serde(default = "default_sinusoids")]
    pub n_sinusoids: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub los: Option<ConditionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nlos: Option<ConditionConfig>,
}

fn default_sinusoids() -> usize {
    DEFAULT_SINUSOIDS
}

impl ScenarioConfig {
    pub fn frequency_count(&self) -> usize {
        self.frequencies_ghz.len()
    }

    pub fn condition(&self, c: Condition) -> Result<&ConditionConfig> {
        match c {
            Condition::Los => self.los.as_ref(),
            Condition::Nlos => self.nlos.as_ref(),
        }
        .ok_or_else(|| Error::Config(format!("no [{}] section", c.as_str().to_lowercase())))
    }

    pub fn conditions(&self) -> Vec<Condition> {
        Condition::BOTH
            .into_iter()
            .filter(|c| self.condition(*c).is_ok())
            .collect()
    }

    /// Copy restricted to the given frequencies.
    pub fn with_frequencies(&self, frequencies_ghz: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            frequencies_ghz,
            ..self.clone()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn log_freq(&self, f_ghz: f64) -> f64 {
        let f = match self.min_frequency_ghz {
            Some(m) => f_ghz.max(m),
            None => f_ghz,
        };
        (1.0 + f).log10()
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies_ghz.is_empty() {
            return Err(Error::Config("frequencies_ghz must not be empty".into()));
        }
        let mut seen = HashSet::new();
        for &f in &self.frequencies_ghz {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::Config(format!("frequencies_ghz: {f} is not positive")));
            }
            if !seen.insert(f.to_bits()) {
                return Err(Error::Config(format!("frequencies_ghz: {f} listed twice")));
            }
        }
        if let Some(m) = self.min_frequency_ghz {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::Config(format!("min_frequency_ghz: {m} is not positive")));
            }
        }
        if self.n_sinusoids == 0 {
            return Err(Error::Config("n_sinusoids must be ≥ 1".into()));
        }
        if self.los.is_none() && self.nlos.is_none() {
            return Err(Error::Config("at least one of [los] or [nlos] is required".into()));
        }
        for c in self.conditions() {
            let cc = self.condition(c)?;
            let section = c.as_str().to_lowercase();
            if cc.path_count < 2 {
                return Err(Error::Config(format!("{section}.path_count must be ≥ 2")));
            }
            for (name, d) in [("delay", cc.decorrelation_m.delay), ("angle", cc.decorrelation_m.angle)] {
                if !(d.is_finite() && d > 0.0) {
                    return Err(Error::Config(format!(
                        "{section}.decorrelation_m.{name} must be positive"
                    )));
                }
            }
            for (name, p) in cc.params() {
                if let Some(cap) = p.cap {
                    if !(cap > 0.0) {
                        return Err(Error::Config(format!("{section}.{name}.cap must be positive")));
                    }
                }
                // sigma must be non-negative across the configured frequencies at zero
                // distance; distance terms are checked again at sampling time
                for &f in &self.frequencies_ghz {
                    let at = EvalPoint {
                        log_freq: self.log_freq(f),
                        distance_2d_m: 0.0,
                        height_diff_m: 0.0,
                    };
                    let s = p.sigma.eval(&at);
                    if !(s >= 0.0) {
                        return Err(Error::Config(format!(
                            "{section}.{name}.sigma is negative ({s}) at {f} GHz"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl ConditionConfig {
    fn params(&self) -> [(&'static str, &ParamDistribution); 6] {
        [
            ("ds", &self.ds),
            ("asd", &self.asd),
            ("asa", &self.asa),
            ("esd", &self.esd),
            ("esa", &self.esa),
            ("kf", &self.kf),
        ]
    }
}

/// Parse and validate a TOML scenario config.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig =
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string().trim().replace('\n', " ")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read, parse and validate a TOML scenario config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::ConfigParse(msg) => Error::ConfigParse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Draw one link's parameters for every configured frequency.
///
/// `geom.tx` is taken as the BS and `geom.rx` as the UT for the distance and
/// height terms.
pub fn sample_lsf(
    cfg: &ScenarioConfig,
    condition: Condition,
    geom: &LinkGeometry,
    seed: u64,
) -> Result<LsfSample> {
    let cc = cfg.condition(condition)?;
    geom.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = [0.0f64; 6];
    for v in z.iter_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    let d2d = geom.distance_2d();
    let dh = geom.rx.z - geom.tx.z;

    let draw = |p: &ParamDistribution, zi: f64, log_freq: f64, name: &str| -> Result<f64> {
        let at = EvalPoint {
            log_freq,
            distance_2d_m: d2d,
            height_diff_m: dh,
        };
        let sigma = p.sigma.eval(&at);
        if !(sigma >= 0.0) {
            return Err(Error::Config(format!("{name}.sigma evaluates to {sigma}")));
        }
        Ok(p.mu.eval(&at) + sigma * zi)
    };
    let cap = |p: &ParamDistribution, x: f64| match p.cap {
        Some(c) => x.min(c),
        None => x,
    };

    let values = cfg
        .frequencies_ghz
        .iter()
        .map(|&f| {
            let lf = cfg.log_freq(f);
            let ds = cap(&cc.ds, 10f64.powf(draw(&cc.ds, z[0], lf, "ds")?));
            let angle = |p: &ParamDistribution, zi: f64, name: &str| -> Result<f64> {
                Ok(cap(p, 10f64.powf(draw(p, zi, lf, name)?)).to_radians())
            };
            Ok(LsfValues {
                ds,
                asd: angle(&cc.asd, z[1], "asd")?,
                asa: angle(&cc.asa, z[2], "asa")?,
                esd: angle(&cc.esd, z[3], "esd")?,
                esa: angle(&cc.esa, z[4], "esa")?,
                kf: cap(&cc.kf, 10f64.powf(draw(&cc.kf, z[5], lf, "kf")? / 10.0)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LsfSample::new(values)
}

/// The UMi scenario config shipped with the crate.
pub const UMI_CONFIG: &str = include_str!("../configs/umi.toml");

pub fn umi_config() -> ScenarioConfig {
    parse_config(UMI_CONFIG).expect("shipped UMi config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Position;

    fn geom(d: f64) -> LinkGeometry {
        LinkGeometry::new(Position::new(0.0, 0.0, 10.0), Position::new(d, 0.0, 1.5)).unwrap()
    }

    #[test]
    fn shipped_config_loads() {
        let cfg = umi_config();
        assert_eq!(cfg.frequencies_ghz, vec![1.0, 6.0, 60.0]);
        assert_eq!(cfg.conditions(), vec![Condition::Los, Condition::Nlos]);
    }

    #[test]
    fn empty_file_is_parse_error() {
        assert!(matches!(parse_config(""), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn single_path_rejected() {
        let text = UMI_CONFIG.replacen("path_count = 12", "path_count = 1", 1);
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("path_count must be ≥ 2"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("bogus = 1\n{UMI_CONFIG}");
        assert!(matches!(parse_config(&text), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn duplicate_frequency_rejected() {
        let text = UMI_CONFIG.replacen("[1.0, 6.0, 60.0]", "[6.0, 6.0]", 1);
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn zero_sigma_gives_means() {
        let mut cfg = umi_config();
        let los = cfg.los.as_mut().unwrap();
        for p in [&mut los.ds, &mut los.asd, &mut los.asa, &mut los.esd, &mut los.esa, &mut los.kf] {
            p.sigma = Affine::default();
        }
        let g = geom(120.0);
        let a = sample_lsf(&cfg, Condition::Los, &g, 1).unwrap();
        let b = sample_lsf(&cfg, Condition::Los, &g, 2).unwrap();
        assert_eq!(a, b);
        let lf = (1.0f64 + 2.0).log10();
        assert_eq!(a.values()[0].ds, 10f64.powf(-0.24 * lf - 7.14));
        assert_eq!(a.values()[0].kf, 10f64.powf(0.9));
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = umi_config();
        let g = geom(80.0);
        assert_eq!(
            sample_lsf(&cfg, Condition::Nlos, &g, 5).unwrap(),
            sample_lsf(&cfg, Condition::Nlos, &g, 5).unwrap()
        );
        assert_ne!(
            sample_lsf(&cfg, Condition::Nlos, &g, 5).unwrap(),
            sample_lsf(&cfg, Condition::Nlos, &g, 6).unwrap()
        );
    }

    #[test]
    fn affine_floor() {
        let a = Affine { constant: 0.83, distance_km: -14.8, height_diff_m: 0.01, floor: Some(-0.21), ..Affine::default() };
        let at = EvalPoint { log_freq: 0.0, distance_2d_m: 200.0, height_diff_m: -8.5 };
        assert_eq!(a.eval(&at), -0.21);
        let at = EvalPoint { distance_2d_m: 10.0, ..at };
        assert!((a.eval(&at) - (0.83 - 0.148 + 0.085)).abs() < 1e-12);
    }
}
