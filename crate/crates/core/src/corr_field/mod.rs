//! Spatially correlated standard-normal random fields.
//!
//! A [`Field`] is a sum of sinusoids with random 3-D wave-vectors and phases,
//!
//! ```text
//! X(p) = sqrt(2/N) Σ_i cos(k_i · p + ψ_i)
//! ```
//!
//! whose radial wavenumbers follow the fitted [`RadialSpectrum`] of the
//! composite ACF. Radial magnitudes are drawn by stratified inverse-CDF
//! sampling; directions are uniform on the sphere. Evaluation is a pure
//! function of the field and the position, so the same field can be queried
//! from any number of threads.

mod spectrum;

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Position;
use crate::seed;

pub use spectrum::RadialSpectrum;

pub const DEFAULT_SINUSOIDS: usize = 500;
pub const DEFAULT_DECORRELATION_M: f64 = 15.0;

/// Composite ACF at normalized distance `d / d_λ`.
pub(crate) fn acf_shape(d_norm: f64) -> f64 {
    if d_norm < 1.0 {
        (-d_norm * d_norm).exp()
    } else {
        (-d_norm).exp()
    }
}

/// Autocorrelation specification: the decorrelation distance in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfSpec {
    d_lambda: f64,
}

impl AcfSpec {
    pub fn new(d_lambda: f64) -> Result<Self> {
        if !(d_lambda.is_finite() && d_lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "decorrelation distance must be positive, got {d_lambda}"
            )));
        }
        Ok(Self { d_lambda })
    }

    pub fn d_lambda(&self) -> f64 {
        self.d_lambda
    }

    /// Target correlation at distance `d` meters (`d ≥ 0`), see [`acf_target`].
    pub fn target(&self, d: f64) -> f64 {
        acf_shape(d / self.d_lambda)
    }
}

impl Default for AcfSpec {
    fn default() -> Self {
        Self {
            d_lambda: DEFAULT_DECORRELATION_M,
        }
    }
}

/// Gaussian ACF below the decorrelation distance, exponential above it.
/// Both branches equal `exp(-1)` at `d = d_λ`.
pub fn acf_target(d: f64, spec: &AcfSpec) -> Result<f64> {
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "distance must be finite and non-negative, got {d}"
        )));
    }
    Ok(spec.target(d))
}

/// One realization of a correlated standard-normal field.
#[derive(Debug, Clone)]
pub struct Field {
    seed: u64,
    acf: AcfSpec,
    // wave-vectors in rad/m, struct-of-arrays
    kx: Vec<f64>,
    ky: Vec<f64>,
    kz: Vec<f64>,
    phase: Vec<f64>,
    amplitude: f64,
}

/// Build a field with `n_sinusoids` components from `seed`.
pub fn build_field(seed: u64, spec: AcfSpec, n_sinusoids: usize) -> Result<Field> {
    Field::new(seed, spec, n_sinusoids)
}

impl Field {
    pub fn new(seed: u64, acf: AcfSpec, n_sinusoids: usize) -> Result<Self> {
        if n_sinusoids == 0 {
            return Err(Error::InvalidArgument(
                "sinusoid count must be at least 1".into(),
            ));
        }
        let spectrum = RadialSpectrum::composite();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = n_sinusoids;
        let mut kx = Vec::with_capacity(n);
        let mut ky = Vec::with_capacity(n);
        let mut kz = Vec::with_capacity(n);
        let mut phase = Vec::with_capacity(n);
        let scale = 1.0 / acf.d_lambda;
        for i in 0..n {
            let u = (i as f64 + rng.random::<f64>()) / n as f64;
            let k = spectrum.sample(u) * scale;
            let cos_pol: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let azi = TAU * rng.random::<f64>();
            let sin_pol = (1.0 - cos_pol * cos_pol).max(0.0).sqrt();
            kx.push(k * sin_pol * azi.cos());
            ky.push(k * sin_pol * azi.sin());
            kz.push(k * cos_pol);
            phase.push(TAU * rng.random::<f64>() - PI);
        }
        Ok(Self {
            seed,
            acf,
            kx,
            ky,
            kz,
            phase,
            amplitude: (2.0 / n as f64).sqrt(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn acf(&self) -> &AcfSpec {
        &self.acf
    }

    pub fn n_sinusoids(&self) -> usize {
        self.phase.len()
    }

    /// Field value at `pos`. Non-finite coordinates are rejected.
    pub fn evaluate(&self, pos: &Position) -> Result<f64> {
        pos.check_finite()?;
        Ok(self.value_at(pos))
    }

    pub(crate) fn value_at(&self, pos: &Position) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.phase.len() {
            let arg = self.kx[i] * pos.x + self.ky[i] * pos.y + self.kz[i] * pos.z + self.phase[i];
            acc += arg.cos();
        }
        acc * self.amplitude
    }
}

/// Which random dimension a field drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Delay,
    AzimuthA,
    AzimuthB,
    ElevationA,
    ElevationB,
}

impl FieldKind {
    pub const ALL: [FieldKind; 5] = [
        FieldKind::Delay,
        FieldKind::AzimuthA,
        FieldKind::AzimuthB,
        FieldKind::ElevationA,
        FieldKind::ElevationB,
    ];

    fn counter(self) -> u64 {
        self as u64
    }
}

/// The fields driving one NLOS path.
#[derive(Debug, Clone)]
pub struct PathFields {
    pub delay: Field,
    pub azimuth_a: Field,
    pub azimuth_b: Field,
    pub elevation_a: Field,
    pub elevation_b: Field,
}

impl PathFields {
    pub fn get(&self, kind: FieldKind) -> &Field {
        match kind {
            FieldKind::Delay => &self.delay,
            FieldKind::AzimuthA => &self.azimuth_a,
            FieldKind::AzimuthB => &self.azimuth_b,
            FieldKind::ElevationA => &self.elevation_a,
            FieldKind::ElevationB => &self.elevation_b,
        }
    }
}

/// Field bank for a whole link: five independent fields per NLOS path.
///
/// Azimuth and elevation each use one `(A, B)` pair shared by departure and
/// arrival, which is what makes TX/RX swapping exchange the two roles.
#[derive(Debug, Clone)]
pub struct FieldSet {
    master_seed: u64,
    delay_acf: AcfSpec,
    angle_acf: AcfSpec,
    paths: Vec<PathFields>,
}

impl FieldSet {
    /// Fields for `path_count` paths in total (LOS included, so `path_count - 1`
    /// NLOS paths get fields).
    pub fn new(
        master_seed: u64,
        path_count: usize,
        delay_acf: AcfSpec,
        angle_acf: AcfSpec,
        n_sinusoids: usize,
    ) -> Result<Self> {
        if path_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "path count must be at least 2, got {path_count}"
            )));
        }
        let make = |path: usize, kind: FieldKind| {
            let acf = if kind == FieldKind::Delay {
                delay_acf
            } else {
                angle_acf
            };
            Field::new(
                seed::derive(master_seed, &[path as u64, kind.counter()]),
                acf,
                n_sinusoids,
            )
        };
        let paths = (1..path_count)
            .map(|l| {
                Ok(PathFields {
                    delay: make(l, FieldKind::Delay)?,
                    azimuth_a: make(l, FieldKind::AzimuthA)?,
                    azimuth_b: make(l, FieldKind::AzimuthB)?,
                    elevation_a: make(l, FieldKind::ElevationA)?,
                    elevation_b: make(l, FieldKind::ElevationB)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            master_seed,
            delay_acf,
            angle_acf,
            paths,
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn delay_acf(&self) -> &AcfSpec {
        &self.delay_acf
    }

    pub fn angle_acf(&self) -> &AcfSpec {
        &self.angle_acf
    }

    /// Total path count including the LOS path.
    pub fn path_count(&self) -> usize {
        self.paths.len() + 1
    }

    pub fn field_count(&self) -> usize {
        self.paths.len() * FieldKind::ALL.len()
    }

    /// Fields of NLOS path `l` (1-based over all paths; `l = 0` is LOS).
    pub fn nlos(&self) -> &[PathFields] {
        &self.paths
    }
}

/// Ensemble estimate of the field correlation at each distance.
///
/// Uses `n_fields` independent realizations and `pairs_per_field` random
/// base points (uniform in a cube of side `40·d_λ`) with random directions.
/// Returns Pearson correlations, one per entry of `distances`.
pub fn empirical_acf(
    spec: AcfSpec,
    distances: &[f64],
    n_fields: usize,
    pairs_per_field: usize,
    n_sinusoids: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    let n = n_fields * pairs_per_field;
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two pairs".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master_seed, &[u64::MAX]));
    let box_side = 40.0 * spec.d_lambda();
    let mut a_vals = vec![Vec::with_capacity(n); distances.len()];
    let mut b_vals = vec![Vec::with_capacity(n); distances.len()];
    for f in 0..n_fields {
        let field = Field::new(seed::derive(master_seed, &[f as u64]), spec, n_sinusoids)?;
        for _ in 0..pairs_per_field {
            let p = Position::new(
                box_side * rng.random::<f64>(),
                box_side * rng.random::<f64>(),
                box_side * rng.random::<f64>(),
            );
            let [ux, uy, uz] = random_unit(&mut rng);
            let v0 = field.value_at(&p);
            for (i, &d) in distances.iter().enumerate() {
                let q = p.offset(d * ux, d * uy, d * uz);
                a_vals[i].push(v0);
                b_vals[i].push(field.value_at(&q));
            }
        }
    }
    Ok(a_vals
        .iter()
        .zip(&b_vals)
        .map(|(a, b)| pearson(a, b))
        .collect())
}

pub(crate) fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let az = TAU * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * az.cos(), r * az.sin(), z]
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}
