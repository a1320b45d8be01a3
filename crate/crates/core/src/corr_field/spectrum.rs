//! Radial wavenumber distribution for the composite Gaussian/exponential ACF.
//!
//! A 3-D isotropic field built from sinusoids with wave-vector magnitudes
//! `k` drawn from a density `w(k)` has correlation `∫ w(k) sinc(k d) dk`.
//! The composite ACF has a kink at `d = d_λ` and is not positive definite in
//! three dimensions, so its exact transform has negative lobes. Instead we
//! fit a non-negative mixture of radial shells on a wavenumber grid with a
//! Chebyshev (minimax) objective: Lawson's iteratively reweighted least
//! squares wrapped around an NNLS solve. Everything is in units of `1/d_λ`
//! so the table is computed once per process and rescaled per field.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::acf_shape;

const K_STEP: f64 = 0.1;
const K_COUNT: usize = 120;
const D_STEP: f64 = 0.05;
const D_COUNT: usize = 161;
const SUM_ROW_WEIGHT: f64 = 1.0e3;
const IRLS_ITERATIONS: usize = 25;

/// Discrete radial spectrum: shells at normalized wavenumbers with weights
/// summing to one, plus the cumulative table used for inverse-CDF sampling.
#[derive(Debug, Clone)]
pub struct RadialSpectrum {
    wavenumbers: Vec<f64>,
    weights: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialSpectrum {
    /// The shared spectrum of the composite ACF at `d_λ = 1`.
    pub fn composite() -> &'static RadialSpectrum {
        static SPECTRUM: OnceLock<RadialSpectrum> = OnceLock::new();
        SPECTRUM.get_or_init(fit_composite)
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Inverse CDF: the shell containing cumulative probability `u ∈ [0,1)`.
    pub fn sample(&self, u: f64) -> f64 {
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.wavenumbers[idx.min(self.wavenumbers.len() - 1)]
    }

    /// Correlation at normalized distance `d / d_λ` implied by the mixture.
    pub fn correlation(&self, d_norm: f64) -> f64 {
        self.wavenumbers
            .iter()
            .zip(&self.weights)
            .map(|(&k, &w)| w * sinc(k * d_norm))
            .sum()
    }
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn fit_composite() -> RadialSpectrum {
    let ks: Vec<f64> = (1..=K_COUNT).map(|j| j as f64 * K_STEP).collect();
    let ds: Vec<f64> = (0..D_COUNT).map(|i| i as f64 * D_STEP).collect();
    let design = DMatrix::from_fn(D_COUNT, K_COUNT, |i, j| sinc(ks[j] * ds[i]));
    let target = DVector::from_iterator(D_COUNT, ds.iter().map(|&d| acf_shape(d)));

    let mut row_weights = vec![1.0 / D_COUNT as f64; D_COUNT];
    let mut best: Option<(f64, DVector<f64>)> = None;
    for _ in 0..IRLS_ITERATIONS {
        let mut a = DMatrix::zeros(D_COUNT + 1, K_COUNT);
        let mut b = DVector::zeros(D_COUNT + 1);
        for i in 0..D_COUNT {
            let s = row_weights[i].sqrt();
            for j in 0..K_COUNT {
                a[(i, j)] = design[(i, j)] * s;
            }
            b[i] = target[i] * s;
        }
        for j in 0..K_COUNT {
            a[(D_COUNT, j)] = SUM_ROW_WEIGHT;
        }
        b[D_COUNT] = SUM_ROW_WEIGHT;

        let w = nnls(&a, &b);
        let resid = &design * &w - &target;
        let max_err = resid.amax();
        if best.as_ref().is_none_or(|(e, _)| max_err < *e) {
            best = Some((max_err, w.clone()));
        }
        let total: f64 = row_weights
            .iter_mut()
            .zip(resid.iter())
            .map(|(u, r)| {
                *u *= r.abs().max(1e-12);
                *u
            })
            .sum();
        row_weights.iter_mut().for_each(|u| *u /= total);
    }

    let (_, w) = best.expect("at least one IRLS iteration");
    let total: f64 = w.iter().sum();
    let (wavenumbers, weights): (Vec<f64>, Vec<f64>) = ks
        .iter()
        .zip(w.iter())
        .filter(|(_, &wj)| wj > 1e-9)
        .map(|(&k, &wj)| (k, wj / total))
        .unzip();
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    RadialSpectrum {
        wavenumbers,
        weights,
        cdf,
    }
}

/// Lawson–Hanson non-negative least squares: `min ‖Ax − b‖₂, x ≥ 0`.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let tol = 1e-14 * a.norm() * b.norm().max(1.0);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let max_outer = 3 * n;

    for _ in 0..max_outer {
        let grad = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        match candidate {
            Some(j) if grad[j] > tol => passive[j] = true,
            _ => break,
        }

        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = solve_subset(a, b, &cols);
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (c, &j) in cols.iter().enumerate() {
                    x[j] = z[c];
                }
                break;
            }
            // step back toward the feasible region until a variable hits zero
            let mut alpha = f64::INFINITY;
            for (c, &j) in cols.iter().enumerate() {
                if z[c] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[c]));
                }
            }
            for (c, &j) in cols.iter().enumerate() {
                x[j] += alpha * (z[c] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

fn solve_subset(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(cols);
    let svd = sub.svd(true, true);
    svd.solve(b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(cols.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_matches_unconstrained_when_solution_is_positive() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = nnls(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nnls_clamps_negative_component() {
        // unconstrained optimum is (2, -1)
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let x = nnls(&a, &b);
        assert!(x.iter().all(|&v| v >= 0.0));
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
    }

    #[test]
    fn fitted_spectrum_is_a_distribution() {
        let s = RadialSpectrum::composite();
        assert!(s.weights().iter().all(|&w| w > 0.0));
        let total: f64 = s.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(s.sample(0.0), s.wavenumbers()[0]);
        assert_eq!(s.sample(0.999_999), *s.wavenumbers().last().unwrap());
    }

    #[test]
    fn fitted_correlation_tracks_target() {
        let s = RadialSpectrum::composite();
        for i in 0..=400 {
            let d = i as f64 * 0.01;
            let err = (s.correlation(d) - acf_shape(d)).abs();
            assert!(err < 0.02, "d = {d}: err {err}");
        }
    }
}
