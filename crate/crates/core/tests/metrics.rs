use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssfgen::lsf::{self, Condition};
use ssfgen::metrics::{
    angular_spread, delay_spread, empirical_cdf, kf_estimate, max_as_sweep, SpreadReport, SweepOptions,
};
use ssfgen::ssf::{self, AngleDim, LsfSample, LsfValues};
use ssfgen::{LinkGeometry, Position};

#[test]
fn dkw_bound_on_uniform_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let u: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
    let cdf = empirical_cdf(&u).unwrap();
    let sup = cdf
        .values()
        .iter()
        .zip(cdf.probs())
        .map(|(x, p)| (p - x).abs().max((p - 1.0 / cdf.len() as f64 - x).abs()))
        .fold(0.0, f64::max);
    assert!(sup < 0.03, "sup |F - x| = {sup}");
}

#[test]
fn constant_samples_give_a_single_step() {
    let c = empirical_cdf(&[2.5; 7]).unwrap();
    assert_eq!(c.cdf(2.4999), 0.0);
    assert_eq!(c.cdf(2.5), 1.0);
    assert_eq!(c.median(), 2.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn angular_spread_rotation_invariant(
        phi in prop::collection::vec(-PI..PI, 1..16),
        w_seed in any::<u64>(),
        shift in -10.0f64..10.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(w_seed);
        let p: Vec<f64> = phi.iter().map(|_| rng.random_range(0.01..1.0)).collect();
        let moved: Vec<f64> = phi.iter().map(|a| a + shift).collect();
        let (a, b) = (angular_spread(&phi, &p).unwrap(), angular_spread(&moved, &p).unwrap());
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn delay_spread_translation_and_scale(
        tau in prop::collection::vec(0.0f64..1e-6, 1..16),
        w_seed in any::<u64>(),
        offset in 0.0f64..1e-6,
        scale in 0.01f64..100.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(w_seed);
        let p: Vec<f64> = tau.iter().map(|_| rng.random_range(0.01..1.0)).collect();
        let ds = delay_spread(&tau, &p).unwrap();
        let shifted: Vec<f64> = tau.iter().map(|t| t + offset).collect();
        let scaled: Vec<f64> = tau.iter().map(|t| t * scale).collect();
        prop_assert!((delay_spread(&shifted, &p).unwrap() - ds).abs() < 1e-9 * (ds + 1e-9));
        prop_assert!((delay_spread(&scaled, &p).unwrap() - scale * ds).abs() <= 1e-9 * scale * (ds + 1e-12));
    }

    #[test]
    fn kf_round_trip(p_tilde in prop::collection::vec(0.001f64..10.0, 2..20), kf_db in -40.0f64..40.0) {
        let kf = 10f64.powf(kf_db / 10.0);
        let p = ssf::apply_kf(&[p_tilde], &[kf]).unwrap();
        let est = kf_estimate(&p[0]).unwrap();
        prop_assert!(((est - kf) / kf).abs() < 1e-12);
    }
}

#[test]
fn spread_report_matches_targets_at_single_frequency() {
    let cfg = lsf::umi_config().with_frequencies(vec![6.0]).unwrap();
    let cc = cfg.condition(Condition::Los).unwrap();
    let geom = LinkGeometry::new(Position::new(0.0, 0.0, 10.0), Position::new(70.0, -35.0, 1.5)).unwrap();
    let fields = ssfgen::corr_field::FieldSet::new(3, cc.path_count, cc.delay_acf().unwrap(), cc.angle_acf().unwrap(), 500)
        .unwrap();
    let lsf = lsf::sample_lsf(&cfg, Condition::Los, &geom, 8).unwrap();
    let table = ssf::generate_paths(&fields, &geom, &lsf).unwrap();
    let r = SpreadReport::from_table(&table).unwrap().residuals(&lsf);
    assert!(r[0].ds.abs() < 1e-20);
    assert!(r[0].kf.abs() < 1e-9);
}

fn sweep_curves(dim: AngleDim, grid: &[f64], seeds: u64) -> Vec<Vec<f64>> {
    let cfg = lsf::umi_config();
    let cc = cfg.condition(Condition::Nlos).unwrap();
    (0..seeds)
        .map(|s| {
            let opts = SweepOptions { seeds: 1, master_seed: 500 + s, ..SweepOptions::default() };
            max_as_sweep(grid, 100f64.to_radians(), dim, cc, &opts)
                .unwrap()
                .iter()
                .map(|p| p.achieved_as.to_degrees())
                .collect()
        })
        .collect()
}

// Seed-averaged curve may rise by no more than two standard errors of its
// level between neighboring grid points.
#[test]
fn sweep_is_non_increasing_up_to_noise() {
    let grid: Vec<f64> = (0..=30).map(|i| -30.0 + 2.0 * i as f64).collect();
    for dim in [AngleDim::Azimuth, AngleDim::Elevation] {
        let curves = sweep_curves(dim, &grid, 100);
        let n = curves.len() as f64;
        let stats: Vec<(f64, f64)> = (0..grid.len())
            .map(|k| {
                let v: Vec<f64> = curves.iter().map(|c| c[k]).collect();
                let m = v.iter().sum::<f64>() / n;
                let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                (m, sd / n.sqrt())
            })
            .collect();
        for k in 1..grid.len() {
            let (prev, se) = stats[k - 1];
            assert!(stats[k].0 <= prev + 2.0 * se, "{dim:?} at {} dB: {} after {}", grid[k], stats[k].0, prev);
        }
        assert!(stats.last().unwrap().0 < 0.2 * stats[0].0);
    }
}

#[test]
fn azimuth_saturates_near_eighty_degrees() {
    let cfg = lsf::umi_config();
    let cc = cfg.condition(Condition::Nlos).unwrap();
    let pts = max_as_sweep(&[-30.0, -20.0], 100f64.to_radians(), AngleDim::Azimuth, cc, &SweepOptions::default()).unwrap();
    for p in pts {
        let deg = p.achieved_as.to_degrees();
        assert!((75.0..=85.0).contains(&deg), "{} dB: {deg}", p.kf_db);
    }
}

#[test]
fn single_point_grid() {
    let cfg = lsf::umi_config();
    let cc = cfg.condition(Condition::Nlos).unwrap();
    let opts = SweepOptions { seeds: 3, ..SweepOptions::default() };
    let pts = max_as_sweep(&[0.0], 1.0, AngleDim::Elevation, cc, &opts).unwrap();
    assert_eq!(pts.len(), 1);
    assert!(max_as_sweep(&[], 1.0, AngleDim::Azimuth, cc, &opts).is_err());
}

// Brute-force ceiling of the azimuth spread with the LOS path at 0 carrying
// KF/(1+KF) and the NLOS power split evenly over up to three angle groups.
fn oracle_spread(groups: &[f64], kf: f64) -> f64 {
    let mut phi = vec![0.0];
    let mut p = vec![kf / (1.0 + kf)];
    for g in groups {
        phi.push(*g);
        p.push(1.0 / ((1.0 + kf) * groups.len() as f64));
    }
    // independent of the library: circular mean via atan2, wrap via atan2
    let re: f64 = phi.iter().zip(&p).map(|(a, w)| a.cos() * w).sum();
    let im: f64 = phi.iter().zip(&p).map(|(a, w)| a.sin() * w).sum();
    let delta = im.atan2(re);
    let hat: Vec<f64> = phi.iter().map(|a| (a - delta).sin().atan2((a - delta).cos())).collect();
    let m1: f64 = hat.iter().zip(&p).map(|(a, w)| a * w).sum();
    let m2: f64 = hat.iter().zip(&p).map(|(a, w)| a * a * w).sum();
    (m2 - m1 * m1).max(0.0).sqrt()
}

fn refine(mut groups: Vec<f64>, kf: f64) -> f64 {
    let mut best = oracle_spread(&groups, kf);
    let mut step = 1f64.to_radians();
    while step > 1e-6 {
        let mut improved = false;
        for i in 0..groups.len() {
            for dir in [-1.0, 1.0] {
                let mut g = groups.clone();
                g[i] += dir * step;
                let v = oracle_spread(&g, kf);
                if v > best {
                    best = v;
                    groups = g;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best
}

#[test]
fn kf_ten_db_ceiling_near_fifty_seven_degrees() {
    let kf = 10.0;
    let deg = |i: i32| (i as f64).to_radians();
    let mut best: f64 = 0.0;
    for a in -180..180 {
        best = best.max(oracle_spread(&[deg(a)], kf));
        for b in (a..180).step_by(1) {
            best = best.max(oracle_spread(&[deg(a), deg(b)], kf));
        }
    }
    let mut starts = Vec::new();
    for a in (-180..180).step_by(10) {
        for b in (a..180).step_by(10) {
            for c in (b..180).step_by(10) {
                let v = oracle_spread(&[deg(a), deg(b), deg(c)], kf);
                starts.push((v, vec![deg(a), deg(b), deg(c)]));
            }
        }
    }
    starts.sort_by(|x, y| y.0.total_cmp(&x.0));
    for (_, g) in starts.into_iter().take(20) {
        best = best.max(refine(g, kf));
    }
    let best_deg = best.to_degrees();
    assert!((50.0..=64.0).contains(&best_deg), "ceiling {best_deg} deg");

    // the model itself stays below that ceiling
    let cfg = lsf::umi_config();
    let cc = cfg.condition(Condition::Nlos).unwrap();
    let model = max_as_sweep(&[10.0], 100f64.to_radians(), AngleDim::Azimuth, cc, &SweepOptions::default()).unwrap();
    assert!(model[0].achieved_as < best);
}

#[test]
fn spreads_of_a_known_table() {
    let v = LsfValues { ds: 30e-9, asd: 0.2, asa: 0.4, esd: 0.05, esa: 0.1, kf: 2.0 };
    assert!(LsfSample::new(vec![v]).is_ok());
    assert!((delay_spread(&[0.0, 100e-9], &[0.9, 0.1]).unwrap() - 30e-9).abs() < 1e-21);
    assert!((angular_spread(&[0.3, -0.3], &[0.5, 0.5]).unwrap() - 0.3).abs() < 1e-15);
}
