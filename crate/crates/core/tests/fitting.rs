//! Seeded Monte-Carlo checks of the parameter extraction routines.

use rand_distr::{Distribution, Normal};
use vcselrc_core::array::HeterogeneityStats;
use vcselrc_core::device::{fit_li, li_output, DeviceParams};
use vcselrc_core::locking::{
    fit_locking_boundaries, locking_bounds, BoundaryPoint, LockingModel, LockingParams, SlopeConvention,
};
use vcselrc_core::sampling::stream;

fn device(i_th: f64, slope_eff: f64) -> DeviceParams {
    let stats = HeterogeneityStats::characterised(&LockingModel::default()).unwrap();
    DeviceParams { i_th, slope_eff, i_sat: None, ..stats.nominal_device() }
}

#[test]
fn li_fit_recovers_threshold_under_one_percent_noise() {
    let dev = device(352.2, 0.359);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let mut rng = stream(2024, trial);
        let samples: Vec<(f64, f64)> = (0..=150)
            .map(|k| {
                let i = 20.0 * k as f64;
                let p = li_output(&dev, i).unwrap();
                (i, p * (1.0 + noise.sample(&mut rng)))
            })
            .collect();
        let fit = fit_li(&samples).unwrap();
        worst = worst.max((fit.i_th - 352.2).abs());
        assert!((fit.slope_eff - 0.359).abs() / 0.359 < 0.01);
    }
    assert!(worst < 10.0, "worst threshold error {worst} µA");
}

fn cone_points(nu_over_q: f64, alpha: f64) -> Vec<BoundaryPoint> {
    let lp = LockingParams { nu_slave: 306.6, q_eff: 306.6e3 / nu_over_q, alpha };
    (1..=12)
        .map(|k| {
            let sqrt_ratio = 0.3 * k as f64;
            let b = locking_bounds(&lp, sqrt_ratio * sqrt_ratio).unwrap();
            BoundaryPoint { sqrt_ratio, lower: b.lower, upper: b.upper }
        })
        .collect()
}

#[test]
fn boundary_fit_round_trip_is_exact() {
    let fit = fit_locking_boundaries(&cone_points(1.0, 3.0)).unwrap();
    assert!((fit.nu_over_q - 1.0).abs() < 1e-6);
    assert!((fit.alpha - 3.0).abs() / 3.0 < 1e-6);
}

#[test]
fn boundary_fit_tolerates_two_percent_noise() {
    let width_slope = 5.2;
    let nq = width_slope / SlopeConvention::FullWidth.factor(3.0);
    let clean = cone_points(nq, 3.0);
    for trial in 0..100 {
        let mut rng = stream(77, trial);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let mut jitter = |v: f64| v * (1.0 + noise.sample(&mut rng));
        let noisy: Vec<BoundaryPoint> = clean
            .iter()
            .map(|p| BoundaryPoint { sqrt_ratio: p.sqrt_ratio, lower: jitter(p.lower), upper: jitter(p.upper) })
            .collect();
        let fit = fit_locking_boundaries(&noisy).unwrap();
        assert!((fit.width_slope() - width_slope).abs() / width_slope < 0.05, "trial {trial}");
        assert!((fit.nu_over_q - nq).abs() / nq < 0.05, "trial {trial}");
    }
}
