//! Dynamical and readout properties of the reservoir.

use proptest::prelude::*;
use vcselrc_core::array::{calibrate_to_target, sample_array, ArrayModel, ArraySpec, HeterogeneityStats};
use vcselrc_core::linalg::Matrix;
use vcselrc_core::locking::LockingModel;
use vcselrc_core::reservoir::{
    build_doe_coupling, build_reservoir, narma10, run_reservoir, run_task, train_readout_masked, CouplingSpec,
    Reservoir, ReservoirConfig, ReservoirState,
};

fn calibrated_array(seed: u64) -> ArrayModel {
    let stats = HeterogeneityStats::characterised(&LockingModel::default()).unwrap();
    let mut array = sample_array(&stats, &ArraySpec::default(), seed).unwrap();
    calibrate_to_target(&array, 978.0, 6000.0).unwrap().apply(&mut array);
    array
}

fn reservoir_with(strength: f64, seed: u64) -> (Reservoir, f64) {
    let array = calibrated_array(seed);
    let config = ReservoirConfig {
        coupling: CouplingSpec { strengths: vec![strength], ..CouplingSpec::default() },
        ..ReservoirConfig::default()
    };
    let coupling = build_doe_coupling(&array.spec, &config.coupling).unwrap();
    (build_reservoir(&array, &coupling, &config, seed).unwrap(), coupling.spectral_radius)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn contracting_reservoir_forgets_initial_state() {
    let (res, rho) = reservoir_with(0.1, 3);
    assert!(res.contraction_factor(rho) < 1.0);
    let inputs = narma10(400, 3).unwrap().inputs;
    let washout = ReservoirConfig::default().washout;
    let a = run_reservoir(&res, &ReservoirState::zeros(25), &inputs).unwrap();
    let start = ReservoirState { nodes: res.saturation.clone(), time: 0 };
    let b = run_reservoir(&res, &start, &inputs).unwrap();
    assert!(max_abs_diff(a.row(0), b.row(0)) > 0.1);
    for t in washout..inputs.len() {
        assert!(max_abs_diff(a.row(t), b.row(t)) < 1e-6, "step {t}");
    }
}

#[test]
fn default_reservoir_also_forgets_initial_state() {
    // the sufficient condition does not hold here, but saturation keeps the
    // operating point well inside the contracting region
    let (res, _) = reservoir_with(CouplingSpec::default().strengths[0], 5);
    let inputs = narma10(1000, 5).unwrap().inputs;
    let a = run_reservoir(&res, &ReservoirState::zeros(25), &inputs).unwrap();
    let b = run_reservoir(&res, &ReservoirState { nodes: res.saturation.clone(), time: 0 }, &inputs).unwrap();
    assert!(max_abs_diff(a.row(999), b.row(999)) < 1e-6);
}

#[test]
fn constant_input_settles_to_fixed_point() {
    let (res, _) = reservoir_with(0.1, 4);
    let states = run_reservoir(&res, &ReservoirState::zeros(25), &[0.25; 1001]).unwrap();
    assert!(max_abs_diff(states.row(999), states.row(1000)) < 1e-9);
}

fn nested_masks(n: usize) -> Vec<Vec<bool>> {
    (0..=n).map(|k| (0..n).map(|j| j < k).collect()).collect()
}

#[test]
fn adding_nodes_never_hurts_the_training_fit() {
    let (res, _) = reservoir_with(0.2, 6);
    let series = narma10(800, 6).unwrap();
    let all = run_reservoir(&res, &ReservoirState::zeros(25), &series.inputs).unwrap();
    let states = Matrix { rows: 600, cols: 25, data: all.data[200 * 25..].to_vec() };
    let targets = &series.targets[200..];
    let mut last = f64::INFINITY;
    for mask in nested_masks(25) {
        let w = train_readout_masked(&states, targets, 0.0, Some(&mask)).unwrap();
        let sse: f64 = (0..states.rows).map(|t| (w.predict_row(states.row(t)) - targets[t]).powi(2)).sum();
        assert!(sse <= last * (1.0 + 1e-9) + 1e-12, "{sse} > {last}");
        for (k, &m) in mask.iter().enumerate() {
            if !m {
                assert_eq!(w.weights[k], 0.0);
            }
        }
        last = sse;
    }
}

#[test]
fn masking_every_node_gives_baseline() {
    let array = calibrated_array(8);
    let config = ReservoirConfig { node_mask: Some(vec![false; 25]), ..ReservoirConfig::default() };
    let coupling = build_doe_coupling(&array.spec, &config.coupling).unwrap();
    let run = run_task(&array, &coupling, &config, 8).unwrap();
    assert_eq!(run.report.nodes_used, 0);
    assert!(run.readout.weights.iter().all(|&w| w == 0.0));
    assert_eq!(run.report.nmse_test, run.report.baseline_nmse);
}

#[test]
fn task_runs_are_reproducible() {
    let array = calibrated_array(11);
    let config = ReservoirConfig { train: 500, test: 200, ..ReservoirConfig::default() };
    let coupling = build_doe_coupling(&array.spec, &config.coupling).unwrap();
    let a = run_task(&array, &coupling, &config, 11).unwrap();
    let b = run_task(&array, &coupling, &config, 11).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_respects_radius_and_row_bound(
        rows in 2usize..7, cols in 2usize..7, radius in 1usize..3,
        s1 in 0.0f64..0.3, s2 in 0.0f64..0.1, self_term in 0.0f64..0.3,
    ) {
        let spec = ArraySpec { rows, cols, pitch_um: 10.0, field_of_view_mm2: 1.0 };
        prop_assume!(radius < rows.max(cols));
        let strengths = if radius == 1 { vec![s1] } else { vec![s1, s2] };
        let cs = CouplingSpec { radius, strengths, self_term, max_row_sum: 10.0 };
        let c = build_doe_coupling(&spec, &cs).unwrap();
        for i in 0..c.len() {
            let (ri, ci) = spec.position(i);
            let mut sum = 0.0;
            for j in 0..c.len() {
                let (rj, cj) = spec.position(j);
                let d = ri.abs_diff(rj).max(ci.abs_diff(cj));
                let w = c.weights[(i, j)];
                if d > radius {
                    prop_assert_eq!(w, 0.0);
                }
                prop_assert!(w >= 0.0);
                sum += w.abs();
            }
            prop_assert!(sum <= cs.max_row_sum);
        }
        prop_assert!(c.spectral_radius <= c.max_row_sum() + 1e-12);
    }

    #[test]
    fn states_stay_finite_and_below_ceiling(seed in 0u64..1000, u in proptest::collection::vec(-5.0f64..5.0, 1..200)) {
        let (res, _) = reservoir_with(0.24, seed);
        let states = run_reservoir(&res, &ReservoirState::zeros(25), &u).unwrap();
        for t in 0..states.rows {
            for (x, s) in states.row(t).iter().zip(&res.saturation) {
                prop_assert!(x.is_finite() && *x >= 0.0 && *x <= *s + 1e-15);
            }
        }
    }
}
