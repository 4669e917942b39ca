use tcentre_core::fitkit::{fit_gamma_sd, SweepFitOptions};
use tcentre_core::io;
use tcentre_core::lineshape::{transition_splitting, HyperpolModel};
use tcentre_core::pipeline::{add_map_noise, map_linewidths, simulate_map, simulate_sweep, t_centre_indistinguishability};
use tcentre_core::spinham::HoleGFactors;
use tcentre_core::LsqOptions;

fn delta_grid() -> Vec<f64> {
    (0..241).map(|i| -3000.0 + 25.0 * i as f64).collect()
}

#[test]
fn synthetic_data_is_bitwise_deterministic() {
    let m = HyperpolModel::from_holes(50.0, &HoleGFactors::standard_100()).unwrap();
    let b: Vec<f64> = (0..40).map(|i| 5.0 * i as f64).collect();
    let s1 = simulate_sweep(&m, &b, 0.02, 5).unwrap();
    let s2 = simulate_sweep(&m, &b, 0.02, 5).unwrap();
    assert_eq!(s1, s2);
    let mut m1 = simulate_map(&m, &b[..5], &delta_grid()).unwrap();
    let mut m2 = m1.clone();
    add_map_noise(&mut m1, 0.02, 5).unwrap();
    add_map_noise(&mut m2, 0.02, 5).unwrap();
    assert_eq!(m1, m2);
}

#[test]
fn linecut_width_grows_with_field() {
    let m = HyperpolModel::from_holes(250.0, &HoleGFactors::standard_100()).unwrap();
    let b: Vec<f64> = (0..11).map(|i| 50.0 * i as f64).collect();
    let map = simulate_map(&m, &b, &delta_grid()).unwrap();
    let t = map_linewidths(&map, &LsqOptions::default()).unwrap();
    assert_eq!(t.rows.len(), b.len());
    assert!(t.rows.windows(2).all(|w| w[1].fwhm_mhz >= w[0].fwhm_mhz));
}

#[test]
fn single_subset_linecut_width_is_quadrature_sum() {
    let gamma = 250.0;
    let m = HyperpolModel::single(gamma, 2.005, 0.91).unwrap();
    let per_gauss = transition_splitting(2.005, 0.91, 1.0).conserving.abs();
    let b: Vec<f64> = (0..9).map(|i| 2.0 * gamma / per_gauss * i as f64 / 8.0).collect();
    let map = simulate_map(&m, &b, &delta_grid()).unwrap();
    let t = map_linewidths(&map, &LsqOptions::default()).unwrap();
    for row in &t.rows {
        let eps = per_gauss * row.b_gauss;
        let expected = gamma.hypot(eps);
        assert!(((row.fwhm_mhz - expected) / expected).abs() < 0.05);
    }
}

#[test]
fn zero_detuning_column_refits_to_the_generating_gamma() {
    let m = HyperpolModel::from_holes(120.0, &HoleGFactors::standard_100()).unwrap();
    let b: Vec<f64> = (0..30).map(|i| 15.0 * i as f64).collect();
    let map = simulate_map(&m, &b, &delta_grid()).unwrap();
    let j0 = map.delta_mhz.iter().position(|&d| d == 0.0).unwrap();
    let column: Vec<f64> = map.amplitude.iter().map(|r| r[j0]).collect();
    let sweep = tcentre_core::SweepData::new(b, column, None).unwrap();
    let fit = fit_gamma_sd(&sweep, &m.subsets, &SweepFitOptions::default()).unwrap();
    assert!(((fit.gamma() - 120.0) / 120.0).abs() < 1e-6);
}

#[test]
fn indistinguishability_decreases_with_gamma_sd() {
    let values: Vec<f64> = [0.0, 0.01, 1.0, 16.0, 1000.0, 1e6]
        .iter()
        .map(|&g| t_centre_indistinguishability(g).unwrap().value)
        .collect();
    assert_eq!(values[0], 1.0);
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    assert!(values.iter().all(|&v| v > 0.0 && v <= 1.0));
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let m = HyperpolModel::from_holes(80.0, &HoleGFactors::standard_100()).unwrap();
    let b: Vec<f64> = (0..12).map(|i| 7.3 * i as f64).collect();
    let sweep = simulate_sweep(&m, &b, 0.01, 3).unwrap();
    let path = dir.path().join("sweep.csv");
    io::write_file(&path, |f| io::write_sweep(f, &sweep)).unwrap();
    assert_eq!(io::read_sweep_csv(&path).unwrap(), sweep);

    let map = simulate_map(&m, &b[..3], &delta_grid()).unwrap();
    let path = dir.path().join("map.csv");
    io::write_file(&path, |f| io::write_map(f, &map)).unwrap();
    assert_eq!(io::read_map_csv(&path).unwrap(), map);
}
