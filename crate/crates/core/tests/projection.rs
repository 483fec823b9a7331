use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use omega_core::elliptical::{sample, AxisRange, EllipticalModel, Generator};
use omega_core::omega::{omega_closed_form, omega_empirical, ReturnSeries, Threshold};
use omega_core::portfolio::{project, ConstraintSet, PortfolioSpec};
use omega_core::stats;

fn sigma4() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.040, 0.012, 0.008, 0.004, //
            0.012, 0.090, 0.018, 0.010, //
            0.008, 0.018, 0.0625, 0.015, //
            0.004, 0.010, 0.015, 0.0225,
        ],
    )
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

#[test]
fn projected_samples_match_closed_form_omega() {
    let mu = vec![0.05, 0.09, 0.07, 0.04];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for generator in [Generator::normal(), Generator::student_t(5.0).unwrap()] {
        let model = EllipticalModel::new(mu.clone(), sigma4(), generator).unwrap();
        let batch = sample(&model, 1_000_000, 12).unwrap();
        for _ in 0..5 {
            let w = PortfolioSpec::new("w", random_weights(&mut rng, 4), &ConstraintSet::default()).unwrap();
            let law = project(&model, &w).unwrap();
            let series = ReturnSeries::new(None, batch.project(w.weights()).unwrap()).unwrap();
            for theta in [0.0, law.mu() - 0.5 * law.sigma(), law.mu() + 0.5 * law.sigma()] {
                let theta = Threshold::new(theta).unwrap();
                let closed = omega_closed_form(&law, theta).unwrap().as_f64();
                let empirical = omega_empirical(&series, theta).as_f64();
                assert!(
                    (empirical / closed - 1.0).abs() < 0.01,
                    "{:?}: {empirical} vs {closed}",
                    model.generator().kind()
                );
            }
        }
    }
}

#[test]
fn normal_projections_are_normal() {
    let model = EllipticalModel::new(vec![0.05, 0.09, 0.07, 0.04], sigma4(), Generator::normal()).unwrap();
    let batch = sample(&model, 200_000, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..3 {
        let w = random_weights(&mut rng, 4);
        let x = batch.project(&w).unwrap();
        // standard errors: √(6/n) ≈ 0.0055 and √(24/n) ≈ 0.011
        assert!(stats::skewness(&x).abs() < 0.03);
        assert!(stats::excess_kurtosis(&x).abs() < 0.06);
        let law = project(&model, &PortfolioSpec::new("w", w, &ConstraintSet::default()).unwrap()).unwrap();
        assert!((stats::mean(&x) - law.mu()).abs() < 5.0 * law.sigma() / (x.len() as f64).sqrt());
        assert!((stats::std_dev(&x) / law.sigma() - 1.0).abs() < 0.01);
    }
}

#[test]
fn student_t_projection_keeps_heavy_tails() {
    // excess kurtosis of t(ν) is 6/(ν − 4)
    let model = EllipticalModel::new(vec![0.0; 4], sigma4(), Generator::student_t(8.0).unwrap()).unwrap();
    let batch = sample(&model, 400_000, 9).unwrap();
    let x = batch.project(&[0.25, 0.25, 0.25, 0.25]).unwrap();
    let kurt = stats::excess_kurtosis(&x);
    assert!((kurt - 1.5).abs() < 0.3, "{kurt}");
    assert!(stats::skewness(&x).abs() < 0.05);
}

#[test]
fn affine_closure_of_marginals() {
    // the law of wᵀX for w = e_i matches the coordinate sample
    let model =
        EllipticalModel::new(vec![0.05, 0.09, 0.07, 0.04], sigma4(), Generator::student_t(6.0).unwrap()).unwrap();
    let batch = sample(&model, 50_000, 1).unwrap();
    let coordinate: Vec<f64> = batch.rows().map(|x| x[2]).collect();
    let projected = batch.project(&[0.0, 0.0, 1.0, 0.0]).unwrap();
    assert_eq!(coordinate, projected);
    let law = project(&model, &PortfolioSpec::new("e3", vec![0.0, 0.0, 1.0, 0.0], &ConstraintSet::default()).unwrap())
        .unwrap();
    assert_eq!(law.mu(), 0.07);
    assert!((law.sigma() - 0.25).abs() < 1e-15);
}

#[test]
fn density_grid_integrates_to_one() {
    let sigma = DMatrix::from_row_slice(2, 2, &[0.04, 0.012, 0.012, 0.09]);
    for generator in [Generator::normal(), Generator::student_t(4.0).unwrap()] {
        let model = EllipticalModel::new(vec![0.05, 0.08], sigma.clone(), generator).unwrap();
        let axis_x = AxisRange::new(-3.0, 3.0, 601).unwrap();
        let axis_y = AxisRange::new(-3.0, 3.0, 601).unwrap();
        let grid = model.density_grid(&axis_x, &axis_y).unwrap();
        let cell = 0.01 * 0.01;
        let mass: f64 = grid.values.iter().sum::<f64>() * cell;
        // truncation at ±3 loses ~1e-3 of t(4) mass at these scales
        assert!((mass - 1.0).abs() < 5e-3, "{mass}");
    }
}

#[test]
fn rank_deficient_model_projects_and_samples() {
    // third asset is the average of the first two
    let base = DMatrix::from_row_slice(2, 2, &[0.04, 0.01, 0.01, 0.09]);
    let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.5, 0.5]);
    let sigma = &a * base * a.transpose();
    let model = EllipticalModel::new(vec![0.05, 0.09, 0.07], sigma, Generator::normal()).unwrap();
    assert_eq!(model.rank(), 2);
    let batch = sample(&model, 20_000, 4).unwrap();
    for x in batch.rows() {
        assert!(((x[2] - 0.07) - 0.5 * (x[0] - 0.05) - 0.5 * (x[1] - 0.09)).abs() < 1e-12);
    }
    let cov = stats::covariance(&batch.draws, 3);
    assert!((cov[2][2] / model.sigma()[(2, 2)] - 1.0).abs() < 0.05);
}
