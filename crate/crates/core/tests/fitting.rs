use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use spdc_core::fitting::{fit_dip, fit_gaussian, fit_sinusoid, levenberg_marquardt, poisson_weights};
use spdc_core::Error;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn bell(x: f64, c: f64, s: f64) -> f64 {
    (-0.5 * ((x - c) / s).powi(2)).exp()
}

fn noisy(rng: &mut ChaCha8Rng, xs: &[f64], f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    xs.iter()
        .map(|&x| (x, Poisson::new(f(x)).unwrap().sample(rng)))
        .collect()
}

#[test]
fn gaussian_center_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let xs = grid(796.0, 806.5, 43);
    let truth = 801.26;
    let mut inside = 0;
    for _ in 0..200 {
        let pts = noisy(&mut rng, &xs, |x| 800.0 * bell(x, truth, 1.4) + 20.0);
        let fit = fit_gaussian(&pts).unwrap();
        assert!(fit.converged);
        let c = fit.get("center").unwrap();
        if (c.value - truth).abs() < 3.0 * c.sigma {
            inside += 1;
        }
    }
    assert!(inside >= 190, "{inside}/200 within 3 sigma");
}

#[test]
fn uncertainties_shrink_as_root_n() {
    let xs = grid(-1.0, 1.0, 41);
    let pts: Vec<_> = xs.iter().map(|&x| (x, 4000.0 * (1.0 - 0.9 * bell(x, 0.1, 0.15)))).collect();
    let scaled: Vec<_> = pts.iter().map(|&(x, y)| (x, 4.0 * y)).collect();
    let a = fit_dip(&pts).unwrap();
    let b = fit_dip(&scaled).unwrap();
    for name in ["center", "sigma", "visibility"] {
        let ratio = a.get(name).unwrap().sigma / b.get(name).unwrap().sigma;
        assert!((ratio - 2.0).abs() < 0.2, "{name}: {ratio}");
    }
}

#[test]
fn dip_fit_is_affine_covariant_in_x() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let xs = grid(-0.6, 0.25, 35);
    let pts = noisy(&mut rng, &xs, |x| 4000.0 * (1.0 - 0.9 * bell(x, -0.17, 0.08)));
    let (scale, shift) = (1e3, 250.0);
    let moved: Vec<_> = pts.iter().map(|&(x, y)| (scale * x + shift, y)).collect();
    let a = fit_dip(&pts).unwrap();
    let b = fit_dip(&moved).unwrap();
    let rel = |p: f64, q: f64| ((p - q) / q).abs();
    assert!(rel(b.value("center").unwrap(), scale * a.value("center").unwrap() + shift) < 1e-6);
    assert!(rel(b.value("sigma").unwrap(), scale * a.value("sigma").unwrap()) < 1e-5);
    assert!(rel(b.value("visibility").unwrap(), a.value("visibility").unwrap()) < 1e-6);
}

#[test]
fn accepted_steps_never_raise_chi_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs = grid(0.0, 180.0, 19);
    let pts = noisy(&mut rng, &xs, |x| 900.0 * (1.0 + 0.93 * (2.0 * x.to_radians() + 0.4).sin()));
    let fit = fit_sinusoid(&pts).unwrap();
    for w in fit.chi_square_history.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn sinusoid_recovers_parameters_with_phase_wrapped() {
    for phase in [-3.0, -1.0, 0.0, 2.5, 3.1] {
        let pts: Vec<_> = grid(0.0, 180.0, 19)
            .into_iter()
            .map(|x| (x, 500.0 * (1.0 - 0.8 * (2.0 * x.to_radians() + phase).sin())))
            .collect();
        let fit = fit_sinusoid(&pts).unwrap();
        let v = fit.value("visibility").unwrap();
        let p = fit.value("phase").unwrap();
        assert!((v - 0.8).abs() < 1e-6);
        assert!(p > -std::f64::consts::PI && p <= std::f64::consts::PI);
        // -sin(x + φ) = sin(x + φ + π)
        let expected = (phase + std::f64::consts::PI).sin_cos();
        assert!((p.sin() - expected.0).abs() < 1e-6 && (p.cos() - expected.1).abs() < 1e-6);
    }
}

#[test]
fn flat_and_short_data_are_rejected() {
    let flat: Vec<_> = grid(0.0, 1.0, 20).into_iter().map(|x| (x, 100.0)).collect();
    assert!(matches!(fit_dip(&flat), Err(Error::NoStructure)));
    assert!(matches!(fit_gaussian(&flat[..4]), Err(Error::NoStructure)));
    let short: Vec<_> = grid(0.0, 90.0, 10).into_iter().map(|x| (x, 10.0 + x)).collect();
    assert!(fit_sinusoid(&short).is_err());
    let negative = vec![(0.0, -1.0); 10];
    assert!(fit_gaussian(&negative).is_err());
}

#[test]
fn linear_model_is_solved_exactly() {
    let xs = grid(0.0, 10.0, 11);
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 7.0).collect();
    let out = levenberg_marquardt(|p, x| p[0] * x + p[1], &xs, &ys, &poisson_weights(&ys), &[1.0, 1.0]).unwrap();
    assert!(out.converged);
    assert!((out.parameters[0] - 3.0).abs() < 1e-8 && (out.parameters[1] - 7.0).abs() < 1e-8);
}

#[test]
fn report_lists_every_parameter() {
    let pts: Vec<_> = grid(-3.0, 3.0, 31).into_iter().map(|x| (x, 100.0 * bell(x, 0.0, 1.0) + 5.0)).collect();
    let text = fit_gaussian(&pts).unwrap().to_text();
    for key in ["amplitude =", "center =", "sigma =", "offset =", "reduced_chi_square =", "converged ="] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
}
