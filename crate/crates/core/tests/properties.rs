use num_complex::Complex64;
use proptest::prelude::*;
use spdc_core::counting::{sample_counts, Transmission};
use spdc_core::fitting::fit_sinusoid;
use spdc_core::interference::{fringe_curve, fringe_visibility_from_overlap, hom_curve_default};
use spdc_core::phasematch::{amplitude_from_mismatch, fixed_pump_line};
use spdc_core::spectra::spectral_exchange_overlap;
use spdc_core::{arm_efficiency, Basis, DetectionChain, FringeModel, Rates, SpectralAmplitude};

fn amplitude(coeffs: &[(f64, f64)]) -> SpectralAmplitude {
    // Smooth random amplitude: Gaussian envelope times a low-order complex
    // polynomial in the detuning.
    SpectralAmplitude::from_fn(400.63, 4e13, 801, |nu| {
        let u = nu / 1e13;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &(re, im)) in coeffs.iter().enumerate() {
            acc += Complex64::new(re, im) * u.powi(k as i32);
        }
        acc * (-u * u).exp()
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..5)
        .prop_filter("non-zero", |c| c.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_matching_intensity_is_bounded(db in -10.0..10.0f64, len in 100.0..20000.0f64) {
        let i = amplitude_from_mismatch(db, len).norm_sqr();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&i));
    }

    #[test]
    fn pump_line_conserves_energy(lp in 390.0..420.0f64, frac in 0.05..0.95f64) {
        let lh = lp * (1.0 + frac * 3.0) + 1.0;
        let (h, v) = fixed_pump_line(lp, &[lh]).unwrap()[0];
        prop_assert!(((1.0 / h + 1.0 / v - 1.0 / lp) * lp).abs() < 1e-12);
    }

    #[test]
    fn exchange_overlap_is_at_most_one(c in coeffs()) {
        let o = spectral_exchange_overlap(&amplitude(&c)).unwrap();
        prop_assert!(o.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn dip_and_diagonal_fringe_agree(c in coeffs()) {
        let f = amplitude(&c);
        let dip = hom_curve_default(&f).unwrap().visibility;
        let fringe = fringe_visibility_from_overlap(&f, 0.0).unwrap();
        prop_assert!((dip - fringe).abs() < 1e-9);
        prop_assert!(dip <= 1.0 + 1e-12);
    }

    #[test]
    fn hom_visibility_ignores_normalization(c in coeffs(), scale in 0.01..100.0f64, phase in -3.0..3.0f64) {
        let f = amplitude(&c);
        let g = f.map_values(|_, v| v * Complex64::from_polar(scale, phase));
        let a = hom_curve_default(&f).unwrap().visibility;
        let b = hom_curve_default(&g).unwrap().visibility;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn complementary_fringes(vi in 0.0..1.0f64, vp in 0.0..1.0f64, phi in -3.0..3.0f64, theta in 0.0..360.0f64) {
        let m = FringeModel::new(vi, vp, phi).unwrap();
        let t = [theta];
        let sum = |a, b| fringe_curve(&m, a, &t)[0] + fringe_curve(&m, b, &t)[0];
        prop_assert!((sum(Basis::D, Basis::A) - 0.5).abs() < 1e-15);
        prop_assert!((sum(Basis::H, Basis::V) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn efficiency_is_a_bounded_product(values in prop::collection::vec(0.0..=1.0f64, 0..8), det in 0.0..=1.0f64, rot in 0usize..8) {
        let mut chain = DetectionChain {
            transmissions: values.iter().map(|&value| Transmission { label: "t".into(), value }).collect(),
            detector_efficiency: det,
            excess_loss: 1.0,
            dark_count_rate: 0.0,
        };
        let eta = arm_efficiency(&chain);
        prop_assert!((0.0..=1.0).contains(&eta));
        if !chain.transmissions.is_empty() {
            let n = chain.transmissions.len();
            chain.transmissions.rotate_left(rot % n);
        }
        prop_assert!((arm_efficiency(&chain) - eta).abs() < 1e-15);
    }

    #[test]
    fn coincidences_never_exceed_singles(
        s1 in 0.0..200.0f64,
        s2 in 0.0..200.0f64,
        c in 0.0..400.0f64,
        seed in any::<u64>(),
    ) {
        let rates = Rates { singles_1: s1, singles_2: s2, true_coincidences: c, accidental_coincidences: 0.0 };
        for r in sample_counts(&rates, 1.0, 20, seed).unwrap() {
            prop_assert!(r.coincidences <= r.singles_1.min(r.singles_2));
        }
    }

    #[test]
    fn sinusoid_fit_is_normalized(v in 0.05..0.99f64, phase in -6.0..6.0f64, level in 50.0..5000.0f64) {
        let pts: Vec<(f64, f64)> = (0..=18)
            .map(|k| {
                let x = 10.0 * k as f64;
                (x, level * (1.0 + v * (2.0 * x.to_radians() + phase).sin()))
            })
            .collect();
        let fit = fit_sinusoid(&pts).unwrap();
        let fv = fit.value("visibility").unwrap();
        let fp = fit.value("phase").unwrap();
        prop_assert!(fv >= 0.0 && (fv - v).abs() < 1e-6);
        prop_assert!(fp > -std::f64::consts::PI && fp <= std::f64::consts::PI);
    }
}
