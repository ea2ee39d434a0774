use num_complex::Complex64;
use spdc_core::phasematch::{
    band_map, calibrate_poling, delta_beta, fixed_pump_line, pm_amplitude, ridge_slope, sinc,
};
use spdc_core::spectra::{
    apply_filters, build_jsa, default_window_nm, heralded_scan, marginal_spectrum, spectral_exchange_overlap,
    tune_pump, TuneOptions,
};
use spdc_core::{FilterSpec, ModeTriplet, Photon, SpectralAmplitude, Waveguide, WaveguideSpec};

const DEG_NM: f64 = 801.26;

fn calibrated() -> Waveguide {
    let wg = Waveguide::with_bundled_dispersion(WaveguideSpec::default());
    let period = calibrate_poling(&wg, &ModeTriplet::fundamental(), DEG_NM).unwrap();
    wg.with_poling_period(period)
}

fn jsa(wg: &Waveguide, pump_nm: f64) -> SpectralAmplitude {
    let t = ModeTriplet::fundamental();
    let window = default_window_nm(wg, &t, pump_nm).unwrap();
    build_jsa(wg, &t, pump_nm, window, 4097).unwrap()
}

#[test]
fn sinc_is_unnormalized() {
    assert_eq!(sinc(0.0), 1.0);
    assert!((sinc(1.0) - 1f64.sin()).abs() < 1e-15);
    assert!(sinc(std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn calibration_zeroes_mismatch_at_degeneracy() {
    let wg = calibrated();
    let t = ModeTriplet::fundamental();
    assert!(delta_beta(&wg, &t, DEG_NM, DEG_NM).unwrap().abs() < 1e-9);
    assert!(wg.spec.poling_period_um.is_finite() && wg.spec.poling_period_um > 0.0);
    let base = Waveguide::with_bundled_dispersion(WaveguideSpec::default());
    let other = calibrate_poling(&base, &t, 802.0).unwrap();
    assert!((other - wg.spec.poling_period_um).abs() > 1e-6);
}

#[test]
fn fixed_pump_line_conserves_energy() {
    let hs: Vec<f64> = (0..=400).map(|k| 780.0 + 0.1 * k as f64).collect();
    for (h, v) in fixed_pump_line(400.63, &hs).unwrap() {
        let residual = 1.0 / h + 1.0 / v - 1.0 / 400.63;
        assert!((residual * 400.63).abs() < 1e-12);
    }
    let line = fixed_pump_line(400.63, &[801.26]).unwrap();
    assert!((line[0].1 - 801.26).abs() < 1e-9);
    assert!(fixed_pump_line(400.63, &[400.0]).is_err());
}

#[test]
fn fixed_pump_line_is_nearly_diagonal() {
    let h = 1e-4;
    let pts = fixed_pump_line(400.63, &[790.0 - h, 790.0 + h]).unwrap();
    let slope = (pts[1].1 - pts[0].1) / (2.0 * h);
    let v = fixed_pump_line(400.63, &[790.0]).unwrap()[0].1;
    assert!((slope + (v / 790.0).powi(2)).abs() < 1e-6);
    assert!((slope + 1.0).abs() < 0.06);
}

#[test]
fn phase_matching_ridge_is_not_the_energy_line() {
    let wg = calibrated();
    let slope = ridge_slope(&wg, &ModeTriplet::fundamental(), DEG_NM, DEG_NM).unwrap();
    assert!((slope + 1.0).abs() > 0.05, "ridge slope {slope}");
}

#[test]
fn band_map_passes_through_calibration_point() {
    let wg = calibrated();
    let t = ModeTriplet::fundamental();
    let map = band_map(&wg, &[t], (781.26, 821.26), (781.26, 821.26), 401).unwrap();
    let i = map
        .lambda_h_nm
        .iter()
        .position(|&l| (l - DEG_NM).abs() < 1e-6)
        .unwrap();
    assert!(map.at(0, i, i) > 0.999);
    assert!(map.intensity[0].iter().all(|&x| (0.0..=1.0).contains(&x)));
}

/// FWHM of |Φ|² along λ_H at fixed λ_V through the calibration point.
fn cut_fwhm(wg: &Waveguide) -> f64 {
    let t = ModeTriplet::fundamental();
    let xs: Vec<f64> = (0..40001).map(|k| DEG_NM - 20.0 + 1e-3 * k as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&h| pm_amplitude(wg, &t, h, DEG_NM).unwrap().norm_sqr())
        .collect();
    let above: Vec<f64> = xs.iter().zip(&ys).filter(|(_, &y)| y >= 0.5).map(|(&x, _)| x).collect();
    above.last().unwrap() - above.first().unwrap()
}

#[test]
fn band_width_scales_inversely_with_length() {
    let wg = calibrated();
    let ratio = cut_fwhm(&wg) / cut_fwhm(&wg.with_length_mm(2.0));
    assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn pm_amplitude_bounded() {
    let wg = calibrated();
    let t = ModeTriplet::fundamental();
    for k in 0..200 {
        let h = 790.0 + 0.1 * k as f64;
        for j in 0..20 {
            let v = 795.0 + 0.5 * j as f64;
            let a = pm_amplitude(&wg, &t, h, v).unwrap().norm_sqr();
            assert!((0.0..=1.0 + 1e-12).contains(&a));
        }
    }
}

#[test]
fn overlap_converges_with_grid() {
    let wg = calibrated();
    let t = ModeTriplet::fundamental();
    let window = default_window_nm(&wg, &t, 400.63).unwrap();
    let a = build_jsa(&wg, &t, 400.63, window, 4097).unwrap();
    let b = build_jsa(&wg, &t, 400.63, window, 8193).unwrap();
    let oa = spectral_exchange_overlap(&a).unwrap().norm();
    let ob = spectral_exchange_overlap(&b).unwrap().norm();
    assert!((oa - ob).abs() < 1e-6, "{oa} vs {ob}");
}

#[test]
fn overlap_invariant_under_global_phase() {
    let wg = calibrated();
    let f = jsa(&wg, 400.63);
    let g = f.map_values(|_, v| v * Complex64::from_polar(3.0, 1.234));
    let a = spectral_exchange_overlap(&f).unwrap().norm();
    let b = spectral_exchange_overlap(&g).unwrap().norm();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn gaussian_overlap_closed_form() {
    for (delta, sigma) in [(0.0, 1e12), (5e11, 1e12), (2e12, 1.5e12), (1e12, 4e11)] {
        let f = SpectralAmplitude::from_fn(400.63, delta + 14.0 * sigma, 4001, |nu: f64| {
            Complex64::new((-(nu - delta).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0)
        })
        .unwrap();
        let o = spectral_exchange_overlap(&f).unwrap();
        let expected = (-(delta * delta) / (2.0 * sigma * sigma)).exp();
        assert!((o.re - expected).abs() < 1e-6 && o.im.abs() < 1e-9);
    }
}

#[test]
fn one_sided_amplitude_has_no_overlap() {
    let f = SpectralAmplitude::from_fn(400.63, 1e13, 101, |nu| {
        Complex64::new(if nu > 0.0 { 1.0 } else { 0.0 }, 0.0)
    })
    .unwrap();
    assert_eq!(spectral_exchange_overlap(&f).unwrap().norm(), 0.0);
}

#[test]
fn narrower_filters_never_reduce_overlap() {
    let wg = calibrated();
    let pump = 400.73;
    let f = jsa(&wg, pump);
    let mut prev = 0.0;
    for fwhm in [11.0, 5.0, 3.0, 1.0] {
        let filter = FilterSpec::flat_top(2.0 * pump, fwhm);
        let g = apply_filters(&f, Some(&filter), Some(&filter));
        let v = spdc_core::interference::hom_curve_default(&g).unwrap().visibility;
        assert!(v >= prev, "{fwhm} nm: {v} < {prev}");
        prev = v;
    }
}

#[test]
fn symmetric_amplitude_gives_identical_marginals_and_scans() {
    let f = SpectralAmplitude::from_fn(400.63, 4e13, 2001, |nu: f64| {
        Complex64::new((-(nu / 5e12).powi(2)).exp(), 0.0)
    })
    .unwrap();
    let h = marginal_spectrum(&f, Photon::H, 301);
    let v = marginal_spectrum(&f, Photon::V, 301);
    for (a, b) in h.iter().zip(&v) {
        assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-12);
    }
    let centers: Vec<f64> = (0..41).map(|k| 797.26 + 0.2 * k as f64).collect();
    let sh = heralded_scan(&f, Photon::H, 0.7, &centers, None).unwrap();
    let sv = heralded_scan(&f, Photon::V, 0.7, &centers, None).unwrap();
    for (a, b) in sh.points.iter().zip(&sv.points) {
        assert!((a.expected_rate - b.expected_rate).abs() < 1e-12);
    }
}

#[test]
fn marginal_peaks_at_degeneracy() {
    let wg = calibrated();
    let f = jsa(&wg, 400.63);
    for photon in [Photon::H, Photon::V] {
        let m = marginal_spectrum(&f, photon, 2001);
        let peak = m.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert!((peak.0 - DEG_NM).abs() < 0.5, "{photon:?} peak at {}", peak.0);
    }
}

#[test]
fn heralded_curve_is_broader_than_scan_filter() {
    let wg = calibrated();
    let f = jsa(&wg, 400.63);
    let centers: Vec<f64> = (0..401).map(|k| 791.26 + 0.05 * k as f64).collect();
    let scan = heralded_scan(&f, Photon::H, 0.7, &centers, None).unwrap();
    let peak = scan.points.iter().map(|p| p.expected_rate).fold(0.0, f64::max);
    let above: Vec<f64> = scan
        .points
        .iter()
        .filter(|p| p.expected_rate >= 0.5 * peak)
        .map(|p| p.x)
        .collect();
    assert!(above.last().unwrap() - above.first().unwrap() >= 0.7);
}

#[test]
fn window_missing_the_island_is_an_error() {
    let wg = calibrated();
    let err = build_jsa(&wg, &ModeTriplet::fundamental(), 398.0, 2.0, 401).unwrap_err();
    assert!(matches!(err, spdc_core::Error::EmptyAmplitude));
}

/// The optimizer contract. The optimum need not sit exactly on the
/// calibration pump: the second-order mismatch breaks exchange symmetry and
/// moves the best compensated overlap by a few pm.
#[test]
fn tuned_pump_beats_interval_endpoints() {
    let wg = calibrated();
    let t = ModeTriplet::fundamental();
    let broad = FilterSpec::flat_top(DEG_NM, 11.0);
    let opts = TuneOptions {
        filter_h: Some(&broad),
        filter_v: Some(&broad),
        n_points: 2049,
        ..TuneOptions::default()
    };
    let interval = (400.55, 400.71);
    let best = tune_pump(&wg, &t, interval, &opts).unwrap();
    assert!(best > interval.0 && best < interval.1);
    let window = default_window_nm(&wg, &t, 400.63).unwrap();
    let v = |p: f64| spdc_core::spectra::overlap_vs_pump(&wg, &t, p, window, &opts).unwrap();
    assert!(v(best) >= v(interval.0) && v(best) >= v(interval.1));
    assert!((best - 400.63).abs() < 0.01, "optimum {best}");
}

#[test]
fn unbracketed_search_is_an_error() {
    let wg = calibrated();
    let opts = TuneOptions {
        n_points: 1025,
        ..TuneOptions::default()
    };
    let err = tune_pump(&wg, &ModeTriplet::fundamental(), (400.635, 400.7), &opts).unwrap_err();
    assert!(matches!(err, spdc_core::Error::NoBracket { .. }), "{err}");
}
