use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdc_core::modes::{slab_modes, SlabPolarization};
use spdc_core::{CrystalAxis, ModeLabel, Polarization, SellmeierModel, Waveguide, WaveguideSpec};

fn waveguide() -> Waveguide {
    Waveguide::with_bundled_dispersion(WaveguideSpec::default())
}

#[test]
fn indices_are_physical_and_normally_dispersive() {
    let model = SellmeierModel::bundled();
    for axis in CrystalAxis::ALL {
        let mut prev = f64::INFINITY;
        for nm in 450..=1100 {
            let n = model.bulk_index(axis, nm as f64 * 1e-3).unwrap();
            assert!(n > 1.0 && n < 3.0, "{axis:?} at {nm} nm: {n}");
            assert!(n < prev, "{axis:?} not decreasing at {nm} nm");
            prev = n;
        }
    }
}

#[test]
fn analytic_derivative_matches_finite_difference() {
    let model = SellmeierModel::bundled();
    let h = 1e-5; // 0.01 nm
    for axis in CrystalAxis::ALL {
        for nm in (400..=1100).step_by(10) {
            let l = nm as f64 * 1e-3;
            let n = |x: f64| model.bulk_index(axis, x).unwrap();
            let fd = (n(l + h) - n(l - h)) / (2.0 * h);
            let ng_fd = n(l) - l * fd;
            let ng = model.group_index(axis, l).unwrap();
            assert!(((ng - ng_fd) / ng_fd).abs() < 1e-6, "{axis:?} {nm} nm: {ng} vs {ng_fd}");
        }
    }
}

#[test]
fn out_of_range_wavelength_is_rejected() {
    let model = SellmeierModel::bundled();
    let (lo, hi) = model.valid_range_um();
    assert!(model.bulk_index(CrystalAxis::Z, lo - 0.01).is_err());
    assert!(model.bulk_index(CrystalAxis::Z, hi + 0.01).is_err());
    assert!(model.bulk_index(CrystalAxis::Y, 0.4).is_ok());
}

/// Symmetric TE slab: the number of guided modes is ceil(k0 d NA / π) and
/// every root satisfies the even/odd characteristic equation.
#[test]
fn symmetric_slab_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 20 {
        let n_clad: f64 = rng.random_range(1.4..2.2);
        let n_core = n_clad + rng.random_range(0.005..0.1);
        let d: f64 = rng.random_range(1.0..12.0);
        let lambda: f64 = rng.random_range(0.5..1.2);
        let k0 = 2.0 * PI / lambda;
        let v = k0 * d * (n_core * n_core - n_clad * n_clad).sqrt();
        if (v / PI - (v / PI).round()).abs() < 1e-3 {
            continue; // too close to a cutoff for a count comparison
        }
        let modes = slab_modes(n_core, n_clad, n_clad, d, lambda, SlabPolarization::TeLike).unwrap();
        assert_eq!(modes.len(), (v / PI).ceil() as usize, "V = {v}");
        for (m, &n_eff) in modes.iter().enumerate() {
            assert!(n_eff > n_clad && n_eff < n_core);
            let u = k0 * (n_core * n_core - n_eff * n_eff).sqrt();
            let w = k0 * (n_eff * n_eff - n_clad * n_clad).sqrt();
            let phase = u * d / 2.0 - m as f64 * PI / 2.0;
            let lhs = phase.tan();
            let rhs = w / u;
            assert!((lhs - rhs).abs() < 1e-6 * (1.0 + rhs.abs()), "mode {m}: {lhs} vs {rhs}");
        }
        checked += 1;
    }
}

#[test]
fn effective_index_bounded_and_continuous() {
    let wg = waveguide();
    for pol in [Polarization::H, Polarization::V] {
        let modes = wg.list_guided_modes(pol, 0.801).unwrap();
        for mode in modes {
            let mut prev: Option<f64> = None;
            for k in 0..100 {
                let l = 0.790 + k as f64 * 1e-4;
                let n = wg.effective_index(mode, l).unwrap();
                let bulk = wg.bulk_index(pol, l).unwrap();
                assert!(n > bulk && n < bulk + wg.spec.index_step);
                if let Some(p) = prev {
                    assert!((n - p).abs() < 1e-3, "{mode} jumps at {l} um");
                }
                prev = Some(n);
            }
        }
    }
}

#[test]
fn multimode_at_degeneracy() {
    let wg = waveguide();
    for pol in [Polarization::H, Polarization::V] {
        let modes = wg.list_guided_modes(pol, 0.801).unwrap();
        assert!(modes.len() >= 4, "{pol}: {} modes", modes.len());
        assert_eq!(modes[0], ModeLabel::fundamental(pol));
    }
}

#[test]
fn cut_off_mode_is_an_error() {
    let wg = waveguide();
    let err = wg.effective_index(ModeLabel::new(40, 0, Polarization::H), 0.8).unwrap_err();
    assert!(matches!(err, spdc_core::Error::ModeCutoff { .. }));
}

#[test]
fn wider_guide_supports_more_modes() {
    let narrow = waveguide();
    let wide = Waveguide::with_bundled_dispersion(WaveguideSpec {
        width_um: 6.0,
        ..WaveguideSpec::default()
    });
    for pol in [Polarization::H, Polarization::V] {
        let a = narrow.list_guided_modes(pol, 0.801).unwrap().len();
        let b = wide.list_guided_modes(pol, 0.801).unwrap().len();
        assert!(b > a);
    }
}
