//! Scenario computations, independent of file output.

use rand_chacha::ChaCha8Rng;

use crate::counting::{arm_efficiency, draw_record, rng_for, simulate_hom_experiment, HomExperiment, Rates};
use crate::error::{Error, Result};
use crate::fitting::{fit_dip, fit_gaussian, fit_sinusoid, FitResult};
use crate::interference::{fringe_curve, hom_curve_default, walkoff_delay, Basis, FringeModel, HomCurve};
use crate::modes::{ModeLabel, Polarization, Waveguide};
use crate::phasematch::{
    band_map, conjugate_wavelength, guided_triplets, island_centers, linspace, pm_amplitude, BandMap, ModeTriplet,
};
use crate::scan::{ScanPoint, ScanResult};
use crate::spectra::{apply_filters, heralded_scan, tune_pump_with_scan, Photon, TuneOptions};

use super::config::ExperimentConfig;

fn nm_to_um(nm: f64) -> f64 {
    nm * 1e-3
}

/// Seed in force for Monte Carlo scenarios; `None` in noiseless mode.
pub fn effective_seed(config: &ExperimentConfig) -> Option<u64> {
    (!config.monte_carlo.noiseless).then_some(config.monte_carlo.seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeRow {
    pub wavelength_nm: f64,
    pub mode: ModeLabel,
    pub effective_index: f64,
}

/// Guided modes of H and V at the degenerate wavelength and of P at the pump.
pub fn guided_mode_table(config: &ExperimentConfig, wg: &Waveguide) -> Result<Vec<ModeRow>> {
    let deg = config.calibration.degenerate_wavelength_nm;
    let mut rows = Vec::new();
    for (pol, lambda) in [
        (Polarization::H, deg),
        (Polarization::V, deg),
        (Polarization::P, config.pump.wavelength_nm),
    ] {
        for (mode, effective_index) in wg.guided_modes_with_index(pol, nm_to_um(lambda))? {
            rows.push(ModeRow {
                wavelength_nm: lambda,
                mode,
                effective_index,
            });
        }
    }
    Ok(rows)
}

/// Fundamental-pump triplets, fundamental first.
pub fn all_triplets(config: &ExperimentConfig, wg: &Waveguide) -> Result<Vec<ModeTriplet>> {
    guided_triplets(
        wg,
        ModeLabel::fundamental(Polarization::P),
        config.calibration.degenerate_wavelength_nm,
    )
}

pub fn compute_bands(config: &ExperimentConfig, wg: &Waveguide) -> Result<BandMap> {
    let s = &config.scenarios.bands;
    let triplets: Vec<ModeTriplet> = all_triplets(config, wg)?
        .into_iter()
        .filter(|t| t.h.m + t.h.n <= s.max_mode_order && t.v.m + t.v.n <= s.max_mode_order)
        .collect();
    band_map(
        wg,
        &triplets,
        (s.lambda_h_range_nm[0], s.lambda_h_range_nm[1]),
        (s.lambda_v_range_nm[0], s.lambda_v_range_nm[1]),
        s.grid_n,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct IslandRow {
    pub triplet: ModeTriplet,
    /// λ_H of every island on the fixed-pump line.
    pub centers_h_nm: Vec<f64>,
}

impl IslandRow {
    /// Largest of the λ_H and λ_V distances to the reference island, for the
    /// closest island of this triplet. Infinite when it has none in range.
    pub fn separation_nm(&self, pump_nm: f64, reference_h_nm: f64) -> f64 {
        let reference_v = conjugate_wavelength(pump_nm, reference_h_nm).unwrap_or(f64::NAN);
        self.centers_h_nm
            .iter()
            .map(|&h| {
                let v = conjugate_wavelength(pump_nm, h).unwrap_or(f64::NAN);
                (h - reference_h_nm).abs().max((v - reference_v).abs())
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IslandsOutcome {
    pub pump_wavelength_nm: f64,
    pub lambda_h_nm: Vec<f64>,
    pub lambda_v_nm: Vec<f64>,
    pub rows: Vec<IslandRow>,
    /// |Φ|² along the line, one vector per row; `None` where a mode is cut off.
    pub intensity: Vec<Vec<Option<f64>>>,
}

impl IslandsOutcome {
    pub fn fundamental_center_nm(&self) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.triplet.is_fundamental())?;
        let deg = 2.0 * self.pump_wavelength_nm;
        row.centers_h_nm
            .iter()
            .copied()
            .min_by(|a, b| (a - deg).abs().total_cmp(&(b - deg).abs()))
    }

    /// Smallest separation between the fundamental island and any island of
    /// a triplet with a higher-order H or V mode.
    pub fn min_higher_order_separation_nm(&self) -> Option<f64> {
        let reference = self.fundamental_center_nm()?;
        self.rows
            .iter()
            .filter(|r| !r.triplet.is_fundamental())
            .map(|r| r.separation_nm(self.pump_wavelength_nm, reference))
            .reduce(f64::min)
    }
}

/// Islands of every triplet along the cw fixed-pump line.
pub fn compute_islands(config: &ExperimentConfig, wg: &Waveguide) -> Result<IslandsOutcome> {
    let s = &config.scenarios.islands;
    let pump = config.pump.wavelength_nm;
    let lambda_h_nm = linspace(s.lambda_h_range_nm[0], s.lambda_h_range_nm[1], s.n_points);
    let lambda_v_nm = lambda_h_nm
        .iter()
        .map(|&h| conjugate_wavelength(pump, h))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut intensity = Vec::new();
    for triplet in all_triplets(config, wg)? {
        let centers_h_nm = island_centers(
            wg,
            &triplet,
            pump,
            (s.lambda_h_range_nm[0], s.lambda_h_range_nm[1]),
            s.n_points,
        )?;
        let line = lambda_h_nm
            .iter()
            .zip(&lambda_v_nm)
            .map(|(&h, &v)| match pm_amplitude(wg, &triplet, h, v) {
                Ok(a) => Ok(Some(a.norm_sqr())),
                Err(Error::ModeCutoff { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(IslandRow { triplet, centers_h_nm });
        intensity.push(line);
    }
    Ok(IslandsOutcome {
        pump_wavelength_nm: pump,
        lambda_h_nm,
        lambda_v_nm,
        rows,
        intensity,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedOutcome {
    pub scans: Vec<(Photon, ScanResult)>,
    pub fits: Vec<(Photon, FitResult)>,
}

/// Narrowband filter stepped across one photon while the partner is detected
/// behind the herald filter; both photons in turn. Rates are coincidences
/// per second, scaled so that the herald filter on both photons would give
/// the configured brightness; relative when no brightness is configured.
pub fn compute_heralded(config: &ExperimentConfig, wg: &Waveguide) -> Result<HeraldedOutcome> {
    let s = &config.scenarios.heralded;
    let f = config.amplitude(wg, None)?;
    let scan_fwhm = config.filter(&s.scan_filter)?.fwhm_nm;
    let herald = config.filter(&s.herald_filter)?;
    let centers = linspace(s.center_range_nm[0], s.center_range_nm[1], s.n_centers);
    let (scale, interval_s) = match config.brightness.get(&s.herald_filter) {
        Some(&b) => {
            let both = apply_filters(&f, Some(herald), Some(herald)).norm_squared() / f.norm_squared();
            (b * config.pump_power_mw() / both, config.monte_carlo.interval_s)
        }
        None => (1.0, 1.0),
    };
    let mut scans = Vec::new();
    let mut fits = Vec::new();
    for photon in [Photon::H, Photon::V] {
        let mut scan = heralded_scan(&f, photon, scan_fwhm, &centers, Some(herald))?;
        for p in &mut scan.points {
            p.expected_rate *= scale;
        }
        scan.interval_s = interval_s;
        fits.push((photon, fit_gaussian(&scan.fit_points()).map_err(|e| e.in_stage("fitting"))?));
        scans.push((photon, scan));
    }
    Ok(HeraldedOutcome { scans, fits })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub optimum_nm: f64,
    pub coarse_scan: Vec<(f64, f64)>,
}

pub fn compute_tune(config: &ExperimentConfig, wg: &Waveguide) -> Result<TuneOutcome> {
    let s = &config.scenarios.tune;
    let filter = if s.filter.is_empty() {
        None
    } else {
        Some(config.filter(&s.filter)?)
    };
    let opts = TuneOptions {
        filter_h: filter,
        filter_v: filter,
        window_nm: config.jsa.window_nm,
        n_points: config.jsa.n_points,
    };
    let (optimum_nm, coarse_scan) = tune_pump_with_scan(
        wg,
        &ModeTriplet::fundamental(),
        (s.search_interval_nm[0], s.search_interval_nm[1]),
        &opts,
    )?;
    Ok(TuneOutcome { optimum_nm, coarse_scan })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomOutcome {
    pub scan: ScanResult,
    pub fit: FitResult,
    /// Noise-free curve on the default delay grid.
    pub theory: HomCurve,
    pub walkoff_ps: f64,
}

pub fn hom_experiment(config: &ExperimentConfig, filter: &str) -> Result<HomExperiment> {
    Ok(HomExperiment {
        chain_1: config.chains.arm1.clone(),
        chain_2: config.chains.arm2.clone(),
        interval_s: config.monte_carlo.interval_s,
        window_s: config.monte_carlo.coincidence_window_ns * 1e-9,
        pump_power_mw: config.pump_power_mw(),
        brightness: config.brightness_for(filter)?,
    })
}

pub fn compute_hom(config: &ExperimentConfig, wg: &Waveguide) -> Result<HomOutcome> {
    let s = &config.scenarios.hom;
    let f = config.amplitude(wg, Some(&s.filter))?;
    let delays = linspace(s.delay_range_ps[0], s.delay_range_ps[1], s.n_delays);
    let experiment = hom_experiment(config, &s.filter)?;
    let (scan, _) = simulate_hom_experiment(&f, &experiment, &delays, effective_seed(config))?;
    let fit = fit_dip(&scan.fit_points()).map_err(|e| e.in_stage("fitting"))?;
    let theory = hom_curve_default(&f)?;
    let walkoff_ps = walkoff_delay(wg, &ModeTriplet::fundamental(), config.calibration.degenerate_wavelength_nm)?;
    Ok(HomOutcome {
        scan,
        fit,
        theory,
        walkoff_ps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeOutcome {
    pub filter: String,
    /// Peak HOM overlap of the filtered amplitude.
    pub dip_visibility: f64,
    pub model: FringeModel,
    pub brightness: f64,
    pub scans: Vec<(Basis, ScanResult)>,
    pub fits: Vec<(Basis, FitResult)>,
}

impl FringeOutcome {
    pub fn fitted_visibility(&self, basis: Basis) -> Option<f64> {
        self.fits
            .iter()
            .find(|(b, _)| *b == basis)
            .and_then(|(_, fit)| fit.value("visibility"))
    }
}

pub fn fringe_model(config: &ExperimentConfig, dip_visibility: f64) -> Result<FringeModel> {
    if config.fringe.ideal {
        return Ok(FringeModel::ideal());
    }
    FringeModel::new(
        (config.fringe.mode_overlap * dip_visibility).clamp(0.0, 1.0),
        config.fringe.visibility_polarization,
        config.fringe.compensator_phase_rad,
    )
}

/// Polarizer scans behind the beam splitter for the four conjugate bases.
/// Coincidence rate B·P·R(θ); each detector sees a quarter of the pairs
/// reaching its arm.
fn simulate_fringes(
    config: &ExperimentConfig,
    wg: &Waveguide,
    filter: &str,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<FringeOutcome> {
    let f = config.amplitude(wg, Some(filter))?;
    let dip_visibility = hom_curve_default(&f)?.visibility;
    let model = fringe_model(config, dip_visibility)?;
    let brightness = config.brightness_for(filter)?;
    let detected = brightness * config.pump_power_mw();
    let eta_1 = arm_efficiency(&config.chains.arm1);
    let eta_2 = arm_efficiency(&config.chains.arm2);
    let generated = if detected > 0.0 { detected / (eta_1 * eta_2) } else { 0.0 };
    if !generated.is_finite() {
        return Err(Error::InvalidInput("non-zero brightness with a zero-efficiency arm".into()));
    }
    let noisy = rng.is_some();
    let (singles_1, singles_2, accidental) = if noisy {
        let s1 = 0.25 * generated * eta_1 + config.chains.arm1.dark_count_rate;
        let s2 = 0.25 * generated * eta_2 + config.chains.arm2.dark_count_rate;
        (s1, s2, s1 * s2 * config.monte_carlo.coincidence_window_ns * 1e-9)
    } else {
        (0.0, 0.0, 0.0)
    };

    let s = &config.scenarios.fringes;
    let [t0, t1] = s.theta_range_deg;
    let n = ((t1 - t0) / s.theta_step_deg + 1e-9).floor() as usize + 1;
    let thetas: Vec<f64> = (0..n).map(|k| t0 + k as f64 * s.theta_step_deg).collect();
    let interval = config.monte_carlo.interval_s;
    let seed = effective_seed(config);

    let mut rng = rng;
    let mut scans = Vec::new();
    let mut fits = Vec::new();
    for basis in Basis::ALL {
        let relative = fringe_curve(&model, basis, &thetas);
        let points = thetas
            .iter()
            .zip(&relative)
            .map(|(&x, &r)| {
                let signal = detected * r;
                let sampled_counts = rng.as_deref_mut().map(|rng| {
                    let rates = Rates {
                        singles_1,
                        singles_2,
                        true_coincidences: signal,
                        accidental_coincidences: accidental,
                    };
                    draw_record(rng, &rates, interval, seed.unwrap_or_default()).coincidences
                });
                ScanPoint {
                    x,
                    expected_rate: signal + accidental,
                    sampled_counts,
                }
            })
            .collect();
        let scan = ScanResult {
            variable: "theta_deg".into(),
            points,
            interval_s: interval,
            seed,
            accidental_rate: accidental,
        };
        let fit = fit_sinusoid(&scan.fit_points()).map_err(|e| e.in_stage("fitting"))?;
        scans.push((basis, scan));
        fits.push((basis, fit));
    }
    Ok(FringeOutcome {
        filter: filter.to_owned(),
        dip_visibility,
        model,
        brightness,
        scans,
        fits,
    })
}

pub fn compute_fringes(config: &ExperimentConfig, wg: &Waveguide) -> Result<FringeOutcome> {
    let mut rng = effective_seed(config).map(rng_for);
    simulate_fringes(config, wg, &config.scenarios.fringes.filter, rng.as_mut())
}

/// One fringe simulation per configured filter, sharing one random stream.
pub fn compute_summary(config: &ExperimentConfig, wg: &Waveguide) -> Result<Vec<FringeOutcome>> {
    let mut rng = effective_seed(config).map(rng_for);
    config
        .scenarios
        .summary
        .filters
        .iter()
        .map(|name| simulate_fringes(config, wg, name, rng.as_mut()))
        .collect()
}
