//! cw-pump biphoton spectra.
//!
//! With a monochromatic pump the joint spectral amplitude collapses onto the
//! energy-conservation line and is sampled as a function of one detuning ν:
//! `ω_H = ω_0 + ν`, `ω_V = ω_0 - ν`, with `ω_0` half the pump frequency.
//! The detuning grid is uniform, odd-sized and exactly symmetric, so `f(-ν_k)`
//! is simply the mirrored sample.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::Waveguide;
use crate::phasematch::{delta_beta, pm_amplitude, ModeTriplet};
use crate::scan::ScanResult;

/// Speed of light in nm/s.
pub const C_NM_PER_S: f64 = 2.997_924_58e17;

pub const DEFAULT_JSA_POINTS: usize = 4097;
/// Default detuning half-window, in natural sinc half-widths.
pub const DEFAULT_WINDOW_HALF_WIDTHS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Photon {
    H,
    V,
}

impl Photon {
    pub fn other(self) -> Self {
        match self {
            Photon::H => Photon::V,
            Photon::V => Photon::H,
        }
    }
}

impl std::fmt::Display for Photon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Photon::H => "H",
            Photon::V => "V",
        })
    }
}

/// Angular frequency (rad/s) of a vacuum wavelength in nm.
pub fn angular_frequency(lambda_nm: f64) -> f64 {
    2.0 * PI * C_NM_PER_S / lambda_nm
}

/// Trapezoidal rule on a uniform grid.
pub(crate) fn trapezoid(step: f64, values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    let mut sum = 0.0;
    for (k, v) in values.enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        sum += w * v;
    }
    sum * step
}

pub(crate) fn trapezoid_complex(step: f64, values: impl ExactSizeIterator<Item = Complex64>) -> Complex64 {
    let n = values.len();
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, v) in values.enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        sum += v * w;
    }
    sum * step
}

/// Biphoton amplitude `f(ν)` on a symmetric detuning grid (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude {
    pump_wavelength_nm: f64,
    detuning: Vec<f64>,
    values: Vec<Complex64>,
    triplet: Option<ModeTriplet>,
}

impl SpectralAmplitude {
    /// Uniform grid `ν_k = (k - (n-1)/2) dν` spanning ±`half_width`.
    pub fn symmetric_grid(half_width: f64, n_points: usize) -> Result<Vec<f64>> {
        if n_points < 3 || n_points % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "detuning grid needs an odd number >= 3 of points (got {n_points})"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "detuning half-width {half_width} must be positive"
            )));
        }
        let centre = (n_points / 2) as i64;
        let step = half_width / centre as f64;
        Ok((0..n_points as i64).map(|k| (k - centre) as f64 * step).collect())
    }

    pub fn new(
        pump_wavelength_nm: f64,
        detuning: Vec<f64>,
        values: Vec<Complex64>,
        triplet: Option<ModeTriplet>,
    ) -> Result<Self> {
        let n = detuning.len();
        if n < 3 || n % 2 == 0 || values.len() != n {
            return Err(Error::InvalidInput(format!(
                "amplitude needs matching odd-length grid and values (got {n} and {})",
                values.len()
            )));
        }
        if !(pump_wavelength_nm > 0.0) {
            return Err(Error::InvalidInput(format!(
                "pump wavelength {pump_wavelength_nm} nm must be positive"
            )));
        }
        let step = detuning[1] - detuning[0];
        for k in 0..n {
            if detuning[k] != -detuning[n - 1 - k] {
                return Err(Error::InvalidInput("detuning grid is not symmetric about 0".into()));
            }
            if k > 0 && ((detuning[k] - detuning[k - 1]) - step).abs() > 1e-9 * step.abs() {
                return Err(Error::InvalidInput("detuning grid is not uniform".into()));
            }
        }
        if !(step > 0.0) {
            return Err(Error::InvalidInput("detuning grid must increase".into()));
        }
        Ok(Self {
            pump_wavelength_nm,
            detuning,
            values,
            triplet,
        })
    }

    /// Samples `amplitude(ν)` on a fresh symmetric grid.
    pub fn from_fn(
        pump_wavelength_nm: f64,
        half_width: f64,
        n_points: usize,
        amplitude: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let grid = Self::symmetric_grid(half_width, n_points)?;
        let values = grid.iter().map(|&nu| amplitude(nu)).collect();
        Self::new(pump_wavelength_nm, grid, values, None)
    }

    pub fn pump_wavelength_nm(&self) -> f64 {
        self.pump_wavelength_nm
    }

    pub fn detuning(&self) -> &[f64] {
        &self.detuning
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn triplet(&self) -> Option<&ModeTriplet> {
        self.triplet.as_ref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.detuning[1] - self.detuning[0]
    }

    /// `ω_0`, half the pump angular frequency.
    pub fn centre_frequency(&self) -> f64 {
        0.5 * angular_frequency(self.pump_wavelength_nm)
    }

    pub fn degenerate_wavelength_nm(&self) -> f64 {
        2.0 * self.pump_wavelength_nm
    }

    pub fn wavelength_nm(&self, photon: Photon, nu: f64) -> f64 {
        let w0 = self.centre_frequency();
        let omega = match photon {
            Photon::H => w0 + nu,
            Photon::V => w0 - nu,
        };
        2.0 * PI * C_NM_PER_S / omega
    }

    /// Detuning at which `photon` has vacuum wavelength `lambda_nm`.
    pub fn detuning_of(&self, photon: Photon, lambda_nm: f64) -> f64 {
        let d = angular_frequency(lambda_nm) - self.centre_frequency();
        match photon {
            Photon::H => d,
            Photon::V => -d,
        }
    }

    /// ∫ |f|² dν.
    pub fn norm_squared(&self) -> f64 {
        trapezoid(self.step(), self.values.iter().map(|v| v.norm_sqr()))
    }

    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if v.norm_sqr() > self.values[best].norm_sqr() {
                best = k;
            }
        }
        best
    }

    pub fn map_values(&self, g: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (v, &nu) in out.values.iter_mut().zip(&self.detuning) {
            *v = g(nu, *v);
        }
        out
    }

    /// `|f|` with every spectral phase removed.
    pub fn without_phase(&self) -> Self {
        self.map_values(|_, v| Complex64::new(v.norm(), 0.0))
    }

    /// |f(ν)|² by linear interpolation; zero outside the grid.
    pub fn intensity_at(&self, nu: f64) -> f64 {
        let n = self.len();
        let pos = (nu - self.detuning[0]) / self.step();
        if !(pos >= 0.0 && pos <= (n - 1) as f64) {
            return 0.0;
        }
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        (1.0 - t) * self.values[i].norm_sqr() + t * self.values[i + 1].norm_sqr()
    }
}

/// Converts a half-window in λ_H (nm, measured towards longer wavelength)
/// into a detuning half-width in rad/s.
pub fn window_to_detuning(pump_wavelength_nm: f64, window_nm: f64) -> f64 {
    let w0 = 0.5 * angular_frequency(pump_wavelength_nm);
    w0 - angular_frequency(2.0 * pump_wavelength_nm + window_nm)
}

pub fn detuning_to_window(pump_wavelength_nm: f64, half_width: f64) -> f64 {
    let w0 = 0.5 * angular_frequency(pump_wavelength_nm);
    2.0 * PI * C_NM_PER_S / (w0 - half_width) - 2.0 * pump_wavelength_nm
}

/// dΔβ/dν at degeneracy, in rad/µm per rad/s.
pub fn mismatch_slope(wg: &Waveguide, triplet: &ModeTriplet, pump_wavelength_nm: f64) -> Result<f64> {
    let w0 = 0.5 * angular_frequency(pump_wavelength_nm);
    let d = 1e-4 * w0;
    let at = |nu: f64| {
        let lh = 2.0 * PI * C_NM_PER_S / (w0 + nu);
        let lv = 2.0 * PI * C_NM_PER_S / (w0 - nu);
        delta_beta(wg, triplet, lh, lv)
    };
    Ok((at(d)? - at(-d)?) / (2.0 * d))
}

/// Default λ_H half-window: six natural sinc half-widths, where a half-width
/// is the detuning of the first sinc zero, |Δβ| L/2 = π.
pub fn default_window_nm(wg: &Waveguide, triplet: &ModeTriplet, pump_wavelength_nm: f64) -> Result<f64> {
    let slope = mismatch_slope(wg, triplet, pump_wavelength_nm)?.abs();
    if !(slope > 0.0) {
        return Err(Error::InvalidInput("mismatch does not vary along the pump line".into()));
    }
    let half_width = 2.0 * PI / (slope * wg.spec.length_um());
    Ok(detuning_to_window(pump_wavelength_nm, DEFAULT_WINDOW_HALF_WIDTHS * half_width))
}

/// f(ν) = Φ(λ_H(ν), λ_V(ν)) along the cw energy-conservation line.
pub fn build_jsa(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    pump_wavelength_nm: f64,
    window_nm: f64,
    n_points: usize,
) -> Result<SpectralAmplitude> {
    if !(window_nm > 0.0) {
        return Err(Error::InvalidInput(format!("JSA window {window_nm} nm must be positive")));
    }
    let half_width = window_to_detuning(pump_wavelength_nm, window_nm);
    let grid = SpectralAmplitude::symmetric_grid(half_width, n_points)?;
    let w0 = 0.5 * angular_frequency(pump_wavelength_nm);
    let values = grid
        .par_iter()
        .map(|&nu| {
            let lh = 2.0 * PI * C_NM_PER_S / (w0 + nu);
            let lv = 2.0 * PI * C_NM_PER_S / (w0 - nu);
            pm_amplitude(wg, triplet, lh, lv)
        })
        .collect::<Result<Vec<_>>>()?;
    let peak = values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    // The island's half-maximum region must be sampled.
    if !(peak >= 0.5) {
        return Err(Error::EmptyAmplitude);
    }
    let edge = values[0].norm_sqr().max(values[n_points - 1].norm_sqr()).sqrt();
    if edge >= 0.05 * peak.sqrt() {
        log::warn!(
            "JSA window of {window_nm} nm clips the island: |f| at the edge is {:.3} of the peak",
            edge / peak.sqrt()
        );
    }
    SpectralAmplitude::new(pump_wavelength_nm, grid, values, Some(*triplet))
}

/// Spectral filter with a super-Gaussian power transmission profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub center_nm: f64,
    pub fwhm_nm: f64,
    pub shape_order: u32,
    #[serde(default = "unit_transmission")]
    pub peak_transmission: f64,
}

fn unit_transmission() -> f64 {
    1.0
}

impl FilterSpec {
    pub fn gaussian(center_nm: f64, fwhm_nm: f64) -> Self {
        Self {
            center_nm,
            fwhm_nm,
            shape_order: 1,
            peak_transmission: 1.0,
        }
    }

    pub fn flat_top(center_nm: f64, fwhm_nm: f64) -> Self {
        Self {
            shape_order: 2,
            ..Self::gaussian(center_nm, fwhm_nm)
        }
    }

    /// T = peak · exp(-ln2 · (2(λ - centre)/FWHM)^(2·order)).
    pub fn transmission(&self, lambda_nm: f64) -> f64 {
        let x = 2.0 * (lambda_nm - self.center_nm) / self.fwhm_nm;
        self.peak_transmission * (-LN_2 * x.powi(2 * self.shape_order as i32)).exp()
    }

    pub fn violations(&self, name: &str) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.fwhm_nm > 0.0) {
            errs.push(format!("filters.{name}.fwhm_nm must be > 0 (got {})", self.fwhm_nm));
        }
        if !(self.center_nm > 0.0) {
            errs.push(format!("filters.{name}.center_nm must be > 0 (got {})", self.center_nm));
        }
        if self.shape_order == 0 {
            errs.push(format!("filters.{name}.shape_order must be >= 1"));
        }
        if !(self.peak_transmission > 0.0 && self.peak_transmission <= 1.0) {
            errs.push(format!(
                "filters.{name}.peak_transmission must lie in (0, 1] (got {})",
                self.peak_transmission
            ));
        }
        errs
    }
}

/// Multiplies f by the amplitude transmissions √T_H(λ_H) √T_V(λ_V).
pub fn apply_filters(
    f: &SpectralAmplitude,
    filter_h: Option<&FilterSpec>,
    filter_v: Option<&FilterSpec>,
) -> SpectralAmplitude {
    if filter_h.is_none() && filter_v.is_none() {
        return f.clone();
    }
    f.map_values(|nu, v| {
        let th = filter_h.map_or(1.0, |flt| flt.transmission(f.wavelength_nm(Photon::H, nu)));
        let tv = filter_v.map_or(1.0, |flt| flt.transmission(f.wavelength_nm(Photon::V, nu)));
        v * (th * tv).sqrt()
    })
}

/// Single-photon spectrum `|f(ν(λ))|² |dν/dλ|` on `n_bins` wavelengths
/// spanning the grid, normalized to unit peak.
pub fn marginal_spectrum(f: &SpectralAmplitude, which: Photon, n_bins: usize) -> Vec<(f64, f64)> {
    let n_bins = n_bins.max(2);
    let nu_max = *f.detuning().last().unwrap();
    let a = f.wavelength_nm(which, nu_max);
    let b = f.wavelength_nm(which, -nu_max);
    let (lo, hi) = (a.min(b), a.max(b));
    let mut out: Vec<(f64, f64)> = crate::phasematch::linspace(lo, hi, n_bins)
        .into_iter()
        .map(|l| {
            let nu = f.detuning_of(which, l);
            let jacobian = 2.0 * PI * C_NM_PER_S / (l * l);
            (l, f.intensity_at(nu) * jacobian)
        })
        .collect();
    let peak = out.iter().map(|p| p.1).fold(0.0, f64::max);
    if peak > 0.0 {
        for p in &mut out {
            p.1 /= peak;
        }
    }
    out
}

/// Relative coincidence rate while a narrowband filter of `scan_fwhm_nm` is
/// stepped across `scanned` and the partner is detected behind `herald`.
/// Rates are fractions of all pairs, so the scale is filter-width dependent.
pub fn heralded_scan(
    f: &SpectralAmplitude,
    scanned: Photon,
    scan_fwhm_nm: f64,
    centers_nm: &[f64],
    herald: Option<&FilterSpec>,
) -> Result<ScanResult> {
    if !(scan_fwhm_nm > 0.0) {
        return Err(Error::InvalidInput(format!("scan filter FWHM {scan_fwhm_nm} must be > 0")));
    }
    let norm = f.norm_squared();
    if !(norm > 0.0) {
        return Err(Error::InvalidInput("amplitude has zero norm".into()));
    }
    let intensity: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
    let lambda_s: Vec<f64> = f.detuning().iter().map(|&nu| f.wavelength_nm(scanned, nu)).collect();
    let herald_t: Vec<f64> = f
        .detuning()
        .iter()
        .map(|&nu| herald.map_or(1.0, |h| h.transmission(f.wavelength_nm(scanned.other(), nu))))
        .collect();
    let rates = centers_nm
        .iter()
        .map(|&c| {
            let filter = FilterSpec::gaussian(c, scan_fwhm_nm);
            let integrand = (0..f.len()).map(|k| intensity[k] * filter.transmission(lambda_s[k]) * herald_t[k]);
            trapezoid(f.step(), integrand) / norm
        })
        .collect();
    Ok(ScanResult::analytic("center_nm", centers_nm, rates))
}

/// O = ∫ f(ν) f*(-ν) dν / ∫ |f(ν)|² dν.
pub fn spectral_exchange_overlap(f: &SpectralAmplitude) -> Result<Complex64> {
    let norm = f.norm_squared();
    if !(norm > 0.0) {
        return Err(Error::InvalidInput("spectral amplitude has zero norm".into()));
    }
    let n = f.len();
    let v = f.values();
    let num = trapezoid_complex(f.step(), (0..n).map(|k| v[k] * v[n - 1 - k].conj()));
    Ok(num / norm)
}

/// Settings shared by every JSA evaluated during pump tuning.
#[derive(Debug, Clone, Copy)]
pub struct TuneOptions<'a> {
    pub filter_h: Option<&'a FilterSpec>,
    pub filter_v: Option<&'a FilterSpec>,
    pub window_nm: Option<f64>,
    pub n_points: usize,
}

impl Default for TuneOptions<'_> {
    fn default() -> Self {
        Self {
            filter_h: None,
            filter_v: None,
            window_nm: None,
            n_points: DEFAULT_JSA_POINTS,
        }
    }
}

/// Overlap of the filtered JSA once the pair delay is compensated,
/// max_τ O(τ), as a function of pump wavelength. At τ = 0 the walk-off phase
/// of a type-II amplitude leaves |O| nearly flat in the pump wavelength.
pub fn overlap_vs_pump(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    pump_wavelength_nm: f64,
    window_nm: f64,
    opts: &TuneOptions<'_>,
) -> Result<f64> {
    let f = build_jsa(wg, triplet, pump_wavelength_nm, window_nm, opts.n_points)?;
    let f = apply_filters(&f, opts.filter_h, opts.filter_v);
    Ok(crate::interference::hom_curve_default(&f)?.visibility)
}

pub const TUNE_COARSE_POINTS: usize = 20;
pub const TUNE_TOLERANCE_NM: f64 = 1e-4;

/// Coarse scan plus golden-section refinement of the pump wavelength that
/// maximizes the compensated overlap. Returns the optimum and the coarse scan.
pub fn tune_pump_with_scan(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    search_interval_nm: (f64, f64),
    opts: &TuneOptions<'_>,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let (lo, hi) = search_interval_nm;
    if !(hi > lo && lo > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pump search interval [{lo}, {hi}] nm must have positive width"
        )));
    }
    let window = match opts.window_nm {
        Some(w) => w,
        None => default_window_nm(wg, triplet, 0.5 * (lo + hi))?,
    };
    let objective = |lp: f64| overlap_vs_pump(wg, triplet, lp, window, opts);
    let xs = crate::phasematch::linspace(lo, hi, TUNE_COARSE_POINTS);
    let scan: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| match objective(x) {
            Ok(v) => Ok((x, v)),
            Err(Error::EmptyAmplitude) => Ok((x, 0.0)),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, p) in scan.iter().enumerate() {
        if p.1 > scan[best].1 {
            best = k;
        }
    }
    if best == 0 || best + 1 == scan.len() {
        return Err(Error::NoBracket { lo_nm: lo, hi_nm: hi });
    }
    let (mut a, mut b) = (scan[best - 1].0, scan[best + 1].0);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while b - a > TUNE_TOLERANCE_NM {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d)?;
        }
    }
    let x = 0.5 * (a + b);
    // The golden-section optimum can only improve on the coarse best node.
    let result = if objective(x)? >= scan[best].1 { x } else { scan[best].0 };
    Ok((result, scan))
}

pub fn tune_pump(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    search_interval_nm: (f64, f64),
    opts: &TuneOptions<'_>,
) -> Result<f64> {
    tune_pump_with_scan(wg, triplet, search_interval_nm, opts).map(|(x, _)| x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_exactly_symmetric() {
        let g = SpectralAmplitude::symmetric_grid(3.7e13, 4097).unwrap();
        assert_eq!(g[2048], 0.0);
        for k in 0..g.len() {
            assert_eq!(g[k], -g[g.len() - 1 - k]);
        }
        assert!(SpectralAmplitude::symmetric_grid(1.0, 4096).is_err());
    }

    #[test]
    fn constructor_rejects_asymmetric_grid() {
        let grid = vec![-1.0, 0.0, 1.5];
        let vals = vec![Complex64::new(1.0, 0.0); 3];
        assert!(SpectralAmplitude::new(400.0, grid, vals, None).is_err());
    }

    #[test]
    fn filter_fwhm_definition() {
        for order in 1..=4 {
            let f = FilterSpec {
                center_nm: 801.26,
                fwhm_nm: 3.0,
                shape_order: order,
                peak_transmission: 0.8,
            };
            assert!((f.transmission(801.26 + 1.5) - 0.4).abs() < 1e-12);
            assert!((f.transmission(801.26 - 1.5) - 0.4).abs() < 1e-12);
            assert!((f.transmission(801.26) - 0.8).abs() < 1e-15);
        }
    }

    #[test]
    fn no_filters_is_identity() {
        let f = SpectralAmplitude::from_fn(400.63, 1e13, 101, |nu| Complex64::new((-nu * nu / 1e26).exp(), nu / 1e13)).unwrap();
        assert_eq!(apply_filters(&f, None, None), f);
    }

    #[test]
    fn wavelength_detuning_roundtrip() {
        let f = SpectralAmplitude::from_fn(400.63, 1e13, 101, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!((f.wavelength_nm(Photon::H, 0.0) - 801.26).abs() < 1e-9);
        for photon in [Photon::H, Photon::V] {
            let nu = f.detuning_of(photon, 805.0);
            assert!((f.wavelength_nm(photon, nu) - 805.0).abs() < 1e-9);
        }
        // Positive detuning makes H bluer and V redder.
        assert!(f.wavelength_nm(Photon::H, 1e12) < 801.26);
        assert!(f.wavelength_nm(Photon::V, 1e12) > 801.26);
    }

    #[test]
    fn overlap_edge_cases() {
        let sym = SpectralAmplitude::from_fn(400.0, 1e13, 201, |nu| Complex64::new((-(nu / 3e12).powi(2)).exp(), 0.0)).unwrap();
        let o = spectral_exchange_overlap(&sym).unwrap();
        assert!((o.re - 1.0).abs() < 1e-12 && o.im.abs() < 1e-12);

        let one_sided = SpectralAmplitude::from_fn(400.0, 1e13, 201, |nu| {
            if nu > 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        })
        .unwrap();
        assert!(spectral_exchange_overlap(&one_sided).unwrap().norm() < 1e-15);

        let zero = SpectralAmplitude::from_fn(400.0, 1e13, 201, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert!(spectral_exchange_overlap(&zero).is_err());
    }

    #[test]
    fn symmetric_amplitude_has_identical_marginals() {
        let f = SpectralAmplitude::from_fn(400.63, 2e13, 1001, |nu| {
            let x = nu / 5e12;
            Complex64::new((-x * x).exp() * (1.0 + 0.3 * x * x), 0.0)
        })
        .unwrap();
        let h = marginal_spectrum(&f, Photon::H, 301);
        let v = marginal_spectrum(&f, Photon::V, 301);
        for (a, b) in h.iter().zip(&v) {
            assert!((a.0 - b.0).abs() < 1e-12);
            assert!((a.1 - b.1).abs() < 1e-12, "{} vs {}", a.1, b.1);
        }
    }
}
