//! Two-photon interference: Hong-Ou-Mandel dips and Shih-Alley
//! polarization fringes.
//!
//! Both observables reduce to the delayed exchange overlap
//!
//! ```text
//! O(τ) = ∫ f(ν) f*(-ν) exp(-2iντ) dν / ∫ |f(ν)|² dν
//! ```
//!
//! which is real because `f(ν) f*(-ν)` is Hermitian in ν. The HOM
//! coincidence probability is `p(τ) = (1 - O(τ)) / 2`, and the diagonal-basis
//! fringe visibility after the compensator is set at the HOM minimum is the
//! same maximized overlap. Delays are in ps; positive τ delays the V photon.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::Waveguide;
use crate::phasematch::{linspace, ModeTriplet};
use crate::spectra::SpectralAmplitude;

/// Speed of light in µm/ps.
pub const C_UM_PER_PS: f64 = 299.792_458;

/// Finite-difference step for group effective indices.
pub const GROUP_INDEX_STEP_NM: f64 = 0.5;

const DEFAULT_DELAY_POINTS: usize = 801;

struct OverlapKernel {
    nu: Vec<f64>,
    weighted: Vec<(f64, f64)>,
    norm: f64,
}

impl OverlapKernel {
    fn new(f: &SpectralAmplitude) -> Result<Self> {
        let norm = f.norm_squared();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("spectral amplitude has zero norm".into()));
        }
        let n = f.len();
        let v = f.values();
        let step = f.step();
        let weighted = (0..n)
            .map(|k| {
                let w = if k == 0 || k + 1 == n { 0.5 * step } else { step };
                let g = v[k] * v[n - 1 - k].conj() * w;
                (g.re, g.im)
            })
            .collect();
        Ok(Self {
            nu: f.detuning().to_vec(),
            weighted,
            norm,
        })
    }

    /// Re O(τ), τ in ps.
    fn overlap(&self, tau_ps: f64) -> f64 {
        let t = 2.0 * tau_ps * 1e-12;
        let mut acc = 0.0;
        for (&nu, &(re, im)) in self.nu.iter().zip(&self.weighted) {
            let (s, c) = (nu * t).sin_cos();
            acc += re * c + im * s;
        }
        acc / self.norm
    }
}

/// Re O(τ) at a single delay.
pub fn exchange_overlap_at(f: &SpectralAmplitude, tau_ps: f64) -> Result<f64> {
    Ok(OverlapKernel::new(f)?.overlap(tau_ps))
}

/// Delay grid wide enough to hold the dip: 801 points over ±(12/σ + |τ_c|),
/// with σ the rms bandwidth of |f|² and τ_c a coarse locate of the optimum.
pub fn default_delays(f: &SpectralAmplitude) -> Result<Vec<f64>> {
    let kernel = OverlapKernel::new(f)?;
    let step = f.step();
    let weights: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    let mean: f64 = weights.iter().zip(f.detuning()).map(|(w, nu)| w * nu).sum::<f64>() / total;
    let var: f64 = weights
        .iter()
        .zip(f.detuning())
        .map(|(w, nu)| w * (nu - mean).powi(2))
        .sum::<f64>()
        / total;
    let sigma = var.sqrt().max(step);
    // Both bounds in ps. Beyond π/(4 dν) the sampled phase factor aliases.
    let coherence = 1e12 / sigma;
    let alias = 0.25 * std::f64::consts::PI / step * 1e12;
    let coarse_span = (48.0 * coherence).min(alias);
    let coarse = linspace(-coarse_span, coarse_span, 481);
    let values: Vec<f64> = coarse.par_iter().map(|&t| kernel.overlap(t)).collect();
    let mut best = 240;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    let span = (12.0 * coherence + coarse[best].abs()).min(alias);
    Ok(linspace(-span, span, DEFAULT_DELAY_POINTS))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomCurve {
    pub delays_ps: Vec<f64>,
    pub coincidence_probability: Vec<f64>,
    pub visibility: f64,
    pub optimal_delay_ps: f64,
}

/// Locates max O(τ) on the grid, then refines inside the neighbouring
/// bracket: parabolic vertex first, then a golden-section polish because
/// the dip apex of a sinc-shaped amplitude is a cusp.
fn refine_maximum(kernel: &OverlapKernel, delays: &[f64], overlaps: &[f64]) -> (f64, f64) {
    let mut k = 0;
    for (i, v) in overlaps.iter().enumerate() {
        if *v > overlaps[k] {
            k = i;
        }
    }
    let mut best = (delays[k], overlaps[k]);
    if k == 0 || k + 1 == delays.len() {
        return best;
    }
    let (x0, x1, x2) = (delays[k - 1], delays[k], delays[k + 1]);
    let (y0, y1, y2) = (overlaps[k - 1], overlaps[k], overlaps[k + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    if denom != 0.0 {
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        if a < 0.0 {
            let vertex = -b / (2.0 * a);
            if vertex > x0 && vertex < x2 {
                let v = kernel.overlap(vertex);
                if v > best.1 {
                    best = (vertex, v);
                }
            }
        }
    }
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (x0, x2);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = kernel.overlap(c);
    let mut fd = kernel.overlap(d);
    let tol = 1e-9 * (x2 - x0);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = kernel.overlap(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = kernel.overlap(d);
        }
    }
    let x = 0.5 * (a + b);
    let v = kernel.overlap(x);
    if v > best.1 {
        best = (x, v);
    }
    best
}

pub fn hom_curve(f: &SpectralAmplitude, delays_ps: &[f64]) -> Result<HomCurve> {
    if delays_ps.is_empty() || delays_ps.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("HOM delays must be finite and non-empty".into()));
    }
    let kernel = OverlapKernel::new(f)?;
    let overlaps: Vec<f64> = delays_ps.par_iter().map(|&t| kernel.overlap(t)).collect();
    let (optimal_delay_ps, best) = refine_maximum(&kernel, delays_ps, &overlaps);
    Ok(HomCurve {
        delays_ps: delays_ps.to_vec(),
        coincidence_probability: overlaps.iter().map(|o| (0.5 * (1.0 - o)).clamp(0.0, 1.0)).collect(),
        visibility: best,
        optimal_delay_ps,
    })
}

/// HOM curve on [`default_delays`].
pub fn hom_curve_default(f: &SpectralAmplitude) -> Result<HomCurve> {
    hom_curve(f, &default_delays(f)?)
}

/// Delay τ (ps, positive delays V) that re-synchronizes the pair, from the
/// group effective indices: (L/2)(1/v_gV - 1/v_gH). Pairs are born uniformly
/// along the guide, so the mean walk-off is half the full-length value.
pub fn walkoff_delay(wg: &Waveguide, triplet: &ModeTriplet, degenerate_wavelength_nm: f64) -> Result<f64> {
    let lambda = degenerate_wavelength_nm * 1e-3;
    let step = GROUP_INDEX_STEP_NM * 1e-3;
    let ng_h = wg.group_effective_index(triplet.h, lambda, step)?;
    let ng_v = wg.group_effective_index(triplet.v, lambda, step)?;
    Ok(0.5 * wg.spec.length_um() * (ng_v - ng_h) / C_UM_PER_PS)
}

/// (HOM-curve minimum, walk-off prediction), both in ps.
pub fn hom_minimum_matches_walkoff(
    f: &SpectralAmplitude,
    wg: &Waveguide,
    triplet: &ModeTriplet,
) -> Result<(f64, f64)> {
    let curve = hom_curve_default(f)?;
    let walkoff = walkoff_delay(wg, triplet, f.degenerate_wavelength_nm())?;
    Ok((curve.optimal_delay_ps, walkoff))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    H,
    V,
    D,
    A,
}

impl Basis {
    pub const ALL: [Basis; 4] = [Basis::H, Basis::V, Basis::D, Basis::A];
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Basis::H => "H",
            Basis::V => "V",
            Basis::D => "D",
            Basis::A => "A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeModel {
    pub visibility_interference: f64,
    pub visibility_polarization: f64,
    pub compensator_phase: f64,
}

impl FringeModel {
    pub fn ideal() -> Self {
        Self {
            visibility_interference: 1.0,
            visibility_polarization: 1.0,
            compensator_phase: 0.0,
        }
    }

    pub fn new(visibility_interference: f64, visibility_polarization: f64, compensator_phase: f64) -> Result<Self> {
        for v in [visibility_interference, visibility_polarization] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!("fringe visibility {v} outside [0, 1]")));
            }
        }
        Ok(Self {
            visibility_interference,
            visibility_polarization,
            compensator_phase,
        })
    }

    /// Visibility a sinusoidal fit should recover in `basis`.
    pub fn expected_visibility(&self, basis: Basis) -> f64 {
        match basis {
            Basis::H | Basis::V => self.visibility_polarization,
            Basis::D | Basis::A => (self.visibility_interference * self.compensator_phase.cos()).abs(),
        }
    }
}

/// Relative coincidence rate with the conjugate photon projected on `basis`
/// and the other analyzed at θ (degrees).
pub fn fringe_curve(model: &FringeModel, conjugate_basis: Basis, thetas_deg: &[f64]) -> Vec<f64> {
    let vi = model.visibility_interference * model.compensator_phase.cos();
    let vp = model.visibility_polarization;
    thetas_deg
        .iter()
        .map(|&deg| {
            let two = 2.0 * deg.to_radians();
            0.25 * match conjugate_basis {
                Basis::D => 1.0 + vi * two.sin(),
                Basis::A => 1.0 - vi * two.sin(),
                Basis::H => 1.0 - vp * two.cos(),
                Basis::V => 1.0 + vp * two.cos(),
            }
        })
        .collect()
}

/// Diagonal-basis fringe visibility with the compensator delay set to the
/// HOM minimum and an extra compensator phase φ: cos φ · max_τ O(τ).
pub fn fringe_visibility_from_overlap(f: &SpectralAmplitude, compensator_phase: f64) -> Result<f64> {
    let best = hom_curve_default(f)?.visibility;
    Ok(compensator_phase.cos() * best)
}
