//! Guided modes of a rectangular step-index channel waveguide.
//!
//! The channel is solved with the effective-index method: a vertical slab
//! (superstrate / raised-index layer of thickness `depth` / bulk substrate)
//! gives one effective index per vertical order, which then serves as the
//! core index of a symmetric lateral slab of thickness `width` clad by bulk.
//! Each slab branch is found by bisection on the transcendental dispersion
//! relation, so the solver needs no derivatives and cannot jump branches.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dispersion::{CrystalAxis, SellmeierModel};
use crate::error::{Error, Result};

/// Bisection stops once the bracket on N_eff is narrower than this.
pub const SLAB_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    P,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::P => "P",
        })
    }
}

/// Transverse mode order (lateral `m`, vertical `n`) of one polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub m: u32,
    pub n: u32,
    pub polarization: Polarization,
}

impl ModeLabel {
    pub const fn new(m: u32, n: u32, polarization: Polarization) -> Self {
        Self { m, n, polarization }
    }

    pub const fn fundamental(polarization: Polarization) -> Self {
        Self::new(0, 0, polarization)
    }

    pub fn is_fundamental(&self) -> bool {
        self.m == 0 && self.n == 0
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}_{}", self.m, self.n, self.polarization)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabPolarization {
    TeLike,
    TmLike,
}

impl SlabPolarization {
    fn other(self) -> Self {
        match self {
            SlabPolarization::TeLike => SlabPolarization::TmLike,
            SlabPolarization::TmLike => SlabPolarization::TeLike,
        }
    }
}

/// Dispersion function of branch `order`; strictly decreasing in `n_eff`.
fn slab_branch(
    n_eff: f64,
    order: u32,
    n_core: f64,
    n_sub: f64,
    n_cover: f64,
    k0d: f64,
    class: SlabPolarization,
) -> f64 {
    let u = (n_core * n_core - n_eff * n_eff).max(0.0).sqrt();
    let decay = |n_clad: f64| {
        let w = (n_eff * n_eff - n_clad * n_clad).max(0.0).sqrt();
        let ratio = match class {
            SlabPolarization::TeLike => 1.0,
            SlabPolarization::TmLike => (n_core / n_clad).powi(2),
        };
        if u == 0.0 {
            PI / 2.0
        } else {
            (ratio * w / u).atan()
        }
    };
    k0d * u - decay(n_sub) - decay(n_cover) - f64::from(order) * PI
}

/// Effective indices of the guided modes of an asymmetric slab, highest first.
///
/// Returns an empty vector when nothing is guided.
pub fn slab_modes(
    n_core: f64,
    n_substrate: f64,
    n_cover: f64,
    thickness_um: f64,
    wavelength_um: f64,
    class: SlabPolarization,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut order = 0;
    while let Some(n_eff) =
        slab_mode(n_core, n_substrate, n_cover, thickness_um, wavelength_um, class, order)?
    {
        out.push(n_eff);
        order += 1;
    }
    Ok(out)
}

/// Effective index of one slab branch, or `None` if that order is cut off.
pub fn slab_mode(
    n_core: f64,
    n_substrate: f64,
    n_cover: f64,
    thickness_um: f64,
    wavelength_um: f64,
    class: SlabPolarization,
    order: u32,
) -> Result<Option<f64>> {
    let lower = n_substrate.max(n_cover);
    if !(n_core > lower) {
        return Err(Error::InvalidInput(format!(
            "slab core index {n_core} must exceed cladding indices {n_substrate}, {n_cover}"
        )));
    }
    if !(thickness_um > 0.0 && wavelength_um > 0.0) {
        return Err(Error::InvalidInput(format!(
            "slab thickness {thickness_um} um and wavelength {wavelength_um} um must be positive"
        )));
    }
    let k0d = 2.0 * PI / wavelength_um * thickness_um;
    let f = |n: f64| slab_branch(n, order, n_core, n_substrate, n_cover, k0d, class);
    if f(lower) <= 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lower, n_core);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < SLAB_TOLERANCE {
            return Ok(Some(0.5 * (lo + hi)));
        }
    }
    Err(Error::Convergence(format!(
        "slab branch {order} did not converge (bracket [{lo}, {hi}])"
    )))
}

/// Which crystal axis each photon's field is polarized along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisMap {
    #[serde(rename = "H")]
    pub h: CrystalAxis,
    #[serde(rename = "V")]
    pub v: CrystalAxis,
    #[serde(rename = "P")]
    pub p: CrystalAxis,
}

impl AxisMap {
    pub fn axis(&self, polarization: Polarization) -> CrystalAxis {
        match polarization {
            Polarization::H => self.h,
            Polarization::V => self.v,
            Polarization::P => self.p,
        }
    }
}

impl Default for AxisMap {
    fn default() -> Self {
        Self {
            h: CrystalAxis::Z,
            v: CrystalAxis::Y,
            p: CrystalAxis::Y,
        }
    }
}

/// Geometry of the channel. Lengths in µm except `length_mm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    pub width_um: f64,
    pub depth_um: f64,
    pub length_mm: f64,
    pub index_step: f64,
    pub superstrate_index: f64,
    pub poling_period_um: f64,
    pub temperature_c: f64,
    pub axis_map: AxisMap,
}

impl WaveguideSpec {
    pub fn length_um(&self) -> f64 {
        self.length_mm * 1e3
    }

    /// Broken invariants, one message per violation.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (key, v) in [
            ("width_um", self.width_um),
            ("depth_um", self.depth_um),
            ("length_mm", self.length_mm),
            ("poling_period_um", self.poling_period_um),
        ] {
            if !(v > 0.0) {
                errs.push(format!("waveguide.{key} must be > 0 (got {v})"));
            }
        }
        if !(self.index_step > 0.0 && self.index_step < 0.2) {
            errs.push(format!(
                "waveguide.index_step must lie in (0, 0.2) (got {})",
                self.index_step
            ));
        }
        if !(self.superstrate_index >= 1.0) {
            errs.push(format!(
                "waveguide.superstrate_index must be >= 1 (got {})",
                self.superstrate_index
            ));
        }
        errs
    }
}

impl Default for WaveguideSpec {
    fn default() -> Self {
        Self {
            width_um: 2.0,
            depth_um: 5.0,
            length_mm: 1.0,
            index_step: 0.02,
            superstrate_index: 1.0,
            // Placeholder until `calibrate_poling` runs.
            poling_period_um: f64::INFINITY,
            temperature_c: 19.0,
            axis_map: AxisMap::default(),
        }
    }
}

/// A channel geometry paired with the bulk dispersion it is made of.
#[derive(Debug, Clone)]
pub struct Waveguide {
    pub spec: WaveguideSpec,
    dispersion: Arc<SellmeierModel>,
}

impl Waveguide {
    pub fn new(spec: WaveguideSpec, dispersion: Arc<SellmeierModel>) -> Self {
        Self { spec, dispersion }
    }

    pub fn with_bundled_dispersion(spec: WaveguideSpec) -> Self {
        Self::new(spec, Arc::new(SellmeierModel::bundled()))
    }

    pub fn dispersion(&self) -> &SellmeierModel {
        &self.dispersion
    }

    pub fn with_poling_period(&self, poling_period_um: f64) -> Self {
        let mut out = self.clone();
        out.spec.poling_period_um = poling_period_um;
        out
    }

    pub fn with_length_mm(&self, length_mm: f64) -> Self {
        let mut out = self.clone();
        out.spec.length_mm = length_mm;
        out
    }

    /// z-polarized fields point out of the surface (TM-like for the vertical
    /// slab); x- and y-polarized fields lie in the surface plane.
    fn vertical_class(&self, polarization: Polarization) -> SlabPolarization {
        match self.spec.axis_map.axis(polarization) {
            CrystalAxis::Z => SlabPolarization::TmLike,
            CrystalAxis::X | CrystalAxis::Y => SlabPolarization::TeLike,
        }
    }

    pub fn bulk_index(&self, polarization: Polarization, wavelength_um: f64) -> Result<f64> {
        self.dispersion
            .bulk_index(self.spec.axis_map.axis(polarization), wavelength_um)
    }

    fn vertical_modes(&self, polarization: Polarization, wavelength_um: f64) -> Result<Vec<f64>> {
        let bulk = self.bulk_index(polarization, wavelength_um)?;
        slab_modes(
            bulk + self.spec.index_step,
            bulk,
            self.spec.superstrate_index,
            self.spec.depth_um,
            wavelength_um,
            self.vertical_class(polarization),
        )
    }

    fn try_effective_index(&self, mode: ModeLabel, wavelength_um: f64) -> Result<Option<f64>> {
        let bulk = self.bulk_index(mode.polarization, wavelength_um)?;
        let class = self.vertical_class(mode.polarization);
        let Some(vertical) = slab_mode(
            bulk + self.spec.index_step,
            bulk,
            self.spec.superstrate_index,
            self.spec.depth_um,
            wavelength_um,
            class,
            mode.n,
        )?
        else {
            return Ok(None);
        };
        if vertical <= bulk {
            return Ok(None);
        }
        let lateral = slab_mode(
            vertical,
            bulk,
            bulk,
            self.spec.width_um,
            wavelength_um,
            class.other(),
            mode.m,
        )?;
        if let Some(n_eff) = lateral {
            debug_assert!(n_eff > bulk && n_eff < bulk + self.spec.index_step);
        }
        Ok(lateral)
    }

    /// Effective index of a labelled mode; errors with `ModeCutoff` if not guided.
    pub fn effective_index(&self, mode: ModeLabel, wavelength_um: f64) -> Result<f64> {
        self.try_effective_index(mode, wavelength_um)?
            .ok_or(Error::ModeCutoff {
                mode,
                wavelength_nm: wavelength_um * 1e3,
            })
    }

    /// β = 2π N_eff / λ in rad/µm.
    pub fn propagation_constant(&self, mode: ModeLabel, wavelength_um: f64) -> Result<f64> {
        Ok(2.0 * PI * self.effective_index(mode, wavelength_um)? / wavelength_um)
    }

    /// Group effective index N - λ dN/dλ by central difference over ±`step_um`.
    pub fn group_effective_index(
        &self,
        mode: ModeLabel,
        wavelength_um: f64,
        step_um: f64,
    ) -> Result<f64> {
        let plus = self.effective_index(mode, wavelength_um + step_um)?;
        let minus = self.effective_index(mode, wavelength_um - step_um)?;
        let centre = self.effective_index(mode, wavelength_um)?;
        Ok(centre - wavelength_um * (plus - minus) / (2.0 * step_um))
    }

    /// Every guided (m, n) of one polarization, in descending N_eff.
    pub fn list_guided_modes(
        &self,
        polarization: Polarization,
        wavelength_um: f64,
    ) -> Result<Vec<ModeLabel>> {
        Ok(self
            .guided_modes_with_index(polarization, wavelength_um)?
            .into_iter()
            .map(|(mode, _)| mode)
            .collect())
    }

    pub fn guided_modes_with_index(
        &self,
        polarization: Polarization,
        wavelength_um: f64,
    ) -> Result<Vec<(ModeLabel, f64)>> {
        let bulk = self.bulk_index(polarization, wavelength_um)?;
        let class = self.vertical_class(polarization).other();
        let mut found = Vec::new();
        for (n, vertical) in self.vertical_modes(polarization, wavelength_um)?.into_iter().enumerate() {
            if vertical <= bulk {
                continue;
            }
            let lateral = slab_modes(vertical, bulk, bulk, self.spec.width_um, wavelength_um, class)?;
            for (m, n_eff) in lateral.into_iter().enumerate() {
                found.push((ModeLabel::new(m as u32, n as u32, polarization), n_eff));
            }
        }
        // Ties are broken on (n, m) so the order is fully deterministic.
        found.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(a.0.n.cmp(&b.0.n))
                .then(a.0.m.cmp(&b.0.m))
        });
        Ok(found)
    }
}
