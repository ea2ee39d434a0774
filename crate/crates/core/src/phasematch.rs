//! Quasi-phase matching in the waveguide.
//!
//! Wavelengths are vacuum wavelengths in nm at this layer; propagation
//! constants are in rad/µm. The pump wavelength is always eliminated through
//! energy conservation, `1/λ_P = 1/λ_H + 1/λ_V`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{ModeLabel, Polarization, Waveguide};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeTriplet {
    pub pump: ModeLabel,
    pub h: ModeLabel,
    pub v: ModeLabel,
}

impl ModeTriplet {
    pub fn new(pump: ModeLabel, h: ModeLabel, v: ModeLabel) -> Result<Self> {
        if pump.polarization != Polarization::P
            || h.polarization != Polarization::H
            || v.polarization != Polarization::V
        {
            return Err(Error::InvalidInput(format!(
                "triplet ({pump}, {h}, {v}) must be polarized (P, H, V)"
            )));
        }
        Ok(Self { pump, h, v })
    }

    /// 00_P -> 00_H + 00_V.
    pub fn fundamental() -> Self {
        Self {
            pump: ModeLabel::fundamental(Polarization::P),
            h: ModeLabel::fundamental(Polarization::H),
            v: ModeLabel::fundamental(Polarization::V),
        }
    }

    pub fn is_fundamental(&self) -> bool {
        self.pump.is_fundamental() && self.h.is_fundamental() && self.v.is_fundamental()
    }
}

impl fmt::Display for ModeTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}+{}", self.pump, self.h, self.v)
    }
}

/// Unnormalized sinc, sin(x)/x.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // Taylor series; relative error below 1e-17 on this interval.
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// sinc(Δβ L/2) exp(i Δβ L/2).
pub fn amplitude_from_mismatch(delta_beta: f64, length_um: f64) -> Complex64 {
    let x = 0.5 * delta_beta * length_um;
    Complex64::from_polar(1.0, x) * sinc(x)
}

pub fn pump_wavelength_of(lambda_h_nm: f64, lambda_v_nm: f64) -> f64 {
    1.0 / (1.0 / lambda_h_nm + 1.0 / lambda_v_nm)
}

/// λ_V partnering λ_H under a fixed cw pump.
pub fn conjugate_wavelength(lambda_p_nm: f64, lambda_h_nm: f64) -> Result<f64> {
    if !(lambda_h_nm > lambda_p_nm && lambda_p_nm > 0.0) {
        return Err(Error::InvalidInput(format!(
            "lambda_H = {lambda_h_nm} nm must exceed lambda_P = {lambda_p_nm} nm"
        )));
    }
    Ok(1.0 / (1.0 / lambda_p_nm - 1.0 / lambda_h_nm))
}

/// Energy-conservation locus `(λ_H, λ_V)` of a monochromatic pump.
pub fn fixed_pump_line(lambda_p_nm: f64, lambda_h_nm: &[f64]) -> Result<Vec<(f64, f64)>> {
    lambda_h_nm
        .iter()
        .map(|&lh| Ok((lh, conjugate_wavelength(lambda_p_nm, lh)?)))
        .collect()
}

fn nm_to_um(nm: f64) -> f64 {
    nm * 1e-3
}

pub fn grating_vector(wg: &Waveguide) -> f64 {
    2.0 * PI / wg.spec.poling_period_um
}

/// Δβ = β_P(λ_P) - β_H(λ_H) - β_V(λ_V) - 2π/Λ, in rad/µm.
pub fn delta_beta(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    lambda_h_nm: f64,
    lambda_v_nm: f64,
) -> Result<f64> {
    let lambda_p_nm = pump_wavelength_of(lambda_h_nm, lambda_v_nm);
    let beta_p = wg.propagation_constant(triplet.pump, nm_to_um(lambda_p_nm))?;
    let beta_h = wg.propagation_constant(triplet.h, nm_to_um(lambda_h_nm))?;
    let beta_v = wg.propagation_constant(triplet.v, nm_to_um(lambda_v_nm))?;
    Ok(beta_p - beta_h - beta_v - grating_vector(wg))
}

pub fn pm_amplitude(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    lambda_h_nm: f64,
    lambda_v_nm: f64,
) -> Result<Complex64> {
    let db = delta_beta(wg, triplet, lambda_h_nm, lambda_v_nm)?;
    Ok(amplitude_from_mismatch(db, wg.spec.length_um()))
}

/// Poling period (µm) that zeroes Δβ at the degenerate point λ_H = λ_V.
pub fn calibrate_poling(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    degenerate_wavelength_nm: f64,
) -> Result<f64> {
    let lambda = nm_to_um(degenerate_wavelength_nm);
    let beta_p = wg.propagation_constant(triplet.pump, lambda / 2.0)?;
    let beta_h = wg.propagation_constant(triplet.h, lambda)?;
    let beta_v = wg.propagation_constant(triplet.v, lambda)?;
    let mismatch = beta_p - beta_h - beta_v;
    if !(mismatch > 0.0) {
        return Err(Error::Unpolable { mismatch });
    }
    Ok(2.0 * PI / mismatch)
}

/// All triplets with the given pump mode whose H and V modes are guided at
/// `lambda_nm`.
pub fn guided_triplets(wg: &Waveguide, pump: ModeLabel, lambda_nm: f64) -> Result<Vec<ModeTriplet>> {
    let hs = wg.list_guided_modes(Polarization::H, nm_to_um(lambda_nm))?;
    let vs = wg.list_guided_modes(Polarization::V, nm_to_um(lambda_nm))?;
    let mut out = Vec::with_capacity(hs.len() * vs.len());
    for &h in &hs {
        for &v in &vs {
            out.push(ModeTriplet::new(pump, h, v)?);
        }
    }
    Ok(out)
}

/// Slope dλ_V/dλ_H of the Δβ = 0 ridge through `(λ_H, λ_V)`.
pub fn ridge_slope(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    lambda_h_nm: f64,
    lambda_v_nm: f64,
) -> Result<f64> {
    let h = 0.01;
    let d_dh = (delta_beta(wg, triplet, lambda_h_nm + h, lambda_v_nm)?
        - delta_beta(wg, triplet, lambda_h_nm - h, lambda_v_nm)?)
        / (2.0 * h);
    let d_dv = (delta_beta(wg, triplet, lambda_h_nm, lambda_v_nm + h)?
        - delta_beta(wg, triplet, lambda_h_nm, lambda_v_nm - h)?)
        / (2.0 * h);
    Ok(-d_dh / d_dv)
}

/// Wavelengths λ_H on the fixed-pump line where the triplet is exactly phase
/// matched, i.e. island centres. Found by sign-change scan plus bisection.
pub fn island_centers(
    wg: &Waveguide,
    triplet: &ModeTriplet,
    lambda_p_nm: f64,
    lambda_h_range_nm: (f64, f64),
    samples: usize,
) -> Result<Vec<f64>> {
    let (lo, hi) = lambda_h_range_nm;
    let samples = samples.max(2);
    let along = |lh: f64| -> Result<Option<f64>> {
        let lv = conjugate_wavelength(lambda_p_nm, lh)?;
        match delta_beta(wg, triplet, lh, lv) {
            Ok(d) => Ok(Some(d)),
            Err(Error::ModeCutoff { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..samples {
        let lh = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let cur = along(lh)?.map(|d| (lh, d));
        if let (Some((a, da)), Some((b, db))) = (prev, cur) {
            if da == 0.0 {
                roots.push(a);
            } else if da.signum() != db.signum() && db != 0.0 {
                let (mut x0, mut x1, mut f0) = (a, b, da);
                for _ in 0..100 {
                    let mid = 0.5 * (x0 + x1);
                    let Some(fm) = along(mid)? else { break };
                    if fm.signum() == f0.signum() {
                        x0 = mid;
                        f0 = fm;
                    } else {
                        x1 = mid;
                    }
                    if x1 - x0 < 1e-9 {
                        break;
                    }
                }
                roots.push(0.5 * (x0 + x1));
            }
        }
        prev = cur;
    }
    if let Some((b, db)) = prev {
        if db == 0.0 {
            roots.push(b);
        }
    }
    Ok(roots)
}

/// |Φ|² over a (λ_H, λ_V) grid, one layer per triplet. Layers are stored
/// row-major with λ_V as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMap {
    pub lambda_h_nm: Vec<f64>,
    pub lambda_v_nm: Vec<f64>,
    pub triplets: Vec<ModeTriplet>,
    pub intensity: Vec<Vec<f64>>,
    pub cutoff: Vec<Vec<bool>>,
}

impl BandMap {
    pub fn index(&self, ih: usize, iv: usize) -> usize {
        iv * self.lambda_h_nm.len() + ih
    }

    pub fn at(&self, triplet: usize, ih: usize, iv: usize) -> f64 {
        self.intensity[triplet][self.index(ih, iv)]
    }

    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> std::io::Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        for (id, t) in self.triplets.iter().enumerate() {
            writeln!(w, "# triplet {id}: {t}")?;
        }
        writeln!(w, "lambda_h_nm,lambda_v_nm,triplet_id,intensity,cutoff_flag")?;
        for (id, layer) in self.intensity.iter().enumerate() {
            for (iv, &lv) in self.lambda_v_nm.iter().enumerate() {
                for (ih, &lh) in self.lambda_h_nm.iter().enumerate() {
                    let k = self.index(ih, iv);
                    writeln!(
                        w,
                        "{lh},{lv},{id},{},{}",
                        layer[k],
                        u8::from(self.cutoff[id][k])
                    )?;
                }
            }
        }
        Ok(())
    }

    /// gnuplot `nonuniform matrix` layout: first row is `N λ_H...`, then one
    /// row per λ_V starting with λ_V.
    pub fn write_gnuplot_matrix<W: Write>(&self, triplet: usize, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {}", self.triplets[triplet])?;
        write!(w, "{}", self.lambda_h_nm.len())?;
        for lh in &self.lambda_h_nm {
            write!(w, " {lh}")?;
        }
        writeln!(w)?;
        for (iv, lv) in self.lambda_v_nm.iter().enumerate() {
            write!(w, "{lv}")?;
            for ih in 0..self.lambda_h_nm.len() {
                write!(w, " {}", self.at(triplet, ih, iv))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_files(&self, dir: &Path, header: &[String]) -> Result<()> {
        let path = dir.join("data.csv");
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.write_csv(std::io::BufWriter::new(file), header)
            .map_err(|e| Error::io(&path, e))?;
        for id in 0..self.triplets.len() {
            let path = dir.join(format!("matrix_{id}.dat"));
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            self.write_gnuplot_matrix(id, std::io::BufWriter::new(file))
                .map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn cached_betas(wg: &Waveguide, mode: ModeLabel, grid_nm: &[f64]) -> Result<Vec<Option<f64>>> {
    grid_nm
        .par_iter()
        .map(|&l| match wg.propagation_constant(mode, nm_to_um(l)) {
            Ok(b) => Ok(Some(b)),
            Err(Error::ModeCutoff { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

pub fn band_map(
    wg: &Waveguide,
    triplets: &[ModeTriplet],
    lambda_h_range_nm: (f64, f64),
    lambda_v_range_nm: (f64, f64),
    grid_n: usize,
) -> Result<BandMap> {
    if grid_n < 2 {
        return Err(Error::InvalidInput(format!("grid_n = {grid_n} must be >= 2")));
    }
    for (lo, hi) in [lambda_h_range_nm, lambda_v_range_nm] {
        if !(hi > lo && lo > 0.0) {
            return Err(Error::InvalidInput(format!(
                "wavelength range [{lo}, {hi}] nm must be increasing and positive"
            )));
        }
    }
    let lh = linspace(lambda_h_range_nm.0, lambda_h_range_nm.1, grid_n);
    let lv = linspace(lambda_v_range_nm.0, lambda_v_range_nm.1, grid_n);
    let length_um = wg.spec.length_um();
    let grating = grating_vector(wg);

    // β_H and β_V only depend on their own axis; β_P depends on both through
    // energy conservation and is evaluated per node, once per pump mode.
    let mut pump_modes: Vec<ModeLabel> = Vec::new();
    for t in triplets {
        if !pump_modes.contains(&t.pump) {
            pump_modes.push(t.pump);
        }
    }
    let pump_grid: Vec<f64> = (0..grid_n * grid_n)
        .map(|k| pump_wavelength_of(lh[k % grid_n], lv[k / grid_n]))
        .collect();
    let mut pump_betas = Vec::with_capacity(pump_modes.len());
    for &mode in &pump_modes {
        pump_betas.push(cached_betas(wg, mode, &pump_grid)?);
    }

    let mut intensity = Vec::with_capacity(triplets.len());
    let mut cutoff = Vec::with_capacity(triplets.len());
    for t in triplets {
        let bh = cached_betas(wg, t.h, &lh)?;
        let bv = cached_betas(wg, t.v, &lv)?;
        let bp = &pump_betas[pump_modes.iter().position(|m| *m == t.pump).unwrap()];
        let (layer, flags): (Vec<f64>, Vec<bool>) = (0..grid_n * grid_n)
            .into_par_iter()
            .map(|k| match (bp[k], bh[k % grid_n], bv[k / grid_n]) {
                (Some(p), Some(h), Some(v)) => {
                    let db = p - h - v - grating;
                    (amplitude_from_mismatch(db, length_um).norm_sqr().min(1.0), false)
                }
                _ => (0.0, true),
            })
            .unzip();
        intensity.push(layer);
        cutoff.push(flags);
    }
    Ok(BandMap {
        lambda_h_nm: lh,
        lambda_v_nm: lv,
        triplets: triplets.to_vec(),
        intensity,
        cutoff,
    })
}
