//! Bulk KTP dispersion.
//!
//! Principal indices come from a two-pole Sellmeier fit,
//! `n^2 = A + B/(λ^2 - C) + D/(λ^2 - E)` with λ in micrometres. The
//! coefficients are not compiled in as constants: they are parsed from a
//! plain-text data file at load time, so another published set can be
//! dropped in without touching code. The bundled set lives in
//! `data/ktp_sellmeier.toml`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../data/ktp_sellmeier.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrystalAxis {
    X,
    Y,
    Z,
}

impl CrystalAxis {
    pub const ALL: [CrystalAxis; 3] = [CrystalAxis::X, CrystalAxis::Y, CrystalAxis::Z];

    fn index(self) -> usize {
        match self {
            CrystalAxis::X => 0,
            CrystalAxis::Y => 1,
            CrystalAxis::Z => 2,
        }
    }
}

impl fmt::Display for CrystalAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrystalAxis::X => "x",
            CrystalAxis::Y => "y",
            CrystalAxis::Z => "z",
        })
    }
}

impl FromStr for CrystalAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(CrystalAxis::X),
            "y" => Ok(CrystalAxis::Y),
            "z" => Ok(CrystalAxis::Z),
            other => Err(Error::InvalidInput(format!(
                "unknown crystal axis {other:?} (expected x, y or z)"
            ))),
        }
    }
}

/// One axis of the two-pole Sellmeier form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisCoefficients {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

impl AxisCoefficients {
    fn n_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        self.a + self.b / (l2 - self.c) + self.d / (l2 - self.e)
    }

    /// d(n^2)/dλ, per micrometre.
    fn n_squared_derivative(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let t1 = l2 - self.c;
        let t2 = l2 - self.e;
        -2.0 * lambda_um * (self.b / (t1 * t1) + self.d / (t2 * t2))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SellmeierFile {
    #[serde(default)]
    version: Option<u32>,
    source: String,
    lambda_min_um: f64,
    lambda_max_um: f64,
    x: AxisCoefficients,
    y: AxisCoefficients,
    z: AxisCoefficients,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierModel {
    axes: [AxisCoefficients; 3],
    lambda_min_um: f64,
    lambda_max_um: f64,
    source: String,
}

impl SellmeierModel {
    /// The bundled KTP coefficient set.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled Sellmeier data is well formed")
    }

    pub fn bundled_text() -> &'static str {
        BUNDLED
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: SellmeierFile =
            toml::from_str(text).map_err(|e| Error::DispersionData(e.to_string()))?;
        if let Some(v) = file.version {
            if v != 1 {
                return Err(Error::DispersionData(format!(
                    "unsupported data file version {v}"
                )));
            }
        }
        if !(file.lambda_min_um > 0.0 && file.lambda_max_um > file.lambda_min_um) {
            return Err(Error::DispersionData(format!(
                "bad valid interval [{}, {}] um",
                file.lambda_min_um, file.lambda_max_um
            )));
        }
        let model = SellmeierModel {
            axes: [file.x, file.y, file.z],
            lambda_min_um: file.lambda_min_um,
            lambda_max_um: file.lambda_max_um,
            source: file.source,
        };
        // A pole inside the interval or n <= 1 anywhere makes the set unusable.
        for axis in CrystalAxis::ALL {
            let coeffs = model.axes[axis.index()];
            for pole in [coeffs.c, coeffs.e] {
                if pole > 0.0 {
                    let root = pole.sqrt();
                    if root >= model.lambda_min_um && root <= model.lambda_max_um {
                        return Err(Error::DispersionData(format!(
                            "axis {axis}: pole at {root} um lies inside the valid interval"
                        )));
                    }
                }
            }
            for k in 0..=64 {
                let l = model.lambda_min_um
                    + (model.lambda_max_um - model.lambda_min_um) * f64::from(k) / 64.0;
                let n2 = coeffs.n_squared(l);
                if !(n2 > 1.0) {
                    return Err(Error::DispersionData(format!(
                        "axis {axis}: n^2 = {n2} at {l} um"
                    )));
                }
            }
        }
        Ok(model)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn valid_range_um(&self) -> (f64, f64) {
        (self.lambda_min_um, self.lambda_max_um)
    }

    pub fn coefficients(&self, axis: CrystalAxis) -> &AxisCoefficients {
        &self.axes[axis.index()]
    }

    fn check(&self, lambda_um: f64, strict: bool) -> Result<()> {
        let inside = if strict {
            lambda_um > self.lambda_min_um && lambda_um < self.lambda_max_um
        } else {
            lambda_um >= self.lambda_min_um && lambda_um <= self.lambda_max_um
        };
        if inside {
            Ok(())
        } else {
            Err(Error::WavelengthOutOfRange {
                wavelength_um: lambda_um,
                min_um: self.lambda_min_um,
                max_um: self.lambda_max_um,
            })
        }
    }

    pub fn bulk_index(&self, axis: CrystalAxis, lambda_um: f64) -> Result<f64> {
        self.check(lambda_um, false)?;
        Ok(self.axes[axis.index()].n_squared(lambda_um).sqrt())
    }

    /// dn/dλ in 1/µm, from the analytic derivative of the Sellmeier form.
    pub fn index_derivative(&self, axis: CrystalAxis, lambda_um: f64) -> Result<f64> {
        self.check(lambda_um, true)?;
        let coeffs = &self.axes[axis.index()];
        Ok(coeffs.n_squared_derivative(lambda_um) / (2.0 * coeffs.n_squared(lambda_um).sqrt()))
    }

    /// n_g = n - λ dn/dλ.
    pub fn group_index(&self, axis: CrystalAxis, lambda_um: f64) -> Result<f64> {
        let dn = self.index_derivative(axis, lambda_um)?;
        let n = self.bulk_index(axis, lambda_um)?;
        Ok(n - lambda_um * dn)
    }
}

impl Default for SellmeierModel {
    fn default() -> Self {
        Self::bundled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_indices_near_1064() {
        let m = SellmeierModel::bundled();
        // Published KTP values at 1064 nm: n_z = 1.830, n_y = 1.745.
        let nz = m.bulk_index(CrystalAxis::Z, 1.064).unwrap();
        let ny = m.bulk_index(CrystalAxis::Y, 1.064).unwrap();
        assert!((nz - 1.830).abs() < 0.015, "n_z = {nz}");
        assert!((ny - 1.745).abs() < 0.01, "n_y = {ny}");
        assert!(nz > ny);
    }

    #[test]
    fn normal_dispersion_between_400_and_800() {
        let m = SellmeierModel::bundled();
        for axis in CrystalAxis::ALL {
            assert!(m.bulk_index(axis, 0.400).unwrap() > m.bulk_index(axis, 0.800).unwrap());
        }
    }

    #[test]
    fn out_of_range_names_interval() {
        let m = SellmeierModel::bundled();
        let err = m.bulk_index(CrystalAxis::Z, 0.2).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("0.39") && msg.contains("3.54"), "{msg}");
        // Derivative needs the open interval.
        assert!(m.group_index(CrystalAxis::Z, 0.39).is_err());
        assert!(m.bulk_index(CrystalAxis::Z, 0.39).is_ok());
    }

    #[test]
    fn group_index_exceeds_phase_index() {
        let m = SellmeierModel::bundled();
        for axis in CrystalAxis::ALL {
            for k in 0..=65 {
                let l = 0.45 + 0.01 * f64::from(k);
                assert!(m.group_index(axis, l).unwrap() >= m.bulk_index(axis, l).unwrap());
            }
        }
    }

    #[test]
    fn z_group_index_larger_than_y_at_800() {
        let m = SellmeierModel::bundled();
        let gz = m.group_index(CrystalAxis::Z, 0.8).unwrap();
        let gy = m.group_index(CrystalAxis::Y, 0.8).unwrap();
        assert!(gz - gy > 0.0);
    }

    #[test]
    fn rejects_malformed_data() {
        assert!(SellmeierModel::parse("source = \"x\"").is_err());
        let with_pole = BUNDLED.replace("C = 0.04763", "C = 0.64");
        assert!(matches!(
            SellmeierModel::parse(&with_pole),
            Err(Error::DispersionData(_))
        ));
        let unknown = format!("{BUNDLED}\n[w]\nA = 1.0\n");
        assert!(SellmeierModel::parse(&unknown).is_err());
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("Z".parse::<CrystalAxis>().unwrap(), CrystalAxis::Z);
        assert!("w".parse::<CrystalAxis>().is_err());
    }
}
