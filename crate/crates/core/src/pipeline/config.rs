//! Experiment configuration: TOML parsing, dotted-key overrides, key checking
//! and semantic validation with every problem collected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::counting::DetectionChain;
use crate::dispersion::SellmeierModel;
use crate::error::{Error, Result};
use crate::modes::{AxisMap, Waveguide, WaveguideSpec};
use crate::phasematch::{calibrate_poling, ModeTriplet};
use crate::spectra::{apply_filters, build_jsa, default_window_nm, FilterSpec, SpectralAmplitude};

const DEFAULT_CONFIG: &str = include_str!("../../data/default_config.toml");

/// Environment variable naming the config file used when none is given.
pub const CONFIG_ENV: &str = "SPDC_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveguideSection {
    pub width_um: f64,
    pub depth_um: f64,
    pub length_mm: f64,
    pub index_step: f64,
    pub superstrate_index: f64,
    /// Calibrated at `calibration.degenerate_wavelength_nm` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poling_period_um: Option<f64>,
    pub temperature_c: f64,
    pub axis_map: AxisMap,
}

impl Default for WaveguideSection {
    fn default() -> Self {
        let spec = WaveguideSpec::default();
        Self {
            width_um: spec.width_um,
            depth_um: spec.depth_um,
            length_mm: spec.length_mm,
            index_step: spec.index_step,
            superstrate_index: spec.superstrate_index,
            poling_period_um: None,
            temperature_c: spec.temperature_c,
            axis_map: spec.axis_map,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DispersionSection {
    /// Sellmeier table; the bundled KTP set when absent. Relative paths are
    /// resolved against the config file's directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sellmeier_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationSection {
    pub degenerate_wavelength_nm: f64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            degenerate_wavelength_nm: 801.26,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PumpSection {
    pub wavelength_nm: f64,
    pub power_incident_uw: f64,
    pub coupling: f64,
}

impl Default for PumpSection {
    fn default() -> Self {
        Self {
            wavelength_nm: 400.63,
            power_incident_uw: 53.0,
            coupling: 0.55,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JsaSection {
    pub n_points: usize,
    /// Full width of the wavelength window; six sinc half-widths when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_nm: Option<f64>,
}

impl Default for JsaSection {
    fn default() -> Self {
        Self {
            n_points: crate::spectra::DEFAULT_JSA_POINTS,
            window_nm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainsSection {
    pub arm1: DetectionChain,
    pub arm2: DetectionChain,
}

impl Default for ChainsSection {
    fn default() -> Self {
        Self {
            arm1: DetectionChain::reference_arm(),
            arm2: DetectionChain::reference_arm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FringeSection {
    pub visibility_polarization: f64,
    /// γ: spatial-mode overlap multiplying the spectral overlap.
    pub mode_overlap: f64,
    pub compensator_phase_rad: f64,
    /// Perfect interference and polarization optics.
    pub ideal: bool,
}

impl Default for FringeSection {
    fn default() -> Self {
        Self {
            visibility_polarization: 0.94,
            mode_overlap: 0.93,
            compensator_phase_rad: 0.0,
            ideal: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloSection {
    pub interval_s: f64,
    pub n_intervals: usize,
    pub seed: u64,
    pub coincidence_window_ns: f64,
    /// Expected rates only: no sampling, dark counts or accidentals.
    pub noiseless: bool,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            interval_s: 5.0,
            n_intervals: 1000,
            seed: 1,
            coincidence_window_ns: 3.0,
            noiseless: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BandsScenario {
    pub lambda_h_range_nm: [f64; 2],
    pub lambda_v_range_nm: [f64; 2],
    pub grid_n: usize,
    /// Highest m + n of the H and V modes drawn.
    pub max_mode_order: u32,
}

impl Default for BandsScenario {
    fn default() -> Self {
        Self {
            lambda_h_range_nm: [780.0, 820.0],
            lambda_v_range_nm: [780.0, 820.0],
            grid_n: 200,
            max_mode_order: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IslandsScenario {
    pub lambda_h_range_nm: [f64; 2],
    pub n_points: usize,
    pub filter: String,
}

impl Default for IslandsScenario {
    fn default() -> Self {
        Self {
            lambda_h_range_nm: [760.0, 845.0],
            n_points: 2001,
            filter: "broad".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeraldedScenario {
    pub scan_filter: String,
    pub herald_filter: String,
    pub center_range_nm: [f64; 2],
    pub n_centers: usize,
}

impl Default for HeraldedScenario {
    fn default() -> Self {
        Self {
            scan_filter: "scan".into(),
            herald_filter: "broad".into(),
            center_range_nm: [796.0, 806.5],
            n_centers: 43,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HomScenario {
    pub filter: String,
    pub delay_range_ps: [f64; 2],
    pub n_delays: usize,
}

impl Default for HomScenario {
    fn default() -> Self {
        Self {
            filter: "broad".into(),
            delay_range_ps: [-0.6, 0.25],
            n_delays: 35,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FringesScenario {
    pub filter: String,
    pub theta_range_deg: [f64; 2],
    pub theta_step_deg: f64,
}

impl Default for FringesScenario {
    fn default() -> Self {
        Self {
            filter: "broad".into(),
            theta_range_deg: [0.0, 180.0],
            theta_step_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummaryScenario {
    pub filters: Vec<String>,
}

impl Default for SummaryScenario {
    fn default() -> Self {
        Self {
            filters: vec!["broad".into(), "narrow".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneScenario {
    pub search_interval_nm: [f64; 2],
    /// Filter applied to both photons during tuning; none when empty.
    pub filter: String,
}

impl Default for TuneScenario {
    fn default() -> Self {
        Self {
            search_interval_nm: [400.5, 400.75],
            filter: "broad".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenariosSection {
    pub bands: BandsScenario,
    pub islands: IslandsScenario,
    pub heralded: HeraldedScenario,
    pub hom: HomScenario,
    pub fringes: FringesScenario,
    pub summary: SummaryScenario,
    pub tune: TuneScenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub waveguide: WaveguideSection,
    pub dispersion: DispersionSection,
    pub calibration: CalibrationSection,
    pub pump: PumpSection,
    pub jsa: JsaSection,
    pub filters: BTreeMap<String, FilterSpec>,
    pub chains: ChainsSection,
    pub fringe: FringeSection,
    pub monte_carlo: MonteCarloSection,
    /// Detected pairs per second per mW of incident pump, keyed by filter.
    pub brightness: BTreeMap<String, f64>,
    pub scenarios: ScenariosSection,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let filters = BTreeMap::from([
            ("broad".to_owned(), FilterSpec::flat_top(801.26, 11.0)),
            ("narrow".to_owned(), FilterSpec::flat_top(801.26, 3.0)),
            ("scan".to_owned(), FilterSpec::gaussian(801.26, 0.7)),
        ]);
        let brightness = BTreeMap::from([("broad".to_owned(), 1.46e5), ("narrow".to_owned(), 0.76e5)]);
        Self {
            waveguide: WaveguideSection::default(),
            dispersion: DispersionSection::default(),
            calibration: CalibrationSection::default(),
            pump: PumpSection::default(),
            jsa: JsaSection::default(),
            filters,
            chains: ChainsSection::default(),
            fringe: FringeSection::default(),
            monte_carlo: MonteCarloSection::default(),
            brightness,
            scenarios: ScenariosSection::default(),
            base_dir: None,
        }
    }
}

/// Accepted key layout, used to report unknown keys with their location.
enum Node {
    Leaf,
    Table(&'static [(&'static str, Node)]),
    /// Table with user-chosen keys, all of one shape.
    Map(&'static Node),
    ArrayOf(&'static Node),
}

const FILTER: Node = Node::Table(&[
    ("center_nm", Node::Leaf),
    ("fwhm_nm", Node::Leaf),
    ("shape_order", Node::Leaf),
    ("peak_transmission", Node::Leaf),
]);

const TRANSMISSION: Node = Node::Table(&[("label", Node::Leaf), ("value", Node::Leaf)]);

const CHAIN: Node = Node::Table(&[
    ("transmissions", Node::ArrayOf(&TRANSMISSION)),
    ("detector_efficiency", Node::Leaf),
    ("excess_loss", Node::Leaf),
    ("dark_count_rate", Node::Leaf),
]);

const SCHEMA: Node = Node::Table(&[
    (
        "waveguide",
        Node::Table(&[
            ("width_um", Node::Leaf),
            ("depth_um", Node::Leaf),
            ("length_mm", Node::Leaf),
            ("index_step", Node::Leaf),
            ("superstrate_index", Node::Leaf),
            ("poling_period_um", Node::Leaf),
            ("temperature_c", Node::Leaf),
            (
                "axis_map",
                Node::Table(&[("H", Node::Leaf), ("V", Node::Leaf), ("P", Node::Leaf)]),
            ),
        ]),
    ),
    ("dispersion", Node::Table(&[("sellmeier_file", Node::Leaf)])),
    ("calibration", Node::Table(&[("degenerate_wavelength_nm", Node::Leaf)])),
    (
        "pump",
        Node::Table(&[
            ("wavelength_nm", Node::Leaf),
            ("power_incident_uw", Node::Leaf),
            ("coupling", Node::Leaf),
        ]),
    ),
    ("jsa", Node::Table(&[("n_points", Node::Leaf), ("window_nm", Node::Leaf)])),
    ("filters", Node::Map(&FILTER)),
    ("chains", Node::Table(&[("arm1", CHAIN), ("arm2", CHAIN)])),
    (
        "fringe",
        Node::Table(&[
            ("visibility_polarization", Node::Leaf),
            ("mode_overlap", Node::Leaf),
            ("compensator_phase_rad", Node::Leaf),
            ("ideal", Node::Leaf),
        ]),
    ),
    (
        "monte_carlo",
        Node::Table(&[
            ("interval_s", Node::Leaf),
            ("n_intervals", Node::Leaf),
            ("seed", Node::Leaf),
            ("coincidence_window_ns", Node::Leaf),
            ("noiseless", Node::Leaf),
        ]),
    ),
    ("brightness", Node::Map(&Node::Leaf)),
    (
        "scenarios",
        Node::Table(&[
            (
                "bands",
                Node::Table(&[
                    ("lambda_h_range_nm", Node::Leaf),
                    ("lambda_v_range_nm", Node::Leaf),
                    ("grid_n", Node::Leaf),
                    ("max_mode_order", Node::Leaf),
                ]),
            ),
            (
                "islands",
                Node::Table(&[
                    ("lambda_h_range_nm", Node::Leaf),
                    ("n_points", Node::Leaf),
                    ("filter", Node::Leaf),
                ]),
            ),
            (
                "heralded",
                Node::Table(&[
                    ("scan_filter", Node::Leaf),
                    ("herald_filter", Node::Leaf),
                    ("center_range_nm", Node::Leaf),
                    ("n_centers", Node::Leaf),
                ]),
            ),
            (
                "hom",
                Node::Table(&[
                    ("filter", Node::Leaf),
                    ("delay_range_ps", Node::Leaf),
                    ("n_delays", Node::Leaf),
                ]),
            ),
            (
                "fringes",
                Node::Table(&[
                    ("filter", Node::Leaf),
                    ("theta_range_deg", Node::Leaf),
                    ("theta_step_deg", Node::Leaf),
                ]),
            ),
            ("summary", Node::Table(&[("filters", Node::Leaf)])),
            (
                "tune",
                Node::Table(&[("search_interval_nm", Node::Leaf), ("filter", Node::Leaf)]),
            ),
        ]),
    ),
]);

fn check_keys(node: &Node, value: &Value, path: &str, errs: &mut Vec<String>) {
    let join = |key: &str| {
        if path.is_empty() {
            key.to_owned()
        } else {
            format!("{path}.{key}")
        }
    };
    match node {
        Node::Leaf => {}
        Node::Table(fields) => {
            let Some(table) = value.as_table() else {
                errs.push(format!("{path} must be a table"));
                return;
            };
            for (key, child) in table {
                match fields.iter().find(|(name, _)| name == key) {
                    Some((_, node)) => check_keys(node, child, &join(key), errs),
                    None => {
                        let known: Vec<&str> = fields.iter().map(|(n, _)| *n).collect();
                        errs.push(format!(
                            "unknown key `{}` (expected one of: {})",
                            join(key),
                            known.join(", ")
                        ));
                    }
                }
            }
        }
        Node::Map(shape) => {
            let Some(table) = value.as_table() else {
                errs.push(format!("{path} must be a table"));
                return;
            };
            for (key, child) in table {
                check_keys(shape, child, &join(key), errs);
            }
        }
        Node::ArrayOf(shape) => {
            let Some(items) = value.as_array() else {
                errs.push(format!("{path} must be an array"));
                return;
            };
            for (i, item) in items.iter().enumerate() {
                check_keys(shape, item, &format!("{path}[{i}]"), errs);
            }
        }
    }
}

/// Sets `dotted.key = value` in `table`. The value is read as a TOML literal
/// and falls back to a bare string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Validation(vec![format!("override `{assignment}` is not key=value")]))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_owned()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Validation(vec![format!("override key `{key}` is malformed")]));
    }
    let mut cursor = table;
    for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
        let entry = cursor
            .entry((*part).to_owned())
            .or_insert_with(|| Value::Table(Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| {
            Error::Validation(vec![format!(
                "override `{key}`: `{}` is not a table",
                parts[..=i].join(".")
            )])
        })?;
    }
    cursor.insert(parts[parts.len() - 1].to_owned(), value);
    Ok(())
}

impl ExperimentConfig {
    /// Text of the shipped default configuration.
    pub fn default_text() -> &'static str {
        DEFAULT_CONFIG
    }

    pub fn shipped() -> Result<Self> {
        Self::from_toml_str(DEFAULT_CONFIG, &[])
    }

    /// Parses, applies overrides, checks keys and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Validation(vec![format!("config syntax: {e}")]))?;
        let mut errs = Vec::new();
        for o in overrides {
            if let Err(Error::Validation(mut more)) = apply_override(&mut table, o) {
                errs.append(&mut more);
            }
        }
        let value = Value::Table(table);
        check_keys(&SCHEMA, &value, "", &mut errs);
        let config: Option<ExperimentConfig> = match value.try_into() {
            Ok(c) => Some(c),
            Err(e) => {
                let msg = e.to_string();
                if !msg.contains("unknown field") {
                    errs.push(format!("config: {}", msg.trim()));
                }
                None
            }
        };
        if let Some(config) = &config {
            errs.extend(validate_config(config));
        }
        match config {
            Some(c) if errs.is_empty() => Ok(c),
            _ => Err(Error::Validation(errs)),
        }
    }

    pub fn from_path(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text, overrides)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        if config.dispersion.sellmeier_file.is_some() {
            // Relative tables resolve against the config file.
            let errs = config.dispersion_violations();
            if !errs.is_empty() {
                return Err(Error::Validation(errs));
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn sellmeier_path(&self) -> Option<PathBuf> {
        self.dispersion.sellmeier_file.as_ref().map(|p| match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.clone(),
        })
    }

    fn dispersion_violations(&self) -> Vec<String> {
        match self.dispersion_model() {
            Ok(_) => Vec::new(),
            Err(e) => vec![format!("dispersion.sellmeier_file: {e}")],
        }
    }

    pub fn dispersion_text(&self) -> Result<String> {
        match self.sellmeier_path() {
            Some(path) => std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e)),
            None => Ok(SellmeierModel::bundled_text().to_owned()),
        }
    }

    pub fn dispersion_model(&self) -> Result<SellmeierModel> {
        match self.sellmeier_path() {
            Some(path) => SellmeierModel::from_path(path),
            None => Ok(SellmeierModel::bundled()),
        }
    }

    /// SHA-256 over the canonical config text (seed excluded) and the
    /// dispersion table.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.monte_carlo.seed = 0;
        let mut hasher = Sha256::new();
        hasher.update(canonical.to_toml_string().as_bytes());
        hasher.update(b"\n");
        hasher.update(self.dispersion_text().unwrap_or_default().as_bytes());
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn spec_with_period(&self, poling_period_um: f64) -> WaveguideSpec {
        let w = &self.waveguide;
        WaveguideSpec {
            width_um: w.width_um,
            depth_um: w.depth_um,
            length_mm: w.length_mm,
            index_step: w.index_step,
            superstrate_index: w.superstrate_index,
            poling_period_um,
            temperature_c: w.temperature_c,
            axis_map: w.axis_map,
        }
    }

    /// The waveguide, with the poling period calibrated if not configured.
    pub fn waveguide(&self) -> Result<Waveguide> {
        let model = Arc::new(self.dispersion_model()?);
        let uncalibrated = Waveguide::new(self.spec_with_period(f64::INFINITY), model);
        let period = match self.waveguide.poling_period_um {
            Some(p) => p,
            None => calibrate_poling(
                &uncalibrated,
                &ModeTriplet::fundamental(),
                self.calibration.degenerate_wavelength_nm,
            )?,
        };
        Ok(uncalibrated.with_poling_period(period))
    }

    pub fn filter(&self, name: &str) -> Result<&FilterSpec> {
        self.filters.get(name).ok_or_else(|| {
            Error::InvalidInput(format!(
                "undefined filter `{name}` (defined: {})",
                self.filter_names()
            ))
        })
    }

    fn filter_names(&self) -> String {
        self.filters.keys().cloned().collect::<Vec<_>>().join(", ")
    }

    pub fn pump_power_mw(&self) -> f64 {
        self.pump.power_incident_uw * 1e-3
    }

    pub fn brightness_for(&self, filter: &str) -> Result<f64> {
        self.brightness
            .get(filter)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("no brightness configured for filter `{filter}`")))
    }

    pub fn window_nm(&self, wg: &Waveguide) -> Result<f64> {
        match self.jsa.window_nm {
            Some(w) => Ok(w),
            None => default_window_nm(wg, &ModeTriplet::fundamental(), self.pump.wavelength_nm),
        }
    }

    /// Fundamental-triplet amplitude at the configured pump, with `filter`
    /// (if any) in front of both photons.
    pub fn amplitude(&self, wg: &Waveguide, filter: Option<&str>) -> Result<SpectralAmplitude> {
        let triplet = ModeTriplet::fundamental();
        let f = build_jsa(wg, &triplet, self.pump.wavelength_nm, self.window_nm(wg)?, self.jsa.n_points)?;
        Ok(match filter {
            Some(name) => {
                let flt = self.filter(name)?;
                apply_filters(&f, Some(flt), Some(flt))
            }
            None => f,
        })
    }
}

fn check_range(errs: &mut Vec<String>, key: &str, r: [f64; 2]) {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        errs.push(format!("{key} must be an increasing pair (got [{}, {}])", r[0], r[1]));
    }
}

fn check_unit(errs: &mut Vec<String>, key: &str, v: f64) {
    if !(0.0..=1.0).contains(&v) {
        errs.push(format!("{key} must lie in [0, 1] (got {v})"));
    }
}

fn check_positive(errs: &mut Vec<String>, key: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(format!("{key} must be > 0 (got {v})"));
    }
}

/// Every broken invariant, one message each, naming the offending key.
pub fn validate_config(config: &ExperimentConfig) -> Vec<String> {
    let mut errs = Vec::new();
    let c = config;

    errs.extend(c.spec_with_period(1.0).violations());
    if let Some(p) = c.waveguide.poling_period_um {
        check_positive(&mut errs, "waveguide.poling_period_um", p);
    }
    let resolvable = match &c.dispersion.sellmeier_file {
        None => true,
        Some(p) => p.is_absolute() || c.base_dir.is_some(),
    };
    if resolvable {
        errs.extend(c.dispersion_violations());
    }
    check_positive(&mut errs, "calibration.degenerate_wavelength_nm", c.calibration.degenerate_wavelength_nm);
    check_positive(&mut errs, "pump.wavelength_nm", c.pump.wavelength_nm);
    if !(c.pump.power_incident_uw >= 0.0) {
        errs.push(format!(
            "pump.power_incident_uw must be >= 0 (got {})",
            c.pump.power_incident_uw
        ));
    }
    if !(c.pump.coupling > 0.0 && c.pump.coupling <= 1.0) {
        errs.push(format!("pump.coupling must lie in (0, 1] (got {})", c.pump.coupling));
    }
    if c.jsa.n_points < 3 || c.jsa.n_points % 2 == 0 {
        errs.push(format!("jsa.n_points must be odd and >= 3 (got {})", c.jsa.n_points));
    }
    if let Some(w) = c.jsa.window_nm {
        check_positive(&mut errs, "jsa.window_nm", w);
    }
    for (name, f) in &c.filters {
        errs.extend(f.violations(name));
    }
    errs.extend(c.chains.arm1.violations("arm1"));
    errs.extend(c.chains.arm2.violations("arm2"));
    check_unit(&mut errs, "fringe.visibility_polarization", c.fringe.visibility_polarization);
    check_unit(&mut errs, "fringe.mode_overlap", c.fringe.mode_overlap);
    if !c.fringe.compensator_phase_rad.is_finite() {
        errs.push("fringe.compensator_phase_rad must be finite".into());
    }
    check_positive(&mut errs, "monte_carlo.interval_s", c.monte_carlo.interval_s);
    if c.monte_carlo.n_intervals == 0 {
        errs.push("monte_carlo.n_intervals must be >= 1".into());
    }
    check_positive(&mut errs, "monte_carlo.coincidence_window_ns", c.monte_carlo.coincidence_window_ns);

    let mut filter_ref = |key: &str, name: &str| {
        if !c.filters.contains_key(name) {
            errs.push(format!(
                "{key} references undefined filter `{name}` (defined: {})",
                c.filter_names()
            ));
        }
    };
    for name in c.brightness.keys() {
        filter_ref(&format!("brightness.{name}"), name);
    }
    let s = &c.scenarios;
    filter_ref("scenarios.islands.filter", &s.islands.filter);
    filter_ref("scenarios.heralded.scan_filter", &s.heralded.scan_filter);
    filter_ref("scenarios.heralded.herald_filter", &s.heralded.herald_filter);
    filter_ref("scenarios.hom.filter", &s.hom.filter);
    filter_ref("scenarios.fringes.filter", &s.fringes.filter);
    for (i, name) in s.summary.filters.iter().enumerate() {
        filter_ref(&format!("scenarios.summary.filters[{i}]"), name);
    }
    if !s.tune.filter.is_empty() {
        filter_ref("scenarios.tune.filter", &s.tune.filter);
    }

    for (name, b) in &c.brightness {
        if !(*b >= 0.0) {
            errs.push(format!("brightness.{name} must be >= 0 (got {b})"));
        }
    }
    for key in [&s.hom.filter, &s.fringes.filter]
        .into_iter()
        .chain(&s.summary.filters)
    {
        if c.filters.contains_key(key.as_str()) && !c.brightness.contains_key(key.as_str()) {
            errs.push(format!("brightness.{key} is required by a counting scenario"));
        }
    }
    errs.dedup();

    check_range(&mut errs, "scenarios.bands.lambda_h_range_nm", s.bands.lambda_h_range_nm);
    check_range(&mut errs, "scenarios.bands.lambda_v_range_nm", s.bands.lambda_v_range_nm);
    if s.bands.grid_n < 2 {
        errs.push("scenarios.bands.grid_n must be >= 2".into());
    }
    check_range(&mut errs, "scenarios.islands.lambda_h_range_nm", s.islands.lambda_h_range_nm);
    if s.islands.n_points < 2 {
        errs.push("scenarios.islands.n_points must be >= 2".into());
    }
    check_range(&mut errs, "scenarios.heralded.center_range_nm", s.heralded.center_range_nm);
    if s.heralded.n_centers < 6 {
        errs.push("scenarios.heralded.n_centers must be >= 6".into());
    }
    check_range(&mut errs, "scenarios.hom.delay_range_ps", s.hom.delay_range_ps);
    if s.hom.n_delays < 6 {
        errs.push("scenarios.hom.n_delays must be >= 6".into());
    }
    check_range(&mut errs, "scenarios.fringes.theta_range_deg", s.fringes.theta_range_deg);
    check_positive(&mut errs, "scenarios.fringes.theta_step_deg", s.fringes.theta_step_deg);
    let [t0, t1] = s.fringes.theta_range_deg;
    if t1 - t0 < 180.0 {
        errs.push(format!("scenarios.fringes.theta_range_deg must span >= 180 deg (got {})", t1 - t0));
    } else if s.fringes.theta_step_deg > 0.0 && ((t1 - t0) / s.fringes.theta_step_deg) < 7.0 {
        errs.push("scenarios.fringes.theta_step_deg gives fewer than 8 angles".into());
    }
    if s.summary.filters.is_empty() {
        errs.push("scenarios.summary.filters must not be empty".into());
    }
    check_range(&mut errs, "scenarios.tune.search_interval_nm", s.tune.search_interval_nm);
    errs
}
