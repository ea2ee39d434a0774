//! End-to-end scenarios. Each is a pure function of the configuration (and
//! seed) that writes `<out>/<scenario>/{data.csv, fit.txt, meta.txt}`.

mod config;
mod scenarios;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use config::{
    apply_override, validate_config, BandsScenario, CalibrationSection, ChainsSection, DispersionSection,
    ExperimentConfig, FringeSection, FringesScenario, HeraldedScenario, HomScenario, IslandsScenario, JsaSection,
    MonteCarloSection, PumpSection, ScenariosSection, SummaryScenario, TuneScenario, WaveguideSection, CONFIG_ENV,
};
pub use scenarios::{
    all_triplets, compute_bands, compute_fringes, compute_heralded, compute_hom, compute_islands, compute_summary,
    compute_tune, effective_seed, fringe_model, guided_mode_table, hom_experiment, FringeOutcome, HeraldedOutcome,
    HomOutcome, IslandRow, IslandsOutcome, ModeRow, TuneOutcome,
};

use crate::error::{Error, Result};
use crate::fitting::FitResult;
use crate::modes::Waveguide;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Modes,
    Bands,
    Islands,
    Heralded,
    TunePump,
    Hom,
    Fringes,
    Summary,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Modes,
        Scenario::Bands,
        Scenario::Islands,
        Scenario::Heralded,
        Scenario::TunePump,
        Scenario::Hom,
        Scenario::Fringes,
        Scenario::Summary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Modes => "modes",
            Scenario::Bands => "bands",
            Scenario::Islands => "islands",
            Scenario::Heralded => "heralded",
            Scenario::TunePump => "tune_pump",
            Scenario::Hom => "hom",
            Scenario::Fringes => "fringes",
            Scenario::Summary => "summary",
        }
    }

    /// Whether the output depends on the Monte Carlo seed.
    pub fn is_monte_carlo(self) -> bool {
        matches!(self, Scenario::Hom | Scenario::Fringes | Scenario::Summary)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scenario `{s}`")))
    }
}

/// Where a scenario wrote its files, plus a short human-readable digest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub dir: PathBuf,
    pub lines: Vec<String>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn header(config: &ExperimentConfig, scenario: Scenario) -> Vec<String> {
    vec![
        format!("scenario: {scenario}"),
        format!("config_hash: {}", config.hash()),
    ]
}

fn write_fit_text(path: &Path, sections: &[(String, &FitResult)], extra: &[String]) -> Result<()> {
    write_with(path, |w| {
        for (prefix, fit) in sections {
            for line in fit.to_text().lines() {
                if prefix.is_empty() {
                    writeln!(w, "{line}")?;
                } else {
                    writeln!(w, "{prefix}.{line}")?;
                }
            }
        }
        for line in extra {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
}

fn write_meta(dir: &Path, config: &ExperimentConfig, scenario: Scenario, wg: &Waveguide) -> Result<()> {
    let seed = if scenario.is_monte_carlo() {
        effective_seed(config).map_or("none".to_owned(), |s| s.to_string())
    } else {
        "none".to_owned()
    };
    let model = wg.dispersion();
    write_with(&dir.join("meta.txt"), |w| {
        writeln!(w, "scenario = {scenario}")?;
        writeln!(w, "config_hash = {}", config.hash())?;
        writeln!(w, "seed = {seed}")?;
        writeln!(w, "spdc_core_version = {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "dispersion_source = {}", model.source())?;
        writeln!(w, "poling_period_um = {}", wg.spec.poling_period_um)?;
        writeln!(w, "pump_wavelength_nm = {}", config.pump.wavelength_nm)?;
        if scenario.is_monte_carlo() {
            writeln!(w, "noiseless = {}", config.monte_carlo.noiseless)?;
            for (name, chain) in [("arm1", &config.chains.arm1), ("arm2", &config.chains.arm2)] {
                writeln!(
                    w,
                    "assumed.{name}.dark_count_rate = {} (assumption, not measured)",
                    chain.dark_count_rate
                )?;
                writeln!(
                    w,
                    "assumed.{name}.excess_loss = {} (fitted to the coincidence-to-singles ratio, not measured)",
                    chain.excess_loss
                )?;
            }
        }
        Ok(())
    })
}

/// Runs one scenario into `out_dir/<scenario>/`. Errors carry the scenario
/// name as their stage.
pub fn run_scenario(config: &ExperimentConfig, scenario: Scenario, out_dir: &Path) -> Result<ScenarioReport> {
    let stage = scenario.name();
    let errs = validate_config(config);
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let dir = out_dir.join(stage);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let wg = config.waveguide().map_err(|e| e.in_stage(stage))?;
    let lines = run_inner(config, scenario, &wg, &dir).map_err(|e| e.in_stage(stage))?;
    write_meta(&dir, config, scenario, &wg)?;
    Ok(ScenarioReport { scenario, dir, lines })
}

fn run_inner(config: &ExperimentConfig, scenario: Scenario, wg: &Waveguide, dir: &Path) -> Result<Vec<String>> {
    let head = header(config, scenario);
    let data = dir.join("data.csv");
    let fit_path = dir.join("fit.txt");
    match scenario {
        Scenario::Modes => {
            let rows = guided_mode_table(config, wg)?;
            write_with(&data, |w| {
                for line in &head {
                    writeln!(w, "# {line}")?;
                }
                writeln!(w, "wavelength_nm,polarization,m,n,effective_index")?;
                for r in &rows {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        r.wavelength_nm, r.mode.polarization, r.mode.m, r.mode.n, r.effective_index
                    )?;
                }
                Ok(())
            })?;
            let mut lines = Vec::new();
            for pol in ["H", "V", "P"] {
                let count = rows.iter().filter(|r| r.mode.polarization.to_string() == pol).count();
                lines.push(format!("guided_modes_{pol} = {count}"));
            }
            write_with(&fit_path, |w| lines.iter().try_for_each(|l| writeln!(w, "{l}")))?;
            Ok(lines)
        }
        Scenario::Bands => {
            let map = compute_bands(config, wg)?;
            map.write_files(dir, &head)?;
            let lines = vec![
                format!("triplets = {}", map.triplets.len()),
                format!("grid_n = {}", map.lambda_h_nm.len()),
            ];
            write_with(&fit_path, |w| lines.iter().try_for_each(|l| writeln!(w, "{l}")))?;
            Ok(lines)
        }
        Scenario::Islands => {
            let out = compute_islands(config, wg)?;
            let filter = config.filter(&config.scenarios.islands.filter)?;
            write_with(&data, |w| {
                for line in &head {
                    writeln!(w, "# {line}")?;
                }
                for (id, row) in out.rows.iter().enumerate() {
                    writeln!(w, "# triplet {id}: {}", row.triplet)?;
                }
                writeln!(w, "lambda_h_nm,lambda_v_nm,triplet_id,intensity,cutoff_flag,filter_h,filter_v")?;
                for (id, line) in out.intensity.iter().enumerate() {
                    for (k, value) in line.iter().enumerate() {
                        let (h, v) = (out.lambda_h_nm[k], out.lambda_v_nm[k]);
                        writeln!(
                            w,
                            "{h},{v},{id},{},{},{},{}",
                            value.unwrap_or(0.0),
                            u8::from(value.is_none()),
                            filter.transmission(h),
                            filter.transmission(v)
                        )?;
                    }
                }
                Ok(())
            })?;
            let reference = out.fundamental_center_nm();
            let mut lines = Vec::new();
            for row in &out.rows {
                let centers: Vec<String> = row.centers_h_nm.iter().map(|c| c.to_string()).collect();
                lines.push(format!("island_centers_h_nm.{} = [{}]", row.triplet, centers.join(", ")));
            }
            if let Some(r) = reference {
                lines.push(format!("fundamental_center_h_nm = {r}"));
            }
            if let Some(sep) = out.min_higher_order_separation_nm() {
                lines.push(format!("min_higher_order_separation_nm = {sep}"));
                lines.push(format!("filter_half_width_nm = {}", 0.5 * filter.fwhm_nm));
            }
            write_with(&fit_path, |w| lines.iter().try_for_each(|l| writeln!(w, "{l}")))?;
            Ok(lines.into_iter().filter(|l| !l.ends_with("= []")).collect())
        }
        Scenario::Heralded => {
            let out = compute_heralded(config, wg)?;
            write_with(&data, |w| {
                for line in &head {
                    writeln!(w, "# {line}")?;
                }
                writeln!(w, "# intensity: expected coincidence rate (1/s) against scan-filter centre")?;
                writeln!(w, "photon,lambda_nm,intensity")?;
                for (photon, scan) in &out.scans {
                    for p in &scan.points {
                        writeln!(w, "{photon},{},{}", p.x, p.expected_rate)?;
                    }
                }
                Ok(())
            })?;
            let sections: Vec<(String, &FitResult)> = out.fits.iter().map(|(p, f)| (p.to_string(), f)).collect();
            write_fit_text(&fit_path, &sections, &[])?;
            Ok(out
                .fits
                .iter()
                .map(|(p, f)| {
                    format!(
                        "{p}: center {:.4} nm, sigma {:.4} nm",
                        f.value("center").unwrap_or(f64::NAN),
                        f.value("sigma").unwrap_or(f64::NAN)
                    )
                })
                .collect())
        }
        Scenario::TunePump => {
            let out = compute_tune(config, wg)?;
            write_with(&data, |w| {
                for line in &head {
                    writeln!(w, "# {line}")?;
                }
                writeln!(w, "pump_wavelength_nm,overlap_magnitude")?;
                for (x, v) in &out.coarse_scan {
                    writeln!(w, "{x},{v}")?;
                }
                Ok(())
            })?;
            let lines = vec![format!("optimal_pump_wavelength_nm = {}", out.optimum_nm)];
            write_with(&fit_path, |w| lines.iter().try_for_each(|l| writeln!(w, "{l}")))?;
            Ok(lines)
        }
        Scenario::Hom => {
            let out = compute_hom(config, wg)?;
            write_with(&data, |w| out.scan.write_csv(w, &head, Some(&out.fit)))?;
            let extra = vec![
                format!("theory.visibility = {}", out.theory.visibility),
                format!("theory.optimal_delay_ps = {}", out.theory.optimal_delay_ps),
                format!("walkoff_delay_ps = {}", out.walkoff_ps),
            ];
            write_fit_text(&fit_path, &[(String::new(), &out.fit)], &extra)?;
            let v = out.fit.get("visibility").expect("dip fit reports visibility");
            Ok(vec![
                format!("fitted visibility = {:.4} +/- {:.4}", v.value, v.sigma),
                format!("fitted center = {:.4} ps", out.fit.value("center").unwrap_or(f64::NAN)),
                format!("theory visibility = {:.6}", out.theory.visibility),
                format!("walkoff delay = {:.4} ps", out.walkoff_ps),
            ])
        }
        Scenario::Fringes => {
            let out = compute_fringes(config, wg)?;
            write_fringe_csv(&data, &head, &out)?;
            let sections: Vec<(String, &FitResult)> = out.fits.iter().map(|(b, f)| (b.to_string(), f)).collect();
            let extra = vec![
                format!("model.visibility_interference = {}", out.model.visibility_interference),
                format!("model.visibility_polarization = {}", out.model.visibility_polarization),
                format!("dip_visibility = {}", out.dip_visibility),
            ];
            write_fit_text(&fit_path, &sections, &extra)?;
            Ok(out
                .fits
                .iter()
                .map(|(b, f)| format!("{b}: visibility {:.4}", f.value("visibility").unwrap_or(f64::NAN)))
                .collect())
        }
        Scenario::Summary => {
            let table = compute_summary(config, wg)?;
            write_with(&data, |w| {
                for line in &head {
                    writeln!(w, "# {line}")?;
                }
                writeln!(w, "filter,basis,visibility,sigma,expected_visibility,brightness_pairs_per_s_per_mw")?;
                for row in &table {
                    for (basis, fit) in &row.fits {
                        let v = fit.get("visibility").expect("sinusoid fit reports visibility");
                        writeln!(
                            w,
                            "{},{basis},{},{},{},{}",
                            row.filter,
                            v.value,
                            v.sigma,
                            row.model.expected_visibility(*basis),
                            row.brightness
                        )?;
                    }
                }
                Ok(())
            })?;
            let mut lines = vec![format!("{:<10} {:>7} {:>7} {:>7} {:>7} {:>12}", "filter", "H", "V", "D", "A", "pairs/s/mW")];
            for row in &table {
                let pct = |b| 100.0 * row.fitted_visibility(b).unwrap_or(f64::NAN);
                use crate::interference::Basis::*;
                lines.push(format!(
                    "{:<10} {:>6.1}% {:>6.1}% {:>6.1}% {:>6.1}% {:>12.3e}",
                    row.filter,
                    pct(H),
                    pct(V),
                    pct(D),
                    pct(A),
                    row.brightness
                ));
            }
            write_with(&fit_path, |w| lines.iter().try_for_each(|l| writeln!(w, "{l}")))?;
            Ok(lines)
        }
    }
}

fn write_fringe_csv(path: &Path, head: &[String], out: &FringeOutcome) -> Result<()> {
    write_with(path, |w| {
        for line in head {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# filter: {}", out.filter)?;
        writeln!(w, "basis,scan_variable,expected_rate,sampled_counts,interval_s,seed")?;
        for (basis, scan) in &out.scans {
            let seed = scan.seed.map(|s| s.to_string()).unwrap_or_default();
            for p in &scan.points {
                let counts = p.sampled_counts.map(|c| c.to_string()).unwrap_or_default();
                writeln!(
                    w,
                    "{basis},{},{},{counts},{},{seed}",
                    p.x, p.expected_rate, scan.interval_s
                )?;
            }
        }
        Ok(())
    })
}

/// Every scenario in order, into one output directory.
pub fn run_all(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<ScenarioReport>> {
    Scenario::ALL
        .into_iter()
        .map(|s| run_scenario(config, s, out_dir))
        .collect()
}
