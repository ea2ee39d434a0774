//! Photon-counting layer: efficiency chains, expected rates and seeded
//! Poissonian count generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::{hom_curve, HomCurve};
use crate::scan::{ScanPoint, ScanResult};
use crate::spectra::SpectralAmplitude;

/// Detector dark-count rate assumed when none is configured, 1/s.
pub const DEFAULT_DARK_COUNT_RATE: f64 = 300.0;

/// Coincidence resamples before giving up and clamping.
const MAX_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transmission {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionChain {
    #[serde(default)]
    pub transmissions: Vec<Transmission>,
    pub detector_efficiency: f64,
    /// Lumped loss not accounted for by the named elements (1 = none).
    #[serde(default = "one")]
    pub excess_loss: f64,
    #[serde(default = "default_dark")]
    pub dark_count_rate: f64,
}

fn one() -> f64 {
    1.0
}

fn default_dark() -> f64 {
    DEFAULT_DARK_COUNT_RATE
}

impl DetectionChain {
    /// The chain of elements between the waveguide and an SPCM, with the
    /// excess loss fitted so the conjugate-arm efficiency reproduces a
    /// coincidence-to-singles ratio of 8.9%.
    pub fn reference_arm() -> Self {
        let t = |label: &str, value| Transmission {
            label: label.to_owned(),
            value,
        };
        Self {
            transmissions: vec![
                t("waveguide-air interface", 0.92),
                t("outcoupling objective", 0.76),
                t("Babinet-Soleil compensator", 0.75),
                t("interference filter", 0.77),
                t("multimode fiber coupling", 0.85),
            ],
            detector_efficiency: 0.45,
            excess_loss: 0.576,
            dark_count_rate: DEFAULT_DARK_COUNT_RATE,
        }
    }

    pub fn violations(&self, name: &str) -> Vec<String> {
        let mut errs = Vec::new();
        for (i, t) in self.transmissions.iter().enumerate() {
            if !(0.0..=1.0).contains(&t.value) {
                errs.push(format!(
                    "chains.{name}.transmissions[{i}] ({}) must lie in [0, 1] (got {})",
                    t.label, t.value
                ));
            }
        }
        for (key, v) in [
            ("detector_efficiency", self.detector_efficiency),
            ("excess_loss", self.excess_loss),
        ] {
            if !(0.0..=1.0).contains(&v) {
                errs.push(format!("chains.{name}.{key} must lie in [0, 1] (got {v})"));
            }
        }
        if !(self.dark_count_rate >= 0.0) {
            errs.push(format!(
                "chains.{name}.dark_count_rate must be >= 0 (got {})",
                self.dark_count_rate
            ));
        }
        errs
    }
}

pub fn arm_efficiency(chain: &DetectionChain) -> f64 {
    chain.transmissions.iter().map(|t| t.value).product::<f64>()
        * chain.detector_efficiency
        * chain.excess_loss
}

/// Mean rates (1/s) of the two singles channels and the coincidence channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub singles_1: f64,
    pub singles_2: f64,
    pub true_coincidences: f64,
    pub accidental_coincidences: f64,
}

impl Rates {
    pub fn coincidences(&self) -> f64 {
        self.true_coincidences + self.accidental_coincidences
    }

    pub fn zero() -> Self {
        Self {
            singles_1: 0.0,
            singles_2: 0.0,
            true_coincidences: 0.0,
            accidental_coincidences: 0.0,
        }
    }
}

/// S_i = R η_i + b_i, true coincidences R η_1 η_2, accidentals S_1 S_2 τ_w.
pub fn expected_rates(
    pair_rate: f64,
    eta_1: f64,
    eta_2: f64,
    background_1: f64,
    background_2: f64,
    window_s: f64,
) -> Result<Rates> {
    for (name, v) in [
        ("pair_rate", pair_rate),
        ("eta_1", eta_1),
        ("eta_2", eta_2),
        ("background_1", background_1),
        ("background_2", background_2),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be finite and >= 0 (got {v})")));
        }
    }
    if !(window_s > 0.0) {
        return Err(Error::InvalidInput(format!("coincidence window {window_s} s must be > 0")));
    }
    let singles_1 = pair_rate * eta_1 + background_1;
    let singles_2 = pair_rate * eta_2 + background_2;
    Ok(Rates {
        singles_1,
        singles_2,
        true_coincidences: pair_rate * eta_1 * eta_2,
        accidental_coincidences: singles_1 * singles_2 * window_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub interval_s: f64,
    pub singles_1: u64,
    pub singles_2: u64,
    pub coincidences: u64,
    pub true_rates: Rates,
    pub seed: u64,
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}

/// One interval: independent Poisson singles, then Poisson coincidences
/// redrawn until they do not exceed either singles count.
pub(crate) fn draw_record(rng: &mut ChaCha8Rng, rates: &Rates, interval_s: f64, seed: u64) -> CountRecord {
    let singles_1 = poisson(rng, rates.singles_1 * interval_s);
    let singles_2 = poisson(rng, rates.singles_2 * interval_s);
    let limit = singles_1.min(singles_2);
    let mean = rates.coincidences() * interval_s;
    let mut coincidences = poisson(rng, mean);
    let mut attempts = 0;
    while coincidences > limit && attempts < MAX_RESAMPLES {
        coincidences = poisson(rng, mean);
        attempts += 1;
    }
    CountRecord {
        interval_s,
        singles_1,
        singles_2,
        coincidences: coincidences.min(limit),
        true_rates: *rates,
        seed,
    }
}

pub fn sample_counts(rates: &Rates, interval_s: f64, n_intervals: usize, seed: u64) -> Result<Vec<CountRecord>> {
    if n_intervals == 0 {
        return Err(Error::InvalidInput("n_intervals must be >= 1".into()));
    }
    if !(interval_s > 0.0) {
        return Err(Error::InvalidInput(format!("interval {interval_s} s must be > 0")));
    }
    let mut rng = rng_for(seed);
    Ok((0..n_intervals)
        .map(|_| draw_record(&mut rng, rates, interval_s, seed))
        .collect())
}

/// Inputs of a simulated HOM delay scan.
#[derive(Debug, Clone, PartialEq)]
pub struct HomExperiment {
    pub chain_1: DetectionChain,
    pub chain_2: DetectionChain,
    pub interval_s: f64,
    pub window_s: f64,
    pub pump_power_mw: f64,
    /// Detected pairs per second per mW of incident pump.
    pub brightness: f64,
}

impl HomExperiment {
    pub fn detected_pair_rate(&self) -> f64 {
        self.brightness * self.pump_power_mw
    }

    /// Singles and far-delay coincidence rates implied by the brightness and
    /// the two arm efficiencies.
    pub fn rates(&self) -> Result<Rates> {
        let detected = self.detected_pair_rate();
        let eta_1 = arm_efficiency(&self.chain_1);
        let eta_2 = arm_efficiency(&self.chain_2);
        let generated = if detected == 0.0 {
            0.0
        } else if eta_1 * eta_2 > 0.0 {
            detected / (eta_1 * eta_2)
        } else {
            return Err(Error::InvalidInput(
                "non-zero brightness with a zero-efficiency detection arm".into(),
            ));
        };
        expected_rates(
            generated,
            eta_1,
            eta_2,
            self.chain_1.dark_count_rate,
            self.chain_2.dark_count_rate,
            self.window_s,
        )
    }
}

/// Coincidence counts against delay. The far-delay (distinguishable) level is
/// the detected pair rate; the dip follows 2 p(τ). With `seed = None` the
/// scan is noiseless: expected signal only, no background, no sampling.
pub fn simulate_hom_experiment(
    f: &SpectralAmplitude,
    experiment: &HomExperiment,
    delays_ps: &[f64],
    seed: Option<u64>,
) -> Result<(ScanResult, HomCurve)> {
    if !(experiment.pump_power_mw >= 0.0 && experiment.brightness >= 0.0) {
        return Err(Error::InvalidInput("pump power and brightness must be >= 0".into()));
    }
    if !(experiment.interval_s > 0.0) {
        return Err(Error::InvalidInput("interval must be > 0".into()));
    }
    let curve = hom_curve(f, delays_ps)?;
    let base = experiment.rates()?;
    let detected = experiment.detected_pair_rate();
    let accidental = if seed.is_some() { base.accidental_coincidences } else { 0.0 };
    let mut rng = seed.map(rng_for);
    let points = curve
        .delays_ps
        .iter()
        .zip(&curve.coincidence_probability)
        .map(|(&x, &p)| {
            let signal = detected * 2.0 * p;
            let sampled_counts = rng.as_mut().map(|rng| {
                let rates = Rates {
                    true_coincidences: signal,
                    ..base
                };
                draw_record(rng, &rates, experiment.interval_s, seed.unwrap_or_default()).coincidences
            });
            ScanPoint {
                x,
                expected_rate: signal + accidental,
                sampled_counts,
            }
        })
        .collect();
    Ok((
        ScanResult {
            variable: "delay_ps".into(),
            points,
            interval_s: experiment.interval_s,
            seed,
            accidental_rate: accidental,
        },
        curve,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_chain_product() {
        let mut chain = DetectionChain::reference_arm();
        chain.excess_loss = 1.0;
        let eta = arm_efficiency(&chain);
        assert!((eta - 0.154).abs() < 1e-3, "{eta}");
        chain.excess_loss = 0.58;
        assert!((arm_efficiency(&chain) - 0.089).abs() < 1e-3);
    }

    #[test]
    fn empty_chain_is_unity() {
        let chain = DetectionChain {
            transmissions: vec![],
            detector_efficiency: 1.0,
            excess_loss: 1.0,
            dark_count_rate: 0.0,
        };
        assert_eq!(arm_efficiency(&chain), 1.0);
    }

    #[test]
    fn rate_arithmetic() {
        let r = expected_rates(1e4, 1.0, 1.0, 0.0, 0.0, 3e-9).unwrap();
        assert_eq!(r.true_coincidences / r.singles_1, 1.0);

        let r = expected_rates(7.7e4, 0.154, 0.154, 0.0, 0.0, 3e-9).unwrap();
        assert!((r.true_coincidences / r.singles_1 - 0.154).abs() < 1e-12);
        let s = 7.7e4 * 0.154;
        assert!((r.accidental_coincidences - s * s * 3e-9).abs() < 1e-15);
        assert!((r.accidental_coincidences - 0.42).abs() < 0.005);

        let r2 = expected_rates(7.7e4, 0.154, 0.154, 0.0, 0.0, 6e-9).unwrap();
        assert_eq!(r2.singles_1, r.singles_1);
        assert_eq!(r2.true_coincidences, r.true_coincidences);
        assert!((r2.accidental_coincidences - 2.0 * r.accidental_coincidences).abs() < 1e-18);

        assert!(expected_rates(-1.0, 1.0, 1.0, 0.0, 0.0, 1e-9).is_err());
        assert!(expected_rates(1.0, 1.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let r = expected_rates(1e4, 0.1, 0.1, 300.0, 300.0, 3e-9).unwrap();
        let a = sample_counts(&r, 5.0, 50, 7).unwrap();
        let b = sample_counts(&r, 5.0, 50, 7).unwrap();
        let c = sample_counts(&r, 5.0, 50, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|rec| rec.seed == 7));
        assert!(sample_counts(&r, 5.0, 0, 7).is_err());
    }

    #[test]
    fn coincidences_never_exceed_singles() {
        // Coincidence mean above the singles means forces the resample path.
        let r = Rates {
            singles_1: 2.0,
            singles_2: 3.0,
            true_coincidences: 2.0,
            accidental_coincidences: 0.0,
        };
        for rec in sample_counts(&r, 1.0, 2000, 3).unwrap() {
            assert!(rec.coincidences <= rec.singles_1.min(rec.singles_2));
        }
    }
}
