//! Simulation of type-II parametric down-conversion in multimode
//! periodically poled KTP waveguides.

pub mod counting;
pub mod dispersion;
pub mod error;
pub mod fitting;
pub mod interference;
pub mod modes;
pub mod phasematch;
pub mod pipeline;
pub mod scan;
pub mod spectra;

pub use counting::{arm_efficiency, DetectionChain, HomExperiment, Rates};
pub use dispersion::{CrystalAxis, SellmeierModel};
pub use error::{Error, Result};
pub use fitting::{FitParameter, FitResult};
pub use interference::{Basis, FringeModel, HomCurve};
pub use modes::{AxisMap, ModeLabel, Polarization, Waveguide, WaveguideSpec};
pub use phasematch::{BandMap, ModeTriplet};
pub use scan::{ScanPoint, ScanResult};
pub use spectra::{FilterSpec, Photon, SpectralAmplitude};
pub use pipeline::{run_scenario, ExperimentConfig, Scenario};
