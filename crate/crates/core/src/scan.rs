use std::io::Write;

use crate::fitting::FitResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub x: f64,
    /// Mean rate (1/s) of the recorded channel, background included.
    pub expected_rate: f64,
    /// Monte Carlo counts per interval; `None` for noiseless scans.
    pub sampled_counts: Option<u64>,
}

/// A sampled curve: one recorded channel against one scan variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub variable: String,
    pub points: Vec<ScanPoint>,
    pub interval_s: f64,
    pub seed: Option<u64>,
    /// Constant accidental-coincidence contribution already inside `expected_rate`.
    pub accidental_rate: f64,
}

impl ScanResult {
    pub fn analytic(variable: &str, xs: &[f64], rates: Vec<f64>) -> Self {
        Self {
            variable: variable.to_owned(),
            points: xs
                .iter()
                .zip(rates)
                .map(|(&x, expected_rate)| ScanPoint {
                    x,
                    expected_rate,
                    sampled_counts: None,
                })
                .collect(),
            interval_s: 1.0,
            seed: None,
            accidental_rate: 0.0,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn expected(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.expected_rate).collect()
    }

    /// (x, counts) pairs for fitting: sampled counts when present, otherwise
    /// expected counts per interval.
    pub fn fit_points(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| {
                let y = match p.sampled_counts {
                    Some(c) => c as f64,
                    None => p.expected_rate * self.interval_s,
                };
                (p.x, y)
            })
            .collect()
    }

    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        header: &[String],
        fit: Option<&FitResult>,
    ) -> std::io::Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# scan_variable: {}", self.variable)?;
        writeln!(w, "# accidental_rate: {}", self.accidental_rate)?;
        writeln!(w, "scan_variable,expected_rate,sampled_counts,interval_s,seed")?;
        for p in &self.points {
            let counts = p.sampled_counts.map(|c| c.to_string()).unwrap_or_default();
            let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{}",
                p.x, p.expected_rate, counts, self.interval_s, seed
            )?;
        }
        if let Some(fit) = fit {
            for line in fit.to_text().lines() {
                writeln!(w, "# fit.{line}")?;
            }
        }
        Ok(())
    }
}
