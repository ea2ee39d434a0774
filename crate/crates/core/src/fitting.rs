//! Weighted Levenberg-Marquardt fits of the three curve shapes the pipeline
//! produces: heralded spectra (Gaussian), HOM dips and polarizer fringes.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const PARAMETER_TOLERANCE: f64 = 1e-8;
const INITIAL_DAMPING: f64 = 1e-3;
const MAX_DAMPING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    pub reduced_chi_square: f64,
    pub converged: bool,
    pub n_iterations: usize,
    /// χ² after every accepted step, starting from the initial guess.
    pub chi_square_history: Vec<f64>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.value)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.parameters {
            let _ = writeln!(s, "{} = {} +/- {}", p.name, p.value, p.sigma);
        }
        let _ = writeln!(s, "reduced_chi_square = {}", self.reduced_chi_square);
        let _ = writeln!(s, "converged = {}", self.converged);
        let _ = writeln!(s, "iterations = {}", self.n_iterations);
        s
    }
}

/// Raw LM output before parameter naming.
#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub parameters: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub chi_square: f64,
    pub reduced_chi_square: f64,
    pub converged: bool,
    pub n_iterations: usize,
    pub chi_square_history: Vec<f64>,
}

/// Poisson weights 1/max(y, 1).
pub fn poisson_weights(ys: &[f64]) -> Vec<f64> {
    ys.iter().map(|&y| 1.0 / y.max(1.0)).collect()
}

fn chi_square<F: Fn(&[f64], f64) -> f64>(model: &F, p: &[f64], xs: &[f64], ys: &[f64], w: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .zip(w)
        .map(|((&x, &y), &w)| {
            let r = y - model(p, x);
            w * r * r
        })
        .sum()
}

fn jacobian<F: Fn(&[f64], f64) -> f64>(model: &F, p: &[f64], xs: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(xs.len(), p.len());
    let mut probe = p.to_vec();
    for k in 0..p.len() {
        let h = 1e-6 * p[k].abs().max(1e-6);
        probe[k] = p[k] + h;
        let up: Vec<f64> = xs.iter().map(|&x| model(&probe, x)).collect();
        probe[k] = p[k] - h;
        for (i, &x) in xs.iter().enumerate() {
            j[(i, k)] = (up[i] - model(&probe, x)) / (2.0 * h);
        }
        probe[k] = p[k];
    }
    j
}

fn normal_matrix(j: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut jw = j.clone();
    for (i, &wi) in w.iter().enumerate() {
        jw.row_mut(i).scale_mut(wi);
    }
    j.transpose() * jw
}

/// Minimizes Σ w (y - model(p, x))². Damping starts at 1e-3 and moves by a
/// factor of ten; iteration stops once the largest relative parameter step
/// falls below 1e-8 or after 200 iterations.
pub fn levenberg_marquardt<F>(model: F, xs: &[f64], ys: &[f64], weights: &[f64], p0: &[f64]) -> Result<LmOutcome>
where
    F: Fn(&[f64], f64) -> f64,
{
    let n = xs.len();
    let np = p0.len();
    if ys.len() != n || weights.len() != n {
        return Err(Error::InvalidInput("fit data lengths differ".into()));
    }
    if n <= np {
        return Err(Error::NoStructure);
    }
    let mut p = p0.to_vec();
    let mut chi2 = chi_square(&model, &p, xs, ys, weights);
    if !chi2.is_finite() {
        return Err(Error::Convergence("initial guess gives a non-finite χ²".into()));
    }
    let mut history = vec![chi2];
    let mut lambda = INITIAL_DAMPING;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let j = jacobian(&model, &p, xs);
        let a = normal_matrix(&j, weights);
        let r = DVector::from_iterator(
            n,
            xs.iter()
                .zip(ys)
                .zip(weights)
                .map(|((&x, &y), &w)| w * (y - model(&p, x))),
        );
        let g = j.transpose() * r;

        let mut accepted = false;
        while lambda < MAX_DAMPING {
            let mut damped = a.clone();
            for k in 0..np {
                damped[(k, k)] += lambda * a[(k, k)].max(1e-300);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_chi2 = chi_square(&model, &trial, xs, ys, weights);
            if trial_chi2.is_finite() && trial_chi2 <= chi2 {
                let rel = step
                    .iter()
                    .zip(&p)
                    .map(|(d, v)| d.abs() / v.abs().max(1e-12))
                    .fold(0.0, f64::max);
                p = trial;
                chi2 = trial_chi2;
                history.push(chi2);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < PARAMETER_TOLERANCE {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: already at the minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let a = normal_matrix(&jacobian(&model, &p, xs), weights);
    let covariance = match a.try_inverse() {
        Some(c) => c,
        None => {
            converged = false;
            DMatrix::from_element(np, np, f64::INFINITY)
        }
    };
    Ok(LmOutcome {
        parameters: p,
        covariance,
        chi_square: chi2,
        reduced_chi_square: chi2 / (n - np) as f64,
        converged,
        n_iterations: iterations,
        chi_square_history: history,
    })
}

fn named(outcome: &LmOutcome, names: &[&str]) -> FitResult {
    FitResult {
        parameters: names
            .iter()
            .enumerate()
            .map(|(k, name)| FitParameter {
                name: (*name).to_owned(),
                value: outcome.parameters[k],
                sigma: outcome.covariance[(k, k)].max(0.0).sqrt(),
            })
            .collect(),
        reduced_chi_square: outcome.reduced_chi_square,
        converged: outcome.converged,
        n_iterations: outcome.n_iterations,
        chi_square_history: outcome.chi_square_history.clone(),
    }
}

fn split(points: &[(f64, f64)], min_points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite() || *y < 0.0) {
        return Err(Error::InvalidInput("fit data must be finite with counts >= 0".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if points.len() < min_points || !(hi > lo) {
        return Err(Error::NoStructure);
    }
    Ok((xs, ys))
}

/// Half the spread of xs where |y - level| exceeds half the extremum excursion.
fn dip_width_guess(xs: &[f64], ys: &[f64], level: f64, peak: f64) -> f64 {
    let half = 0.5 * (peak - level);
    let inside: Vec<f64> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| (y - level) * half.signum() >= half.abs())
        .map(|(&x, _)| x)
        .collect();
    let span = xs.last().unwrap() - xs[0];
    let step = span.abs() / (xs.len() - 1) as f64;
    let fwhm = match (inside.first(), inside.last()) {
        (Some(a), Some(b)) => (b - a).abs().max(step),
        _ => step,
    };
    fwhm / (8.0 * 2f64.ln()).sqrt()
}

fn edge_level(ys: &[f64]) -> f64 {
    let k = (ys.len() / 10).max(1);
    let sum: f64 = ys[..k].iter().chain(&ys[ys.len() - k..]).sum();
    sum / (2 * k) as f64
}

fn gaussian(x: f64, c: f64, s: f64) -> f64 {
    let u = (x - c) / s;
    (-0.5 * u * u).exp()
}

/// y = amplitude·exp(-(x-center)²/2σ²) + offset.
pub fn fit_gaussian(points: &[(f64, f64)]) -> Result<FitResult> {
    let (xs, ys) = split(points, 6)?;
    let offset = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let amplitude = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - offset;
    let weight: f64 = ys.iter().map(|y| y - offset).sum();
    let center = xs.iter().zip(&ys).map(|(x, y)| x * (y - offset)).sum::<f64>() / weight;
    let second = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - center).powi(2) * (y - offset))
        .sum::<f64>()
        / weight;
    let span = (xs[xs.len() - 1] - xs[0]).abs();
    let sigma = if second > 0.0 { second.sqrt() } else { span / 4.0 };
    let p0 = [amplitude, center, sigma, offset];
    let out = levenberg_marquardt(
        |p, x| p[0] * gaussian(x, p[1], p[2]) + p[3],
        &xs,
        &ys,
        &poisson_weights(&ys),
        &p0,
    )?;
    let mut fit = named(&out, &["amplitude", "center", "sigma", "offset"]);
    fit.parameters[2].value = fit.parameters[2].value.abs();
    Ok(fit)
}

/// y = baseline - depth·exp(-(x-center)²/2σ²); visibility = depth/baseline
/// with its error propagated through the covariance.
pub fn fit_dip(points: &[(f64, f64)]) -> Result<FitResult> {
    let (xs, ys) = split(points, 6)?;
    let baseline = edge_level(&ys);
    let (imin, &ymin) = ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    if !(baseline > ymin) {
        return Err(Error::NoStructure);
    }
    let sigma = dip_width_guess(&xs, &ys, baseline, ymin);
    let p0 = [baseline, baseline - ymin, xs[imin], sigma];
    let out = levenberg_marquardt(
        |p, x| p[0] - p[1] * gaussian(x, p[2], p[3]),
        &xs,
        &ys,
        &poisson_weights(&ys),
        &p0,
    )?;
    let mut fit = named(&out, &["baseline", "depth", "center", "sigma"]);
    fit.parameters[3].value = fit.parameters[3].value.abs();

    let (b, d) = (out.parameters[0], out.parameters[1]);
    let (sb, sd) = (fit.parameters[0].sigma, fit.parameters[1].sigma);
    if !(d > 0.0) {
        fit.converged = false;
    }
    let v = d / b;
    let var = v * v * ((sd / d).powi(2) + (sb / b).powi(2));
    fit.parameters.push(FitParameter {
        name: "visibility".into(),
        value: v,
        sigma: var.max(0.0).sqrt(),
    });
    Ok(fit)
}

/// y = mean_level·(1 + visibility·sin(2θ + phase)), θ in degrees. The
/// visibility is reported non-negative and the phase wrapped into (-π, π].
pub fn fit_sinusoid(points: &[(f64, f64)]) -> Result<FitResult> {
    let (xs, ys) = split(points, 8)?;
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if hi - lo < 180.0 {
        return Err(Error::InvalidInput(format!("fringe scan spans {} deg, need >= 180", hi - lo)));
    }
    // Linear least squares on [1, sin 2θ, cos 2θ] for the starting point.
    let rows = xs.len();
    let design = DMatrix::from_fn(rows, 3, |i, k| {
        let t = 2.0 * xs[i].to_radians();
        match k {
            0 => 1.0,
            1 => t.sin(),
            _ => t.cos(),
        }
    });
    let rhs = DVector::from_column_slice(&ys);
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Convergence(e.to_string()))?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    if !(a > 0.0) {
        return Err(Error::NoStructure);
    }
    let p0 = [a, b.hypot(c) / a, c.atan2(b)];
    let out = levenberg_marquardt(
        |p, x| p[0] * (1.0 + p[1] * (2.0 * x.to_radians() + p[2]).sin()),
        &xs,
        &ys,
        &poisson_weights(&ys),
        &p0,
    )?;
    let mut fit = named(&out, &["mean_level", "visibility", "phase"]);
    if fit.parameters[1].value < 0.0 {
        fit.parameters[1].value = -fit.parameters[1].value;
        fit.parameters[2].value += PI;
    }
    let mut phase = fit.parameters[2].value.rem_euclid(2.0 * PI);
    if phase > PI {
        phase -= 2.0 * PI;
    }
    fit.parameters[2].value = phase;
    Ok(fit)
}
