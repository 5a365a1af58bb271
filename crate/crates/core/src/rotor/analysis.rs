use super::trajectory::ObservableSeries;
use crate::error::{Error, Result};
use crate::numerics::{linear_fit, LinearFit};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// δE_m/ħ = (E_{m+2} − E_m)/ħ = 4K(m+1) with K = ħ/(2𝒥), rad/s.
pub fn energy_step_rate(m: f64, rotor_constant: f64) -> f64 {
    4.0 * rotor_constant * (m + 1.0)
}

/// m* solving δE_m = 2πħΓ_d, i.e. m* = πΓ_d𝒥/ħ − 1 = πΓ_d/(2K) − 1.
pub fn predicted_plateau_m(gamma_d: f64, rotor_constant: f64) -> f64 {
    PI * gamma_d / (2.0 * rotor_constant) - 1.0
}

/// Chain-B detuning that restores resonance for the hop out of site `m`.
pub fn resonant_detuning(m: f64, rotor_constant: f64) -> f64 {
    -energy_step_rate(m, rotor_constant)
}

/// Least-squares fit of ⟨L_z⟩ against t over `[t0, t1]`.
pub fn fit_lz(series: &ObservableSeries, t0: f64, t1: f64) -> Result<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = series
        .times
        .iter()
        .zip(&series.mean_lz)
        .filter(|(t, _)| **t >= t0 && **t <= t1)
        .map(|(t, l)| (*t, *l))
        .unzip();
    linear_fit(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauEstimate {
    /// Mean ⟨L_z⟩/ħ over the tail of the series.
    pub plateau_lz: f64,
    pub predicted_m: f64,
    pub ratio: f64,
    /// First time ⟨L_z⟩ reaches 90% of the plateau.
    pub onset_time: f64,
    pub initial_slope: f64,
    pub final_slope: f64,
}

/// Fraction of the series used for the initial and final slope fits.
const HEAD_FRACTION: f64 = 0.1;
const TAIL_FRACTION: f64 = 0.2;

pub fn pseudo_terminal_analysis(series: &ObservableSeries, gamma_d: f64, rotor_constant: f64) -> Result<PlateauEstimate> {
    let n = series.len();
    if n < 20 {
        return Err(Error::NotConverged(format!("series too short ({n} points)")));
    }
    let t_end = series.times[n - 1];
    let t_start = series.times[0];
    let span = t_end - t_start;
    let head = fit_lz(series, t_start, t_start + HEAD_FRACTION * span)?;
    let tail_start = t_end - TAIL_FRACTION * span;
    let tail = fit_lz(series, tail_start, t_end)?;
    if !(head.slope > 0.0) || tail.slope > 0.1 * head.slope {
        return Err(Error::NotConverged(format!(
            "final slope {:.3e} is not below 10% of initial slope {:.3e}",
            tail.slope, head.slope
        )));
    }
    let tail_values: Vec<f64> = series
        .times
        .iter()
        .zip(&series.mean_lz)
        .filter(|(t, _)| **t >= tail_start)
        .map(|(_, l)| *l)
        .collect();
    let plateau_lz = tail_values.iter().sum::<f64>() / tail_values.len() as f64;
    let onset_time = series
        .times
        .iter()
        .zip(&series.mean_lz)
        .find(|(_, l)| **l >= 0.9 * plateau_lz)
        .map(|(t, _)| *t)
        .unwrap_or(t_end);
    let predicted_m = predicted_plateau_m(gamma_d, rotor_constant);
    Ok(PlateauEstimate {
        plateau_lz,
        predicted_m,
        ratio: plateau_lz / predicted_m,
        onset_time,
        initial_slope: head.slope,
        final_slope: tail.slope,
    })
}
