//! Experiment design: field-sweep torque spectra with P1 hyperfine lines,
//! torsional-oscillator response, laser power, and the optical-cycle
//! angular-momentum ledger.

use crate::error::{Error, Result};
use crate::numerics::bisect;
use crate::params::{PhysicalConstants, RateSet};
use crate::rates::{d2sq_average, lineshape_factor, steady_state_with_exchange, torque};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// ¹⁴N hyperfine structure of the P1 centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperfineModel {
    /// Hz.
    pub a_par: f64,
    /// Hz.
    pub a_perp: f64,
    /// Resolve the four ⟨111⟩ orientations with A(θ) = √(A∥²cos²θ + A⊥²sin²θ).
    pub anisotropic: bool,
}

impl Default for HyperfineModel {
    fn default() -> Self {
        Self { a_par: 114e6, a_perp: 86e6, anisotropic: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperfineLine {
    /// Matching field, T.
    pub field: f64,
    pub m_n: i32,
    /// Effective coupling for this line, Hz.
    pub coupling: f64,
    pub label: String,
}

/// Fields where the NV |0⟩↔|−1⟩ gap Δ − γ_eB equals the P1 transition
/// γ_eB + 2π·m_N·A: B = (Δ − 2π·m_N·A)/(2γ_e). Sorted by field.
pub fn hyperfine_matching_fields(model: &HyperfineModel, consts: &PhysicalConstants) -> Result<Vec<HyperfineLine>> {
    if !(model.a_par >= 0.0 && model.a_perp >= 0.0) {
        return Err(Error::InvalidParameter("hyperfine couplings must be >= 0".into()));
    }
    let orientations: Vec<(f64, String)> = if model.anisotropic {
        let along = (model.a_par, "axial".to_string());
        // cos θ = 1/3 for the three other ⟨111⟩ axes
        let (c2, s2) = (1.0 / 9.0, 8.0 / 9.0);
        let off = ((model.a_par.powi(2) * c2 + model.a_perp.powi(2) * s2).sqrt(), "oblique".to_string());
        vec![along, off]
    } else {
        vec![(model.a_par, "isotropic".to_string())]
    };
    let mut lines = Vec::new();
    for (a, tag) in orientations {
        let m_values: &[i32] = if a == 0.0 { &[0] } else { &[-1, 0, 1] };
        for &m in m_values {
            lines.push(HyperfineLine {
                field: (consts.delta - 2.0 * PI * m as f64 * a) / (2.0 * consts.gamma_e),
                m_n: m,
                coupling: a,
                label: if m == 0 { format!("{tag} m_N=0") } else { format!("{tag} m_N={m:+}") },
            });
        }
    }
    lines.sort_by(|x, y| x.field.partial_cmp(&y.field).expect("finite"));
    lines.dedup_by(|x, y| (x.field - y.field).abs() <= 1e-15 * y.field.abs());
    Ok(lines)
}

/// Torsional oscillator driven at resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorSpec {
    /// Hz.
    pub resonance_freq: f64,
    pub quality_factor: f64,
    /// kg·m².
    pub osc_moment_of_inertia: f64,
    /// N·m.
    pub torque_noise_floor: f64,
}

impl OscillatorSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.resonance_freq > 0.0
            && self.quality_factor >= 1.0
            && self.osc_moment_of_inertia > 0.0
            && self.torque_noise_floor > 0.0;
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid oscillator: {self:?}")));
        }
        Ok(())
    }
}

impl Default for OscillatorSpec {
    /// A silicon double-paddle oscillator with a 10⁻¹⁸ N·m floor.
    fn default() -> Self {
        Self {
            resonance_freq: 5.5e3,
            quality_factor: 1e6,
            osc_moment_of_inertia: 1e-13,
            torque_noise_floor: 1e-18,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorResponse {
    /// rad.
    pub amplitude: f64,
    pub snr: f64,
}

/// Steady-state amplitude θ = Q·τ/(𝒥_osc·(2πf_r)²) and SNR = τ/noise floor.
pub fn oscillator_response(torque: f64, osc: &OscillatorSpec) -> Result<OscillatorResponse> {
    osc.validate()?;
    let w = 2.0 * PI * osc.resonance_freq;
    Ok(OscillatorResponse {
        amplitude: osc.quality_factor * torque / (osc.osc_moment_of_inertia * w * w),
        snr: torque / osc.torque_noise_floor,
    })
}

/// Sample and defect parameters the torque depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorqueSource {
    pub rates: RateSet,
    pub eta: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Illuminated volume, m³.
    pub volume: f64,
}

/// Lorentzian detuning factor with half-width 2π√(Γ_d² + Γ_L²), 1 at resonance.
pub fn detuning_lineshape(detuning: f64, rates: &RateSet) -> f64 {
    let hw = 2.0 * PI * (rates.gamma_d.powi(2) + rates.gamma_l.powi(2)).sqrt();
    if hw == 0.0 {
        return if detuning == 0.0 { 1.0 } else { 0.0 };
    }
    hw * hw / (hw * hw + detuning * detuning)
}

/// Torque (N·m) at a given detuning factor: Γ_s-r scaled by `factor`, the
/// network re-solved with that exchange rate.
pub fn torque_at(source: &TorqueSource, factor: f64, consts: &PhysicalConstants) -> Result<f64> {
    let d2sq = d2sq_average(source.eta, source.r_min, source.r_max, consts.alpha_omega())?;
    let Some(rho) = lineshape_factor(&source.rates) else {
        return Ok(0.0);
    };
    let g = factor * d2sq / (4.0 * PI * PI) * rho;
    let ss = steady_state_with_exchange(&source.rates, g)?;
    Ok(torque(source.eta, source.volume, g, ss.delta_n23, consts.hbar))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub b_tesla: f64,
    pub torque: f64,
    pub amplitude: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpectrum {
    pub points: Vec<SweepPoint>,
    pub lines: Vec<HyperfineLine>,
}

impl SweepSpectrum {
    /// Grid indices of local torque maxima.
    pub fn peak_indices(&self) -> Vec<usize> {
        let t: Vec<f64> = self.points.iter().map(|p| p.torque).collect();
        (0..t.len())
            .filter(|&i| {
                let left = i == 0 || t[i] > t[i - 1];
                let right = i + 1 == t.len() || t[i] >= t[i + 1];
                left && right && t[i] > 0.0
            })
            .collect()
    }
}

/// Torque and oscillator amplitude across a field grid. Each point uses the
/// nearest hyperfine line's detuning, 2γ_e(B_line − B); lines are taken with
/// equal weight, so the torque on a line centre equals the zero-detuning
/// rate-theory torque.
pub fn sweep_spectrum(
    fields: &[f64],
    source: &TorqueSource,
    model: &HyperfineModel,
    osc: &OscillatorSpec,
    consts: &PhysicalConstants,
) -> Result<SweepSpectrum> {
    let lines = hyperfine_matching_fields(model, consts)?;
    let (lo, hi) = (lines[0].field, lines[lines.len() - 1].field);
    let (gmin, gmax) = fields
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &f| (a.min(f), b.max(f)));
    if fields.is_empty() || gmin > lo || gmax < hi {
        return Err(Error::InvalidParameter(format!(
            "field grid [{gmin}, {gmax}] T must cover all lines [{lo}, {hi}] T"
        )));
    }
    let points = fields
        .iter()
        .map(|&b| {
            let factor = lines
                .iter()
                .map(|l| detuning_lineshape(2.0 * consts.gamma_e * (l.field - b), &source.rates))
                .fold(0.0, f64::max);
            let tau = torque_at(source, factor, consts)?;
            let resp = oscillator_response(tau, osc)?;
            Ok(SweepPoint { b_tesla: b, torque: tau, amplitude: resp.amplitude, snr: resp.snr })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSpectrum { points, lines })
}

/// Uniform grid of `n` fields spanning all lines with `margin` T either side.
pub fn sweep_grid(model: &HyperfineModel, margin: f64, n: usize, consts: &PhysicalConstants) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter("sweep grid needs at least two points".into()));
    }
    let lines = hyperfine_matching_fields(model, consts)?;
    let lo = lines[0].field - margin;
    let hi = lines[lines.len() - 1].field + margin;
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

/// Laser power P = πζ²·Y_sat·Γ_o/Γ_o^sat in the linear regime (W; ζ in m,
/// Y_sat in W/m²).
pub fn laser_power(gamma_o: f64, spot_radius: f64, y_sat: f64, gamma_o_sat: f64) -> Result<f64> {
    check_laser(gamma_o, spot_radius, y_sat, gamma_o_sat)?;
    if gamma_o > gamma_o_sat {
        return Err(Error::InvalidParameter(format!("gamma_o ({gamma_o}) exceeds saturation ({gamma_o_sat})")));
    }
    Ok(PI * spot_radius * spot_radius * y_sat * gamma_o / gamma_o_sat)
}

/// Power for Γ_o = Γ_o^sat(1 − e^{−Y/Y_sat}), inverted by bisection.
pub fn laser_power_exact(gamma_o: f64, spot_radius: f64, y_sat: f64, gamma_o_sat: f64) -> Result<f64> {
    check_laser(gamma_o, spot_radius, y_sat, gamma_o_sat)?;
    if gamma_o >= gamma_o_sat {
        return Err(Error::NoSolution(format!(
            "gamma_o ({gamma_o}) is not below saturation ({gamma_o_sat})"
        )));
    }
    if gamma_o == 0.0 {
        return Ok(0.0);
    }
    let target = gamma_o / gamma_o_sat;
    let mut hi = 1.0f64;
    while 1.0 - (-hi).exp() < target {
        hi *= 2.0;
    }
    let x = bisect(|x| 1.0 - (-x).exp() - target, 0.0, hi, 1e-15)?;
    Ok(PI * spot_radius * spot_radius * y_sat * x)
}

fn check_laser(gamma_o: f64, spot_radius: f64, y_sat: f64, gamma_o_sat: f64) -> Result<()> {
    if !(gamma_o >= 0.0 && spot_radius > 0.0 && y_sat > 0.0 && gamma_o_sat > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "laser inputs must be positive (gamma_o={gamma_o}, radius={spot_radius}, y_sat={y_sat}, sat={gamma_o_sat})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pathway {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Polarization {
    Lcp,
    Rcp,
    Linear,
}

impl FromStr for Pathway {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Pathway::A),
            "b" => Ok(Pathway::B),
            "c" => Ok(Pathway::C),
            "d" => Ok(Pathway::D),
            other => Err(Error::InvalidParameter(format!("unknown optical pathway '{other}'"))),
        }
    }
}

impl FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lcp" => Ok(Polarization::Lcp),
            "rcp" => Ok(Polarization::Rcp),
            "linear" => Ok(Polarization::Linear),
            other => Err(Error::InvalidParameter(format!("unknown polarization '{other}'"))),
        }
    }
}

impl fmt::Display for Pathway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pathway::A => "a",
            Pathway::B => "b",
            Pathway::C => "c",
            Pathway::D => "d",
        })
    }
}

/// Phonon angular momentum (units of ħ) left behind by one optical cycle.
/// Pathways b and d pass through the shelving channel and deposit ±2 for
/// LCP/RCP; a and c are direct; linear light averages the two helicities.
pub fn optical_cycle_ledger(pathway: Pathway, polarization: Polarization) -> i32 {
    let helical = match pathway {
        Pathway::A | Pathway::C => 0,
        Pathway::B | Pathway::D => 2,
    };
    match polarization {
        Polarization::Lcp => helical,
        Polarization::Rcp => -helical,
        Polarization::Linear => 0,
    }
}
