//! Golden-rule spin-rotation rate, the six-level NV–P1 population network
//! and the torque it implies.
//!
//! Conventions: every Γ is a plain rate in s⁻¹; couplings are angular
//! frequencies in rad/s. Γ_d read off an ensemble is √⟨|d₂|²⟩/(2π).

use crate::error::{Error, Result};
use crate::params::RateSet;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::PI;

/// ⟨|d₂|²⟩ summed over partners in a shell r_min < r < r_max at number
/// density η: (2π/5)·η·α²·(r_min⁻³ − r_max⁻³). Units of α² (rad²/s² for α_ω).
pub fn d2sq_average(eta: f64, r_min: f64, r_max: f64, alpha: f64) -> Result<f64> {
    check_shell(eta, r_min, r_max)?;
    Ok(2.0 * PI / 5.0 * eta * alpha * alpha * (r_min.powi(-3) - r_max.powi(-3)))
}

/// RMS ensemble coupling expressed as a rate, √⟨|d₂|²⟩/(2π).
pub fn gamma_d_from_ensemble(eta: f64, r_min: f64, r_max: f64, alpha_omega: f64) -> Result<f64> {
    Ok(d2sq_average(eta, r_min, r_max, alpha_omega)?.sqrt() / (2.0 * PI))
}

fn check_shell(eta: f64, r_min: f64, r_max: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    if !(r_min > 0.0 && r_max >= r_min) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < r_min <= r_max, got r_min = {r_min}, r_max = {r_max}"
        )));
    }
    Ok(())
}

/// Resonance lineshape factor ρ_ss = Γ_d/(√(Γ_d²+Γ_L²)·√(Γ_d²+Γ_o²)), in s.
/// Tends to 1/Γ_d without pumping or dephasing. `None` if Γ_d = 0.
pub fn lineshape_factor(rates: &RateSet) -> Option<f64> {
    let gd = rates.gamma_d;
    if gd <= 0.0 {
        return None;
    }
    Some(gd / ((gd * gd + rates.gamma_l.powi(2)).sqrt() * (gd * gd + rates.gamma_o.powi(2)).sqrt()))
}

/// Golden-rule rate 2π·|V|²·ρ_ss for a coupling `coupling` in rad/s.
pub fn golden_rule_rate(coupling: f64, rates: &RateSet) -> f64 {
    lineshape_factor(rates).map_or(0.0, |rho| 2.0 * PI * coupling * coupling * rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    /// Γ_s-r in s⁻¹.
    pub gamma_sr: f64,
    /// ρ_ss in s.
    pub lineshape_factor: f64,
    /// ⟨|d₂|²⟩ in (rad/s)².
    pub d2sq_avg: f64,
    /// The golden-rule expression with its literal 2π prefactor, 2π⟨|d₂|²⟩ρ_ss.
    pub gamma_sr_literal: f64,
    /// Torque per unit volume, N·m⁻², from the self-consistent steady state.
    pub torque_per_volume: f64,
    /// Populations n₂ − n₃ of the network driven at Γ_s-r.
    pub delta_n23: f64,
    /// True when Γ_d = 0 made the lineshape undefined (rate reported as 0).
    pub degenerate: bool,
}

/// Γ_s-r = (⟨|d₂|²⟩/4π²)·ρ_ss.
///
/// The 1/4π² makes the golden-rule form coincide with the scaling law
/// Γ_d³/(√(Γ_d²+Γ_L²)√(Γ_d²+Γ_o²)) whenever Γ_d equals the ensemble value.
/// The torque assumes every pair is at the network steady state with the
/// 2↔3 exchange running at Γ_s-r.
pub fn gamma_sr(rates: &RateSet, eta: f64, r_min: f64, r_max: f64, alpha_omega: f64, hbar: f64) -> Result<RateReport> {
    rates.validate()?;
    let d2sq = d2sq_average(eta, r_min, r_max, alpha_omega)?;
    let Some(rho) = lineshape_factor(rates) else {
        return Ok(RateReport {
            gamma_sr: 0.0,
            lineshape_factor: 0.0,
            d2sq_avg: d2sq,
            gamma_sr_literal: 0.0,
            torque_per_volume: 0.0,
            delta_n23: 0.0,
            degenerate: true,
        });
    };
    let g = d2sq / (4.0 * PI * PI) * rho;
    let ss = steady_state_with_exchange(rates, g)?;
    Ok(RateReport {
        gamma_sr: g,
        lineshape_factor: rho,
        d2sq_avg: d2sq,
        gamma_sr_literal: 2.0 * PI * d2sq * rho,
        torque_per_volume: torque(eta, 1.0, g, ss.delta_n23, hbar),
        delta_n23: ss.delta_n23,
        degenerate: false,
    })
}

/// τ = 2ħ·η·V·Γ_s-r·(n₂ − n₃).
pub fn torque(eta: f64, volume: f64, gamma_sr: f64, delta_n23: f64, hbar: f64) -> f64 {
    2.0 * hbar * eta * volume * gamma_sr * delta_n23
}

/// Per-pair angular-momentum transfer rate of a single pumped two-level
/// pair: R = Γ_o·W/(Γ_o + 2W) with W = 2π·g²·ρ_ss. Each transfer moves 2ħ.
pub fn pair_transfer_rate(hop: f64, rates: &RateSet) -> f64 {
    let w = golden_rule_rate(hop, rates);
    if rates.gamma_o + w == 0.0 {
        return 0.0;
    }
    rates.gamma_o * w / (rates.gamma_o + 2.0 * w)
}

/// Labels of the six NV–P1 levels as (m_S, 2·m_I).
pub const LEVELS: [(i32, i32); 6] = [(1, 1), (0, 1), (-1, -1), (-1, 1), (0, -1), (1, -1)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateReport {
    pub populations: [f64; 6],
    pub delta_n23: f64,
    pub converged: bool,
    /// ‖Γ·n‖ in s⁻¹.
    pub residual: f64,
    #[serde(skip)]
    pub rate_matrix: DMatrix<f64>,
}

/// Generator of dn/dt = Γ·n (columns sum to zero). Zero-based indices follow
/// [`LEVELS`]: pumping m_S = ±1 → 0 at fixed m_I, the flip-flop exchange
/// 2↔3, NV relaxation within each m_I triplet and P1 flips at fixed m_S,
/// the relaxation edges symmetric (infinite temperature).
pub fn rate_matrix(rates: &RateSet, exchange: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6, 6);
    let mut edge = |from: usize, to: usize, rate: f64| {
        m[(to, from)] += rate;
        m[(from, from)] -= rate;
    };
    for (from, to) in [(0, 1), (3, 1), (2, 4), (5, 4)] {
        edge(from, to, rates.gamma_o);
    }
    let mut both = |a: usize, b: usize, rate: f64| {
        edge(a, b, rate);
        edge(b, a, rate);
    };
    both(1, 2, exchange);
    for (a, b) in [(0, 1), (1, 3), (4, 2), (4, 5), (0, 3), (5, 2)] {
        both(a, b, rates.gamma_nv);
    }
    for (a, b) in [(0, 5), (1, 4), (3, 2)] {
        both(a, b, rates.gamma_p1);
    }
    m
}

/// Σ xᵢyᵢ with error-free products and Neumaier summation.
fn accurate_dot(x: impl Iterator<Item = f64>, y: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut add = |v: f64| {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    };
    for (a, b) in x.zip(y) {
        let p = a * b;
        add(p);
        add(a.mul_add(b, -p));
    }
    sum + comp
}

/// Steady state with Γ_d as the 2↔3 exchange rate.
pub fn steady_state(rates: &RateSet) -> Result<SteadyStateReport> {
    steady_state_with_exchange(rates, rates.gamma_d)
}

pub fn steady_state_with_exchange(rates: &RateSet, exchange: f64) -> Result<SteadyStateReport> {
    rates.validate()?;
    if !(exchange >= 0.0 && exchange.is_finite()) {
        return Err(Error::InvalidParameter(format!("exchange rate must be >= 0, got {exchange}")));
    }
    let gamma = rate_matrix(rates, exchange);
    let scale = gamma.amax();
    if scale == 0.0 {
        return Err(Error::DegenerateNetwork("all rates vanish".into()));
    }
    // Work with the dimensionless generator; n is invariant under rescaling.
    let g = &gamma / scale;
    let sv = g.clone().svd(false, false).singular_values;
    let nullity = sv.iter().filter(|&&s| s < 1e-12).count();
    if nullity > 1 {
        return Err(Error::DegenerateNetwork(format!(
            "rate matrix has {nullity} stationary states; the network is not ergodic"
        )));
    }
    // Replace the last balance equation by normalization.
    let mut a = g.clone();
    a.row_mut(5).fill(1.0);
    let mut rhs = DVector::zeros(6);
    rhs[5] = 1.0;
    let lu = a.clone().lu();
    let mut n = lu
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateNetwork("singular normalized system".into()))?;
    // Iterative refinement with compensated residuals: the plain residual is
    // limited by cancellation among rates of order max|Γ|.
    for _ in 0..3 {
        let r = DVector::from_fn(6, |i, _| rhs[i] - accurate_dot(a.row(i).iter().copied(), n.iter().copied()));
        match lu.solve(&r) {
            Some(dn) => n += dn,
            None => break,
        }
    }
    let residual = (0..6)
        .map(|i| accurate_dot(gamma.row(i).iter().copied(), n.iter().copied()).powi(2))
        .sum::<f64>()
        .sqrt();
    let populations: [f64; 6] = std::array::from_fn(|i| n[i]);
    let converged = residual <= 1e-10 * scale.max(1.0) && populations.iter().all(|&p| p >= -1e-12);
    Ok(SteadyStateReport {
        populations,
        delta_n23: populations[1] - populations[2],
        converged,
        residual,
        rate_matrix: gamma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorquePoint {
    pub gamma_o: f64,
    pub gamma_sr: f64,
    pub delta_n23: f64,
    pub torque_per_volume: f64,
}

/// Torque per unit volume across pumping rates at fixed Γ_L, with Γ_s-r and
/// the populations recomputed self-consistently at each Γ_o.
pub fn torque_vs_pump(
    base: &RateSet,
    gamma_o_values: &[f64],
    eta: f64,
    r_min: f64,
    r_max: f64,
    alpha_omega: f64,
    hbar: f64,
) -> Result<Vec<TorquePoint>> {
    gamma_o_values
        .iter()
        .map(|&go| {
            let rates = RateSet { gamma_o: go, ..*base };
            let rep = gamma_sr(&rates, eta, r_min, r_max, alpha_omega, hbar)?;
            Ok(TorquePoint {
                gamma_o: go,
                gamma_sr: rep.gamma_sr,
                delta_n23: rep.delta_n23,
                torque_per_volume: rep.torque_per_volume,
            })
        })
        .collect()
}
