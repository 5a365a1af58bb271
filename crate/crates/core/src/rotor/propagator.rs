use super::state::RotorLatticeState;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Upper bound on `dt × (fastest rate)` accepted by the step builders.
pub const MAX_STEP_PHASE: f64 = 0.05;

/// Generator `H/ħ` of the two-chain lattice (rad/s).
///
/// Only `(A, m) ↔ (B, m+2)` are coupled, with `⟨B,m+2|H|A,m⟩/ħ = hop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeGenerator {
    pub rotor_constant: f64,
    pub detuning: f64,
    pub hop: C64,
}

impl LatticeGenerator {
    pub fn for_state(state: &RotorLatticeState, hop: C64) -> Self {
        Self {
            rotor_constant: state.rotor_constant,
            detuning: state.detuning,
            hop,
        }
    }

    pub fn energy_a(&self, m: i64) -> f64 {
        self.rotor_constant * (m * m) as f64
    }

    pub fn energy_b(&self, m: i64) -> f64 {
        self.energy_a(m) + self.detuning
    }

    /// Largest |diagonal| over the window.
    pub fn max_site_rate(&self, m_min: i64, m_max: i64) -> f64 {
        let m = m_min.abs().max(m_max.abs());
        self.energy_a(m).abs() + self.detuning.abs()
    }

    /// Dense generator on `[A(m_min..=m_max), B(m_min..=m_max)]`.
    pub fn dense(&self, m_min: i64, m_max: i64) -> DMatrix<C64> {
        let n = (m_max - m_min + 1) as usize;
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let m = m_min + i as i64;
            h[(i, i)] = C64::new(self.energy_a(m), 0.0);
            h[(n + i, n + i)] = C64::new(self.energy_b(m), 0.0);
            if i + 2 < n {
                h[(n + i + 2, i)] = self.hop;
                h[(i, n + i + 2)] = self.hop.conj();
            }
        }
        h
    }
}

/// One Strang step: half diagonal phase, exact 2×2 rotation on every block
/// `{(A,m), (B,m+2)}`, half diagonal phase.
#[derive(Debug, Clone)]
pub struct PropagatorStep {
    m_min: i64,
    half_a: Vec<C64>,
    half_b: Vec<C64>,
    cos: f64,
    /// `−i sin(|g|dt)·e^{iχ}` and `−i sin(|g|dt)·e^{−iχ}` for the two off-diagonals.
    lower: C64,
    upper: C64,
    pub dt: f64,
}

/// Check the step-size precondition against every rate in play.
pub fn check_step(dt: f64, rates: &[f64]) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    let fastest = rates.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()));
    if dt * fastest >= MAX_STEP_PHASE {
        return Err(Error::StepSize(format!(
            "dt·max rate = {:.3e} ≥ {MAX_STEP_PHASE}",
            dt * fastest
        )));
    }
    Ok(())
}

pub fn build_propagator_step(state: &RotorLatticeState, generator: &LatticeGenerator, dt: f64) -> Result<PropagatorStep> {
    check_step(
        dt,
        &[generator.hop.norm(), generator.max_site_rate(state.m_min(), state.m_max())],
    )?;
    Ok(PropagatorStep::new(state.m_min(), state.m_max(), generator, dt))
}

impl PropagatorStep {
    fn new(m_min: i64, m_max: i64, generator: &LatticeGenerator, dt: f64) -> Self {
        let phase = |e: f64| C64::from_polar(1.0, -0.5 * e * dt);
        let half_a = (m_min..=m_max).map(|m| phase(generator.energy_a(m))).collect();
        let half_b = (m_min..=m_max).map(|m| phase(generator.energy_b(m))).collect();
        let g = generator.hop.norm();
        let unit = if g > 0.0 { generator.hop / g } else { C64::new(1.0, 0.0) };
        let s = (g * dt).sin();
        let minus_i_s = C64::new(0.0, -s);
        Self {
            m_min,
            half_a,
            half_b,
            cos: (g * dt).cos(),
            lower: minus_i_s * unit,
            upper: minus_i_s * unit.conj(),
            dt,
        }
    }

    pub fn matches(&self, state: &RotorLatticeState) -> bool {
        self.m_min == state.m_min() && self.half_a.len() == state.len()
    }

    pub fn apply(&self, state: &mut RotorLatticeState) {
        debug_assert!(self.matches(state));
        let n = state.a.len();
        let (a, b) = (&mut state.a, &mut state.b);
        for i in 0..n {
            a[i] *= self.half_a[i];
            b[i] *= self.half_b[i];
        }
        for i in 0..n.saturating_sub(2) {
            let x = a[i];
            let y = b[i + 2];
            a[i] = self.cos * x + self.upper * y;
            b[i + 2] = self.lower * x + self.cos * y;
        }
        for i in 0..n {
            a[i] *= self.half_a[i];
            b[i] *= self.half_b[i];
        }
    }
}
