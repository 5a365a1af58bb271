use crate::error::{Error, Result};
use crate::numerics::bisect;
use crate::params::PhysicalConstants;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Two-chain rotor wavefunction on an inclusive window `[m_min, m_max]`.
///
/// Chain A is |0,+½⟩, chain B is |−1,−½⟩. Site energies are
/// `E_m/ħ = K·m²` with `K = ħ/(2𝒥)` in rad/s; chain B is offset by
/// `detuning` (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct RotorLatticeState {
    m_min: i64,
    pub(crate) a: Vec<C64>,
    pub(crate) b: Vec<C64>,
    pub rotor_constant: f64,
    pub detuning: f64,
}

/// Probability over m (chains summed) starting at `m_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub m_min: i64,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn m_max(&self) -> i64 {
        self.m_min + self.probs.len() as i64 - 1
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn get(&self, m: i64) -> f64 {
        let i = m - self.m_min;
        if i < 0 || i >= self.probs.len() as i64 {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * (self.m_min + i as i64) as f64)
            .sum()
    }
}

impl RotorLatticeState {
    /// All amplitude on chain A at `m`.
    pub fn localized(m: i64, window: (i64, i64), rotor_constant: f64, detuning: f64) -> Result<Self> {
        let mut s = Self::empty(window, rotor_constant, detuning)?;
        if m < window.0 || m > window.1 {
            return Err(Error::WindowTooSmall(format!("site {m} outside {window:?}")));
        }
        s.a[(m - window.0) as usize] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn empty(window: (i64, i64), rotor_constant: f64, detuning: f64) -> Result<Self> {
        if window.1 < window.0 {
            return Err(Error::WindowTooSmall(format!("empty window {window:?}")));
        }
        let n = (window.1 - window.0 + 1) as usize;
        Ok(Self {
            m_min: window.0,
            a: vec![C64::new(0.0, 0.0); n],
            b: vec![C64::new(0.0, 0.0); n],
            rotor_constant,
            detuning,
        })
    }

    /// Build from explicit amplitudes (chain A, chain B) starting at `m_min`.
    pub fn from_amplitudes(m_min: i64, a: Vec<C64>, b: Vec<C64>, rotor_constant: f64, detuning: f64) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::InvalidParameter("chains must have equal, non-zero length".into()));
        }
        Ok(Self {
            m_min,
            a,
            b,
            rotor_constant,
            detuning,
        })
    }

    pub fn m_min(&self) -> i64 {
        self.m_min
    }

    pub fn m_max(&self) -> i64 {
        self.m_min + self.a.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn chain_a(&self) -> &[C64] {
        &self.a
    }

    pub fn chain_b(&self) -> &[C64] {
        &self.b
    }

    pub fn amplitude_a(&self, m: i64) -> C64 {
        self.index(m).map_or(C64::new(0.0, 0.0), |i| self.a[i])
    }

    pub fn amplitude_b(&self, m: i64) -> C64 {
        self.index(m).map_or(C64::new(0.0, 0.0), |i| self.b[i])
    }

    fn index(&self, m: i64) -> Option<usize> {
        let i = m - self.m_min;
        (i >= 0 && i < self.a.len() as i64).then_some(i as usize)
    }

    /// Moment of inertia implied by the rotor constant, 𝒥 = ħ/(2K).
    pub fn moment_of_inertia(&self, hbar: f64) -> f64 {
        hbar / (2.0 * self.rotor_constant)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|z| z.norm_sqr()).sum()
    }

    pub fn population_b(&self) -> f64 {
        self.b.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr();
        if n > 0.0 {
            let s = 1.0 / n.sqrt();
            self.a.iter_mut().chain(self.b.iter_mut()).for_each(|z| *z *= s);
        }
    }

    pub fn m_distribution(&self) -> Distribution {
        Distribution {
            m_min: self.m_min,
            probs: self.a.iter().zip(&self.b).map(|(x, y)| x.norm_sqr() + y.norm_sqr()).collect(),
        }
    }

    /// ⟨L_z⟩ and ⟨L_z²⟩ in units of ħ, ħ² (normalized by the current norm).
    pub fn lz_moments(&self) -> (f64, f64) {
        let (mut n, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (i, (x, y)) in self.a.iter().zip(&self.b).enumerate() {
            let p = x.norm_sqr() + y.norm_sqr();
            let m = (self.m_min + i as i64) as f64;
            n += p;
            s1 += p * m;
            s2 += p * m * m;
        }
        (s1 / n, s2 / n)
    }

    /// Population on the two outermost sites at (lower, upper) edge.
    pub fn edge_leakage(&self) -> (f64, f64) {
        let n = self.len();
        let k = n.min(2);
        let pop = |i: usize| self.a[i].norm_sqr() + self.b[i].norm_sqr();
        let lower = (0..k).map(pop).sum();
        let upper = (n - k..n).map(pop).sum();
        (lower, upper)
    }

    /// Extend the window by `lower` sites below and `upper` above.
    pub fn grow(&mut self, lower: usize, upper: usize) {
        let zero = C64::new(0.0, 0.0);
        let extend = |v: &mut Vec<C64>| {
            let mut out = Vec::with_capacity(v.len() + lower + upper);
            out.extend(std::iter::repeat(zero).take(lower));
            out.extend_from_slice(v);
            out.extend(std::iter::repeat(zero).take(upper));
            *v = out;
        };
        extend(&mut self.a);
        extend(&mut self.b);
        self.m_min -= lower as i64;
    }
}

/// Equipartition width of the thermal m distribution: σ² = 𝒥k_BT/ħ².
pub fn thermal_sigma(t_init: f64, moment_of_inertia: f64, constants: &PhysicalConstants) -> f64 {
    (moment_of_inertia * constants.k_b * t_init).sqrt() / constants.hbar
}

/// Default window for a thermal state of width σ: `±(⌈6σ⌉ + 8)`.
pub fn default_window(sigma: f64) -> (i64, i64) {
    let half = (6.0 * sigma).ceil() as i64 + 8;
    (-half, half)
}

/// Thermal initial state: real amplitudes on chain A with a discrete
/// Gaussian profile whose second moment equals 𝒥k_BT/ħ² exactly.
pub fn thermal_initial_state(
    t_init: f64,
    moment_of_inertia: f64,
    constants: &PhysicalConstants,
    window: Option<(i64, i64)>,
    detuning: f64,
) -> Result<RotorLatticeState> {
    if !(t_init >= 0.0) || !(moment_of_inertia > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t_init ≥ 0 and 𝒥 > 0, got {t_init}, {moment_of_inertia}"
        )));
    }
    let rotor_constant = constants.hbar / (2.0 * moment_of_inertia);
    let sigma = thermal_sigma(t_init, moment_of_inertia, constants);
    let window = window.unwrap_or_else(|| default_window(sigma));
    let reach = (6.0 * sigma).ceil() as i64;
    if window.0 > -reach || window.1 < reach {
        return Err(Error::WindowTooSmall(format!(
            "window {window:?} does not cover ±6σ = ±{reach}"
        )));
    }
    let mut state = RotorLatticeState::empty(window, rotor_constant, detuning)?;
    if sigma == 0.0 {
        state.a[(-window.0) as usize] = C64::new(1.0, 0.0);
        return Ok(state);
    }
    let weights = |s: f64| -> Vec<f64> {
        (window.0..=window.1)
            .map(|m| (-(m * m) as f64 / (2.0 * s * s)).exp())
            .collect()
    };
    let second_moment = |s: f64| -> f64 {
        let w = weights(s);
        let z: f64 = w.iter().sum();
        (window.0..=window.1).zip(&w).map(|(m, p)| (m * m) as f64 * p).sum::<f64>() / z
    };
    let target = sigma * sigma;
    let s = bisect(|s| second_moment(s) - target, 1e-3, 4.0 * sigma + 10.0, 1e-14)?;
    let w = weights(s);
    let z: f64 = w.iter().sum();
    for (amp, p) in state.a.iter_mut().zip(&w) {
        *amp = C64::new((p / z).sqrt(), 0.0);
    }
    Ok(state)
}
