use super::propagator::{build_propagator_step, check_step, LatticeGenerator, PropagatorStep};
use super::state::{Distribution, RotorLatticeState};
use super::stochastic::{apply_drift, no_jump_decay, project_to_a};
use crate::error::{Error, Result};
use crate::params::RateSet;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Edge population above which the window is grown.
pub const LEAKAGE_THRESHOLD: f64 = 1e-6;
/// Fractional window growth per leakage event.
pub const GROWTH_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpScheme {
    /// Bernoulli trial each step with probability `Γ_o·dt·P_B`.
    PerStep,
    /// Jump when the accumulated no-jump survival drops below a uniform draw.
    WaitingTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub t_total: f64,
    pub seed: u64,
    pub rates: RateSet,
    pub snapshot_stride: usize,
    /// Hop angular frequency in units of Γ_d (`g = hop_factor·Γ_d`, rad/s).
    pub hop_factor: f64,
    pub max_sites: usize,
    pub jump_scheme: JumpScheme,
    pub record_distributions: bool,
}

impl TrajectoryConfig {
    pub fn new(dt: f64, t_total: f64, seed: u64, rates: RateSet) -> Self {
        Self {
            dt,
            t_total,
            seed,
            rates,
            snapshot_stride: 100,
            hop_factor: 1.0,
            max_sites: 20_000,
            jump_scheme: JumpScheme::WaitingTime,
            record_distributions: true,
        }
    }

    pub fn hop(&self) -> C64 {
        C64::new(self.hop_factor * self.rates.gamma_d, 0.0)
    }

    pub fn steps(&self) -> u64 {
        (self.t_total / self.dt).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be ≥ 1".into()));
        }
        if !(self.t_total >= 0.0) {
            return Err(Error::Config("t_total must be ≥ 0".into()));
        }
        if !(self.hop_factor >= 0.0) {
            return Err(Error::Config("hop_factor must be ≥ 0".into()));
        }
        let r = &self.rates;
        check_step(self.dt, &[r.gamma_d, self.hop().norm(), r.gamma_o, r.gamma_l])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    /// ⟨L_z⟩/ħ
    pub mean_lz: Vec<f64>,
    /// ⟨L_z²⟩/ħ²
    pub lz_second_moment: Vec<f64>,
    /// ⟨E_rot⟩ in J.
    pub rotational_energy: Vec<f64>,
    pub distributions: Vec<Distribution>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn variance(&self) -> Vec<f64> {
        self.mean_lz
            .iter()
            .zip(&self.lz_second_moment)
            .map(|(m, s)| s - m * m)
            .collect()
    }

    fn record(&mut self, t: f64, state: &RotorLatticeState, hbar: f64, with_distribution: bool) {
        let (m1, m2) = state.lz_moments();
        self.times.push(t);
        self.mean_lz.push(m1);
        self.lz_second_moment.push(m2);
        self.rotational_energy.push(hbar * state.rotor_constant * m2);
        if with_distribution {
            let mut d = state.m_distribution();
            let z = d.total();
            d.probs.iter_mut().for_each(|p| *p /= z);
            self.distributions.push(d);
        }
    }

    pub fn append(&mut self, other: ObservableSeries) {
        self.times.extend(other.times);
        self.mean_lz.extend(other.mean_lz);
        self.lz_second_moment.extend(other.lz_second_moment);
        self.rotational_energy.extend(other.rotational_energy);
        self.distributions.extend(other.distributions);
    }
}

/// Deterministic per-trajectory seed from a base seed and an index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined word
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A resumable stochastic trajectory: each step applies the Strang
/// propagator, then the jump (or no-jump decay), then the drift.
#[derive(Debug, Clone)]
pub struct Trajectory {
    config: TrajectoryConfig,
    state: RotorLatticeState,
    propagator: PropagatorStep,
    rng: ChaCha8Rng,
    step_index: u64,
    survival: f64,
    threshold: f64,
    hbar: f64,
    jumps: u64,
}

impl Trajectory {
    pub fn new(config: TrajectoryConfig, initial: RotorLatticeState, hbar: f64) -> Result<Self> {
        config.validate()?;
        let n = initial.norm_sqr();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("initial state norm² = {n}")));
        }
        let generator = LatticeGenerator::for_state(&initial, config.hop());
        let propagator = build_propagator_step(&initial, &generator, config.dt)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let threshold = rng.random::<f64>();
        Ok(Self {
            config,
            state: initial,
            propagator,
            rng,
            step_index: 0,
            survival: 1.0,
            threshold,
            hbar,
            jumps: 0,
        })
    }

    pub fn config(&self) -> &TrajectoryConfig {
        &self.config
    }

    pub fn state(&self) -> &RotorLatticeState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.config.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn jumps(&self) -> u64 {
        self.jumps
    }

    pub fn set_detuning(&mut self, detuning: f64) -> Result<()> {
        self.state.detuning = detuning;
        self.rebuild()
    }

    fn rebuild(&mut self) -> Result<()> {
        let generator = LatticeGenerator::for_state(&self.state, self.config.hop());
        self.propagator = build_propagator_step(&self.state, &generator, self.config.dt)?;
        Ok(())
    }

    fn record(&self, series: &mut ObservableSeries) {
        series.record(self.time(), &self.state, self.hbar, self.config.record_distributions);
    }

    fn maybe_grow(&mut self) -> Result<()> {
        let (lo, hi) = self.state.edge_leakage();
        if lo <= LEAKAGE_THRESHOLD && hi <= LEAKAGE_THRESHOLD {
            return Ok(());
        }
        let add = ((self.state.len() as f64 * GROWTH_FRACTION).ceil() as usize).max(2);
        let lower = if lo > LEAKAGE_THRESHOLD { add } else { 0 };
        let upper = if hi > LEAKAGE_THRESHOLD { add } else { 0 };
        if self.state.len() + lower + upper > self.config.max_sites {
            return Err(Error::ResourceLimit(format!(
                "window would exceed {} sites at t = {:.3e} s",
                self.config.max_sites,
                self.time()
            )));
        }
        self.state.grow(lower, upper);
        self.rebuild()
    }

    /// Advance one step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.config.dt;
        let rates = self.config.rates;
        self.propagator.apply(&mut self.state);
        if rates.gamma_o > 0.0 {
            match self.config.jump_scheme {
                JumpScheme::PerStep => {
                    let p_b = self.state.population_b();
                    let u: f64 = self.rng.random();
                    if p_b > 0.0 && u < rates.gamma_o * dt * p_b {
                        project_to_a(&mut self.state);
                        self.jumps += 1;
                    } else {
                        no_jump_decay(&mut self.state, rates.gamma_o, dt);
                        self.state.normalize();
                    }
                }
                JumpScheme::WaitingTime => {
                    let kept = no_jump_decay(&mut self.state, rates.gamma_o, dt);
                    self.survival *= kept;
                    if self.survival < self.threshold {
                        project_to_a(&mut self.state);
                        self.jumps += 1;
                        self.survival = 1.0;
                        self.threshold = self.rng.random();
                    } else {
                        self.state.normalize();
                    }
                }
            }
        }
        if rates.gamma_l > 0.0 {
            apply_drift(&mut self.state, (2.0 * rates.gamma_l * dt).sqrt(), &mut self.rng);
        }
        self.step_index += 1;
        self.maybe_grow()
    }

    /// Advance `steps` steps, recording whenever the global step index is a
    /// multiple of the snapshot stride.
    pub fn advance(&mut self, steps: u64, series: &mut ObservableSeries) -> Result<()> {
        let stride = self.config.snapshot_stride as u64;
        for _ in 0..steps {
            self.step()?;
            if self.step_index % stride == 0 {
                self.record(series);
            }
        }
        Ok(())
    }
}

/// Run one trajectory from `initial` over the configured horizon. The
/// initial state is recorded at t = 0.
pub fn run_trajectory(config: &TrajectoryConfig, initial: &RotorLatticeState, hbar: f64) -> Result<ObservableSeries> {
    let mut traj = Trajectory::new(*config, initial.clone(), hbar)?;
    let mut series = ObservableSeries::default();
    traj.record(&mut series);
    traj.advance(config.steps(), &mut series)?;
    Ok(series)
}

/// Pointwise mean of per-seed series. Runs are summed in ascending seed
/// order so the result does not depend on the order they are passed in.
pub fn average_ensemble(runs: &[(u64, ObservableSeries)]) -> Result<ObservableSeries> {
    if runs.len() < 2 {
        return Err(Error::Config("ensemble needs at least two trajectories".into()));
    }
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by_key(|&i| runs[i].0);
    if order.windows(2).any(|w| runs[w[0]].0 == runs[w[1]].0) {
        return Err(Error::Config("ensemble seeds must be distinct".into()));
    }
    let reference = &runs[order[0]].1;
    for &i in &order {
        let s = &runs[i].1;
        if s.times != reference.times || s.distributions.len() != reference.distributions.len() {
            return Err(Error::Config("mismatched time grids in ensemble".into()));
        }
    }
    let n = runs.len() as f64;
    let len = reference.len();
    let mean_of = |pick: &dyn Fn(&ObservableSeries) -> &Vec<f64>| -> Vec<f64> {
        let mut acc = vec![0.0; len];
        for &i in &order {
            for (a, v) in acc.iter_mut().zip(pick(&runs[i].1)) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    };
    let mut out = ObservableSeries {
        times: reference.times.clone(),
        mean_lz: mean_of(&|s| &s.mean_lz),
        lz_second_moment: mean_of(&|s| &s.lz_second_moment),
        rotational_energy: mean_of(&|s| &s.rotational_energy),
        distributions: Vec::with_capacity(reference.distributions.len()),
    };
    for k in 0..reference.distributions.len() {
        let lo = order.iter().map(|&i| runs[i].1.distributions[k].m_min).min().unwrap_or(0);
        let hi = order.iter().map(|&i| runs[i].1.distributions[k].m_max()).max().unwrap_or(0);
        let mut probs = vec![0.0; (hi - lo + 1) as usize];
        for &i in &order {
            let d = &runs[i].1.distributions[k];
            let off = (d.m_min - lo) as usize;
            for (j, p) in d.probs.iter().enumerate() {
                probs[off + j] += p;
            }
        }
        probs.iter_mut().for_each(|p| *p /= n);
        out.distributions.push(Distribution { m_min: lo, probs });
    }
    Ok(out)
}

/// A set of trajectories with index-derived seeds, advanced in parallel.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(u64, Trajectory)>,
}

impl Ensemble {
    pub fn new(config: &TrajectoryConfig, initial: &RotorLatticeState, size: usize, hbar: f64) -> Result<Self> {
        let members = (0..size as u64)
            .map(|i| {
                let seed = derive_seed(config.seed, i);
                let cfg = TrajectoryConfig { seed, ..*config };
                Trajectory::new(cfg, initial.clone(), hbar).map(|t| (seed, t))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }

    pub fn members(&self) -> impl Iterator<Item = &Trajectory> {
        self.members.iter().map(|(_, t)| t)
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn time(&self) -> f64 {
        self.members.first().map_or(0.0, |(_, t)| t.time())
    }

    /// Ensemble mean of the current instantaneous observables.
    pub fn snapshot(&self) -> Result<ObservableSeries> {
        let runs: Vec<(u64, ObservableSeries)> = self
            .members
            .iter()
            .map(|(s, t)| {
                let mut series = ObservableSeries::default();
                t.record(&mut series);
                (*s, series)
            })
            .collect();
        average_ensemble(&runs)
    }

    /// Advance every member by `steps`, returning the ensemble mean of what
    /// was recorded during the advance.
    pub fn advance(&mut self, steps: u64) -> Result<ObservableSeries> {
        let runs = self
            .members
            .par_iter_mut()
            .map(|(seed, traj)| {
                let mut series = ObservableSeries::default();
                traj.advance(steps, &mut series).map(|_| (*seed, series))
            })
            .collect::<Result<Vec<_>>>()?;
        average_ensemble(&runs)
    }

    pub fn set_detuning(&mut self, detuning: f64) -> Result<()> {
        self.members.iter_mut().try_for_each(|(_, t)| t.set_detuning(detuning))
    }
}

/// Run `size` trajectories (seeds derived from `config.seed`) and average.
pub fn run_ensemble(
    config: &TrajectoryConfig,
    initial: &RotorLatticeState,
    size: usize,
    hbar: f64,
) -> Result<ObservableSeries> {
    let mut ensemble = Ensemble::new(config, initial, size, hbar)?;
    let mut series = ensemble.snapshot()?;
    series.append(ensemble.advance(config.steps())?);
    Ok(series)
}
