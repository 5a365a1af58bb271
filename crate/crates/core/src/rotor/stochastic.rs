use super::propagator::check_step;
use super::state::RotorLatticeState;
use crate::error::Result;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};

/// Reset |−1,−½⟩ → |0,+½⟩ at fixed m: chain-B amplitudes replace chain A,
/// chain B is emptied, and the state is renormalized.
pub fn project_to_a(state: &mut RotorLatticeState) {
    let zero = C64::new(0.0, 0.0);
    for (a, b) in state.a.iter_mut().zip(state.b.iter_mut()) {
        *a = *b;
        *b = zero;
    }
    state.normalize();
}

/// Non-Hermitian no-jump decay of chain B over `dt`; returns the squared
/// norm after decay (the state is left unnormalized).
pub fn no_jump_decay(state: &mut RotorLatticeState, gamma_o: f64, dt: f64) -> f64 {
    let f = (-0.5 * gamma_o * dt).exp();
    state.b.iter_mut().for_each(|z| *z *= f);
    state.norm_sqr()
}

/// First-order quantum jump: with probability `Γ_o·dt·P_B` project chain B
/// onto chain A; otherwise apply the no-jump decay and renormalize.
/// Returns whether a jump fired.
pub fn quantum_jump<R: Rng + ?Sized>(state: &mut RotorLatticeState, gamma_o: f64, dt: f64, rng: &mut R) -> Result<bool> {
    check_step(dt, &[gamma_o])?;
    if gamma_o == 0.0 {
        return Ok(false);
    }
    let p_b = state.population_b() / state.norm_sqr();
    let u: f64 = rng.random();
    if p_b > 0.0 && u < gamma_o * dt * p_b {
        project_to_a(state);
        return Ok(true);
    }
    no_jump_decay(state, gamma_o, dt);
    state.normalize();
    Ok(false)
}

/// Quantum drift: each m column gets an independent phase `e^{iξ_m}`,
/// `ξ_m ~ N(0, 2Γ_L·dt)`, applied to both chains.
pub fn quantum_drift<R: Rng + ?Sized>(state: &mut RotorLatticeState, gamma_l: f64, dt: f64, rng: &mut R) -> Result<()> {
    check_step(dt, &[gamma_l])?;
    if gamma_l == 0.0 {
        return Ok(());
    }
    apply_drift(state, (2.0 * gamma_l * dt).sqrt(), rng);
    Ok(())
}

pub(crate) fn apply_drift<R: Rng + ?Sized>(state: &mut RotorLatticeState, std_dev: f64, rng: &mut R) {
    for (a, b) in state.a.iter_mut().zip(state.b.iter_mut()) {
        let z: f64 = StandardNormal.sample(rng);
        let (s, c) = (std_dev * z).sin_cos();
        let phase = C64::new(c, s);
        *a *= phase;
        *b *= phase;
    }
}
