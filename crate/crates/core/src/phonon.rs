//! Spin-phonon angular-momentum conversion: the second-order (Raman-type)
//! golden-rule channel and the resonant three-level channel.
//!
//! Energies use the dipolar prefactor α_E in J·m³, so b₁ is in J/m and G
//! in J. Dimensionless frequencies are ν = ħω/k_BT.

use crate::dipolar::{spin_phonon_coefficients, PairGeometry, SparseOp};
use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::params::{resonant_wavelength, CrystalSpec, PhysicalConstants, WavelengthConvention};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

/// ∫dΩ_k (k̂·r)⁴ over k̂ directions, as the closed form in θ_r.
pub fn angular_integral_k4(theta_r: f64, r: f64) -> f64 {
    let (s, c) = theta_r.sin_cos();
    PI * r.powi(4) * (24.0 / 15.0 * c * c * s * s + 0.8 * c.powi(4) + 0.8 * s.powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaIntegrals {
    /// ∫dΩ cos²θ sin²θ (3cosθ + 4cos3θ)⁴
    pub mixed: f64,
    /// ∫dΩ (cos⁴θ + sin⁴θ)(3cosθ + 4cos3θ)⁴
    pub quartic: f64,
}

fn angular_weight(t: f64) -> f64 {
    (3.0 * t.cos() + 4.0 * (3.0 * t).cos()).powi(4)
}

/// Solid-angle integrals of the b₁ angular profile, by adaptive quadrature.
pub fn theta_r_integrals() -> Result<ThetaIntegrals> {
    theta_r_integrals_with(angular_weight)
}

/// Same integrals with a caller-supplied replacement for (3cosθ + 4cos3θ)⁴.
pub fn theta_r_integrals_with(weight: impl Fn(f64) -> f64) -> Result<ThetaIntegrals> {
    let pts = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
    let mixed = integrate(
        |t| {
            let (s, c) = t.sin_cos();
            s * c * c * s * s * weight(t)
        },
        &pts,
        1e-12,
        1e-12,
        10_000,
    )?;
    let quartic = integrate(
        |t| {
            let (s, c) = t.sin_cos();
            s * (c.powi(4) + s.powi(4)) * weight(t)
        },
        &pts,
        1e-12,
        1e-12,
        10_000,
    )?;
    Ok(ThetaIntegrals {
        mixed: 2.0 * PI * mixed.value,
        quartic: 2.0 * PI * quartic.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaFactor {
    /// η(r_min⁻⁹ − r_max⁻⁹)·α⁴/(2⁵π)·(1/21), J⁴ for α = α_E.
    pub full: f64,
    /// η·r_min⁻⁹·(α⁴/5)·(1/27π).
    pub simplified: f64,
}

pub fn lambda_factor(eta: f64, r_min: f64, r_max: f64, alpha: f64) -> Result<LambdaFactor> {
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(Error::InvalidParameter(format!("need 0 < r_min < r_max, got {r_min}, {r_max}")));
    }
    let a4 = alpha.powi(4);
    Ok(LambdaFactor {
        full: eta * (r_min.powi(-9) - r_max.powi(-9)) * a4 / (32.0 * PI) / 21.0,
        simplified: eta * r_min.powi(-9) * (a4 / 5.0) / (27.0 * PI),
    })
}

/// ν⁴n(n+1)/((ν₀² − ν²)² + ν₁⁴) with n = 1/(e^ν − 1).
pub fn bose_integrand(nu: f64, nu0: f64, nu1: f64) -> f64 {
    if nu <= 0.0 {
        return 0.0;
    }
    let em1 = nu.exp_m1();
    // n(n+1) = e^ν/(e^ν − 1)²
    let nn1 = (em1 + 1.0) / (em1 * em1);
    let d = (nu0 - nu) * (nu0 + nu);
    nu.powi(4) * nn1 / (d * d + nu1.powi(4))
}

const BOSE_REL_TOL: f64 = 1e-6;
const BOSE_UPPER: f64 = 60.0;

fn bose_breakpoints(nu0: f64, nu1: f64, upper: f64) -> Vec<f64> {
    // Peak half-width in ν is ≈ ν₁²/(2ν₀); bracket it on a geometric ladder.
    let w = nu1 * nu1 / (2.0 * nu0);
    let mut pts = vec![0.0, nu0, 2.0 * nu0, 1.0, upper];
    let mut s = w;
    while s < 10.0 * nu1 && s < 0.5 * nu0 {
        pts.push(nu0 - s);
        pts.push(nu0 + s);
        s *= 10.0;
    }
    pts.push((nu0 - 10.0 * nu1).max(0.5 * nu0));
    pts.push(nu0 + 10.0 * nu1);
    pts.retain(|&p| p >= 0.0 && p <= upper);
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    pts.dedup();
    pts
}

/// Regularized ∫₀^∞ dν ν⁴n(n+1)/((ν₀²−ν²)² + ν₁⁴), in units of k_BT/ħ.
pub fn bose_integral_nu(nu0: f64, nu1: f64) -> Result<f64> {
    partial_bose_integral(nu0, nu1, BOSE_UPPER)
}

/// The same integral truncated at ν′.
pub fn partial_bose_integral(nu0: f64, nu1: f64, upper: f64) -> Result<f64> {
    if !(nu0 > 0.0 && nu1 > 0.0) {
        return Err(Error::InvalidParameter(format!("need ν₀, ν₁ > 0, got {nu0}, {nu1}")));
    }
    let pts = bose_breakpoints(nu0, nu1, upper.min(BOSE_UPPER));
    Ok(integrate(|v| bose_integrand(v, nu0, nu1), &pts, BOSE_REL_TOL, 0.0, 200_000)?.value)
}

/// Bose integral at temperature `t` with ν₀ = ħω₀/k_BT and ν₁ = ħΓ_d/k_BT.
pub fn bose_integral(t: f64, omega0: f64, gamma_d: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("temperature must be > 0, got {t}")));
    }
    bose_integral_nu(consts.nu0(t, omega0), consts.nu1(t, gamma_d))
}

/// Non-resonant second-order rate (s⁻¹):
/// (2π/ħ²)·Λ·ω₀²/(ρ²Vc⁷)·(k_BT/ħ)·𝕀·ρ_ss with ρ_ss = 1/Γ_d.
pub fn gamma_sp2_nonres(crystal: &CrystalSpec, omega0: f64, gamma_d: f64, consts: &PhysicalConstants) -> Result<f64> {
    crystal.validate()?;
    if !(gamma_d > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma_d must be > 0, got {gamma_d}")));
    }
    let lam = lambda_factor(crystal.eta, crystal.r_min, crystal.r_max, consts.alpha_energy())?.full;
    let integral = bose_integral(crystal.temperature, omega0, gamma_d, consts)?;
    Ok(nonres_from_parts(crystal, omega0, gamma_d, lam, integral, consts))
}

fn nonres_from_parts(
    crystal: &CrystalSpec,
    omega0: f64,
    gamma_d: f64,
    lambda: f64,
    integral: f64,
    consts: &PhysicalConstants,
) -> f64 {
    let h = consts.hbar;
    let thermal = consts.k_b * crystal.temperature / h;
    2.0 * PI / (h * h) * lambda * omega0 * omega0 / (crystal.rho.powi(2) * crystal.volume * crystal.c_sound.powi(7))
        * thermal
        * integral
        / gamma_d
}

/// Resonant coupling G (J) for a pair at `geometry` and resonant-mode
/// direction cosine `k_dot` = k̂₀·r̂, in the high-temperature limit.
pub fn resonant_coupling(crystal: &CrystalSpec, geometry: &PairGeometry, k_dot: f64, consts: &PhysicalConstants) -> Result<C64> {
    let b1 = spin_phonon_coefficients(geometry, consts.alpha_energy())?.b1;
    let amp = k_dot * geometry.r * b1 / (2.0 * crystal.c_sound)
        * (consts.k_b * crystal.temperature / (2.0 * crystal.rho * crystal.volume)).sqrt();
    Ok(C64::new(0.0, -amp))
}

/// G with the exact occupation n = 1/(e^{ħω₀/k_BT} − 1) in place of k_BT/ħω₀.
pub fn resonant_coupling_exact(
    crystal: &CrystalSpec,
    geometry: &PairGeometry,
    k_dot: f64,
    omega0: f64,
    consts: &PhysicalConstants,
) -> Result<C64> {
    let approx = resonant_coupling(crystal, geometry, k_dot, consts)?;
    let nu0 = consts.nu0(crystal.temperature, omega0);
    // k_BT → ħω₀·n
    Ok(approx * (nu0 / nu0.exp_m1()).sqrt())
}

/// Hamiltonian of the degenerate triplet {i, g, f}, in the units of G.
pub fn three_level_hamiltonian(g: C64, e: f64) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    let ec = C64::new(e, 0.0);
    DMatrix::from_row_slice(3, 3, &[ec, g, z, g.conj(), ec, g * 2.0, z, g.conj() * 2.0, ec])
}

/// P_{f←i}(t) = (4/25)[1 − cos(√5|G|t/ħ)]².
pub fn three_level_transfer(g_abs: f64, t: f64, hbar: f64) -> f64 {
    let x = 5f64.sqrt() * g_abs * t / hbar;
    let one_minus_cos = 2.0 * (0.5 * x).sin().powi(2);
    0.16 * one_minus_cos * one_minus_cos
}

/// Leading short-time behaviour of [`three_level_transfer`]: (|G|t/ħ)⁴.
pub fn three_level_short_time(g_abs: f64, t: f64, hbar: f64) -> f64 {
    (g_abs * t / hbar).powi(4)
}

/// P_{f←i}(t) from the eigen-decomposition of the triplet Hamiltonian.
pub fn three_level_transfer_numeric(g: C64, t: f64, hbar: f64) -> f64 {
    let h = three_level_hamiltonian(g, 0.0);
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(3, eig.eigenvalues.iter().map(|&w| C64::from_polar(1.0, -w * t / hbar)));
    let v = &eig.eigenvectors;
    let u = v * DMatrix::from_diagonal(&phases) * v.adjoint();
    u[(2, 0)].norm_sqr()
}

/// Resonant rate prefactors: the printed rounding and the exact fourth root.
pub const RESONANT_PREFACTOR: f64 = 0.1;

pub fn resonant_prefactor_exact() -> f64 {
    (4.8f64 / 13120.3).powf(0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonantRate {
    /// With the rounded 1/10 prefactor, s⁻¹ (0 when quenched).
    pub gamma: f64,
    /// With the exact prefactor, s⁻¹ (0 when quenched).
    pub gamma_exact_prefactor: f64,
    /// λ₀³ in m³.
    pub cutoff_volume: f64,
    pub quenched: bool,
}

/// Γ = (α/10cħ)(k_BT/ρV)^{1/2}(2πη/r_min⁹)^{1/4}, zero for V < λ₀³.
pub fn gamma_sp2_res(
    crystal: &CrystalSpec,
    omega0: f64,
    convention: WavelengthConvention,
    consts: &PhysicalConstants,
) -> Result<ResonantRate> {
    crystal.validate()?;
    let lambda0 = resonant_wavelength(crystal.c_sound, omega0, convention);
    let cutoff_volume = lambda0.powi(3);
    let base = consts.alpha_energy() / (crystal.c_sound * consts.hbar)
        * (consts.k_b * crystal.temperature / (crystal.rho * crystal.volume)).sqrt()
        * (2.0 * PI * crystal.eta / crystal.r_min.powi(9)).powf(0.25);
    let quenched = crystal.volume < cutoff_volume;
    let on = if quenched { 0.0 } else { 1.0 };
    Ok(ResonantRate {
        gamma: on * RESONANT_PREFACTOR * base,
        gamma_exact_prefactor: on * resonant_prefactor_exact() * base,
        cutoff_volume,
        quenched,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhononChannelReport {
    pub gamma_sp2_nonres: f64,
    pub gamma_sp2_res: f64,
    pub lambda_factor: f64,
    /// Bose integral in units of k_BT/ħ.
    pub integral_value: f64,
    pub quenched: bool,
}

/// Both channels for one crystal. Γ_d sets the resonance width.
pub fn phonon_channel(
    crystal: &CrystalSpec,
    omega0: f64,
    gamma_d: f64,
    convention: WavelengthConvention,
    consts: &PhysicalConstants,
) -> Result<PhononChannelReport> {
    crystal.validate()?;
    let lam = lambda_factor(crystal.eta, crystal.r_min, crystal.r_max, consts.alpha_energy())?.full;
    let integral = bose_integral(crystal.temperature, omega0, gamma_d, consts)?;
    let res = gamma_sp2_res(crystal, omega0, convention, consts)?;
    Ok(PhononChannelReport {
        gamma_sp2_nonres: nonres_from_parts(crystal, omega0, gamma_d, lam, integral, consts),
        gamma_sp2_res: res.gamma,
        lambda_factor: lam,
        integral_value: integral,
        quenched: res.quenched,
    })
}

/// The printed closed form of the second-order element (J):
/// (k·r)²b₁²ω₀√(n₋(n₊+1))/(2ρVω_k(ω₀² − ω_k²)).
#[allow(clippy::too_many_arguments)]
pub fn second_order_element(
    k_dot_r: f64,
    b1: f64,
    omega0: f64,
    omega_k: f64,
    n_minus: f64,
    n_plus: f64,
    rho: f64,
    volume: f64,
) -> f64 {
    k_dot_r * k_dot_r * b1 * b1 * omega0 * (n_minus * (n_plus + 1.0)).sqrt()
        / (2.0 * rho * volume * omega_k * (omega0 * omega0 - omega_k * omega_k))
}

/// Its squared modulus with n₊ = n₋ = n and k = ω_k/c (J²).
#[allow(clippy::too_many_arguments)]
pub fn second_order_element_sq(
    k_hat_dot_r: f64,
    b1: f64,
    omega0: f64,
    omega_k: f64,
    n: f64,
    rho: f64,
    volume: f64,
    c_sound: f64,
) -> f64 {
    k_hat_dot_r.powi(4) * b1.powi(4) * omega0 * omega0 * omega_k * omega_k * n * (n + 1.0)
        / (4.0 * rho * rho * volume * volume * c_sound.powi(4) * (omega0 * omega0 - omega_k * omega_k).powi(2))
}

/// Parameters of one phonon mode k coupled to an NV–P1 pair at matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanMode {
    pub k_dot_r: f64,
    pub b1: f64,
    pub omega0: f64,
    pub omega_k: f64,
    pub n_minus: usize,
    pub n_plus: usize,
    pub rho: f64,
    pub volume: f64,
    pub hbar: f64,
}

/// Σ_g ⟨f|H|g⟩⟨g|H|i⟩/(E_i − E_g) evaluated by brute force on
/// (a₋ Fock) ⊗ (a₊ Fock) ⊗ NV ⊗ P1 with
/// H = i(k·r)b₁[π₁₋δ₁₊ + π₁₊δ₁₋], π₁± = ±√(ħ/2ρVω_k)(a_∓ + a_±†),
/// δ₁± = S_zI± + S±I_z, and unperturbed energies
/// ħ[Δ S_z² + ω₀(S_z + I_z) + ω_k(n₋ + n₊)] at Δ = 2ω₀.
pub fn second_order_element_explicit(mode: &RamanMode) -> C64 {
    use crate::dipolar::{spin1_minus, spin1_plus, spin1_z, spin_half_minus, spin_half_plus, spin_half_z};
    let nf = mode.n_minus.max(mode.n_plus) + 3;
    let fock_a = SparseOp::from_triplets(nf, (1..nf).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))));
    let fock_id = SparseOp::identity(nf);
    let (s3, s2) = (SparseOp::identity(3), SparseOp::identity(2));
    let on_minus = |op: &SparseOp| op.kron(&fock_id).kron(&s3).kron(&s2);
    let on_plus = |op: &SparseOp| fock_id.kron(op).kron(&s3).kron(&s2);
    let on_spins = |s: &SparseOp, i: &SparseOp| fock_id.kron(&fock_id).kron(s).kron(i);
    let a_m = on_minus(&fock_a);
    let a_p = on_plus(&fock_a);
    let amp = (mode.hbar / (2.0 * mode.rho * mode.volume * mode.omega_k)).sqrt();
    let pi_plus = a_m.add(&a_p.adjoint()).scale_real(amp);
    let pi_minus = a_p.add(&a_m.adjoint()).scale_real(-amp);
    let delta_plus = on_spins(&spin1_z(), &spin_half_plus()).add(&on_spins(&spin1_plus(), &spin_half_z()));
    let delta_minus = on_spins(&spin1_z(), &spin_half_minus()).add(&on_spins(&spin1_minus(), &spin_half_z()));
    let h = pi_minus
        .mul(&delta_plus)
        .add(&pi_plus.mul(&delta_minus))
        .scale(C64::new(0.0, mode.k_dot_r * mode.b1));

    let index = |nm: usize, np: usize, ms: i32, mi2: i32| {
        let s = (1 - ms) as usize;
        let i = if mi2 > 0 { 0 } else { 1 };
        ((nm * nf + np) * 3 + s) * 2 + i
    };
    let energy = |idx: usize| {
        let i = idx % 2;
        let s = (idx / 2) % 3;
        let np = (idx / 6) % nf;
        let nm = idx / (6 * nf);
        let ms = 1.0 - s as f64;
        let mi = if i == 0 { 0.5 } else { -0.5 };
        let delta = 2.0 * mode.omega0;
        mode.hbar * (delta * ms * ms + mode.omega0 * (ms + mi) + mode.omega_k * (nm + np) as f64)
    };
    let i0 = index(mode.n_minus, mode.n_plus, 0, 1);
    let f0 = index(mode.n_minus - 1, mode.n_plus + 1, -1, -1);
    let ei = energy(i0);
    let mut sum = C64::new(0.0, 0.0);
    for (g, col, hgi) in h.iter() {
        if col != i0 || g == i0 {
            continue;
        }
        let hfg = h.get(f0, g);
        if hfg.norm() == 0.0 {
            continue;
        }
        sum += hfg * hgi / (ei - energy(g));
    }
    sum
}

/// Net phonon angular momentum Σ_k (n_{k,+} − n_{k,−}) in units of ħ.
pub fn phonon_angular_momentum(modes: &[(u64, u64)]) -> i64 {
    modes.iter().map(|&(minus, plus)| plus as i64 - minus as i64).sum()
}

/// The Raman step on mode `k`: one RCP phonon absorbed, one LCP emitted.
pub fn raman_transition(modes: &[(u64, u64)], k: usize) -> Result<Vec<(u64, u64)>> {
    let mut out = modes.to_vec();
    let m = out
        .get_mut(k)
        .ok_or_else(|| Error::InvalidParameter(format!("mode {k} out of range")))?;
    if m.0 == 0 {
        return Err(Error::InvalidParameter(format!("mode {k} has no RCP phonon to absorb")));
    }
    m.0 -= 1;
    m.1 += 1;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrand_is_regularized_at_resonance() {
        let (nu0, nu1): (f64, f64) = (2e-3, 1e-5);
        let n = 1.0 / nu0.exp_m1();
        let expect = nu0.powi(4) * n * (n + 1.0) / nu1.powi(4);
        assert!((bose_integrand(nu0, nu0, nu1) / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_are_sorted_and_bracket_peak() {
        let p = bose_breakpoints(2.36e-4, 2.6e-8, 60.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(p.contains(&2.36e-4));
    }
}
