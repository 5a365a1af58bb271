use super::coefficients::{dipolar_coefficients, PairGeometry};
use super::space::CompositeHilbertSpace;
use super::sparse::SparseOp;
use crate::error::{Error, Result};
use crate::params::{FieldSpec, PhysicalConstants};
use crate::rotor::LatticeGenerator;
use num_complex::Complex64 as C64;

/// Two-spin tensor operators of the dipolar coupling.
pub struct SpinTensors {
    pub delta0: SparseOp,
    pub delta1_minus: SparseOp,
    pub delta1_plus: SparseOp,
    pub delta2_minus: SparseOp,
    pub delta2_plus: SparseOp,
}

impl SpinTensors {
    pub fn new(space: &CompositeHilbertSpace) -> Self {
        let (sz, sp, sm) = (space.s_z(), space.s_plus(), space.s_minus());
        let (iz, ip, im) = (space.i_z(), space.i_plus(), space.i_minus());
        let flip_flop = sm.mul(&ip).add(&sp.mul(&im));
        Self {
            delta0: sz.mul(&iz).sub(&flip_flop.scale_real(0.25)),
            delta1_minus: sz.mul(&im).add(&sm.mul(&iz)),
            delta1_plus: sz.mul(&ip).add(&sp.mul(&iz)),
            delta2_minus: sm.mul(&im),
            delta2_plus: sp.mul(&ip),
        }
    }
}

/// Dipolar coupling dressed with rotor ladder operators, `H_d/ħ` in rad/s.
pub fn dipolar_hamiltonian(geometry: &PairGeometry, alpha_omega: f64, space: &CompositeHilbertSpace) -> Result<SparseOp> {
    let d = dipolar_coefficients(geometry, alpha_omega)?;
    let t = SpinTensors::new(space);
    Ok(t.delta0
        .scale_real(d.d0)
        .add(&space.lambda(1).mul(&t.delta1_minus).scale(d.d1))
        .add(&space.lambda(-1).mul(&t.delta1_plus).scale(d.d1.conj()))
        .add(&space.lambda(2).mul(&t.delta2_minus).scale(d.d2))
        .add(&space.lambda(-2).mul(&t.delta2_plus).scale(d.d2.conj())))
}

/// `H/ħ = ΔS_z² + ω₀S_z + ω₀I_z + H_d/ħ + L_z²/(2𝒥ħ)` in rad/s, spin and
/// rotor operators in units of ħ.
pub fn build_full_hamiltonian(
    geometry: &PairGeometry,
    field: &FieldSpec,
    moment_of_inertia: f64,
    constants: &PhysicalConstants,
    space: &CompositeHilbertSpace,
) -> Result<SparseOp> {
    if !(moment_of_inertia > 0.0) {
        return Err(Error::InvalidParameter("moment of inertia must be > 0".into()));
    }
    let rotor_constant = constants.hbar / (2.0 * moment_of_inertia);
    let sz = space.s_z();
    let lz = space.l_z();
    Ok(sz
        .mul(&sz)
        .scale_real(constants.delta)
        .add(&sz.scale_real(field.omega0))
        .add(&space.i_z().scale_real(field.omega0))
        .add(&dipolar_hamiltonian(geometry, constants.alpha_omega(), space)?)
        .add(&lz.mul(&lz).scale_real(rotor_constant)))
}

/// Restriction of the full generator to span{|0,+½⟩, |−1,−½⟩} ⊗ rotor.
#[derive(Debug, Clone)]
pub struct TruncatedPair {
    /// Restricted operator on `[A(m_min..=m_max), B(m_min..=m_max)]`.
    pub block: SparseOp,
    /// Chain-A energy at m = 0 (a global shift, rad/s).
    pub energy_offset: f64,
    pub rotor_constant: f64,
    /// B − A diagonal offset (rad/s).
    pub detuning: f64,
    /// `⟨B,m+2|H|A,m⟩`, rad/s.
    pub hop: C64,
    /// Frobenius norm of couplings from the subspace to its complement.
    pub leakage_norm: f64,
    /// Largest first-order admixture |H_ij|/|E_i − E_j| out of the subspace.
    pub admixture: f64,
}

impl TruncatedPair {
    pub fn generator(&self) -> LatticeGenerator {
        LatticeGenerator {
            rotor_constant: self.rotor_constant,
            detuning: self.detuning,
            hop: self.hop,
        }
    }
}

pub fn pair_subspace_indices(space: &CompositeHilbertSpace) -> Vec<usize> {
    let a = (space.m_min..=space.m_max).map(|m| space.index(0, 1, m));
    let b = (space.m_min..=space.m_max).map(|m| space.index(-1, -1, m));
    a.chain(b).collect()
}

pub fn truncate_to_pair_subspace(h: &SparseOp, space: &CompositeHilbertSpace) -> Result<TruncatedPair> {
    if space.rotor_dim() < 3 {
        return Err(Error::WindowTooSmall("need at least three rotor sites".into()));
    }
    let idx = pair_subspace_indices(space);
    let block = h.restrict(&idx);
    let n = space.rotor_dim();
    let m0 = space.m_min;
    let e_a = |m: i64| h.get(space.index(0, 1, m), space.index(0, 1, m)).re;
    let e_b = |m: i64| h.get(space.index(-1, -1, m), space.index(-1, -1, m)).re;
    let rotor_constant = (e_a(m0 + 1) - e_a(m0)) / (2 * m0 + 1) as f64;
    let energy_offset = e_a(m0) - rotor_constant * (m0 * m0) as f64;
    let detuning = e_b(m0) - e_a(m0);
    let hop = h.get(space.index(-1, -1, m0 + 2), space.index(0, 1, m0));
    let mut inside = vec![false; space.dim()];
    idx.iter().for_each(|&i| inside[i] = true);
    let mut leak_sq = 0.0;
    let mut admixture: f64 = 0.0;
    for (i, j, v) in h.iter() {
        if inside[j] && !inside[i] {
            leak_sq += 2.0 * v.norm_sqr();
            let gap = (h.get(i, i).re - h.get(j, j).re).abs();
            admixture = admixture.max(if gap > 0.0 { v.norm() / gap } else { f64::INFINITY });
        }
    }
    debug_assert_eq!(block.dim(), 2 * n);
    Ok(TruncatedPair {
        block,
        energy_offset,
        rotor_constant,
        detuning,
        hop,
        leakage_norm: leak_sq.sqrt(),
        admixture,
    })
}
