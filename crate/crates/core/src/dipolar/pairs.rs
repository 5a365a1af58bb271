//! Two NV–P1 pairs sharing one rotor: the rotating-frame transformation that
//! strips the ladder operators, the per-pair diagonalizing rotation, and the
//! resulting 4×4 Hamiltonian in each rotor slice.

use super::coefficients::{dipolar_coefficients, PairGeometry};
use super::space::{embed, rotor_lz, rotor_shift, spin1_minus, spin1_plus, spin1_z, spin_half_minus, spin_half_plus, spin_half_z};
use super::sparse::SparseOp;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// A spin register ⊗ rotor window, with the spin part labeled by its total
/// K = Σ(S_z + I_z) (stored doubled to keep it integral).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinRotorSpace {
    pub k_twice: Vec<i64>,
    pub m_min: i64,
    pub m_max: i64,
}

impl SpinRotorSpace {
    /// Two pairs restricted to {|0,+½⟩ (A), |−1,−½⟩ (B)} each; spin index
    /// `2·k_a + k_b` with k = 0 for A and 1 for B.
    pub fn two_pair_restricted(m_min: i64, m_max: i64) -> Self {
        let k = [1, -3];
        Self {
            k_twice: (0..4).map(|s| k[s / 2] + k[s % 2]).collect(),
            m_min,
            m_max,
        }
    }

    /// Two full pairs: (NV spin-1 ⊗ P1 spin-½)⊗(NV spin-1 ⊗ P1 spin-½).
    pub fn two_pair_full(m_min: i64, m_max: i64) -> Self {
        let mut k_twice = Vec::with_capacity(36);
        for sa in [2, 0, -2] {
            for ia in [1, -1] {
                for sb in [2, 0, -2] {
                    for ib in [1, -1] {
                        k_twice.push(sa + ia + sb + ib);
                    }
                }
            }
        }
        Self { k_twice, m_min, m_max }
    }

    pub fn spin_dim(&self) -> usize {
        self.k_twice.len()
    }

    pub fn rotor_dim(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.rotor_dim()
    }

    pub fn index(&self, spin: usize, m: i64) -> usize {
        spin * self.rotor_dim() + (m - self.m_min) as usize
    }

    pub fn rotor_of(&self, index: usize) -> i64 {
        (index % self.rotor_dim()) as i64 + self.m_min
    }

    pub fn l_z(&self) -> SparseOp {
        SparseOp::identity(self.spin_dim()).kron(&rotor_lz(self.m_min, self.m_max))
    }

    pub fn lambda(&self, k: i64) -> SparseOp {
        SparseOp::identity(self.spin_dim()).kron(&rotor_shift(self.m_min, self.m_max, k))
    }

    /// K_tot as a diagonal operator.
    pub fn k_total(&self) -> SparseOp {
        let diag: Vec<f64> = self
            .k_twice
            .iter()
            .flat_map(|&k| std::iter::repeat(k as f64 / 2.0).take(self.rotor_dim()))
            .collect();
        SparseOp::diagonal(&diag)
    }

    /// e^{i·sign·φK_tot}: the partial permutation `|s, m⟩ → |s, m + sign·K_s⟩`,
    /// truncated at the window edges. `sign = −1` is U_φ = exp(−iφK_tot).
    pub fn frame_shift(&self, sign: i64) -> Result<SparseOp> {
        if self.k_twice.iter().any(|k| k % 2 != 0) {
            return Err(Error::InvalidParameter("K_tot must be integral for a rotor shift".into()));
        }
        let mut triplets = Vec::new();
        for (s, &k2) in self.k_twice.iter().enumerate() {
            let shift = sign * k2 / 2;
            for m in self.m_min..=self.m_max {
                let target = m + shift;
                if target >= self.m_min && target <= self.m_max {
                    triplets.push((self.index(s, target), self.index(s, m), c(1.0)));
                }
            }
        }
        Ok(SparseOp::from_triplets(self.dim(), triplets))
    }

    pub fn is_interior(&self, index: usize, margin: i64) -> bool {
        let m = self.rotor_of(index);
        m >= self.m_min + margin && m <= self.m_max - margin
    }

    /// The 4×4 (or spin_dim²) block of `op` at rotor label `m`.
    pub fn slice(&self, op: &SparseOp, m: i64) -> DMatrix<C64> {
        let d = self.spin_dim();
        DMatrix::from_fn(d, d, |i, j| op.get(self.index(i, m), self.index(j, m)))
    }
}

/// δ₂∓ = S∓I∓ of pair `which` (0 = a, 1 = b) on the full two-pair space.
pub fn full_delta2(space: &SpinRotorSpace, which: usize, lowering: bool) -> SparseOp {
    let factors = [3, 2, 3, 2, space.rotor_dim()];
    let (s, i) = if lowering {
        (spin1_minus(), spin_half_minus())
    } else {
        (spin1_plus(), spin_half_plus())
    };
    embed(&factors, 2 * which, &s).mul(&embed(&factors, 2 * which + 1, &i))
}

/// S_z + I_z of pair `which` on the full two-pair space.
pub fn full_pair_kz(space: &SpinRotorSpace, which: usize) -> SparseOp {
    let factors = [3, 2, 3, 2, space.rotor_dim()];
    embed(&factors, 2 * which, &spin1_z()).add(&embed(&factors, 2 * which + 1, &spin_half_z()))
}

/// Pair-restricted two-pair Hamiltonian (rad/s): K·L_z² plus, for each pair,
/// √2·d₂ λ₊²|B⟩⟨A| + h.c. (the √2 is ⟨−1,−½|S₋I₋|0,+½⟩).
pub fn two_pair_hamiltonian(d2a: C64, d2b: C64, rotor_constant: f64, space: &SpinRotorSpace) -> SparseOp {
    let lz = space.l_z();
    let mut h = lz.mul(&lz).scale_real(rotor_constant);
    let n = space.rotor_dim();
    let rotor_up2 = rotor_shift(space.m_min, space.m_max, 2);
    for (which, d2) in [(0usize, d2a), (1usize, d2b)] {
        // |B⟩⟨A| on the chosen pair, identity on the other.
        let flip = SparseOp::from_triplets(2, [(1, 0, c(1.0))]);
        let spin = if which == 0 {
            flip.kron(&SparseOp::identity(2))
        } else {
            SparseOp::identity(2).kron(&flip)
        };
        let term = spin.kron(&rotor_up2).scale(d2 * 2f64.sqrt());
        h = h.add(&term).add(&term.adjoint());
        debug_assert_eq!(term.dim(), 4 * n);
    }
    h
}

/// Per-pair rotation diagonalizing √2(d₂|B⟩⟨A| + d₂*|A⟩⟨B|) into d₂′μ_z′
/// with d₂′ = √2|d₂|, phased so that U(S_z+I_z)U† = −½ − μ_x′.
pub fn u_mu_pair(d2: C64) -> DMatrix<C64> {
    let e = C64::from_polar(1.0, d2.arg());
    let h = FRAC_1_SQRT_2;
    // rows are ⟨+′| and ⟨−′| with |+′⟩ = (1, e^{iθ})/√2, |−′⟩ = (−1, e^{iθ})/√2
    DMatrix::from_row_slice(2, 2, &[c(h), e.conj() * h, c(-h), e.conj() * h])
}

pub fn u_mu_total(d2a: C64, d2b: C64, space: &SpinRotorSpace) -> SparseOp {
    let ua = SparseOp::from_dense(&u_mu_pair(d2a));
    let ub = SparseOp::from_dense(&u_mu_pair(d2b));
    ua.kron(&ub).kron(&SparseOp::identity(space.rotor_dim()))
}

/// U_μ·V·H·V†·U_μ† with V = e^{+iφK_tot}, the frame in which the λ₊²
/// factors cancel for λ₊ raising m. In that frame the slice at L_z = ℓ
/// equals the analytic slice matrix at m = −ℓ.
pub fn brute_force_transform(d2a: C64, d2b: C64, rotor_constant: f64, space: &SpinRotorSpace) -> Result<SparseOp> {
    let h = two_pair_hamiltonian(d2a, d2b, rotor_constant, space);
    let v = space.frame_shift(1)?;
    let u = u_mu_total(d2a, d2b, space);
    Ok(u.mul(&v).mul(&h).mul(&v.adjoint()).mul(&u.adjoint()))
}

#[derive(Debug, Clone)]
pub struct TwoPairHamiltonian {
    /// Basis μ_a ⊗ μ_b with index `2·i_a + i_b`, i = 0 for +′ and 1 for −′.
    pub matrix: DMatrix<C64>,
    /// Same, keeping only μ₊μ₋ + μ₋μ₊ in the pair–pair term.
    pub secular: DMatrix<C64>,
    /// d₂′ of each pair (rad/s).
    pub local_fields: [f64; 2],
    /// Coefficient of μ_x′ on each pair: (ħ/𝒥)(1 − m) = 2K(1 − m).
    pub transverse: f64,
    /// Pair–pair coupling ħ/𝒥 = 2K, independent of the inter-pair distance.
    pub coupling: f64,
    /// Scalar offset K(m² − 2m + 3).
    pub offset: f64,
    /// Frobenius norm of the dropped μ₊μ₊ + μ₋μ₋ terms.
    pub dropped_norm: f64,
    /// True when d₂′ ≥ 10·ħ/𝒥 for both pairs.
    pub regime_ok: bool,
}

fn pauli() -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let i2 = DMatrix::identity(2, 2);
    let sx = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let sy = DMatrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]);
    let sz = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    (i2, sx, sy, sz)
}

/// Slice-m Hamiltonian of two pairs in the rotating, diagonalizing frame
/// (rad/s): Σ d₂′μ_z′ + K(m²−2m+3) + 2K(1−m)Σμ_x′ + 2K μ_x′⊗μ_x′, with
/// K = ħ/(2𝒥).
pub fn two_pair_transformed_hamiltonian(
    pair_a: &PairGeometry,
    pair_b: &PairGeometry,
    alpha_omega: f64,
    rotor_constant: f64,
    m: i64,
) -> Result<TwoPairHamiltonian> {
    let da = dipolar_coefficients(pair_a, alpha_omega)?.d2;
    let db = dipolar_coefficients(pair_b, alpha_omega)?.d2;
    Ok(two_pair_from_couplings(da, db, rotor_constant, m))
}

pub fn two_pair_from_couplings(d2a: C64, d2b: C64, rotor_constant: f64, m: i64) -> TwoPairHamiltonian {
    let (i2, sx, sy, sz) = pauli();
    let kron = |a: &DMatrix<C64>, b: &DMatrix<C64>| a.kronecker(b);
    let k = rotor_constant;
    let mf = m as f64;
    let fa = 2f64.sqrt() * d2a.norm();
    let fb = 2f64.sqrt() * d2b.norm();
    let transverse = 2.0 * k * (1.0 - mf);
    let coupling = 2.0 * k;
    let offset = k * (mf * mf - 2.0 * mf + 3.0);
    let local = kron(&sz, &i2) * c(fa) + kron(&i2, &sz) * c(fb);
    let field = (kron(&sx, &i2) + kron(&i2, &sx)) * c(transverse);
    let xx = kron(&sx, &sx);
    let yy = kron(&sy, &sy);
    let base = local + field + DMatrix::identity(4, 4) * c(offset);
    let matrix = &base + &xx * c(coupling);
    let secular = &base + (&xx + &yy) * c(0.5 * coupling);
    let dropped = (&xx - &yy) * c(0.5 * coupling);
    TwoPairHamiltonian {
        matrix,
        secular,
        local_fields: [fa, fb],
        transverse,
        coupling,
        offset,
        dropped_norm: dropped.norm(),
        regime_ok: fa.min(fb) >= 10.0 * coupling,
    }
}
