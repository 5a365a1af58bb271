use super::sparse::SparseOp;
use num_complex::Complex64 as C64;

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Spin-1 operators in the basis (m_S = +1, 0, −1), units of ħ.
pub fn spin1_z() -> SparseOp {
    SparseOp::diagonal(&[1.0, 0.0, -1.0])
}

pub fn spin1_plus() -> SparseOp {
    let r2 = 2f64.sqrt();
    SparseOp::from_triplets(3, [(0, 1, c(r2)), (1, 2, c(r2))])
}

pub fn spin1_minus() -> SparseOp {
    spin1_plus().adjoint()
}

/// Spin-½ operators in the basis (+½, −½), units of ħ.
pub fn spin_half_z() -> SparseOp {
    SparseOp::diagonal(&[0.5, -0.5])
}

pub fn spin_half_plus() -> SparseOp {
    SparseOp::from_triplets(2, [(0, 1, c(1.0))])
}

pub fn spin_half_minus() -> SparseOp {
    spin_half_plus().adjoint()
}

/// L_z on `[m_min, m_max]`, units of ħ.
pub fn rotor_lz(m_min: i64, m_max: i64) -> SparseOp {
    let v: Vec<f64> = (m_min..=m_max).map(|m| m as f64).collect();
    SparseOp::diagonal(&v)
}

/// λ^k = e^{ikφ}: unit shift `|m⟩ → |m+k⟩`, truncated at the window edges.
pub fn rotor_shift(m_min: i64, m_max: i64, k: i64) -> SparseOp {
    let n = (m_max - m_min + 1) as usize;
    SparseOp::from_triplets(
        n,
        (0..n as i64)
            .filter(|&i| i + k >= 0 && i + k < n as i64)
            .map(|i| ((i + k) as usize, i as usize, c(1.0))),
    )
}

/// Embed `op` acting on factor `which` of a tensor product with the given
/// factor dimensions (first factor is most significant).
pub fn embed(factors: &[usize], which: usize, op: &SparseOp) -> SparseOp {
    assert_eq!(factors[which], op.dim());
    let mut out = SparseOp::identity(1);
    for (k, &d) in factors.iter().enumerate() {
        let f = if k == which { op.clone() } else { SparseOp::identity(d) };
        out = out.kron(&f);
    }
    out
}

/// NV spin-1 ⊗ P1 spin-½ ⊗ rotor window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeHilbertSpace {
    pub m_min: i64,
    pub m_max: i64,
}

impl CompositeHilbertSpace {
    pub fn new(m_min: i64, m_max: i64) -> Self {
        assert!(m_max >= m_min);
        Self { m_min, m_max }
    }

    pub fn rotor_dim(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    pub fn dim(&self) -> usize {
        6 * self.rotor_dim()
    }

    fn factors(&self) -> [usize; 3] {
        [3, 2, self.rotor_dim()]
    }

    /// Index of (m_S, m_I, m_L); `m_i_twice` is 2·m_I ∈ {+1, −1}.
    pub fn index(&self, m_s: i64, m_i_twice: i64, m_l: i64) -> usize {
        let s = (1 - m_s) as usize;
        let i = if m_i_twice > 0 { 0 } else { 1 };
        (s * 2 + i) * self.rotor_dim() + (m_l - self.m_min) as usize
    }

    /// Inverse of [`index`](Self::index): (m_S, 2·m_I, m_L).
    pub fn labels(&self, index: usize) -> (i64, i64, i64) {
        let n = self.rotor_dim();
        let r = (index % n) as i64 + self.m_min;
        let si = index / n;
        (1 - (si / 2) as i64, if si % 2 == 0 { 1 } else { -1 }, r)
    }

    pub fn is_interior(&self, index: usize, margin: i64) -> bool {
        let (_, _, m) = self.labels(index);
        m >= self.m_min + margin && m <= self.m_max - margin
    }

    pub fn s_z(&self) -> SparseOp {
        embed(&self.factors(), 0, &spin1_z())
    }
    pub fn s_plus(&self) -> SparseOp {
        embed(&self.factors(), 0, &spin1_plus())
    }
    pub fn s_minus(&self) -> SparseOp {
        embed(&self.factors(), 0, &spin1_minus())
    }
    pub fn i_z(&self) -> SparseOp {
        embed(&self.factors(), 1, &spin_half_z())
    }
    pub fn i_plus(&self) -> SparseOp {
        embed(&self.factors(), 1, &spin_half_plus())
    }
    pub fn i_minus(&self) -> SparseOp {
        embed(&self.factors(), 1, &spin_half_minus())
    }
    pub fn l_z(&self) -> SparseOp {
        embed(&self.factors(), 2, &rotor_lz(self.m_min, self.m_max))
    }
    /// λ₊^k (k may be negative for λ₋).
    pub fn lambda(&self, k: i64) -> SparseOp {
        embed(&self.factors(), 2, &rotor_shift(self.m_min, self.m_max, k))
    }
    pub fn j_z(&self) -> SparseOp {
        self.s_z().add(&self.i_z()).add(&self.l_z())
    }
}
