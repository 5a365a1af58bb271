use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Square complex operator stored as a coordinate map with no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: BTreeMap<(usize, usize), C64>,
}

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_triplets(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, C64::new(v, 0.0))))
    }

    /// Duplicate coordinates are summed.
    pub fn from_triplets<I: IntoIterator<Item = (usize, usize, C64)>>(dim: usize, triplets: I) -> Self {
        let mut op = Self::zeros(dim);
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "entry ({i}, {j}) outside dimension {dim}");
            op.add_entry(i, j, v);
        }
        op
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut op = Self::zeros(m.nrows());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                op.add_entry(i, j, m[(i, j)]);
            }
        }
        op
    }

    fn add_entry(&mut self, i: usize, j: usize, v: C64) {
        if v == C64::new(0.0, 0.0) {
            return;
        }
        let e = self.entries.entry((i, j)).or_insert(C64::new(0.0, 0.0));
        *e += v;
        if *e == C64::new(0.0, 0.0) {
            self.entries.remove(&(i, j));
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries.get(&(i, j)).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(i, j, v)| (i, j, v * s)))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_real(-1.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); other.dim];
        for (k, j, v) in other.iter() {
            rows[k].push((j, v));
        }
        let mut out = Self::zeros(self.dim);
        for (i, k, a) in self.iter() {
            for &(j, b) in &rows[k] {
                out.add_entry(i, j, a * b);
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let n = other.dim;
        let mut out = Self::zeros(self.dim * n);
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                out.add_entry(i * n + k, j * n + l, a * b);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |entry| restricted to rows and columns accepted by `keep`.
    pub fn max_abs_where<F: Fn(usize) -> bool>(&self, keep: F) -> f64 {
        self.iter()
            .filter(|(i, j, _)| keep(*i) && keep(*j))
            .fold(0.0, |m, (_, _, v)| m.max(v.norm()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).max_abs() <= tol * self.max_abs().max(1.0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.keys().all(|(i, j)| i == j)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim];
        for (p, &i) in indices.iter().enumerate() {
            pos[i] = p;
        }
        Self::from_triplets(
            indices.len(),
            self.iter()
                .filter(|(i, j, _)| pos[*i] != usize::MAX && pos[*j] != usize::MAX)
                .map(|(i, j, v)| (pos[i], pos[j], v)),
        )
    }

    /// Coordinate-list text: a `dim nnz` header then `row col re im` lines.
    pub fn to_coo_text(&self) -> String {
        let mut s = format!("{} {}\n", self.dim, self.nnz());
        for (i, j, v) in self.iter() {
            let _ = writeln!(s, "{i} {j} {:.17e} {:.17e}", v.re, v.im);
        }
        s
    }
}
