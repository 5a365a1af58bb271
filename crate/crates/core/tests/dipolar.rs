use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rotopump::dipolar::{
    brute_force_transform, build_full_hamiltonian, dipolar_coefficients, dipolar_hamiltonian, full_delta2,
    pair_subspace_indices, spin_phonon_coefficients, truncate_to_pair_subspace, two_pair_from_couplings,
    two_pair_transformed_hamiltonian, CompositeHilbertSpace, PairGeometry, SparseOp, SpinRotorSpace,
};
use rotopump::params::{FieldSpec, PhysicalConstants};
use rotopump::Error;
use std::f64::consts::PI;

const ALPHA: f64 = 1.0;

fn geom(r: f64, theta: f64, varphi: f64) -> PairGeometry {
    PairGeometry::new(r, theta, varphi, 0.0).unwrap()
}

fn dense_max_where(m: &DMatrix<C64>, keep: impl Fn(usize) -> bool) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if keep(i) && keep(j) {
                best = best.max(m[(i, j)].norm());
            }
        }
    }
    best
}

#[test]
fn axial_and_equatorial_coefficients() {
    let d = dipolar_coefficients(&geom(2.0, 0.0, 0.3), ALPHA).unwrap();
    assert_eq!(d.d1.norm(), 0.0);
    assert_eq!(d.d2.norm(), 0.0);
    assert!((d.d0 + 2.0 / 8.0).abs() < 1e-15);
    let d = dipolar_coefficients(&geom(2.0, PI / 2.0, 0.3), ALPHA).unwrap();
    assert!(d.d1.norm() < 1e-16);
    assert!((d.d2.norm() - 0.75 / 8.0).abs() < 1e-15);
    assert!((d.d2.arg() - (0.6 - PI)).abs() < 1e-12);
}

#[test]
fn zero_separation_is_singular() {
    assert!(matches!(PairGeometry::new(0.0, 0.1, 0.0, 0.0), Err(Error::SingularGeometry(_))));
    assert!(matches!(PairGeometry::from_cartesian([0.0; 3]), Err(Error::SingularGeometry(_))));
    let mut g = geom(1.0, 0.5, 0.0);
    g.r = 0.0;
    assert!(matches!(dipolar_coefficients(&g, ALPHA), Err(Error::SingularGeometry(_))));
    assert!(matches!(spin_phonon_coefficients(&g, ALPHA), Err(Error::SingularGeometry(_))));
}

#[test]
fn orientation_average_of_d2_squared() {
    // ⟨|d₂|²⟩ over directions = (9/16)·⟨sin⁴θ⟩ = 3/10 (α = r = 1); midpoint rule in cosθ.
    let n = 200_000;
    let mut acc = 0.0;
    for i in 0..n {
        let u = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
        acc += dipolar_coefficients(&geom(1.0, u.acos(), 0.0), ALPHA).unwrap().d2.norm_sqr();
    }
    assert!((acc / n as f64 - 0.3).abs() < 1e-9);
}

#[test]
fn ladder_commutators_are_exact() {
    let space = CompositeHilbertSpace::new(-5, 5);
    let lz = space.l_z();
    for k in [1i64, -1, 2, -2] {
        let lam = space.lambda(k);
        let dev = lz.commutator(&lam).sub(&lam.scale_real(k as f64)).max_abs();
        assert_eq!(dev, 0.0);
    }
}

#[test]
fn full_hamiltonian_conserves_total_angular_momentum() {
    let c = PhysicalConstants::default();
    let space = CompositeHilbertSpace::new(-4, 5);
    assert_eq!(space.dim(), 60);
    for (theta, varphi) in [(0.3, 0.2), (1.1, 2.5), (2.0, 4.0)] {
        let g = PairGeometry::new(1.3e-9, theta, varphi, 0.4).unwrap();
        let h = build_full_hamiltonian(&g, &FieldSpec::new(0.0497, &c), 1e-30, &c, &space).unwrap();
        let (hd, jd) = (h.to_dense(), space.j_z().to_dense());
        let comm = &hd * &jd - &jd * &hd;
        let keep = |i: usize| space.is_interior(i, 2);
        assert!(dense_max_where(&comm, keep) <= 1e-12 * h.max_abs());
        assert!(h.commutator(&space.j_z()).max_abs_where(keep) <= 1e-12 * h.max_abs());
        assert!(h.is_hermitian(1e-14 * h.max_abs()));
    }
}

#[test]
fn hamiltonian_is_diagonal_without_dipolar_coupling() {
    let c = PhysicalConstants { mu0: 0.0, ..Default::default() };
    let space = CompositeHilbertSpace::new(-3, 3);
    let g = geom(1e-9, 0.9, 0.4);
    let h = build_full_hamiltonian(&g, &FieldSpec::matched(&c), 1e-30, &c, &space).unwrap();
    assert!(h.is_diagonal());
}

#[test]
fn dipolar_operator_is_hermitian() {
    let space = CompositeHilbertSpace::new(-5, 5);
    let h = dipolar_hamiltonian(&geom(1.0, 1.2, 0.7), 3.0, &space).unwrap();
    assert!(h.is_hermitian(1e-14 * h.max_abs()));
}

#[test]
fn restricted_hamiltonian_is_the_rotor_lattice_generator() {
    let c = PhysicalConstants::default();
    let space = CompositeHilbertSpace::new(-6, 6);
    let g = geom(1.5e-9, 0.9, 0.4);
    let inertia = 1e-40;
    let h = build_full_hamiltonian(&g, &FieldSpec::matched(&c), inertia, &c, &space).unwrap();
    let t = truncate_to_pair_subspace(&h, &space).unwrap();
    assert!((t.rotor_constant / (c.hbar / (2.0 * inertia)) - 1.0).abs() < 1e-9);
    assert!(t.detuning.abs() < 1e-3 * c.delta);
    let d2 = dipolar_coefficients(&g, c.alpha_omega()).unwrap().d2;
    // ⟨−1,−½|S₋I₋|0,+½⟩ = √2.
    assert!((t.hop - d2 * 2f64.sqrt()).norm() < 1e-12 * d2.norm());
    let n = space.rotor_dim();
    let reference = t.generator().dense(space.m_min, space.m_max) + DMatrix::identity(2 * n, 2 * n) * C64::new(t.energy_offset, 0.0);
    let dev = (t.block.to_dense() - reference).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    assert!(dev <= 1e-12 * t.block.max_abs());
    // Hops only connect m to m ± 2 across chains.
    for (i, j, v) in t.block.iter() {
        if i != j && v.norm() > 0.0 {
            let (mi, mj) = ((i % n) as i64, (j % n) as i64);
            assert_eq!((mi - mj).abs(), 2);
            assert_ne!(i < n, j < n);
        }
    }
}

#[test]
fn truncation_admixture_scales_with_dipolar_strength() {
    let c = PhysicalConstants::default();
    let space = CompositeHilbertSpace::new(-4, 4);
    let field = FieldSpec::matched(&c);
    let at = |r: f64| {
        let h = build_full_hamiltonian(&geom(r, 0.9, 0.4), &field, 1e-30, &c, &space).unwrap();
        truncate_to_pair_subspace(&h, &space).unwrap()
    };
    let (near, far) = (at(1.5e-9), at(3.0e-9));
    assert!(near.admixture < 0.05, "{}", near.admixture);
    assert!((near.admixture / far.admixture / 8.0 - 1.0).abs() < 1e-2);
    assert!((near.leakage_norm / far.leakage_norm / 8.0 - 1.0).abs() < 1e-9);
    let hd = dipolar_hamiltonian(&geom(1.5e-9, 0.9, 0.4), c.alpha_omega(), &space).unwrap();
    let d = dipolar_coefficients(&geom(1.5e-9, 0.9, 0.4), c.alpha_omega()).unwrap();
    assert!(near.leakage_norm / hd.frobenius() < 1.0);
    assert!(near.admixture < 10.0 * d.d0.abs().max(d.d1.norm()) / c.delta);
}

#[test]
fn zero_coupling_gives_zero_hop() {
    let c = PhysicalConstants { mu0: 0.0, ..Default::default() };
    let space = CompositeHilbertSpace::new(-4, 4);
    let h = build_full_hamiltonian(&geom(1e-9, 0.9, 0.4), &FieldSpec::matched(&c), 1e-30, &c, &space).unwrap();
    let t = truncate_to_pair_subspace(&h, &space).unwrap();
    assert_eq!(t.hop, C64::new(0.0, 0.0));
    assert_eq!(t.leakage_norm, 0.0);
}

#[test]
fn flip_flop_leakage_stays_perturbative() {
    // Oracle: dense Hermitian eigen-decomposition propagator on 6 × 9 states.
    let c = PhysicalConstants::default();
    let space = CompositeHilbertSpace::new(-4, 4);
    let g = geom(2.5e-9, 0.9, 0.4);
    let h = build_full_hamiltonian(&g, &FieldSpec::matched(&c), 1e-30, &c, &space).unwrap();
    let d = dipolar_coefficients(&g, c.alpha_omega()).unwrap();
    let gamma_d = d.d2.norm() / (2.0 * PI);
    let eig = h.to_dense().symmetric_eigen();
    let start = space.index(0, 1, 0);
    let inside = pair_subspace_indices(&space);
    // First-order bound: 4Σ|H_ij / (E_i − E_j)|² out of the subspace, worst subspace state.
    let mut inside_mask = vec![false; space.dim()];
    inside.iter().for_each(|&i| inside_mask[i] = true);
    let mut per_state = vec![0.0; space.dim()];
    for (i, j, v) in h.iter() {
        if inside_mask[j] && !inside_mask[i] {
            per_state[j] += 4.0 * v.norm_sqr() / (h.get(i, i).re - h.get(j, j).re).powi(2);
        }
    }
    let bound = per_state.iter().cloned().fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for k in 0..=400 {
        let t = 10.0 / gamma_d * k as f64 / 400.0;
        let phases = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|e| C64::from_polar(1.0, -e * t)));
        let coeff = eig.eigenvectors.row(start).transpose().map(|z| z.conj()).component_mul(&phases);
        let psi = &eig.eigenvectors * coeff;
        let kept: f64 = inside.iter().map(|&i| psi[i].norm_sqr()).sum();
        worst = worst.max(1.0 - kept);
    }
    assert!(worst < 2.0 * bound && worst < 1e-4, "{worst} vs {bound}");
}

#[test]
fn frame_shift_identities_hold_on_interior() {
    let space = SpinRotorSpace::two_pair_full(-8, 8);
    let u = space.frame_shift(-1).unwrap();
    let ud = u.adjoint();
    let keep = |i: usize| space.is_interior(i, 4);
    for which in 0..2 {
        let dm = full_delta2(&space, which, true);
        let dp = full_delta2(&space, which, false);
        assert!(u.mul(&dm).mul(&ud).sub(&space.lambda(2).mul(&dm)).max_abs_where(keep) <= 1e-12);
        assert!(u.mul(&dp).mul(&ud).sub(&space.lambda(-2).mul(&dp)).max_abs_where(keep) <= 1e-12);
    }
    let lz = space.l_z();
    let shifted = lz.add(&space.k_total());
    assert!(u.mul(&lz.mul(&lz)).mul(&ud).sub(&shifted.mul(&shifted)).max_abs_where(keep) <= 1e-12);
}

#[test]
fn two_pair_matrix_matches_brute_force_conjugation() {
    let space = SpinRotorSpace::two_pair_restricted(-12, 12);
    assert_eq!(space.spin_dim() * 6, 24);
    for (da, db, k) in [
        (C64::new(3.0e4, 1.0e4), C64::new(-2.0e4, 5.0e3), 150.0),
        (C64::from_polar(1e6, 2.0), C64::from_polar(4e5, -0.3), 10.0),
    ] {
        let bf = brute_force_transform(da, db, k, &space).unwrap();
        for l in -6..=6 {
            let analytic = two_pair_from_couplings(da, db, k, -l).matrix;
            let scale = analytic.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let dev = (space.slice(&bf, l) - &analytic).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            assert!(dev <= 1e-10 * scale, "slice {l}: {dev}");
        }
    }
}

#[test]
fn two_pair_terms_and_classification() {
    let k = 25.0;
    let (da, db) = (C64::from_polar(1e5, 0.3), C64::from_polar(3e5, 1.9));
    let h = two_pair_from_couplings(da, db, k, 1);
    assert_eq!(h.transverse, 0.0);
    assert_eq!(h.coupling, 2.0 * k);
    assert!((h.local_fields[0] - 2f64.sqrt() * 1e5).abs() < 1e-9);
    assert!(h.regime_ok);
    assert!(h.dropped_norm > 0.0);
    // Secular form keeps only the flip-flop part of μ_x ⊗ μ_x.
    let diff = &h.matrix - &h.secular;
    assert!((diff.norm() - h.dropped_norm).abs() < 1e-9);
    assert!((h.matrix.clone() - h.matrix.adjoint()).norm() <= 1e-12 * h.matrix.norm());
    assert!(!two_pair_from_couplings(C64::new(1.0, 0.0), db, k, 0).regime_ok);
}

#[test]
fn pair_coupling_is_independent_of_separation() {
    let c = PhysicalConstants::default();
    let k = 40.0;
    let a = geom(1.2e-9, 1.0, 0.2);
    let couplings: Vec<f64> = [1.5e-9, 3e-9, 9e-9]
        .iter()
        .map(|&r| two_pair_transformed_hamiltonian(&a, &geom(r, 0.6, 1.0), c.alpha_omega(), k, 3).unwrap().coupling)
        .collect();
    assert!(couplings.iter().all(|&x| x == 2.0 * k));
}

#[test]
fn spin_phonon_coefficients_special_angles() {
    let s = spin_phonon_coefficients(&geom(2.0, PI / 2.0, 0.0), ALPHA).unwrap();
    assert!(s.b0.abs() < 1e-16 && s.b1.abs() < 1e-16);
    let s = spin_phonon_coefficients(&geom(2.0, 0.0, 0.0), ALPHA).unwrap();
    assert!((s.b0 - 6.0 / 16.0).abs() < 1e-15);
    assert!((s.b1 + 7.0 * 3.0 / 16.0 / 16.0).abs() < 1e-15);
}

#[test]
fn spin_phonon_coefficients_match_finite_difference_gradients() {
    // b₀ = ∂d₀/∂z; the d₁ gradient along w = x + iy (Wirtinger) is b1_gradient.
    let coeffs = |v: [f64; 3]| dipolar_coefficients(&PairGeometry::from_cartesian(v).unwrap(), ALPHA).unwrap();
    for theta in [0.2, 0.7, 1.3, 2.4] {
        let g = geom(1.0, theta, 0.0);
        let p = g.cartesian();
        let h = 1e-5;
        let shifted = |axis: usize, s: f64| {
            let mut q = p;
            q[axis] += s;
            coeffs(q)
        };
        let dz_d0 = (shifted(2, h).d0 - shifted(2, -h).d0) / (2.0 * h);
        let dx_d1 = (shifted(0, h).d1 - shifted(0, -h).d1) / (2.0 * h);
        let dy_d1 = (shifted(1, h).d1 - shifted(1, -h).d1) / (2.0 * h);
        let dw_d1 = (dx_d1 - C64::new(0.0, 1.0) * dy_d1) * 0.5;
        let s = spin_phonon_coefficients(&g, ALPHA).unwrap();
        assert!((dz_d0 - s.b0).abs() <= 1e-6 * s.b0.abs(), "θ = {theta}");
        assert!((dw_d1 - s.b1_gradient).norm() <= 1e-6 * s.b1_gradient.abs(), "θ = {theta}");
    }
    // The printed b₁ is 7/8 of the gradient coefficient on axis.
    let s = spin_phonon_coefficients(&geom(1.0, 0.0, 0.0), ALPHA).unwrap();
    assert!((s.b1 / s.b1_gradient - 7.0 / 8.0).abs() < 1e-14);
}

#[test]
fn sparse_operators_export_as_coordinate_text() {
    let op = SparseOp::from_triplets(2, [(0, 1, C64::new(1.0, -2.0))]);
    let text = op.to_coo_text();
    assert!(text.contains('0') && text.contains('1'));
    assert_eq!(op.nnz(), 1);
}
