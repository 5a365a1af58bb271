use rotopump::design::{
    detuning_lineshape, hyperfine_matching_fields, laser_power, laser_power_exact, optical_cycle_ledger,
    oscillator_response, sweep_grid, sweep_spectrum, torque_at, HyperfineModel, OscillatorSpec, Pathway,
    Polarization, SweepSpectrum, TorqueSource,
};
use rotopump::params::{r_max_from_density, PhysicalConstants, RateSet};
use rotopump::rates::{gamma_d_from_ensemble, gamma_sr};
use rotopump::Error;
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn source() -> TorqueSource {
    let c = PhysicalConstants::default();
    let (eta, r_min) = (1e24, 1e-9);
    let r_max = r_max_from_density(eta).unwrap();
    let gd = gamma_d_from_ensemble(eta, r_min, r_max, c.alpha_omega()).unwrap();
    TorqueSource {
        rates: RateSet { gamma_d: gd, gamma_o: 1e5, gamma_l: 0.0, gamma_nv: 1e3, gamma_p1: gd },
        eta,
        r_min,
        r_max,
        volume: PI * 50e-6f64.powi(2) * 300e-6,
    }
}

fn spectrum(n: usize) -> SweepSpectrum {
    let c = PhysicalConstants::default();
    let model = HyperfineModel::default();
    let grid = sweep_grid(&model, 3e-3, n, &c).unwrap();
    sweep_spectrum(&grid, &source(), &model, &OscillatorSpec::default(), &c).unwrap()
}

#[test]
fn no_hyperfine_gives_single_matching_line() {
    let c = PhysicalConstants::default();
    let model = HyperfineModel { a_par: 0.0, a_perp: 0.0, anisotropic: false };
    let lines = hyperfine_matching_fields(&model, &c).unwrap();
    assert_eq!(lines.len(), 1);
    assert!(rel(lines[0].field, c.matching_field()) < 1e-15);
    let model = HyperfineModel { a_par: -1.0, ..model };
    assert!(hyperfine_matching_fields(&model, &c).is_err());
}

#[test]
fn three_lines_split_by_two_millitesla() {
    let c = PhysicalConstants::default();
    let lines = hyperfine_matching_fields(&HyperfineModel::default(), &c).unwrap();
    assert_eq!(lines.len(), 3);
    // Oracle: A/(2γ_e/2π).
    let spacing = 114e6 / (2.0 * c.gamma_e / (2.0 * PI));
    for w in lines.windows(2) {
        assert!(rel(w[1].field - w[0].field, spacing) < 1e-9);
    }
    assert!((spacing - 2.0e-3).abs() < 0.1e-3, "{spacing}");
    assert!((lines[1].field - 0.0512).abs() < 5e-4);
    assert!(rel(lines[0].field + lines[2].field, 2.0 * lines[1].field) < 1e-14);
    assert_eq!(lines[1].label, "isotropic m_N=0");
    assert_eq!(lines.iter().map(|l| l.m_n).collect::<Vec<_>>(), vec![1, 0, -1]);
}

#[test]
fn anisotropic_model_adds_oblique_lines() {
    let c = PhysicalConstants::default();
    let model = HyperfineModel { anisotropic: true, ..Default::default() };
    let lines = hyperfine_matching_fields(&model, &c).unwrap();
    assert_eq!(lines.len(), 5);
    assert!(lines.windows(2).all(|w| w[0].field < w[1].field));
}

#[test]
fn lineshape_is_unity_on_resonance() {
    let r = source().rates;
    assert_eq!(detuning_lineshape(0.0, &r), 1.0);
    let hw = 2.0 * PI * r.gamma_d;
    assert!(rel(detuning_lineshape(hw, &r), 0.5) < 1e-15);
}

#[test]
fn spectrum_has_three_peaks_on_the_lines() {
    let s = spectrum(2001);
    let peaks = s.peak_indices();
    assert_eq!(peaks.len(), 3);
    let step = s.points[1].b_tesla - s.points[0].b_tesla;
    for (p, line) in peaks.iter().zip(&s.lines) {
        assert!((s.points[*p].b_tesla - line.field).abs() <= step);
    }
    let peak = peaks.iter().map(|&i| s.points[i].torque).fold(0.0, f64::max);
    assert!(s.points.iter().all(|p| p.torque >= 0.0));
    for p in &s.points {
        assert!((p.amplitude / p.torque - s.points[peaks[0]].amplitude / s.points[peaks[0]].torque).abs() < 1e-9 * p.amplitude / p.torque);
    }
    // Far wing, 10 mT away from every line.
    let c = PhysicalConstants::default();
    let far = s.lines[0].field - 10e-3;
    let mut grid = vec![far];
    grid.extend(s.lines.iter().map(|l| l.field));
    let wing = sweep_spectrum(&grid, &source(), &HyperfineModel::default(), &OscillatorSpec::default(), &c).unwrap();
    assert!(wing.points[0].torque < 1e-3 * peak);
}

#[test]
fn line_centre_torque_equals_rate_theory() {
    let c = PhysicalConstants::default();
    let src = source();
    let model = HyperfineModel::default();
    let lines = hyperfine_matching_fields(&model, &c).unwrap();
    let fields: Vec<f64> = lines.iter().map(|l| l.field).collect();
    let s = sweep_spectrum(&fields, &src, &model, &OscillatorSpec::default(), &c).unwrap();
    let direct = torque_at(&src, 1.0, &c).unwrap();
    let rep = gamma_sr(&src.rates, src.eta, src.r_min, src.r_max, c.alpha_omega(), c.hbar).unwrap();
    assert!(rel(direct, rep.torque_per_volume * src.volume) < 1e-12);
    for p in &s.points {
        assert_eq!(p.torque, direct);
        let resp = oscillator_response(direct, &OscillatorSpec::default()).unwrap();
        assert!(rel(p.amplitude, resp.amplitude) < 1e-12);
    }
}

#[test]
fn grid_must_cover_all_lines() {
    let c = PhysicalConstants::default();
    let lines = hyperfine_matching_fields(&HyperfineModel::default(), &c).unwrap();
    let short = vec![lines[0].field, lines[1].field];
    let r = sweep_spectrum(&short, &source(), &HyperfineModel::default(), &OscillatorSpec::default(), &c);
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
    assert!(sweep_spectrum(&[], &source(), &HyperfineModel::default(), &OscillatorSpec::default(), &c).is_err());
    assert!(sweep_grid(&HyperfineModel::default(), 1e-3, 1, &c).is_err());
}

#[test]
fn peak_positions_stable_under_refinement() {
    let (coarse, fine) = (spectrum(1001), spectrum(4001));
    let step = coarse.points[1].b_tesla - coarse.points[0].b_tesla;
    let (pc, pf) = (coarse.peak_indices(), fine.peak_indices());
    assert_eq!(pc.len(), pf.len());
    for (a, b) in pc.iter().zip(&pf) {
        assert!((coarse.points[*a].b_tesla - fine.points[*b].b_tesla).abs() <= step);
    }
}

#[test]
fn oscillator_linear_response() {
    let osc = OscillatorSpec::default();
    assert_eq!(oscillator_response(0.0, &osc).unwrap().amplitude, 0.0);
    let a = oscillator_response(1e-17, &osc).unwrap();
    let b = oscillator_response(1e-17, &OscillatorSpec { quality_factor: 2.0 * osc.quality_factor, ..osc }).unwrap();
    assert!(rel(b.amplitude, 2.0 * a.amplitude) < 1e-15);
    let w = 2.0 * PI * osc.resonance_freq;
    assert!(rel(a.amplitude, osc.quality_factor * 1e-17 / (osc.osc_moment_of_inertia * w * w)) < 1e-15);
    assert!(rel(a.snr, 10.0) < 1e-12);
    assert!(oscillator_response(1e-17, &OscillatorSpec { quality_factor: 0.5, ..osc }).is_err());
}

#[test]
fn laser_power_estimate() {
    let (zeta, y_sat, sat) = (50e-6, 1e9, 1e6);
    let p = laser_power(1e5, zeta, y_sat, sat).unwrap();
    assert!(rel(p, 0.780) < 0.01, "{p}");
    assert_eq!(laser_power(0.0, zeta, y_sat, sat).unwrap(), 0.0);
    assert_eq!(laser_power_exact(0.0, zeta, y_sat, sat).unwrap(), 0.0);
    // Oracle: Y/Y_sat = −ln(1 − Γ_o/Γ_o^sat).
    let exact = laser_power_exact(1e5, zeta, y_sat, sat).unwrap();
    assert!(rel(exact, PI * zeta * zeta * y_sat * -(0.9f64.ln())) < 1e-12);
    assert!(rel(exact, p) < 0.06);
    assert!(matches!(laser_power_exact(sat, zeta, y_sat, sat), Err(Error::NoSolution(_))));
    assert!(laser_power(2.0 * sat, zeta, y_sat, sat).is_err());
    assert!(laser_power(1e5, 0.0, y_sat, sat).is_err());
}

#[test]
fn optical_cycle_ledger_table() {
    use Pathway::*;
    use Polarization::*;
    assert_eq!(optical_cycle_ledger(A, Lcp), 0);
    assert_eq!(optical_cycle_ledger(B, Lcp), 2);
    assert_eq!(optical_cycle_ledger(B, Rcp), -2);
    assert_eq!(optical_cycle_ledger(D, Linear), 0);
    for p in [A, B, C, D] {
        assert_eq!(optical_cycle_ledger(p, Lcp), -optical_cycle_ledger(p, Rcp));
        assert_eq!(p.to_string().parse::<Pathway>().unwrap(), p);
    }
    assert!(matches!("e".parse::<Pathway>(), Err(Error::InvalidParameter(_))));
    assert!("elliptic".parse::<Polarization>().is_err());
    assert_eq!(" LCP ".parse::<Polarization>().unwrap(), Lcp);
}
