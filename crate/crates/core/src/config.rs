//! Flat `key = value` parameter files. Keys carry their SI unit as a suffix
//! (`gamma_d_hz`, `volume_m3`); densities may instead be given in ppm of
//! carbon sites with a `_ppm` suffix.

use crate::design::{HyperfineModel, OscillatorSpec};
use crate::error::{Error, Result};
use crate::params::{r_max_from_density, CrystalSpec, FieldSpec, Geometry, PhysicalConstants, RateSet, WavelengthConvention};
use crate::rotor::JumpScheme;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Every key the parameter file may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    // rates
    "gamma_d_hz",
    "gamma_o_hz",
    "gamma_l_hz",
    "gamma_nv_hz",
    "gamma_p1_hz",
    "gamma_l_values_hz",
    "gamma_o_min_hz",
    "gamma_o_max_hz",
    "gamma_o_points",
    // sample
    "temperature_k",
    "b_field_t",
    "eta_m3",
    "eta_ppm",
    "r_min_m",
    "r_max_m",
    "rho_kg_m3",
    "c_sound_m_s",
    "volume_m3",
    "geometry",
    "cylinder_radius_m",
    "wavelength_convention",
    // trajectories
    "rotor_constant_rad_s",
    "detuning_rad_s",
    "dt_s",
    "t_total_s",
    "snapshot_stride",
    "trajectories",
    "hop_factor",
    "max_sites",
    "jump_scheme",
    "init_temperature_k",
    "init_sigma",
    "record_distributions",
    "fit_start_s",
    "fit_end_s",
    // phonon
    "phonon_gamma_d_hz",
    "volume_min_m3",
    "volume_max_m3",
    "volume_points",
    // design
    "a_par_hz",
    "a_perp_hz",
    "hyperfine_anisotropic",
    "sweep_margin_t",
    "sweep_points",
    "osc_freq_hz",
    "osc_q",
    "osc_inertia_kg_m2",
    "osc_noise_floor_nm",
    "spot_radius_m",
    "thickness_m",
    "y_sat_w_m2",
    "gamma_o_sat_hz",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamFile {
    values: BTreeMap<String, String>,
}

impl ParamFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`, got `{raw}`", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if file.values.contains_key(k) {
                return Err(Error::Parse(format!("line {}: duplicate key `{k}`", no + 1)));
            }
            file.insert(k, v).map_err(|e| match e {
                Error::Parse(m) => Error::Parse(format!("line {}: {m}", no + 1)),
                other => other,
            })?;
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn insert(&mut self, key: &str, value: &str) -> Result<()> {
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
            return Err(Error::Parse(format!("invalid key `{key}`")));
        }
        if value.is_empty() {
            return Err(Error::Parse(format!("empty value for `{key}`")));
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Apply a `key=value` override, replacing any existing value.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("override `{assignment}` is not key=value")))?;
        self.insert(k.trim(), v.trim())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Sorted `key = value` lines; the hashed identity of a run.
    pub fn canonical_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse(format!("`{key}`: `{v}` is not a finite number")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        self.values.get(key).map_or(Ok(default), |v| {
            v.parse::<u64>()
                .map_err(|_| Error::Parse(format!("`{key}`: `{v}` is not a non-negative integer")))
        })
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        self.values.get(key).map_or(Ok(default), |v| match v.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(Error::Parse(format!("`{key}`: `{v}` is not a boolean"))),
        })
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map_or(default, String::as_str)
    }

    /// Comma-separated list of numbers.
    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.values
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| Error::Parse(format!("`{key}`: `{s}` is not a finite number")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// A number density from `<stem>_m3` or `<stem>_ppm` (not both).
    pub fn density(&self, stem: &str, consts: &PhysicalConstants) -> Result<Option<f64>> {
        let m3 = self.opt_f64(&format!("{stem}_m3"))?;
        let ppm = self.opt_f64(&format!("{stem}_ppm"))?;
        match (m3, ppm) {
            (Some(_), Some(_)) => Err(Error::Config(format!("give either {stem}_m3 or {stem}_ppm, not both"))),
            (Some(v), None) => Ok(Some(v)),
            (None, Some(p)) => Ok(Some(consts.ppm_to_density(p))),
            (None, None) => Ok(None),
        }
    }
}

/// Fully defaulted, typed view of a parameter file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub consts: PhysicalConstants,
    pub seed: u64,
    pub rates: RateSet,
    /// True when Γ_d came from the ensemble formula rather than the file.
    pub gamma_d_from_ensemble: bool,
    pub gamma_l_values: Vec<f64>,
    pub gamma_o_grid: Vec<f64>,
    pub field: FieldSpec,
    pub crystal: CrystalSpec,
    pub wavelength: WavelengthConvention,
    pub simulation: SimulationParams,
    pub phonon_gamma_d: f64,
    pub volume_grid: Vec<f64>,
    pub hyperfine: HyperfineModel,
    pub sweep_margin: f64,
    pub sweep_points: usize,
    pub oscillator: OscillatorSpec,
    pub spot_radius: f64,
    pub thickness: f64,
    pub y_sat: f64,
    pub gamma_o_sat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationParams {
    /// K = ħ/2𝒥 in rad/s.
    pub rotor_constant: f64,
    pub detuning: f64,
    pub dt: f64,
    pub t_total: f64,
    pub snapshot_stride: usize,
    pub trajectories: usize,
    pub hop_factor: f64,
    pub max_sites: usize,
    pub jump_scheme: JumpScheme,
    /// Width of the initial m distribution.
    pub init_sigma: f64,
    pub record_distributions: bool,
    pub fit_window: Option<(f64, f64)>,
}

fn log_grid(lo: f64, hi: f64, n: usize, what: &str) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::Config(format!("{what}: need 0 < min < max and at least 2 points")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

fn usize_of(v: u64, key: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Config(format!("`{key}` too large")))
}

impl RunParams {
    pub fn from_file(file: &ParamFile) -> Result<Self> {
        let consts = PhysicalConstants::default();
        let temperature = file.f64_or("temperature_k", 293.0)?;
        let eta = file.density("eta", &consts)?.unwrap_or(1e24);
        let r_min = file.f64_or("r_min_m", 1e-9)?;
        let r_max = match file.opt_f64("r_max_m")? {
            Some(v) => v,
            None => r_max_from_density(eta)?,
        };
        let rho = file.f64_or("rho_kg_m3", CrystalSpec::DIAMOND_RHO)?;
        let c_sound = file.f64_or("c_sound_m_s", CrystalSpec::DIAMOND_C_SOUND)?;
        let volume = file.f64_or("volume_m3", 1e-12)?;
        let geometry = match file.str_or("geometry", "sphere") {
            "sphere" => Geometry::Sphere,
            "cylinder" => Geometry::Cylinder {
                radius: file
                    .opt_f64("cylinder_radius_m")?
                    .ok_or_else(|| Error::Config("geometry = cylinder needs cylinder_radius_m".into()))?,
            },
            other => return Err(Error::Config(format!("unknown geometry `{other}`"))),
        };
        let crystal = CrystalSpec::new(rho, c_sound, volume, temperature, eta, r_min, r_max, geometry)?;
        let wavelength = match file.str_or("wavelength_convention", "cyclic") {
            "cyclic" => WavelengthConvention::Cyclic,
            "angular" => WavelengthConvention::Angular,
            other => return Err(Error::Config(format!("unknown wavelength_convention `{other}`"))),
        };
        let field = match file.opt_f64("b_field_t")? {
            Some(b) => FieldSpec::new(b, &consts),
            None => FieldSpec::matched(&consts),
        };

        let ensemble_gd = crate::rates::gamma_d_from_ensemble(eta, r_min, r_max, consts.alpha_omega())?;
        let gamma_d_from_ensemble = !file.contains("gamma_d_hz");
        let gamma_d = file.f64_or("gamma_d_hz", ensemble_gd)?;
        let rates = RateSet {
            gamma_d,
            gamma_o: file.f64_or("gamma_o_hz", 1e5)?,
            gamma_l: file.f64_or("gamma_l_hz", 0.0)?,
            gamma_nv: file.f64_or("gamma_nv_hz", 1e3)?,
            gamma_p1: file.f64_or("gamma_p1_hz", gamma_d)?,
        };
        rates.validate()?;
        let gamma_l_values = file.list_f64("gamma_l_values_hz")?.unwrap_or_else(|| vec![rates.gamma_l]);
        if gamma_l_values.is_empty() || gamma_l_values.iter().any(|&g| g < 0.0) {
            return Err(Error::Config("gamma_l_values_hz must be a non-empty list of rates >= 0".into()));
        }
        let gamma_o_grid = log_grid(
            file.f64_or("gamma_o_min_hz", 1e3)?,
            file.f64_or("gamma_o_max_hz", 1e9)?,
            usize_of(file.u64_or("gamma_o_points", 49)?, "gamma_o_points")?,
            "gamma_o grid",
        )?;

        let rotor_constant = match file.opt_f64("rotor_constant_rad_s")? {
            Some(k) => k,
            None => consts.hbar / (2.0 * crystal.moment_of_inertia),
        };
        if !(rotor_constant > 0.0) {
            return Err(Error::Config("rotor_constant_rad_s must be > 0".into()));
        }
        let init_sigma = match (file.opt_f64("init_sigma")?, file.opt_f64("init_temperature_k")?) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either init_sigma or init_temperature_k, not both".into()))
            }
            (Some(s), None) => s,
            (None, Some(t)) => (consts.hbar / (2.0 * rotor_constant) * consts.k_b * t).sqrt() / consts.hbar,
            (None, None) => 0.0,
        };
        if !(init_sigma >= 0.0) {
            return Err(Error::Config("initial width must be >= 0".into()));
        }
        let jump_scheme = match file.str_or("jump_scheme", "waiting_time") {
            "waiting_time" => JumpScheme::WaitingTime,
            "per_step" => JumpScheme::PerStep,
            other => return Err(Error::Config(format!("unknown jump_scheme `{other}`"))),
        };
        let fit_window = match (file.opt_f64("fit_start_s")?, file.opt_f64("fit_end_s")?) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(Error::Config("fit_start_s and fit_end_s go together".into())),
        };
        let simulation = SimulationParams {
            rotor_constant,
            detuning: file.f64_or("detuning_rad_s", 0.0)?,
            dt: file.f64_or("dt_s", 1.6e-8)?,
            t_total: file.f64_or("t_total_s", 5e-4)?,
            snapshot_stride: usize_of(file.u64_or("snapshot_stride", 100)?, "snapshot_stride")?,
            trajectories: usize_of(file.u64_or("trajectories", 50)?, "trajectories")?,
            hop_factor: file.f64_or("hop_factor", 1.0)?,
            max_sites: usize_of(file.u64_or("max_sites", 20_000)?, "max_sites")?,
            jump_scheme,
            init_sigma,
            record_distributions: file.bool_or("record_distributions", true)?,
            fit_window,
        };
        if simulation.trajectories == 0 {
            return Err(Error::Config("trajectories must be >= 1".into()));
        }

        let volume_grid = log_grid(
            file.f64_or("volume_min_m3", 1e-15)?,
            file.f64_or("volume_max_m3", 1e-6)?,
            usize_of(file.u64_or("volume_points", 37)?, "volume_points")?,
            "volume grid",
        )?;
        let hyperfine = HyperfineModel {
            a_par: file.f64_or("a_par_hz", 114e6)?,
            a_perp: file.f64_or("a_perp_hz", 86e6)?,
            anisotropic: file.bool_or("hyperfine_anisotropic", false)?,
        };
        let osc_default = OscillatorSpec::default();
        let oscillator = OscillatorSpec {
            resonance_freq: file.f64_or("osc_freq_hz", osc_default.resonance_freq)?,
            quality_factor: file.f64_or("osc_q", osc_default.quality_factor)?,
            osc_moment_of_inertia: file.f64_or("osc_inertia_kg_m2", osc_default.osc_moment_of_inertia)?,
            torque_noise_floor: file.f64_or("osc_noise_floor_nm", osc_default.torque_noise_floor)?,
        };
        oscillator.validate()?;

        Ok(Self {
            consts,
            seed: file.u64_or("seed", 1)?,
            rates,
            gamma_d_from_ensemble,
            gamma_l_values,
            gamma_o_grid,
            field,
            crystal,
            wavelength,
            simulation,
            phonon_gamma_d: file.f64_or("phonon_gamma_d_hz", 1e6)?,
            volume_grid,
            hyperfine,
            sweep_margin: file.f64_or("sweep_margin_t", 3e-3)?,
            sweep_points: usize_of(file.u64_or("sweep_points", 2001)?, "sweep_points")?,
            oscillator,
            spot_radius: file.f64_or("spot_radius_m", 50e-6)?,
            thickness: file.f64_or("thickness_m", 300e-6)?,
            y_sat: file.f64_or("y_sat_w_m2", 1e9)?,
            gamma_o_sat: file.f64_or("gamma_o_sat_hz", 1e6)?,
        })
    }

    /// Volume under the laser spot: πζ²·thickness.
    pub fn illuminated_volume(&self) -> f64 {
        std::f64::consts::PI * self.spot_radius * self.spot_radius * self.thickness
    }
}
