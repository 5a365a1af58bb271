//! Physical constants, material/geometry specification and the small set of
//! derived quantities every other module leans on.
//!
//! Unit conventions: rates `Γ_*` are plain s⁻¹, angular frequencies `ω` are
//! rad/s. Where a formula mixes the two it says so at the call site.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// J·s
    pub hbar: f64,
    /// J/K
    pub k_b: f64,
    /// T·m/A
    pub mu0: f64,
    /// Electron gyromagnetic ratio magnitude, rad·s⁻¹·T⁻¹.
    pub gamma_e: f64,
    /// NV zero-field splitting, rad/s.
    pub delta: f64,
    /// Carbon atoms per m³, used for ppm conversion.
    pub carbon_number_density: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.054_571_817e-34,
            k_b: 1.380_649e-23,
            mu0: 1.256_637_062_12e-6,
            gamma_e: 1.760_859_630_23e11,
            delta: 2.0 * PI * 2.87e9,
            carbon_number_density: 1.76e29,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("hbar", self.hbar),
            ("k_b", self.k_b),
            ("mu0", self.mu0),
            ("gamma_e", self.gamma_e),
            ("delta", self.delta),
            ("carbon_number_density", self.carbon_number_density),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Field at which the NV |0⟩↔|−1⟩ splitting equals the P1 Zeeman splitting.
    pub fn matching_field(&self) -> f64 {
        self.delta / (2.0 * self.gamma_e)
    }

    /// Dipolar prefactor in energy units, J·m³: (μ₀/4π)·γ_e²·ħ².
    pub fn alpha_energy(&self) -> f64 {
        self.mu0 / (4.0 * PI) * self.gamma_e * self.gamma_e * self.hbar * self.hbar
    }

    /// Dipolar prefactor in angular-frequency units, rad·s⁻¹·m³: α_E/ħ.
    pub fn alpha_omega(&self) -> f64 {
        self.alpha_energy() / self.hbar
    }

    pub fn ppm_to_density(&self, ppm: f64) -> f64 {
        ppm * 1e-6 * self.carbon_number_density
    }

    pub fn density_to_ppm(&self, eta: f64) -> f64 {
        eta / (1e-6 * self.carbon_number_density)
    }

    /// ν₀ = ħω₀/k_BT with ω₀ in rad/s.
    pub fn nu0(&self, temperature: f64, omega0: f64) -> f64 {
        self.hbar * omega0 / (self.k_b * temperature)
    }

    /// ν₁ = ħΓ_d/k_BT with Γ_d taken in s⁻¹ without a 2π.
    pub fn nu1(&self, temperature: f64, gamma_d: f64) -> f64 {
        self.hbar * gamma_d / (self.k_b * temperature)
    }
}

/// Wigner–Seitz radius (3/(4πη))^(1/3).
pub fn r_max_from_density(eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be > 0, got {eta}")));
    }
    Ok((3.0 / (4.0 * PI * eta)).cbrt())
}

/// How the resonant phonon wavelength is formed from ω₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WavelengthConvention {
    /// λ₀ = 2πc/ω₀, ω₀ in rad/s (≈ 8 μm at the matching field).
    Angular,
    /// λ₀ = 2πc/f₀, f₀ = ω₀/2π in Hz (≈ 52 μm); the default.
    Cyclic,
}

impl Default for WavelengthConvention {
    fn default() -> Self {
        WavelengthConvention::Cyclic
    }
}

pub fn resonant_wavelength(c_sound: f64, omega0: f64, convention: WavelengthConvention) -> f64 {
    match convention {
        WavelengthConvention::Angular => 2.0 * PI * c_sound / omega0,
        WavelengthConvention::Cyclic => 2.0 * PI * c_sound / (omega0 / (2.0 * PI)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    /// Solid sphere about a diameter: 𝒥 = (2/5)MR².
    Sphere,
    /// Solid cylinder about its axis with the given radius: 𝒥 = ½MR².
    Cylinder { radius: f64 },
}

impl Geometry {
    pub fn moment_of_inertia(&self, rho: f64, volume: f64) -> f64 {
        let mass = rho * volume;
        match *self {
            Geometry::Sphere => {
                let r = (3.0 * volume / (4.0 * PI)).cbrt();
                0.4 * mass * r * r
            }
            Geometry::Cylinder { radius } => 0.5 * mass * radius * radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub rho: f64,
    pub c_sound: f64,
    pub volume: f64,
    pub moment_of_inertia: f64,
    pub temperature: f64,
    pub eta: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub geometry: Geometry,
}

impl CrystalSpec {
    /// Diamond defaults: ρ = 3515 kg/m³, c = 1.2×10⁴ m/s.
    pub const DIAMOND_RHO: f64 = 3515.0;
    pub const DIAMOND_C_SOUND: f64 = 1.2e4;

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rho: f64,
        c_sound: f64,
        volume: f64,
        temperature: f64,
        eta: f64,
        r_min: f64,
        r_max: f64,
        geometry: Geometry,
    ) -> Result<Self> {
        let spec = Self {
            rho,
            c_sound,
            volume,
            moment_of_inertia: geometry.moment_of_inertia(rho, volume),
            temperature,
            eta,
            r_min,
            r_max,
            geometry,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Diamond sphere with r_max set to the Wigner–Seitz radius of `eta`.
    pub fn diamond_sphere(volume: f64, temperature: f64, eta: f64, r_min: f64) -> Result<Self> {
        let r_max = r_max_from_density(eta)?;
        Self::new(
            Self::DIAMOND_RHO,
            Self::DIAMOND_C_SOUND,
            volume,
            temperature,
            eta,
            r_min,
            r_max,
            Geometry::Sphere,
        )
    }

    pub fn with_volume(&self, volume: f64) -> Result<Self> {
        Self::new(
            self.rho,
            self.c_sound,
            volume,
            self.temperature,
            self.eta,
            self.r_min,
            self.r_max,
            self.geometry,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho", self.rho),
            ("c_sound", self.c_sound),
            ("volume", self.volume),
            ("moment_of_inertia", self.moment_of_inertia),
            ("temperature", self.temperature),
            ("eta", self.eta),
            ("r_min", self.r_min),
            ("r_max", self.r_max),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.r_min >= self.r_max {
            return Err(Error::InvalidParameter(format!(
                "r_min ({}) must be below r_max ({})",
                self.r_min, self.r_max
            )));
        }
        let expected = self.geometry.moment_of_inertia(self.rho, self.volume);
        if ((self.moment_of_inertia - expected) / expected).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "moment of inertia {} inconsistent with geometry ({expected})",
                self.moment_of_inertia
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateSet {
    pub gamma_d: f64,
    pub gamma_o: f64,
    pub gamma_l: f64,
    pub gamma_nv: f64,
    pub gamma_p1: f64,
}

impl RateSet {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma_d", self.gamma_d),
            ("gamma_o", self.gamma_o),
            ("gamma_l", self.gamma_l),
            ("gamma_nv", self.gamma_nv),
            ("gamma_p1", self.gamma_p1),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub b_field: f64,
    pub omega0: f64,
    pub detuning: f64,
}

impl FieldSpec {
    pub fn new(b_field: f64, constants: &PhysicalConstants) -> Self {
        let omega0 = constants.gamma_e * b_field;
        Self {
            b_field,
            omega0,
            detuning: constants.delta - 2.0 * omega0,
        }
    }

    pub fn matched(constants: &PhysicalConstants) -> Self {
        Self::new(constants.matching_field(), constants)
    }
}
