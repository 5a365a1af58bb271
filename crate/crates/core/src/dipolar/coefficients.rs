use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Inter-spin vector r = r_NV − r_P1 in spherical form; `varphi` is the
/// fixed crystal-frame azimuth, `phi` the crystal-to-lab rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub r: f64,
    pub theta: f64,
    pub varphi: f64,
    pub phi: f64,
}

impl PairGeometry {
    /// Validates `r > 0` and `θ ∈ [0, π]`; reduces both azimuths mod 2π.
    pub fn new(r: f64, theta: f64, varphi: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::SingularGeometry(format!("r must be > 0, got {r}")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta must lie in [0, π], got {theta}")));
        }
        Ok(Self {
            r,
            theta,
            varphi: varphi.rem_euclid(TAU),
            phi: phi.rem_euclid(TAU),
        })
    }

    pub fn check_min_distance(&self, r_min: f64) -> Result<()> {
        if self.r < r_min {
            return Err(Error::InvalidParameter(format!("r = {} below r_min = {r_min}", self.r)));
        }
        Ok(())
    }

    /// Cartesian components of r in the crystal frame.
    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.varphi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }

    pub fn from_cartesian(v: [f64; 3]) -> Result<Self> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r == 0.0 {
            return Err(Error::SingularGeometry("zero separation".into()));
        }
        Self::new(r, (v[2] / r).clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]), 0.0)
    }
}

/// Rank-0/1/2 dipolar coefficients in the units of the supplied `alpha`
/// (α_ω gives rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipolarCoefficients {
    pub d0: f64,
    pub d1: C64,
    pub d2: C64,
}

fn check_r(r: f64) -> Result<()> {
    if r == 0.0 || !r.is_finite() {
        return Err(Error::SingularGeometry(format!("r = {r}")));
    }
    Ok(())
}

/// d₀ = (α/r³)(1−3cos²θ), d₁ = −(3α/2r³) sinθ cosθ e^{iφ},
/// d₂ = −(3α/4r³) sin²θ e^{2iφ}, with φ the crystal-frame azimuth.
pub fn dipolar_coefficients(geometry: &PairGeometry, alpha: f64) -> Result<DipolarCoefficients> {
    check_r(geometry.r)?;
    let a = alpha / geometry.r.powi(3);
    let (s, c) = geometry.theta.sin_cos();
    Ok(DipolarCoefficients {
        d0: a * (1.0 - 3.0 * c * c),
        d1: C64::from_polar(-1.5 * a * s * c, geometry.varphi),
        d2: C64::from_polar(-0.75 * a * s * s, 2.0 * geometry.varphi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPhononCoefficients {
    /// −(3α/2r⁴) cosθ (1 − 5cos2θ); equals ∂d₀/∂z.
    pub b0: f64,
    /// −(3α/16r⁴)(3cosθ + 4cos3θ), the closed form used by the rate formulas.
    pub b1: f64,
    /// Coefficient of δR₊δ₁₋ obtained from the exact gradient of the d₁ term,
    /// −(3α/4r⁴) cosθ (5cos²θ − 3), for comparison with `b1`.
    pub b1_gradient: f64,
}

pub fn spin_phonon_coefficients(geometry: &PairGeometry, alpha: f64) -> Result<SpinPhononCoefficients> {
    check_r(geometry.r)?;
    let a = alpha / geometry.r.powi(4);
    let t = geometry.theta;
    let c = t.cos();
    Ok(SpinPhononCoefficients {
        b0: -1.5 * a * c * (1.0 - 5.0 * (2.0 * t).cos()),
        b1: -(3.0 / 16.0) * a * (3.0 * c + 4.0 * (3.0 * t).cos()),
        b1_gradient: -0.75 * a * c * (5.0 * c * c - 3.0),
    })
}
