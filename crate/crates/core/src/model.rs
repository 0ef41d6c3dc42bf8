//! Shared physical types and the rotation-to-phase encoding.
//!
//! Inside the crate every frequency is measured in units of the bare mode
//! frequency ω₀ and every time in units of 1/ω₀. Only [`fizeau_shift`] and
//! [`sagnac_phase`] work in SI.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Resonator geometry in SI units. One radius serves both the spinning
/// resonator and the interferometer loop; build two geometries when they differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorGeometry {
    pub radius: f64,
    pub wavelength: f64,
    pub refractive_index: f64,
    /// dn/dλ in 1/m.
    pub dispersion: f64,
    /// Bare resonance frequency ω₀ in rad/s.
    pub base_frequency: f64,
}

impl RotorGeometry {
    pub fn new(
        radius: f64,
        wavelength: f64,
        refractive_index: f64,
        dispersion: f64,
        base_frequency: f64,
    ) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("radius", "must be positive"));
        }
        if !(wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        if !(refractive_index >= 1.0) {
            return Err(Error::invalid("refractive_index", "must be at least 1"));
        }
        if !dispersion.is_finite() {
            return Err(Error::invalid("dispersion", "must be finite"));
        }
        if !(base_frequency > 0.0) {
            return Err(Error::invalid("base_frequency", "must be positive"));
        }
        Ok(RotorGeometry { radius, wavelength, refractive_index, dispersion, base_frequency })
    }
}

/// Two-mode squeezed coherent probe S(G)|α⟩|β⟩ with real squeeze parameter G.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeState {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub squeeze: f64,
}

impl ProbeState {
    pub fn new(alpha: Complex64, beta: Complex64, squeeze: f64) -> Result<Self> {
        if !(squeeze >= 0.0 && squeeze.is_finite()) {
            return Err(Error::invalid("squeeze", "must be real, finite and non-negative"));
        }
        if !(alpha.re.is_finite() && alpha.im.is_finite() && beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::invalid("alpha/beta", "amplitudes must be finite"));
        }
        Ok(ProbeState { alpha, beta, squeeze })
    }

    /// Probe with equal real amplitudes α = β = `amplitude`.
    pub fn symmetric(amplitude: f64, squeeze: f64) -> Result<Self> {
        let a = Complex64::new(amplitude, 0.0);
        Self::new(a, a, squeeze)
    }

    /// Probe with amplitudes given in polar form, |α|e^{iφ₁} and |β|e^{iφ₂}.
    pub fn polar(abs_alpha: f64, phi1: f64, abs_beta: f64, phi2: f64, squeeze: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(abs_alpha, phi1), Complex64::from_polar(abs_beta, phi2), squeeze)
    }

    pub fn coherent_intensity(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    pub(crate) fn require_signal(&self) -> Result<()> {
        if self.coherent_intensity() > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("alpha/beta", "|alpha|^2 + |beta|^2 must be positive"))
        }
    }
}

/// Encoding-mode frequencies ω₀ ± Ω in units of ω₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyLayout {
    pub rotation: f64,
}

impl FrequencyLayout {
    pub const BASE: f64 = 1.0;

    pub fn new(rotation: f64) -> Result<Self> {
        if !(rotation >= 0.0 && rotation.is_finite()) {
            return Err(Error::invalid("rotation", "angular velocity must be finite and >= 0"));
        }
        Ok(FrequencyLayout { rotation })
    }

    /// ω₁ = ω₀ + Ω, the optical mode.
    pub fn upper(&self) -> f64 {
        Self::BASE + self.rotation
    }

    /// ω₂ = ω₀ − Ω, the magnon mode.
    pub fn lower(&self) -> f64 {
        Self::BASE - self.rotation
    }

    /// Encoding phase accumulated after time `t`, φ = 2Ωt.
    pub fn phase_at(&self, t: f64) -> f64 {
        2.0 * self.rotation * t
    }
}

/// Rotation-induced resonance shift Δ_F in rad/s; odd in `omega`.
pub fn fizeau_shift(geom: &RotorGeometry, omega: f64, include_dispersion: bool) -> f64 {
    let n = geom.refractive_index;
    let mut factor = 1.0 - 1.0 / (n * n);
    if include_dispersion {
        factor -= geom.wavelength / n * geom.dispersion;
    }
    omega * n * geom.radius * geom.base_frequency / SPEED_OF_LIGHT * factor
}

/// Sagnac phase 4πR²Ω/(λc) in radians.
pub fn sagnac_phase(radius: f64, wavelength: f64, omega: f64) -> f64 {
    4.0 * std::f64::consts::PI * radius * radius * omega / (wavelength * SPEED_OF_LIGHT)
}

/// Magnitude of the effective two-mode squeeze parameter, |G| = g₀|α₂|τ.
pub fn effective_squeeze(coupling: f64, pump_amplitude: f64, duration: f64) -> f64 {
    coupling * pump_amplitude * duration
}

/// Which of the two counter-propagating modes receives +Δ_F.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    Plus,
    Minus,
}

impl ShiftSign {
    fn value(self) -> f64 {
        match self {
            ShiftSign::Plus => 1.0,
            ShiftSign::Minus => -1.0,
        }
    }
}

/// Cavity detuning Δⱼ = ωⱼ ± Δ_F − ω_laser.
pub fn detuning(mode_frequency: f64, fizeau: f64, laser_frequency: f64, sign: ShiftSign) -> f64 {
    mode_frequency + sign.value() * fizeau - laser_frequency
}
