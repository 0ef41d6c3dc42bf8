//! Lossless interferometer statistics for the intensity-difference readout.
//!
//! The probe S(G)|α⟩|β⟩ is mixed on the rotation-dependent beam splitter and
//! the photon-number difference n_d = b₁†b₁ − b₂†b₂ is recorded. Everything
//! here is closed form; [`crate::fock`] provides the brute-force check.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::model::ProbeState;

/// Which closed form to use for Var(n_d).
///
/// The published cross term `A sin 2φ` lacks a factor −sinh(2G)/2; with it
/// the variance agrees with the truncated-Fock computation, without it the
/// variance can go negative (e.g. G = 0, β = 0, φ = −π/4). Both are kept.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum VarianceForm {
    #[default]
    Corrected,
    Printed,
}

/// Exact photon number, or the bright-probe approximation without 2sinh²G.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonCount {
    Exact,
    Approximate,
}

const NEGATIVE_VARIANCE_SLACK: f64 = 1e-12;

struct Sums {
    intensity: f64,
    imbalance: f64,
    /// α*β + αβ*
    cross: f64,
    /// α*² + α² + β*² + β²
    squares: f64,
    /// α*β* + αβ
    pair: f64,
    /// α² − β² + α*² − β*²
    asym: f64,
}

fn sums(p: &ProbeState) -> Sums {
    let (a, b) = (p.alpha, p.beta);
    Sums {
        intensity: a.norm_sqr() + b.norm_sqr(),
        imbalance: a.norm_sqr() - b.norm_sqr(),
        cross: 2.0 * (a.conj() * b).re,
        squares: 2.0 * (a * a + b * b).re,
        pair: 2.0 * (a * b).re,
        asym: 2.0 * (a * a - b * b).re,
    }
}

/// Coefficient C multiplying cos φ in ∂_φ⟨n_d⟩ (and sin φ in ⟨n_d⟩).
fn mixing_coefficient(p: &ProbeState) -> f64 {
    let s = sums(p);
    let g2 = 2.0 * p.squeeze;
    g2.cosh() * s.cross - 0.5 * g2.sinh() * s.squares
}

/// ⟨n_d⟩ at Sagnac phase `phi`.
pub fn mean_nd(probe: &ProbeState, phi: f64) -> f64 {
    let s = sums(probe);
    phi.cos() * s.imbalance + phi.sin() * mixing_coefficient(probe)
}

/// ∂⟨n_d⟩/∂φ, the error-propagation denominator before the absolute value.
pub fn mean_nd_slope(probe: &ProbeState, phi: f64) -> f64 {
    let s = sums(probe);
    -phi.sin() * s.imbalance + mixing_coefficient(probe) * phi.cos()
}

/// Var(n_d) with the corrected cross term.
pub fn var_nd(probe: &ProbeState, phi: f64) -> Result<f64> {
    var_nd_with(probe, phi, VarianceForm::Corrected)
}

pub fn var_nd_with(probe: &ProbeState, phi: f64, form: VarianceForm) -> Result<f64> {
    let s = sums(probe);
    let g = probe.squeeze;
    let (sh, ch) = (g.sinh(), g.cosh());
    let b = (sh.powi(4) + ch.powi(4)) * s.intensity - (4.0 * g).sinh() * s.pair
        + sh * sh * ch * ch * (6.0 * s.intensity + 4.0);
    let cross = match form {
        VarianceForm::Corrected => -0.5 * (2.0 * g).sinh() * s.asym,
        VarianceForm::Printed => s.asym,
    };
    let var = phi.cos().powi(2) * s.intensity + cross * (2.0 * phi).sin() + b * phi.sin().powi(2);
    clamp_variance(var, NEGATIVE_VARIANCE_SLACK)
}

pub(crate) fn clamp_variance(var: f64, slack: f64) -> Result<f64> {
    if var >= 0.0 {
        Ok(var)
    } else if var >= -slack {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(var))
    }
}

/// Phase uncertainty δφ = ΔN_d / |∂_φ⟨n_d⟩|; `+inf` where the signal vanishes.
pub fn delta_phi(probe: &ProbeState, phi: f64) -> Result<f64> {
    delta_phi_with(probe, phi, VarianceForm::Corrected)
}

pub fn delta_phi_with(probe: &ProbeState, phi: f64, form: VarianceForm) -> Result<f64> {
    let var = var_nd_with(probe, phi, form)?;
    let slope = mean_nd_slope(probe, phi).abs();
    let scale = probe.coherent_intensity() * (1.0 + (2.0 * probe.squeeze).cosh());
    if slope <= 64.0 * f64::EPSILON * scale {
        return Ok(f64::INFINITY);
    }
    Ok(var.sqrt() / slope)
}

/// Total mean photon number of the probe.
pub fn mean_photons(probe: &ProbeState, count: PhotonCount) -> f64 {
    let s = sums(probe);
    let g = probe.squeeze;
    let base = s.intensity * (2.0 * g).cosh() - (2.0 * g).sinh() * s.pair;
    match count {
        PhotonCount::Exact => base + 2.0 * g.sinh().powi(2),
        PhotonCount::Approximate => base,
    }
}

/// Shot-noise limit 1/√N.
pub fn snl(photons: f64) -> Result<f64> {
    if photons > 0.0 && photons.is_finite() {
        Ok(1.0 / photons.sqrt())
    } else {
        Err(Error::invalid("photons", "shot-noise limit needs a positive photon number"))
    }
}

const POLE_TOLERANCE: f64 = 1e-12;

/// 1/k for α = β = |α|e^{iφ}.
pub fn ratio_case1(squeeze: f64, phase: f64) -> f64 {
    let g2 = 2.0 * squeeze;
    1.0 / (g2.cosh() - g2.sinh() * (2.0 * phase).cos()).sqrt()
}

/// 1/k for |α| = |β| with phases φ₁, φ₂; `+inf` where cos(φ₁ − φ₂) = 0.
pub fn ratio_case2(squeeze: f64, phi1: f64, phi2: f64) -> f64 {
    let overlap = (phi1 - phi2).cos().abs();
    if overlap < POLE_TOLERANCE {
        return f64::INFINITY;
    }
    let g2 = 2.0 * squeeze;
    1.0 / (overlap * (g2.cosh() - g2.sinh() * (phi1 + phi2).cos()).sqrt())
}

/// 1/k for equal phases φ and amplitude ratio R = |β|/|α|.
pub fn ratio_case3(squeeze: f64, ratio: f64, phase: f64) -> f64 {
    let g2 = 2.0 * squeeze;
    let (ch, sh) = (g2.cosh(), g2.sinh());
    let c2 = (2.0 * phase).cos();
    let norm = 1.0 + ratio * ratio;
    let denom = (2.0 * ratio * ch - sh * norm * c2).abs();
    if denom < POLE_TOLERANCE * norm * ch {
        return f64::INFINITY;
    }
    norm.sqrt() * (norm * ch - 2.0 * ratio * sh * c2).sqrt() / denom
}

/// Case-III profile at its optimal phase φ = π/2, as a function of R.
pub fn case3_profile(squeeze: f64, ratio: f64) -> f64 {
    ratio_case3(squeeze, ratio, FRAC_PI_2)
}

/// h(G) = √cosh(2G)/sinh(2G), the R → 0 and R → ∞ limit of the case-III profile.
pub fn h_function(squeeze: f64) -> f64 {
    let g2 = 2.0 * squeeze;
    g2.cosh().sqrt() / g2.sinh()
}

/// The squeeze G₀ with h(G₀) = 1.
pub fn h_crossing() -> f64 {
    let s5 = 5f64.sqrt();
    0.5 * ((1.0 + s5 + (2.0 + 2.0 * s5).sqrt()) / 2.0).ln()
}

/// Parameters of the case-III probe family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseIIIProfile {
    pub ratio: f64,
    pub squeeze: f64,
    pub phase: f64,
}

impl CaseIIIProfile {
    pub fn new(ratio: f64, squeeze: f64, phase: f64) -> Result<Self> {
        if !(ratio >= 0.0 && ratio.is_finite()) {
            return Err(Error::invalid("ratio", "|beta|/|alpha| must be finite and >= 0"));
        }
        if !(squeeze >= 0.0 && squeeze.is_finite()) {
            return Err(Error::invalid("squeeze", "must be finite and >= 0"));
        }
        Ok(CaseIIIProfile { ratio, squeeze, phase })
    }

    pub fn inverse_k(&self) -> f64 {
        ratio_case3(self.squeeze, self.ratio, self.phase)
    }

    /// A concrete probe with |α| = `abs_alpha` realising this profile.
    pub fn probe(&self, abs_alpha: f64) -> Result<ProbeState> {
        ProbeState::polar(abs_alpha, self.phase, self.ratio * abs_alpha, self.phase, self.squeeze)
    }
}

const THRESHOLD_SCAN_START: f64 = 0.01;
const THRESHOLD_SCAN_LIMIT: f64 = 50.0;

/// Smallest squeeze G_th above which the case-III profile at ratio `r` stays below one.
///
/// At R = 1 the profile is e^{−G} < 1 for every G > 0, so the threshold is 0.
pub fn g_threshold(r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::invalid("ratio", "must be finite and >= 0"));
    }
    if r == 1.0 {
        return Ok(0.0);
    }
    let excess = |g: f64| case3_profile(g, r) - 1.0;
    let mut lo = 0.0;
    let mut hi = THRESHOLD_SCAN_START;
    while excess(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > THRESHOLD_SCAN_LIMIT {
            return Err(Error::NoBracket(format!("no threshold for R = {r} in (0, 50]")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
