//! Ohmic-family reservoir: J(ω) = γ ω^s ω_c^{1−s} e^{−ω/ω_c}.
//!
//! Integrals over the reservoir are taken in u = ω/ω_c and truncated at
//! u = 50, where e^{−u} ≈ 2e−22.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use crate::special::gamma;

/// Upper integration limit in units of ω_c.
pub const CUTOFF_SPAN: f64 = 50.0;

const LEVEL_SHIFT_TOL: f64 = 1e-12;
const LAMB_SHIFT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    /// Dimensionless coupling γ_b.
    pub gamma: f64,
    /// Cutoff ω_c in units of ω₀.
    pub omega_c: f64,
    /// Ohmicity s: sub-Ohmic below 1, super-Ohmic above.
    pub s: f64,
}

impl BathSpec {
    pub fn new(gamma: f64, omega_c: f64, s: f64) -> Result<Self> {
        let bath = BathSpec { gamma, omega_c, s };
        bath.validate()?;
        Ok(bath)
    }

    pub fn ohmic(gamma: f64, omega_c: f64) -> Result<Self> {
        Self::new(gamma, omega_c, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "coupling must be finite and >= 0"));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::invalid("omega_c", "cutoff must be finite and positive"));
        }
        if !(self.s > 0.0 && self.s < 30.0) {
            return Err(Error::invalid("s", "ohmicity must lie in (0, 30)"));
        }
        Ok(())
    }

    /// γ_b ω_c Γ(s), the zero-energy limit of the level-shift integral.
    pub fn critical_frequency(&self) -> f64 {
        self.gamma * self.omega_c * gamma(self.s)
    }
}

/// J(ω); zero for ω ≤ 0.
pub fn spectral_density(bath: &BathSpec, omega: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    bath.gamma * omega.powf(bath.s) * bath.omega_c.powf(1.0 - bath.s) * (-omega / bath.omega_c).exp()
}

/// dJ/dω for ω > 0.
pub fn spectral_density_slope(bath: &BathSpec, omega: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    spectral_density(bath, omega) * (bath.s / omega - 1.0 / bath.omega_c)
}

/// f(x) = ∫₀^∞ J(ω) e^{−iωx} dω = γ_b Γ(s+1) ω_c² (1 + iω_c x)^{−(s+1)}.
pub fn memory_kernel(bath: &BathSpec, x: f64) -> Complex64 {
    let scale = bath.gamma * gamma(bath.s + 1.0) * bath.omega_c * bath.omega_c;
    Complex64::new(1.0, bath.omega_c * x).powf(-(bath.s + 1.0)) * scale
}

/// The defining integral of [`memory_kernel`], by adaptive quadrature.
pub fn memory_kernel_by_quadrature(bath: &BathSpec, x: f64, relative: f64) -> Result<Complex64> {
    let wc = bath.omega_c;
    let est = integrate(
        |u: f64| Complex64::from_polar(bath.gamma * wc * wc * u.powf(bath.s) * (-u).exp(), -wc * u * x),
        0.0,
        CUTOFF_SPAN,
        Tolerance { relative, absolute: 1e-15, max_intervals: 20_000 },
    )?;
    Ok(est.value)
}

/// Whether mode `omega_l` binds to the reservoir: γ_b ω_c Γ(s) > ω_l.
pub fn has_bound_state(bath: &BathSpec, omega_l: f64) -> bool {
    bath.critical_frequency() > omega_l
}

/// ∫₀^∞ J(ω) / (ω − E)^p dω for E < 0.
pub fn resolvent_moment(bath: &BathSpec, energy: f64, power: i32) -> Result<f64> {
    if !(energy < 0.0) {
        return Err(Error::invalid("energy", "must be strictly negative (poles on the path otherwise)"));
    }
    if bath.gamma == 0.0 {
        return Ok(0.0);
    }
    let wc = bath.omega_c;
    let est = integrate(
        |u: f64| u.powf(bath.s) * (-u).exp() / (wc * u - energy).powi(power),
        0.0,
        CUTOFF_SPAN,
        Tolerance { relative: LEVEL_SHIFT_TOL, absolute: 1e-300, max_intervals: 4000 },
    )?;
    Ok(bath.gamma * wc * wc * est.value)
}

/// ∫₀^∞ J(ω)/(ω − E) dω for E < 0.
pub fn level_shift_integral(bath: &BathSpec, energy: f64) -> Result<f64> {
    resolvent_moment(bath, energy, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundStateResult {
    pub exists: bool,
    /// E_b < 0 when the bound state exists.
    pub energy: f64,
    /// Z ∈ (0, 1) when the bound state exists.
    pub residue: f64,
}

impl BoundStateResult {
    const NONE: BoundStateResult = BoundStateResult { exists: false, energy: f64::NAN, residue: 0.0 };
}

const BRACKET_LIMIT: f64 = 1e3;
const BISECTION_CAP: usize = 200;
const ROOT_RESIDUAL: f64 = 1e-12;

/// Solve ω_l − ∫J/(ω − E) − E = 0 for E < 0 and the residue Z = 1/(1 + ∫J/(ω − E)²).
pub fn bound_state(bath: &BathSpec, omega_l: f64) -> Result<BoundStateResult> {
    if !(omega_l > 0.0) {
        return Err(Error::invalid("omega_l", "mode frequency must be positive"));
    }
    if !has_bound_state(bath, omega_l) {
        return Ok(BoundStateResult::NONE);
    }
    let y = |e: f64| -> Result<f64> { Ok(omega_l - level_shift_integral(bath, e)? - e) };
    let mut hi = 0.0;
    let mut lo = -omega_l.max(1.0);
    while y(lo)? <= 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo < -BRACKET_LIMIT * bath.omega_c {
            return Err(Error::NoBracket(format!(
                "bound-state bracket passed {} for omega_l = {omega_l}",
                -BRACKET_LIMIT * bath.omega_c
            )));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..BISECTION_CAP {
        mid = 0.5 * (lo + hi);
        let v = y(mid)?;
        if v.abs() < ROOT_RESIDUAL || mid == lo || mid == hi {
            break;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residue = 1.0 / (1.0 + resolvent_moment(bath, mid, 2)?);
    Ok(BoundStateResult { exists: true, energy: mid, residue })
}

/// Principal value Δ(ω) = P∫₀^∞ J(ω′)/(ω − ω′) dω′ for ω > 0.
///
/// J(ω) is subtracted on the symmetric window [0, 2ω], where the remaining
/// logarithm vanishes; the tail beyond 2ω is pole-free.
pub fn lamb_shift(bath: &BathSpec, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::invalid("omega", "Lamb shift needs a positive frequency"));
    }
    if bath.gamma == 0.0 {
        return Ok(0.0);
    }
    let j0 = spectral_density(bath, omega);
    let slope = spectral_density_slope(bath, omega);
    let subtracted = |w: f64| {
        let d = omega - w;
        if d.abs() < 1e-7 * omega {
            -slope
        } else {
            (spectral_density(bath, w) - j0) / d
        }
    };
    let tol = Tolerance { relative: LAMB_SHIFT_TOL, absolute: 1e-15, max_intervals: 4000 };
    let left = integrate(subtracted, 0.0, omega, tol)?.value;
    let right = integrate(subtracted, omega, 2.0 * omega, tol)?.value;
    let tail = integrate(
        |w: f64| spectral_density(bath, w) / (omega - w),
        2.0 * omega,
        2.0 * omega + CUTOFF_SPAN * bath.omega_c,
        tol,
    )?
    .value;
    Ok(left + right + tail)
}

/// dΔ/dω by a fourth-order central difference.
pub fn lamb_shift_slope(bath: &BathSpec, omega: f64) -> Result<f64> {
    let h = 1e-3 * omega.min(bath.omega_c);
    let f = |w: f64| lamb_shift(bath, w);
    Ok((8.0 * (f(omega + h)? - f(omega - h)?) - (f(omega + 2.0 * h)? - f(omega - 2.0 * h)?)) / (12.0 * h))
}
