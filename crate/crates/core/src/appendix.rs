//! The published closed form for ⟨n_d⟩ under loss (α = β), transcribed as printed.
//!
//! The printout has two suspicious spots: the denominator repeats the l = 2
//! factor, and the second exponent term reads (p₂ − 2)² where every other
//! occurrence is (p_l − 1)². [`AppendixVariant::Resolved`] uses the l = 1 and
//! l = 2 factors and (p₂ − 1)²; [`AppendixVariant::Literal`] keeps the text.
//! Neither agrees with the moment engine in [`crate::gaussian`]; see the
//! crate tests for the measured discrepancy.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ideal::mean_nd;
use crate::model::ProbeState;

type C = Complex64;

const I: C = C { re: 0.0, im: 1.0 };
const LOSSLESS_TOL: f64 = 1e-8;
const REALNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AppendixVariant {
    #[default]
    Resolved,
    Literal,
}

/// Per-mode helper quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTerms {
    pub a: f64,
    pub m: C,
    pub p: f64,
    pub q: C,
    pub n: C,
    pub e: C,
    pub c_tilde: C,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixParams {
    pub x: f64,
    pub c: C,
    pub alpha_tilde: C,
    pub modes: [ModeTerms; 2],
}

impl AppendixParams {
    pub fn new(alpha: C, squeeze: f64, u: [C; 2]) -> Self {
        let th = squeeze.tanh();
        let at = alpha * (squeeze.cosh() - squeeze.sinh());
        let c = (at / 2.0 - I * at * th).powi(2);
        let mode = |ul: C| {
            let r = 1.0 - ul.norm_sqr();
            let a = 1.0 - r * r * th * th;
            let ub = ul.conj();
            let ct = c * r - at / 2.0;
            let m = -I * ul * ul * th / (2.0 * a);
            let p = ul.norm_sqr() / (1.0 - a);
            let q = (at * ub * (th * th / 2.0 * r) + I * th * ct * ub - c * ub) / a;
            let n = (I * th * ul * r * c - I * th.powi(3) * r * r * at * ul / 2.0 + th * th * r * ul * ct) / a
                - I * th / 2.0 * ul * at
                + c * ul;
            let e = (at * ct * (th * th / 2.0 * r) + I * th / 2.0 * ct * ct + I * th * c * r * at / 2.0
                - I * th / 2.0 * r * r * c * c
                - I * th.powi(3) / 8.0 * r * r * at * at
                - c * ct)
                / a
                + c * at / 2.0
                - I * th * at * at / 8.0;
            ModeTerms { a, m, p, q, n, e, c_tilde: ct }
        };
        let modes = [mode(u[0]), mode(u[1])];
        let x = 1.0 / ((modes[0].a * modes[1].a).sqrt() * squeeze.cosh().powi(2));
        AppendixParams { x, c, alpha_tilde: at, modes }
    }

    /// The printed expression, complex-valued before the realness check.
    pub fn evaluate(&self, variant: AppendixVariant) -> C {
        let [t1, t2] = self.modes;
        let det = |t: &ModeTerms, shift: f64| C::new((t.p - shift).powi(2) - 4.0 * t.m.norm_sqr(), 0.0);
        let d1 = det(&t1, 1.0);
        let d2 = det(&t2, 1.0);
        let (m1b, m2b) = (t1.m.conj(), t2.m.conj());
        let b1 = ((t1.n + t1.q) * (2.0 * m1b + 1.0 - t1.p) + (t1.n - t1.q) * (2.0 * m1b - 1.0 + t1.p))
            * ((t2.n + t2.q) * (2.0 * t2.m + 1.0 - t2.p) - (t2.n - t2.q) * (2.0 * t2.m - 1.0 + t2.p))
            / (4.0 * d1 * d2);
        let b2 = ((t1.n + t1.q) * (2.0 * t1.m + 1.0 - t1.p) + (t1.q - t1.n) * (2.0 * t1.m - 1.0 + t1.p))
            * ((t2.n + t2.q) * (2.0 * m2b + 1.0 - t2.p) - (t2.q - t2.n) * (2.0 * m2b - 1.0 + t2.p))
            / (4.0 * d1 * d2);
        let quad = |t: &ModeTerms| t.m * t.q * t.q + t.m.conj() * t.n * t.n + t.n * t.q;
        let (exp_d2, denom) = match variant {
            AppendixVariant::Resolved => (d2, d1.sqrt() * d2.sqrt()),
            AppendixVariant::Literal => (det(&t2, 2.0), d2.sqrt() * d2.sqrt()),
        };
        let exponent = quad(&t1) / d1 + quad(&t2) / exp_d2 + t1.e + t2.e;
        I * self.x * (b1 - b2) * exponent.exp() / denom
    }
}

/// ⟨n_d⟩ from the closed form. Both modes lossless (|u_l| = 1 within 1e-8)
/// reduces to the ideal mean at φ = arg(u₂/u₁); a single lossless mode is
/// nudged to |u|² = 1 − 1e-8, where the expression is finite.
pub fn nd_appendix(probe: &ProbeState, u1: C, u2: C, variant: AppendixVariant) -> Result<f64> {
    let raw = nd_appendix_raw(probe, u1, u2, variant)?;
    if raw.im.abs() > REALNESS_TOL {
        return Err(Error::TranscriptionFault { imag: raw.im });
    }
    Ok(raw.re)
}

/// Like [`nd_appendix`] but returns the complex value without the realness check.
pub fn nd_appendix_raw(probe: &ProbeState, u1: C, u2: C, variant: AppendixVariant) -> Result<C> {
    if probe.alpha != probe.beta {
        return Err(Error::invalid("beta", "the closed form assumes alpha = beta"));
    }
    for (name, u) in [("u1", u1), ("u2", u2)] {
        if !(u.norm() <= 1.0 + LOSSLESS_TOL) {
            return Err(Error::invalid(name, "|u| must not exceed 1"));
        }
    }
    let lossless = |u: C| (1.0 - u.norm_sqr()).abs() < LOSSLESS_TOL;
    if lossless(u1) && lossless(u2) {
        let phi = (u2 / u1).arg();
        return Ok(C::new(mean_nd(probe, phi), 0.0));
    }
    let nudge = |u: C| if lossless(u) { u * ((1.0 - LOSSLESS_TOL) / u.norm_sqr()).sqrt() } else { u };
    Ok(AppendixParams::new(probe.alpha, probe.squeeze, [nudge(u1), nudge(u2)]).evaluate(variant))
}
