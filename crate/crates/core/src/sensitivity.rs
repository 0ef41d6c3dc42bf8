//! δφ(t) and 1/k(t) for the dissipative gyroscope.
//!
//! Each mode amplitude u_l(t) comes from one of the solvers in
//! [`crate::dynamics`], mode 1 at ω₀ + Ω and mode 2 at ω₀ − Ω. Mean and
//! variance of n_d come from the Gaussian moment map. The slope ∂_φ⟨n_d⟩ uses
//! the exact ω-derivatives the solvers carry, so there is no step size.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::BathSpec;
use crate::csv::{fmt_f64, CsvTable};
use crate::dynamics::{step_bound, u_volterra_sampled, MarkovRates, Method, SpectralBasis, SpectralSolution, TimeGrid};
use crate::error::{Error, Result};
use crate::gaussian::{evolve_gaussian, nd_from_moments, nd_mean_slope, GaussianState};
use crate::ideal::{mean_photons, snl, PhotonCount};
use crate::model::{FrequencyLayout, ProbeState};
use crate::parallel::{self, Execution};

type C = Complex64;

const I: C = C { re: 0.0, im: 1.0 };

/// How ∂_φ⟨n_d⟩ is taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// (2t)⁻¹ ∂_Ω with both amplitudes following the mode frequencies.
    #[default]
    Omega,
    /// Amplitudes frozen, only the encoded relative phase varied.
    PhaseOnly,
}

/// Photon number used for the shot-noise reference in 1/k.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonReference {
    #[default]
    Initial,
    Instantaneous,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivityOptions {
    pub derivative: DerivativeMode,
    pub reference: PhotonReference,
    /// Include the Lamb shift in the Markov amplitudes.
    pub lamb_shift: bool,
}

/// Everything that fixes δφ(t) apart from t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Encoding {
    pub probe: ProbeState,
    pub bath: Option<BathSpec>,
    /// Ω in units of ω₀.
    pub rotation: f64,
    pub method: Method,
    pub options: SensitivityOptions,
}

impl Encoding {
    pub fn new(probe: ProbeState, bath: Option<BathSpec>, rotation: f64, method: Method) -> Result<Self> {
        let enc = Encoding { probe, bath, rotation, method, options: SensitivityOptions::default() };
        enc.validate()?;
        Ok(enc)
    }

    pub fn with_options(mut self, options: SensitivityOptions) -> Self {
        self.options = options;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.probe.require_signal()?;
        self.layout()?;
        if let Some(b) = &self.bath {
            b.validate()?;
        }
        if self.method.needs_bath() && self.bath.is_none() {
            return Err(Error::Config(format!("method {} needs a bath", self.method.name())));
        }
        Ok(())
    }

    fn layout(&self) -> Result<FrequencyLayout> {
        FrequencyLayout::new(self.rotation)
    }

    pub fn frequencies(&self) -> Result<[f64; 2]> {
        let l = self.layout()?;
        Ok([l.upper(), l.lower()])
    }

    /// Bath to use for the dynamics; `None` means free evolution.
    fn active_bath(&self) -> Option<BathSpec> {
        match self.method {
            Method::Ideal => None,
            _ => self.bath,
        }
    }

    fn reference_photons(&self) -> f64 {
        mean_photons(&self.probe, PhotonCount::Exact)
    }
}

/// One sample of the sensitivity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityPoint {
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
    pub dphi: f64,
    /// 1/k = δφ / SNL.
    pub ratio: f64,
}

/// u_l and ∂u_l/∂ω_l for both modes at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub u: [C; 2],
    pub du: [C; 2],
}

fn evaluate(enc: &Encoding, initial: &GaussianState, t: f64, amp: Amplitudes) -> Result<SensitivityPoint> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t", "time must be nonnegative"));
    }
    let state = evolve_gaussian(&enc.probe, amp.u[0], amp.u[1])?;
    let (mean, variance) = nd_from_moments(&state)?;
    let photons = match enc.options.reference {
        PhotonReference::Initial => enc.reference_photons(),
        PhotonReference::Instantaneous => state.occupation(0) + state.occupation(1),
    };
    let dphi = if t == 0.0 {
        f64::INFINITY
    } else {
        let slope = match enc.options.derivative {
            // ω₁ = ω₀ + Ω and ω₂ = ω₀ − Ω, and φ = 2Ωt
            DerivativeMode::Omega => nd_mean_slope(initial, amp.u, [amp.du[0], -amp.du[1]]) / (2.0 * t),
            DerivativeMode::PhaseOnly => nd_mean_slope(initial, amp.u, [-0.5 * I * amp.u[0], 0.5 * I * amp.u[1]]),
        };
        let scale = enc.probe.coherent_intensity() * (1.0 + (2.0 * enc.probe.squeeze).cosh());
        if slope.abs() <= 64.0 * f64::EPSILON * scale {
            f64::INFINITY
        } else {
            variance.sqrt() / slope.abs()
        }
    };
    let ratio = if dphi.is_infinite() { f64::INFINITY } else { dphi / snl(photons)? };
    Ok(SensitivityPoint { t, mean, variance, dphi, ratio })
}

/// Source of mode amplitudes. Every variant but Volterra is closed form in t;
/// Volterra integrates from zero on each call to [`Propagator::at`].
#[derive(Debug, Clone)]
pub enum Propagator {
    Free([f64; 2]),
    Markov([f64; 2], [MarkovRates; 2]),
    Spectral(Box<[SpectralSolution; 2]>),
    Volterra([f64; 2], BathSpec),
}

impl Propagator {
    /// `horizon` sets the frequency resolution of the spectral method.
    pub fn new(enc: &Encoding, horizon: f64, exec: Execution) -> Result<Self> {
        enc.validate()?;
        let w = enc.frequencies()?;
        let Some(bath) = enc.active_bath() else {
            return Ok(Propagator::Free(w));
        };
        Ok(match enc.method {
            Method::Ideal => Propagator::Free(w),
            Method::Markov => Propagator::Markov(
                w,
                [
                    MarkovRates::new(&bath, w[0], enc.options.lamb_shift)?,
                    MarkovRates::new(&bath, w[1], enc.options.lamb_shift)?,
                ],
            ),
            Method::Spectral if bath.gamma == 0.0 => Propagator::Free(w),
            Method::Spectral => {
                let basis = SpectralBasis::new(&bath, horizon.max(1e-3), exec)?;
                Propagator::Spectral(Box::new([basis.solve(w[0])?, basis.solve(w[1])?]))
            }
            Method::Volterra => Propagator::Volterra(w, bath),
        })
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Propagator::Volterra(..))
    }

    pub fn at(&self, t: f64) -> Result<Amplitudes> {
        let pair = |f: &dyn Fn(usize) -> (C, C)| {
            let (a, b) = (f(0), f(1));
            Amplitudes { u: [a.0, b.0], du: [a.1, b.1] }
        };
        Ok(match self {
            Propagator::Free(w) => pair(&|l| {
                let u = C::from_polar(1.0, -w[l] * t);
                (u, -I * t * u)
            }),
            Propagator::Markov(w, r) => pair(&|l| r[l].at(w[l], t)),
            Propagator::Spectral(s) => pair(&|l| s[l].at(t)),
            Propagator::Volterra(w, bath) => {
                if t == 0.0 {
                    return Ok(Amplitudes { u: [C::new(1.0, 0.0); 2], du: [C::new(0.0, 0.0); 2] });
                }
                let grid = TimeGrid::new(t, 2)?;
                let a = u_volterra_sampled(bath, w[0], grid)?;
                let b = u_volterra_sampled(bath, w[1], grid)?;
                Amplitudes { u: [a.samples[1], b.samples[1]], du: [a.slope[1], b.slope[1]] }
            }
        })
    }

    pub fn sample(&self, grid: TimeGrid, exec: Execution) -> Result<Vec<Amplitudes>> {
        match self {
            Propagator::Spectral(s) => {
                let (u1, d1) = s[0].sample(grid, exec);
                let (u2, d2) = s[1].sample(grid, exec);
                Ok((0..grid.len).map(|i| Amplitudes { u: [u1[i], u2[i]], du: [d1[i], d2[i]] }).collect())
            }
            Propagator::Volterra(w, bath) => {
                let traces = parallel::try_map(exec, w, |&wl| u_volterra_sampled(bath, wl, grid))?;
                let (a, b) = (&traces[0], &traces[1]);
                Ok((0..grid.len)
                    .map(|i| Amplitudes { u: [a.samples[i], b.samples[i]], du: [a.slope[i], b.slope[i]] })
                    .collect())
            }
            _ => grid.times().map(|t| self.at(t)).collect(),
        }
    }
}

/// δφ at a single time.
pub fn delta_phi_t(enc: &Encoding, t: f64) -> Result<f64> {
    Ok(point_at(enc, t)?.dphi)
}

/// 1/k at a single time.
pub fn ratio_t(enc: &Encoding, t: f64) -> Result<f64> {
    Ok(point_at(enc, t)?.ratio)
}

pub fn point_at(enc: &Encoding, t: f64) -> Result<SensitivityPoint> {
    let prop = Propagator::new(enc, t, Execution::Sequential)?;
    evaluate(enc, &GaussianState::initial(&enc.probe), t, prop.at(t)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCurve {
    pub encoding: Encoding,
    pub points: Vec<SensitivityPoint>,
}

impl SensitivityCurve {
    pub fn compute(enc: &Encoding, grid: TimeGrid, exec: Execution) -> Result<Self> {
        let prop = Propagator::new(enc, grid.horizon(), exec)?;
        Self::from_propagator(enc, &prop, grid, exec)
    }

    pub fn from_propagator(enc: &Encoding, prop: &Propagator, grid: TimeGrid, exec: Execution) -> Result<Self> {
        let amps = prop.sample(grid, exec)?;
        let initial = GaussianState::initial(&enc.probe);
        let items: Vec<(f64, Amplitudes)> = grid.times().zip(amps).collect();
        let points = parallel::try_map(exec, &items, |(t, a)| evaluate(enc, &initial, *t, *a))?;
        Ok(SensitivityCurve { encoding: *enc, points })
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn dphi(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.dphi).collect()
    }

    /// Local minima of δφ with parabolic refinement.
    pub fn minima(&self) -> Vec<(f64, f64)> {
        local_minima(&self.times(), &self.dphi())
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut table = CsvTable::new(&["t", "mean_nd", "var_nd", "dphi", "ratio_k_inv", "method"]);
        for line in encoding_meta(&self.encoding) {
            table.meta(line);
        }
        let name = self.encoding.method.name();
        for p in &self.points {
            table.row(vec![
                fmt_f64(p.t),
                fmt_f64(p.mean),
                fmt_f64(p.variance),
                fmt_f64(p.dphi),
                fmt_f64(p.ratio),
                name.into(),
            ]);
        }
        table
    }
}

/// `key=value` metadata lines describing an encoding.
pub fn encoding_meta(enc: &Encoding) -> Vec<String> {
    let p = &enc.probe;
    let mut probe = format!(
        "alpha_re={} alpha_im={} beta_re={} beta_im={} G={}",
        fmt_f64(p.alpha.re),
        fmt_f64(p.alpha.im),
        fmt_f64(p.beta.re),
        fmt_f64(p.beta.im),
        fmt_f64(p.squeeze)
    );
    let _ = write!(probe, " photons={}", fmt_f64(enc.reference_photons()));
    let mut run = format!("Omega={} method={}", fmt_f64(enc.rotation), enc.method.name());
    let o = enc.options;
    let _ = write!(
        run,
        " derivative={} reference={} lamb_shift={}",
        match o.derivative {
            DerivativeMode::Omega => "omega",
            DerivativeMode::PhaseOnly => "phase_only",
        },
        match o.reference {
            PhotonReference::Initial => "initial",
            PhotonReference::Instantaneous => "instantaneous",
        },
        o.lamb_shift
    );
    let mut out = vec![probe, run];
    if let Some(b) = enc.bath {
        out.push(format!("gamma={} omega_c={} s={}", fmt_f64(b.gamma), fmt_f64(b.omega_c), fmt_f64(b.s)));
    }
    out
}

/// Interior samples below both neighbours, each moved to the vertex of the
/// parabola through its three-point stencil. Assumes uniform spacing.
///
/// A sample next to a pole is not a minimum: the δφ(0) = +inf convention
/// would otherwise plant one at the first step.
pub fn local_minima(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let n = times.len().min(values.len());
    let mut out = Vec::new();
    for i in stencils(values, n) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        let curv = a - 2.0 * b + c;
        if curv > 0.0 {
            let h = 0.5 * (times[i + 1] - times[i - 1]);
            out.push((times[i] + 0.5 * h * (a - c) / curv, b - (a - c).powi(2) / (8.0 * curv)));
        } else {
            out.push((times[i], b));
        }
    }
    out
}

fn stencils(values: &[f64], n: usize) -> impl Iterator<Item = usize> + '_ {
    (1..n.saturating_sub(1)).filter(move |&i| {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        a.is_finite() && c.is_finite() && b < a && b <= c
    })
}

const GOLDEN_TOL: f64 = 1e-12;

/// Minima of δφ located to ~1e−12 in t by golden-section search on the
/// closed-form amplitudes, seeded by the sampled curve. Volterra curves keep
/// the parabolic estimate.
pub fn polished_minima(curve: &SensitivityCurve, prop: &Propagator) -> Result<Vec<(f64, f64)>> {
    let enc = &curve.encoding;
    let t = curve.times();
    let v = curve.dphi();
    if !prop.is_closed_form() {
        return Ok(local_minima(&t, &v));
    }
    let initial = GaussianState::initial(&enc.probe);
    let f = |x: f64| -> Result<f64> { Ok(evaluate(enc, &initial, x, prop.at(x)?)?.dphi) };
    let mut out = Vec::new();
    for i in stencils(&v, t.len()) {
        let (mut a, mut b) = (t[i - 1], t[i + 1]);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let (mut f1, mut f2) = (f(x1)?, f(x2)?);
        while b - a > GOLDEN_TOL * b.abs().max(1.0) {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = f(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = f(x2)?;
            }
        }
        let (tm, fm) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        out.push(if fm <= v[i] { (tm, fm) } else { (t[i], v[i]) });
    }
    Ok(out)
}

/// Default output grid: at least `per_period` samples per oscillation π/Ω of δφ,
/// and never coarser than the Volterra step bound would make pointless.
pub fn default_grid(enc: &Encoding, horizon: f64, per_period: usize) -> Result<TimeGrid> {
    let period = std::f64::consts::PI / enc.rotation.abs().max(1e-12);
    let mut step = period / per_period.max(20) as f64;
    if let (Method::Volterra, Some(b)) = (enc.method, enc.active_bath()) {
        let w = enc.frequencies()?;
        step = step.max(step_bound(w[0], &b).min(step_bound(w[1], &b)));
    }
    TimeGrid::spanning(horizon, step)
}
