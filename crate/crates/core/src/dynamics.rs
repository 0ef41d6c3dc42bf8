//! The mode amplitude u_l(t) under the reservoir, by four methods.
//!
//! u̇ + iω_l u + ∫₀^t f(t−τ) u(τ) dτ = 0 with u(0) = 1. Every solver also
//! returns ∂u/∂ω_l, which the sensitivity code needs for ∂_Ω⟨n_d⟩.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::{
    bound_state, lamb_shift, lamb_shift_slope, memory_kernel, resolvent_moment, spectral_density,
    spectral_density_slope, BathSpec, BoundStateResult,
};
use crate::csv::{fmt_f64, CsvTable};
use crate::error::{Error, Result};
use crate::parallel::{self, Execution};
use crate::special::gauss_legendre;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub const INSTABILITY_BOUND: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ideal,
    Markov,
    Volterra,
    Spectral,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ideal => "ideal",
            Method::Markov => "markov",
            Method::Volterra => "volterra",
            Method::Spectral => "spectral",
        }
    }

    pub fn needs_bath(self) -> bool {
        !matches!(self, Method::Ideal)
    }
}

/// Uniform times t_k = k·step, k = 0..len.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("step", "grid spacing must be positive and finite"));
        }
        if len == 0 {
            return Err(Error::invalid("len", "grid needs at least one point"));
        }
        Ok(TimeGrid { step, len })
    }

    /// Grid over [0, horizon] with the largest spacing not above `max_step`.
    pub fn spanning(horizon: f64, max_step: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", "must be positive and finite"));
        }
        if !(max_step > 0.0) {
            return Err(Error::invalid("step", "grid spacing must be positive"));
        }
        let n = (horizon / max_step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(horizon / n as f64, n + 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.time(k))
    }
}

/// Largest Volterra step resolving both the mode oscillation and the kernel decay.
pub fn step_bound(omega_l: f64, bath: &BathSpec) -> f64 {
    (0.02 * 2.0 * PI / omega_l).min(0.2 / bath.omega_c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub grid: TimeGrid,
    pub samples: Vec<Complex64>,
    /// ∂u/∂ω_l at the same times.
    pub slope: Vec<Complex64>,
    pub omega_l: f64,
    pub method: Method,
    pub bath: Option<BathSpec>,
}

impl AmplitudeTrace {
    pub fn max_modulus(&self) -> f64 {
        self.samples.iter().map(|u| u.norm()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut table = CsvTable::new(&["t", "re_u", "im_u", "abs_u", "method"]);
        let mut meta = format!("omega_l={} method={}", fmt_f64(self.omega_l), self.method.name());
        if let Some(b) = self.bath {
            let _ = write!(meta, " gamma={} omega_c={} s={}", fmt_f64(b.gamma), fmt_f64(b.omega_c), fmt_f64(b.s));
        }
        table.meta(meta);
        for (t, u) in self.grid.times().zip(&self.samples) {
            table.row(vec![fmt_f64(t), fmt_f64(u.re), fmt_f64(u.im), fmt_f64(u.norm()), self.method.name().into()]);
        }
        table
    }
}

fn require_frequency(omega_l: f64) -> Result<()> {
    if omega_l > 0.0 && omega_l.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("omega_l", "mode frequency must be positive and finite"))
    }
}

/// Free evolution e^{−iω_l t}.
pub fn u_ideal(omega_l: f64, grid: TimeGrid) -> AmplitudeTrace {
    let samples: Vec<Complex64> = grid.times().map(|t| Complex64::from_polar(1.0, -omega_l * t)).collect();
    let slope = grid.times().zip(&samples).map(|(t, u)| -I * t * u).collect();
    AmplitudeTrace { grid, samples, slope, omega_l, method: Method::Ideal, bath: None }
}

/// Decay and frequency of the Markov solution, with their ω_l derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovRates {
    pub kappa: f64,
    pub shift: f64,
    pub kappa_slope: f64,
    pub shift_slope: f64,
}

impl MarkovRates {
    pub fn new(bath: &BathSpec, omega_l: f64, include_lamb_shift: bool) -> Result<Self> {
        require_frequency(omega_l)?;
        let (shift, shift_slope) = if include_lamb_shift {
            (lamb_shift(bath, omega_l)?, lamb_shift_slope(bath, omega_l)?)
        } else {
            (0.0, 0.0)
        };
        Ok(MarkovRates {
            kappa: PI * spectral_density(bath, omega_l),
            shift,
            kappa_slope: PI * spectral_density_slope(bath, omega_l),
            shift_slope,
        })
    }

    /// (u, ∂u/∂ω_l) at time t.
    pub fn at(&self, omega_l: f64, t: f64) -> (Complex64, Complex64) {
        let rate = Complex64::new(self.kappa, omega_l + self.shift);
        let u = (-rate * t).exp();
        let d_rate = Complex64::new(self.kappa_slope, 1.0 + self.shift_slope);
        (u, -d_rate * t * u)
    }
}

/// e^{−[κ + i(ω_l + Δ)]t} with κ = πJ(ω_l) and Δ the Lamb shift (zero when off).
pub fn u_markov(bath: &BathSpec, omega_l: f64, grid: TimeGrid, include_lamb_shift: bool) -> Result<AmplitudeTrace> {
    let rates = MarkovRates::new(bath, omega_l, include_lamb_shift)?;
    let (samples, slope) = grid.times().map(|t| rates.at(omega_l, t)).unzip();
    Ok(AmplitudeTrace { grid, samples, slope, omega_l, method: Method::Markov, bath: Some(*bath) })
}

/// Solve the integro-differential equation on `grid`, whose spacing must respect [`step_bound`].
pub fn u_volterra(bath: &BathSpec, omega_l: f64, grid: TimeGrid) -> Result<AmplitudeTrace> {
    require_frequency(omega_l)?;
    let bound = step_bound(omega_l, bath);
    if grid.step > bound * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { step: grid.step, bound });
    }
    let (samples, slope) = volterra_core(bath, omega_l, grid.step, grid.len - 1)?;
    Ok(AmplitudeTrace { grid, samples, slope, omega_l, method: Method::Volterra, bath: Some(*bath) })
}

/// Volterra solution reported on a coarse `grid`, integrated internally on a
/// fine grid that divides each coarse interval evenly.
pub fn u_volterra_sampled(bath: &BathSpec, omega_l: f64, grid: TimeGrid) -> Result<AmplitudeTrace> {
    require_frequency(omega_l)?;
    let sub = (grid.step / step_bound(omega_l, bath) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = grid.step / sub as f64;
    let (u, du) = volterra_core(bath, omega_l, h, (grid.len - 1) * sub)?;
    let samples = u.into_iter().step_by(sub).collect();
    let slope = du.into_iter().step_by(sub).collect();
    Ok(AmplitudeTrace { grid, samples, slope, omega_l, method: Method::Volterra, bath: Some(*bath) })
}

const PANEL_NODES: usize = 8;

/// Product-trapezoid integration in the frame rotating at ω_l.
///
/// With u = e^{−iω_l t} v the equation becomes v̇ = −∫ g(t−τ) v(τ) dτ with
/// g(x) = f(x) e^{iω_l x}, so the free oscillation is exact and only the slow
/// envelope is discretised. v is taken piecewise linear inside the
/// convolution; the kernel moments on each panel come from Gauss–Legendre.
/// The implicit trapezoid step is linear in v_{n+1} and solved directly.
/// The tangent z = ∂v/∂ω_l obeys the same recursion plus a source built
/// from ∂g/∂ω_l = i x g, which makes it the exact derivative of the discrete v.
fn volterra_core(bath: &BathSpec, omega: f64, h: f64, steps: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let (xs, ws) = gauss_legendre(PANEL_NODES);
    let nodes: Vec<(f64, f64)> = xs.iter().zip(&ws).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();

    // m0/m1: ∫ g and ∫ θ g over panel k; p0/p1 the same for i x g.
    let mut m0 = Vec::with_capacity(steps);
    let mut m1 = Vec::with_capacity(steps);
    let mut p0 = Vec::with_capacity(steps);
    let mut p1 = Vec::with_capacity(steps);
    for k in 0..steps {
        let (mut a0, mut a1, mut b0, mut b1) = (ZERO, ZERO, ZERO, ZERO);
        for &(theta, w) in &nodes {
            let x = (k as f64 + theta) * h;
            let g = memory_kernel(bath, x) * Complex64::from_polar(1.0, omega * x) * (w * h);
            let dg = I * x * g;
            a0 += g;
            a1 += g * theta;
            b0 += dg;
            b1 += dg * theta;
        }
        m0.push(a0);
        m1.push(a1);
        p0.push(b0);
        p1.push(b1);
    }
    // weight of v_{n−m} in the convolution at step n, for m < n; v_0 gets m1[n−1]
    let weights = |a0: &[Complex64], a1: &[Complex64]| -> Vec<Complex64> {
        (0..steps).map(|m| a0[m] - a1[m] + if m > 0 { a1[m - 1] } else { ZERO }).collect()
    };
    let w = weights(&m0, &m1);
    let wp = weights(&p0, &p1);

    let mut v = Vec::with_capacity(steps + 1);
    let mut z = Vec::with_capacity(steps + 1);
    v.push(ONE);
    z.push(ZERO);
    let (mut conv_v, mut conv_z, mut source) = (ZERO, ZERO, ZERO);
    let half = 0.5 * h;
    let pivot = ONE + w.first().copied().unwrap_or(ZERO) * half;
    for n in 0..steps {
        // history part of the convolutions at step n+1
        let (mut rv, mut rz, mut rs) = (m1[n] * v[0], m1[n] * z[0], p1[n] * v[0]);
        for m in 1..=n {
            let (vi, zi) = (v[n + 1 - m], z[n + 1 - m]);
            rv += w[m] * vi;
            rz += w[m] * zi;
            rs += wp[m] * vi;
        }
        let v_next = (v[n] - (conv_v + rv) * half) / pivot;
        let source_next = rs + wp[0] * v_next;
        let z_next = (z[n] - (conv_z + rz + source + source_next) * half) / pivot;
        conv_v = rv + w[0] * v_next;
        conv_z = rz + w[0] * z_next;
        source = source_next;
        v.push(v_next);
        z.push(z_next);
    }

    let mut u = Vec::with_capacity(steps + 1);
    let mut du = Vec::with_capacity(steps + 1);
    for (n, (vn, zn)) in v.into_iter().zip(z).enumerate() {
        let t = n as f64 * h;
        let rot = Complex64::from_polar(1.0, -omega * t);
        let un = rot * vn;
        if un.norm() > 1.0 + INSTABILITY_BOUND {
            return Err(Error::Instability { time: t, modulus: un.norm() });
        }
        du.push(-I * t * un + rot * zn);
        u.push(un);
    }
    Ok((u, du))
}

const SPECTRAL_SPAN: f64 = 20.0;
const SPECTRAL_PANEL_NODES: usize = 12;
const SPECTRAL_MAX_PANEL: f64 = 0.25;
const SPECTRAL_GRADING_LEVELS: i32 = 24;

/// Quadrature nodes on (0, 20ω_c] with J and the Lamb shift tabulated.
///
/// The table depends only on the bath and the horizon, so both modes share it.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub bath: BathSpec,
    pub horizon: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    density: Vec<f64>,
    shift: Vec<f64>,
}

impl SpectralBasis {
    /// Panels no wider than 2π/horizon keep e^{−iωt} resolved for t ≤ horizon.
    pub fn new(bath: &BathSpec, horizon: f64, exec: Execution) -> Result<Self> {
        bath.validate()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", "must be positive and finite"));
        }
        let (gx, gw) = gauss_legendre(SPECTRAL_PANEL_NODES);
        let width = (2.0 * PI / horizon).min(SPECTRAL_MAX_PANEL);
        let top = SPECTRAL_SPAN * bath.omega_c;
        let mut edges = vec![0.0];
        for k in (0..SPECTRAL_GRADING_LEVELS).rev() {
            edges.push(width * 0.5f64.powi(k));
        }
        let panels = ((top - width) / width).ceil() as usize;
        let step = (top - width) / panels as f64;
        for k in 1..=panels {
            edges.push(width + k as f64 * step);
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(0.5 * (a + b) + 0.5 * (b - a) * x);
                weights.push(0.5 * (b - a) * w);
            }
        }
        let density = nodes.iter().map(|&w| spectral_density(bath, w)).collect();
        let shift = parallel::try_map(exec, &nodes, |&w| lamb_shift(bath, w))?;
        Ok(SpectralBasis { bath: *bath, horizon, nodes, weights, density, shift })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn solve(&self, omega_l: f64) -> Result<SpectralSolution> {
        require_frequency(omega_l)?;
        let bound = bound_state(&self.bath, omega_l)?;
        // dE_b/dω_l = Z and dZ/dω_l = −2 Z³ ∫J/(ω − E_b)³
        let (d_energy, d_residue) = if bound.exists {
            let z = bound.residue;
            (z, -2.0 * z.powi(3) * resolvent_moment(&self.bath, bound.energy, 3)?)
        } else {
            (0.0, 0.0)
        };
        let mut theta = Vec::with_capacity(self.len());
        let mut d_theta = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let j = self.density[k];
            let detune = self.nodes[k] - omega_l - self.shift[k];
            let denom = detune * detune + (PI * j).powi(2);
            theta.push(self.weights[k] * j / denom);
            d_theta.push(self.weights[k] * 2.0 * j * detune / (denom * denom));
        }
        Ok(SpectralSolution {
            omega_l,
            bath: self.bath,
            horizon: self.horizon,
            bound,
            d_energy,
            d_residue,
            nodes: self.nodes.clone(),
            theta,
            d_theta,
        })
    }
}

/// u(t) = Z e^{−iE_b t} + ∫ Θ(ω) e^{−iωt} dω with Θ = J/([ω − ω_l − Δ(ω)]² + [πJ(ω)]²).
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub omega_l: f64,
    pub bath: BathSpec,
    pub horizon: f64,
    pub bound: BoundStateResult,
    d_energy: f64,
    d_residue: f64,
    nodes: Vec<f64>,
    /// quadrature-weighted Θ and ∂Θ/∂ω_l
    theta: Vec<f64>,
    d_theta: Vec<f64>,
}

const SAMPLE_CHUNK: usize = 4096;

impl SpectralSolution {
    /// Z + ∫Θ, which equals one up to quadrature error.
    pub fn sum_rule(&self) -> f64 {
        self.bound_terms(0.0).0.re + self.theta.iter().sum::<f64>()
    }

    fn bound_terms(&self, t: f64) -> (Complex64, Complex64) {
        if !self.bound.exists {
            return (ZERO, ZERO);
        }
        let phase = Complex64::from_polar(1.0, -self.bound.energy * t);
        let u = phase * self.bound.residue;
        let du = phase * self.d_residue - I * t * self.d_energy * u;
        (u, du)
    }

    /// (u, ∂u/∂ω_l) at time t.
    pub fn at(&self, t: f64) -> (Complex64, Complex64) {
        let (mut u, mut du) = self.bound_terms(t);
        for k in 0..self.nodes.len() {
            let e = Complex64::from_polar(1.0, -self.nodes[k] * t);
            u += e * self.theta[k];
            du += e * self.d_theta[k];
        }
        (u, du)
    }

    /// Evaluate on a uniform grid by phase recurrence, chunked over nodes in a
    /// fixed order so the sum does not depend on the thread count.
    pub fn sample(&self, grid: TimeGrid, exec: Execution) -> (Vec<Complex64>, Vec<Complex64>) {
        let starts: Vec<usize> = (0..self.nodes.len()).step_by(SAMPLE_CHUNK).collect();
        let partials = parallel::map(exec, &starts, |&start| {
            let end = (start + SAMPLE_CHUNK).min(self.nodes.len());
            let mut u = vec![ZERO; grid.len];
            let mut du = vec![ZERO; grid.len];
            for k in start..end {
                let step = Complex64::from_polar(1.0, -self.nodes[k] * grid.step);
                let mut e = ONE;
                for i in 0..grid.len {
                    u[i] += e * self.theta[k];
                    du[i] += e * self.d_theta[k];
                    e *= step;
                }
            }
            (u, du)
        });
        let mut u = vec![ZERO; grid.len];
        let mut du = vec![ZERO; grid.len];
        for (pu, pdu) in partials {
            for i in 0..grid.len {
                u[i] += pu[i];
                du[i] += pdu[i];
            }
        }
        for (i, t) in grid.times().enumerate() {
            let (bu, bdu) = self.bound_terms(t);
            u[i] += bu;
            du[i] += bdu;
        }
        (u, du)
    }
}

/// Spectral-decomposition solution on `grid`; γ_b = 0 falls back to [`u_ideal`].
pub fn u_spectral(bath: &BathSpec, omega_l: f64, grid: TimeGrid) -> Result<AmplitudeTrace> {
    require_frequency(omega_l)?;
    if bath.gamma == 0.0 {
        return Ok(AmplitudeTrace { method: Method::Spectral, bath: Some(*bath), ..u_ideal(omega_l, grid) });
    }
    let basis = SpectralBasis::new(bath, grid.horizon().max(grid.step), Execution::Parallel)?;
    let sol = basis.solve(omega_l)?;
    let (samples, slope) = sol.sample(grid, Execution::Parallel);
    Ok(AmplitudeTrace { grid, samples, slope, omega_l, method: Method::Spectral, bath: Some(*bath) })
}

/// Options shared by [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    pub lamb_shift: bool,
}

/// Dispatch to the chosen method. Volterra runs on an internal fine grid.
pub fn solve(
    method: Method,
    bath: Option<&BathSpec>,
    omega_l: f64,
    grid: TimeGrid,
    opts: SolveOptions,
) -> Result<AmplitudeTrace> {
    let need = |b: Option<&BathSpec>| {
        b.copied().ok_or_else(|| Error::Config(format!("method {} needs a bath", method.name())))
    };
    match method {
        Method::Ideal => {
            require_frequency(omega_l)?;
            Ok(u_ideal(omega_l, grid))
        }
        Method::Markov => u_markov(&need(bath)?, omega_l, grid, opts.lamb_shift),
        Method::Volterra => u_volterra_sampled(&need(bath)?, omega_l, grid),
        Method::Spectral => u_spectral(&need(bath)?, omega_l, grid),
    }
}

/// Time-local coefficients Δ_k(t) = −Im(u̇/u) and Γ_k(t) = −Re(u̇/u).
/// Entries are `None` where |u| ≤ 1e−12.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub shift: Vec<Option<f64>>,
    pub decay: Vec<Option<f64>>,
}

pub fn rates(trace: &AmplitudeTrace) -> Result<Rates> {
    let u = &trace.samples;
    let n = u.len();
    if n < 3 {
        return Err(Error::invalid("trace", "rates need at least three samples"));
    }
    let h = trace.grid.step;
    let mut shift = Vec::with_capacity(n);
    let mut decay = Vec::with_capacity(n);
    for k in 0..n {
        let du = if k == 0 {
            (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
        } else if k == n - 1 {
            (3.0 * u[k] - 4.0 * u[k - 1] + u[k - 2]) / (2.0 * h)
        } else {
            (u[k + 1] - u[k - 1]) / (2.0 * h)
        };
        if u[k].norm() <= 1e-12 {
            shift.push(None);
            decay.push(None);
        } else {
            let r = du / u[k];
            shift.push(Some(-r.im));
            decay.push(Some(-r.re));
        }
    }
    Ok(Rates { shift, decay })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic(wc: f64) -> BathSpec {
        BathSpec::ohmic(0.05, wc).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = TimeGrid::spanning(100.0, 0.3).unwrap();
        assert!(g.step <= 0.3);
        assert!((g.horizon() - 100.0).abs() < 1e-12);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::spanning(-1.0, 0.1).is_err());
    }

    #[test]
    fn ideal_trace() {
        let grid = TimeGrid::new(PI / 1.1 / 10.0, 11).unwrap();
        let tr = u_ideal(1.1, grid);
        assert_eq!(tr.samples[0], ONE);
        assert!((tr.samples[10] + ONE).norm() < 1e-14);
        assert!(tr.samples.iter().all(|u| (u.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn markov_trace() {
        let b = ohmic(25.0);
        let kappa = PI * 0.05 * 1.1 * (-1.1f64 / 25.0).exp();
        assert!((kappa - 0.165_349_773_744_155).abs() < 1e-14);
        let grid = TimeGrid::new(10.0 / kappa, 2).unwrap();
        let tr = u_markov(&b, 1.1, grid, false).unwrap();
        assert!((tr.samples[1].norm() - (-10.0f64).exp()).abs() < 1e-15);
        let zero = BathSpec::ohmic(0.0, 25.0).unwrap();
        let g = TimeGrid::new(0.1, 50).unwrap();
        let a = u_markov(&zero, 1.1, g, false).unwrap();
        let b = u_ideal(1.1, g);
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn markov_slope_matches_difference() {
        let b = ohmic(10.0);
        let r = MarkovRates::new(&b, 0.9, true).unwrap();
        let h = 1e-5;
        let rp = MarkovRates::new(&b, 0.9 + h, true).unwrap();
        let rm = MarkovRates::new(&b, 0.9 - h, true).unwrap();
        for t in [0.5, 3.0, 12.0] {
            let fd = (rp.at(0.9 + h, t).0 - rm.at(0.9 - h, t).0) / (2.0 * h);
            assert!((fd - r.at(0.9, t).1).norm() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn volterra_without_coupling_is_free() {
        let b = BathSpec::ohmic(0.0, 10.0).unwrap();
        let grid = TimeGrid::spanning(100.0, step_bound(1.1, &b)).unwrap();
        let v = u_volterra(&b, 1.1, grid).unwrap();
        let free = u_ideal(1.1, grid);
        for (x, y) in v.samples.iter().zip(&free.samples) {
            assert!((x - y).norm() < 1e-8);
        }
        for (x, y) in v.slope.iter().zip(&free.slope) {
            assert!((x - y).norm() < 1e-8);
        }
    }

    #[test]
    fn volterra_rejects_coarse_grids() {
        let b = ohmic(10.0);
        let grid = TimeGrid::new(0.05, 10).unwrap();
        assert!(matches!(u_volterra(&b, 1.1, grid), Err(Error::StepTooLarge { .. })));
        assert!(u_volterra_sampled(&b, 1.1, grid).is_ok());
    }

    #[test]
    fn volterra_tangent_matches_difference() {
        let b = ohmic(10.0);
        let grid = TimeGrid::spanning(10.0, 0.02).unwrap();
        let h = 1e-5;
        let up = u_volterra(&b, 0.9 + h, grid).unwrap();
        let um = u_volterra(&b, 0.9 - h, grid).unwrap();
        let u0 = u_volterra(&b, 0.9, grid).unwrap();
        for k in [50, 200, grid.len - 1] {
            let fd = (up.samples[k] - um.samples[k]) / (2.0 * h);
            assert!((fd - u0.slope[k]).norm() < 1e-6 * fd.norm().max(1.0), "k={k}");
        }
    }

    #[test]
    fn volterra_decays_without_bound_state() {
        let b = ohmic(10.0);
        let grid = TimeGrid::new(0.5, 201).unwrap();
        for wl in [0.9, 1.1] {
            let tr = u_volterra_sampled(&b, wl, grid).unwrap();
            assert!(tr.samples.last().unwrap().norm() < 0.05, "wl={wl}");
            assert!(tr.max_modulus() <= 1.0 + INSTABILITY_BOUND);
        }
    }

    #[test]
    fn spectral_sum_rule_and_free_limit() {
        let b = ohmic(25.0);
        let basis = SpectralBasis::new(&b, 50.0, Execution::Parallel).unwrap();
        for wl in [0.9, 1.1] {
            let sol = basis.solve(wl).unwrap();
            assert!(sol.bound.exists);
            assert!((sol.sum_rule() - 1.0).abs() < 1e-6, "{}", sol.sum_rule());
        }
        let zero = BathSpec::ohmic(0.0, 25.0).unwrap();
        let grid = TimeGrid::new(0.25, 40).unwrap();
        let tr = u_spectral(&zero, 1.1, grid).unwrap();
        assert_eq!(tr.samples, u_ideal(1.1, grid).samples);
    }

    #[test]
    fn spectral_sampling_matches_pointwise() {
        let b = ohmic(10.0);
        let basis = SpectralBasis::new(&b, 20.0, Execution::Sequential).unwrap();
        let sol = basis.solve(1.1).unwrap();
        let grid = TimeGrid::new(0.5, 41).unwrap();
        let (u, du) = sol.sample(grid, Execution::Parallel);
        for k in [0, 7, 40] {
            let (a, da) = sol.at(grid.time(k));
            assert!((a - u[k]).norm() < 1e-12);
            assert!((da - du[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn rates_of_closed_forms() {
        let grid = TimeGrid::new(1e-3, 200).unwrap();
        let r = rates(&u_ideal(1.1, grid)).unwrap();
        assert!(r.shift.iter().all(|d| (d.unwrap() - 1.1).abs() < 1e-6));
        assert!(r.decay.iter().all(|g| g.unwrap().abs() < 1e-6));
        let b = ohmic(25.0);
        let tr = u_markov(&b, 1.1, grid, false).unwrap();
        let kappa = PI * spectral_density(&b, 1.1);
        let r = rates(&tr).unwrap();
        assert!(r.decay.iter().all(|g| (g.unwrap() - kappa).abs() < 1e-6));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let tr = u_ideal(1.0, TimeGrid::new(0.5, 3).unwrap());
        let text = tr.to_csv().render();
        assert!(text.starts_with("# omega_l="));
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("t,re_u,im_u,abs_u,method"));
    }
}
