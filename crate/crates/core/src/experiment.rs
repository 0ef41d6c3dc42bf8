//! Experiment configuration, figure presets, sweeps and the CSV artifacts they produce.
//!
//! A config is a JSON document with a `schema_version`; unknown keys are
//! rejected. Every field except the version is optional and falls back to the
//! preset named by `experiment` (`custom` when absent).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::bath::{bound_state, BathSpec};
use crate::csv::{fmt_f64, CsvTable};
use crate::dynamics::{MarkovRates, Method, TimeGrid};
use crate::error::{Error, Result};
use crate::ideal::{
    case3_profile, delta_phi, g_threshold, h_function, mean_nd, mean_photons, ratio_case1, ratio_case2, ratio_case3,
    var_nd, PhotonCount,
};
use crate::model::{FrequencyLayout, ProbeState};
use crate::parallel::{self, Execution};
use crate::sensitivity::{encoding_meta, polished_minima, Encoding, Propagator, SensitivityCurve, SensitivityOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig5d,
    Fig5e,
    Fig5f,
    Fig6a,
    Fig6b,
    Fig6c,
    #[default]
    Custom,
}

impl ExperimentId {
    /// One preset per figure panel.
    pub const FIGURES: [ExperimentId; 17] = [
        ExperimentId::Fig2a,
        ExperimentId::Fig2b,
        ExperimentId::Fig3a,
        ExperimentId::Fig3b,
        ExperimentId::Fig4a,
        ExperimentId::Fig4b,
        ExperimentId::Fig4c,
        ExperimentId::Fig4d,
        ExperimentId::Fig5a,
        ExperimentId::Fig5b,
        ExperimentId::Fig5c,
        ExperimentId::Fig5d,
        ExperimentId::Fig5e,
        ExperimentId::Fig5f,
        ExperimentId::Fig6a,
        ExperimentId::Fig6b,
        ExperimentId::Fig6c,
    ];

    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown experiment id `{s}`")))
    }
}

/// Probe with |β| = R|α|, α = |α|e^{iφ₁}, β = |β|e^{iφ₂}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub abs_alpha: f64,
    #[serde(rename = "R")]
    pub ratio: f64,
    pub phi1: f64,
    pub phi2: f64,
    #[serde(rename = "G")]
    pub squeeze: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { abs_alpha: 2.0, ratio: 1.0, phi1: 0.0, phi2: 0.0, squeeze: 0.5 }
    }
}

impl ProbeConfig {
    pub fn probe(&self) -> Result<ProbeState> {
        if !(self.abs_alpha >= 0.0 && self.abs_alpha.is_finite()) {
            return Err(Error::invalid("abs_alpha", "must be finite and >= 0"));
        }
        if !(self.ratio >= 0.0 && self.ratio.is_finite()) {
            return Err(Error::invalid("R", "must be finite and >= 0"));
        }
        ProbeState::polar(self.abs_alpha, self.phi1, self.ratio * self.abs_alpha, self.phi2, self.squeeze)
    }
}

/// A one-dimensional grid over a named parameter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl SweepSpec {
    /// Explicit `values`, or `points` evenly spaced samples from `start` to `stop`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let grid = if !self.values.is_empty() {
            self.values.clone()
        } else {
            match (self.start, self.stop, self.points) {
                (Some(a), Some(b), Some(n)) => linspace(a, b, n),
                (None, None, None) => Vec::new(),
                _ => return Err(Error::Config("sweep needs `values` or all of `start`, `stop`, `points`".into())),
            }
        };
        if grid.is_empty() {
            return Err(Error::Config(format!("sweep over `{}` has an empty grid", self.parameter)));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("sweep grid values must be finite".into()));
        }
        Ok(grid)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub experiment: ExperimentId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    /// Sagnac phase φ for lossless evaluations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baths: Option<Vec<BathSpec>>,
    /// Ω in units of ω₀.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Output sample spacing; solvers refine internally as needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<SensitivityOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Output directory, used when the command line does not give one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn preset(id: ExperimentId) -> Self {
        ExperimentConfig { schema_version: SCHEMA_VERSION, experiment: id, ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Preset values with this config's fields laid over them.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema_version must be {SCHEMA_VERSION}")));
        }
        let mut r = Resolved::preset(self.experiment);
        if let Some(p) = self.probe {
            r.probe = p;
        }
        if let Some(x) = self.phase {
            r.phase = x;
        }
        if let Some(b) = &self.baths {
            r.baths = b.clone();
        }
        if let Some(x) = self.rotation {
            r.rotation = x;
        }
        if let Some(x) = self.horizon {
            r.horizon = x;
        }
        if let Some(x) = self.step {
            r.step = x;
        }
        if let Some(m) = self.method {
            r.method = m;
        }
        if let Some(o) = self.options {
            r.options = o;
        }
        r.validate()?;
        Ok(r)
    }
}

/// A fully specified run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub experiment: ExperimentId,
    pub probe: ProbeConfig,
    pub phase: f64,
    pub baths: Vec<BathSpec>,
    pub rotation: f64,
    pub horizon: f64,
    pub step: f64,
    pub method: Method,
    pub options: SensitivityOptions,
}

const DEFAULT_STEP: f64 = 0.05;
const MAX_SAMPLES: f64 = 1e7;

fn bath(gamma: f64, omega_c: f64, s: f64) -> BathSpec {
    BathSpec { gamma, omega_c, s }
}

impl Resolved {
    /// Section IV values: α = β = 2, G = 0.5, s = 1, γ_b = 0.05, Ω = 0.1ω₀.
    pub fn preset(id: ExperimentId) -> Self {
        use ExperimentId::*;
        let mut r = Resolved {
            experiment: id,
            probe: ProbeConfig::default(),
            // π/2 is signal-free for real α = β; φ ≡ 0 mod π is the optimum there
            phase: 0.0,
            baths: vec![bath(0.05, 25.0, 1.0)],
            rotation: 0.1,
            horizon: 100.0,
            step: DEFAULT_STEP,
            method: Method::Spectral,
            options: SensitivityOptions::default(),
        };
        match id {
            Fig2a | Fig2b | Fig3a | Fig3b | Fig4a | Fig4b => {
                r.method = Method::Ideal;
                r.baths.clear();
                if id == Fig2a {
                    r.probe.squeeze = 1.0;
                }
            }
            Fig4c => {
                r.method = Method::Markov;
                r.baths = vec![bath(1e-3, 25.0, 1.0)];
            }
            Fig4d => {
                r.method = Method::Markov;
                r.baths = vec![bath(1e-10, 25.0, 1.0)];
            }
            Fig5a => r.baths = vec![bath(0.05, 10.0, 1.0)],
            Fig5b => r.baths = vec![bath(0.05, 20.0, 1.0)],
            Fig6a => r.baths = [0.02, 0.05, 0.1].iter().map(|&g| bath(g, 25.0, 1.0)).collect(),
            Fig6b => r.baths = [23.0, 25.0, 30.0].iter().map(|&w| bath(0.05, w, 1.0)).collect(),
            Fig6c => r.baths = [0.5, 1.0, 3.0].iter().map(|&s| bath(0.05, 25.0, s)).collect(),
            Fig5c | Fig5d | Fig5e | Fig5f | Custom => {}
        }
        r
    }

    pub fn validate(&self) -> Result<()> {
        self.probe.probe()?;
        for b in &self.baths {
            b.validate()?;
        }
        let layout = FrequencyLayout::new(self.rotation)?;
        if !(layout.lower() > 0.0) {
            return Err(Error::invalid("rotation", "must stay below omega_0 so both modes have positive frequency"));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon", "must be positive and finite"));
        }
        if !(self.step > 0.0 && self.step <= self.horizon) {
            return Err(Error::invalid("step", "must be positive and no larger than the horizon"));
        }
        if self.horizon / self.step > MAX_SAMPLES {
            return Err(Error::invalid("step", "grid would exceed 1e7 samples"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::spanning(self.horizon, self.step)
    }

    fn encodings(&self) -> Result<Vec<Encoding>> {
        let probe = self.probe.probe()?;
        if self.method == Method::Ideal || self.baths.is_empty() {
            if self.method.needs_bath() {
                return Err(Error::Config(format!("method {} needs at least one bath", self.method.name())));
            }
            return Ok(vec![Encoding::new(probe, None, self.rotation, self.method)?.with_options(self.options)]);
        }
        self.baths
            .iter()
            .map(|b| Ok(Encoding::new(probe, Some(*b), self.rotation, self.method)?.with_options(self.options)))
            .collect()
    }

    fn header(&self, table: &mut CsvTable) {
        table.meta(format!("experiment={} schema_version={SCHEMA_VERSION}", self.experiment.name()));
        table.meta(format!("resolved={}", serde_json::to_string(self).unwrap_or_default()));
    }
}

/// One CSV file of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub table: CsvTable,
}

fn numbered(stem: &str, k: usize, count: usize) -> String {
    if count == 1 {
        format!("{stem}.csv")
    } else {
        format!("{stem}_{k}.csv")
    }
}

/// Run a preset or custom experiment.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<Artifact>> {
    let r = cfg.resolve()?;
    let name = r.experiment.name();
    use ExperimentId::*;
    match r.experiment {
        Fig2a => Ok(vec![fig2a(&r)]),
        Fig2b => Ok(vec![fig2b(&r)]),
        Fig3a => Ok(vec![fig3a(&r)]),
        Fig3b => Ok(vec![fig3b(&r)?]),
        Fig5a | Fig5b | Fig5c => traces(&r, &name, exec),
        Fig5e | Fig6a | Fig6b | Fig6c => Ok(vec![minima_table(&r, &name, exec)?]),
        Fig4a | Fig4b | Fig4c | Fig4d | Fig5d | Fig5f | Custom => curves(&r, &name, exec),
    }
}

fn fig2a(r: &Resolved) -> Artifact {
    let g = r.probe.squeeze;
    let shifts = [("inv_k_dphi_0", 0.0), ("inv_k_dphi_pi", PI), ("inv_k_dphi_pi_4", FRAC_PI_4)];
    let mut t = CsvTable::new(&["phi2", shifts[0].0, shifts[1].0, shifts[2].0]);
    r.header(&mut t);
    t.meta(format!("G={} max={} min={}", fmt_f64(g), fmt_f64(g.exp()), fmt_f64((-g).exp())));
    t.meta("delta_phi=0,pi,pi/4 (pi/4 is a representative off-resonant value)");
    for phi2 in linspace(0.0, 2.0 * PI, 721) {
        let mut row = vec![fmt_f64(phi2)];
        row.extend(shifts.iter().map(|(_, d)| fmt_f64(ratio_case2(g, phi2 + d, phi2))));
        t.row(row);
    }
    Artifact { name: "fig2a.csv".into(), table: t }
}

fn fig2b(r: &Resolved) -> Artifact {
    let phi2 = FRAC_PI_2;
    let shifts = [("inv_k_dphi_0", 0.0), ("inv_k_dphi_pi_4", FRAC_PI_4), ("inv_k_dphi_2pi", 2.0 * PI)];
    let mut t = CsvTable::new(&["G", shifts[0].0, shifts[1].0, shifts[2].0]);
    r.header(&mut t);
    t.meta(format!("phi2={}", fmt_f64(phi2)));
    for g in linspace(0.0, 2.0, 401) {
        let mut row = vec![fmt_f64(g)];
        row.extend(shifts.iter().map(|(_, d)| fmt_f64(ratio_case2(g, phi2 + d, phi2))));
        t.row(row);
    }
    Artifact { name: "fig2b.csv".into(), table: t }
}

fn fig3a(r: &Resolved) -> Artifact {
    let gs = [("inv_k_G0p5", 0.5), ("inv_k_G1", 1.0)];
    let mut t = CsvTable::new(&["R", gs[0].0, gs[1].0]);
    r.header(&mut t);
    t.meta(format!("h_G0p5={} h_G1={}", fmt_f64(h_function(0.5)), fmt_f64(h_function(1.0))));
    for ratio in linspace(0.0, 5.0, 501) {
        t.row(vec![fmt_f64(ratio), fmt_f64(case3_profile(0.5, ratio)), fmt_f64(case3_profile(1.0, ratio))]);
    }
    Artifact { name: "fig3a.csv".into(), table: t }
}

const FIG3B_RATIOS: [(&str, f64); 5] = [("R0", 0.0), ("R0p5", 0.5), ("R1", 1.0), ("R2", 2.0), ("R5", 5.0)];

fn fig3b(r: &Resolved) -> Result<Artifact> {
    let cols: Vec<String> = FIG3B_RATIOS.iter().map(|(n, _)| format!("inv_k_{n}")).collect();
    let mut header = vec!["G"];
    header.extend(cols.iter().map(String::as_str));
    let mut t = CsvTable::new(&header);
    r.header(&mut t);
    t.meta(format!("phi={}", fmt_f64(FRAC_PI_2)));
    let mut th = String::new();
    for (n, ratio) in FIG3B_RATIOS {
        th.push_str(&format!("{}G_th_{n}={}", if th.is_empty() { "" } else { " " }, fmt_f64(g_threshold(ratio)?)));
    }
    t.meta(th);
    for g in linspace(0.0, 2.0, 401) {
        let mut row = vec![fmt_f64(g)];
        row.extend(FIG3B_RATIOS.iter().map(|(_, ratio)| fmt_f64(ratio_case3(g, *ratio, FRAC_PI_2))));
        t.row(row);
    }
    Ok(Artifact { name: "fig3b.csv".into(), table: t })
}

/// Both mode amplitudes, one file per bath.
fn traces(r: &Resolved, stem: &str, exec: Execution) -> Result<Vec<Artifact>> {
    let encs = r.encodings()?;
    let grid = r.grid()?;
    let mut out = Vec::new();
    for (k, enc) in encs.iter().enumerate() {
        let prop = Propagator::new(enc, grid.horizon(), exec)?;
        let amps = prop.sample(grid, exec)?;
        let mut t = CsvTable::new(&["t", "re_u1", "im_u1", "abs_u1", "re_u2", "im_u2", "abs_u2", "method"]);
        r.header(&mut t);
        let w = enc.frequencies()?;
        t.meta(format!("omega_1={} omega_2={} method={}", fmt_f64(w[0]), fmt_f64(w[1]), enc.method.name()));
        if let Some(b) = enc.bath {
            t.meta(format!("gamma={} omega_c={} s={}", fmt_f64(b.gamma), fmt_f64(b.omega_c), fmt_f64(b.s)));
            for (l, wl) in w.iter().enumerate() {
                let bs = bound_state(&b, *wl)?;
                t.meta(format!(
                    "bound_{} exists={} energy={} residue={}",
                    l + 1,
                    bs.exists,
                    fmt_f64(bs.energy),
                    fmt_f64(bs.residue)
                ));
            }
        }
        for (time, a) in grid.times().zip(&amps) {
            let mut row = vec![fmt_f64(time)];
            for u in a.u {
                row.extend([fmt_f64(u.re), fmt_f64(u.im), fmt_f64(u.norm())]);
            }
            row.push(enc.method.name().into());
            t.row(row);
        }
        out.push(Artifact { name: numbered(stem, k, encs.len()), table: t });
    }
    Ok(out)
}

/// δφ(t) and 1/k(t), one file per bath, with the global minimum in the metadata.
fn curves(r: &Resolved, stem: &str, exec: Execution) -> Result<Vec<Artifact>> {
    let encs = r.encodings()?;
    let grid = r.grid()?;
    let mut out = Vec::new();
    for (k, enc) in encs.iter().enumerate() {
        let prop = Propagator::new(enc, grid.horizon(), exec)?;
        let curve = SensitivityCurve::from_propagator(enc, &prop, grid, exec)?;
        let minima = polished_minima(&curve, &prop)?;
        let mut table = CsvTable::new(&[]);
        r.header(&mut table);
        let body = curve.to_csv();
        table.header = body.header;
        table.meta.extend(body.meta);
        table.rows = body.rows;
        let best = minima
            .iter()
            .copied()
            .chain(curve.points.iter().map(|p| (p.t, p.dphi)))
            .filter(|(_, v)| v.is_finite())
            .fold(None, |acc: Option<(f64, f64)>, x| match acc {
                Some(a) if a.1 <= x.1 => Some(a),
                _ => Some(x),
            });
        if let Some((t, v)) = best {
            table.meta(format!("global_min t={} dphi={}", fmt_f64(t), fmt_f64(v)));
        }
        out.push(Artifact { name: numbered(stem, k, encs.len()), table });
    }
    Ok(out)
}

/// Local-minimum trajectories of δφ, long format with one block per bath.
fn minima_table(r: &Resolved, stem: &str, exec: Execution) -> Result<Artifact> {
    let encs = r.encodings()?;
    let grid = r.grid()?;
    let mut t = CsvTable::new(&["curve", "gamma", "omega_c", "s", "t", "dphi_min"]);
    r.header(&mut t);
    if let Some(first) = encs.first() {
        for line in encoding_meta(first).into_iter().take(2) {
            t.meta(line);
        }
    }
    for (k, enc) in encs.iter().enumerate() {
        let prop = Propagator::new(enc, grid.horizon(), exec)?;
        let curve = SensitivityCurve::from_propagator(enc, &prop, grid, exec)?;
        let b = enc.bath.unwrap_or(BathSpec { gamma: 0.0, omega_c: f64::NAN, s: f64::NAN });
        for (time, v) in polished_minima(&curve, &prop)? {
            t.row(vec![k.to_string(), fmt_f64(b.gamma), fmt_f64(b.omega_c), fmt_f64(b.s), fmt_f64(time), fmt_f64(v)]);
        }
    }
    Ok(Artifact { name: format!("{stem}.csv"), table: t })
}

/// Mode amplitudes for every configured bath.
pub fn run_udynamics(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<Artifact>> {
    traces(&cfg.resolve()?, "udynamics", exec)
}

/// δφ(t) and 1/k(t) for every configured bath.
pub fn run_sensitivity(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<Artifact>> {
    curves(&cfg.resolve()?, "sensitivity", exec)
}

/// Lossless observables at the configured probe and phase.
pub fn run_ideal(cfg: &ExperimentConfig) -> Result<Artifact> {
    let r = cfg.resolve()?;
    let mut t = CsvTable::new(&IDEAL_COLUMNS);
    r.header(&mut t);
    t.row(ideal_row(&r.probe, r.phase)?);
    Ok(Artifact { name: "ideal.csv".into(), table: t })
}

pub const IDEAL_PARAMETERS: [&str; 6] = ["G", "phi", "R", "phi1", "phi2", "abs_alpha"];
pub const BATH_PARAMETERS: [&str; 3] = ["gamma", "omega_c", "s"];

const IDEAL_COLUMNS: [&str; 17] = [
    "G",
    "phi",
    "R",
    "phi1",
    "phi2",
    "abs_alpha",
    "mean_nd",
    "var_nd",
    "dphi",
    "photons",
    "snl",
    "ratio_k_inv",
    "ratio_case1",
    "ratio_case2",
    "ratio_case3",
    "case3_profile",
    "h",
];

const BATH_COLUMNS: [&str; 14] = [
    "gamma",
    "omega_c",
    "s",
    "critical_frequency",
    "omega_1",
    "bound_1",
    "energy_1",
    "residue_1",
    "kappa_1",
    "omega_2",
    "bound_2",
    "energy_2",
    "residue_2",
    "kappa_2",
];

/// `ratio_case*` use φ₁ as the common probe phase; `ratio_k_inv` is the
/// general δφ at the Sagnac phase `phi` over the shot-noise limit.
fn ideal_row(p: &ProbeConfig, phi: f64) -> Result<Vec<String>> {
    let probe = p.probe()?;
    let g = p.squeeze;
    let dphi = delta_phi(&probe, phi)?;
    let photons = mean_photons(&probe, PhotonCount::Exact);
    let (snl, ratio) = if photons > 0.0 { (1.0 / photons.sqrt(), dphi * photons.sqrt()) } else { (f64::NAN, f64::NAN) };
    Ok([
        g,
        phi,
        p.ratio,
        p.phi1,
        p.phi2,
        p.abs_alpha,
        mean_nd(&probe, phi),
        var_nd(&probe, phi)?,
        dphi,
        photons,
        snl,
        ratio,
        ratio_case1(g, p.phi1),
        ratio_case2(g, p.phi1, p.phi2),
        ratio_case3(g, p.ratio, p.phi1),
        case3_profile(g, p.ratio),
        h_function(g),
    ]
    .iter()
    .map(|&x| fmt_f64(x))
    .collect())
}

fn bath_row(b: &BathSpec, rotation: f64) -> Result<Vec<String>> {
    b.validate()?;
    let layout = FrequencyLayout::new(rotation)?;
    let mut row = vec![fmt_f64(b.gamma), fmt_f64(b.omega_c), fmt_f64(b.s), fmt_f64(b.critical_frequency())];
    for w in [layout.upper(), layout.lower()] {
        let bs = bound_state(b, w)?;
        let kappa = MarkovRates::new(b, w, false)?.kappa;
        row.extend([fmt_f64(w), bs.exists.to_string(), fmt_f64(bs.energy), fmt_f64(bs.residue), fmt_f64(kappa)]);
    }
    Ok(row)
}

/// Evaluate every grid point of `spec` on top of the resolved config. Rows
/// come out in grid order whatever the execution mode.
pub fn run_sweep(cfg: &ExperimentConfig, spec: &SweepSpec, exec: Execution) -> Result<Artifact> {
    let r = cfg.resolve()?;
    let name = spec.parameter.as_str();
    let is_ideal = IDEAL_PARAMETERS.contains(&name);
    if !is_ideal && !BATH_PARAMETERS.contains(&name) {
        return Err(Error::UnknownParameter(spec.parameter.clone()));
    }
    let grid = spec.grid()?;
    let mut t = CsvTable::new(if is_ideal { &IDEAL_COLUMNS[..] } else { &BATH_COLUMNS[..] });
    r.header(&mut t);
    t.meta(format!("sweep parameter={name} points={}", grid.len()));
    let rows = if is_ideal {
        parallel::try_map(exec, &grid, |&x| {
            let mut p = r.probe;
            let mut phi = r.phase;
            match name {
                "G" => p.squeeze = x,
                "phi" => phi = x,
                "R" => p.ratio = x,
                "phi1" => p.phi1 = x,
                "phi2" => p.phi2 = x,
                _ => p.abs_alpha = x,
            }
            ideal_row(&p, phi)
        })?
    } else {
        let base = r.baths.first().copied().unwrap_or(bath(0.05, 25.0, 1.0));
        parallel::try_map(exec, &grid, |&x| {
            let mut b = base;
            match name {
                "gamma" => b.gamma = x,
                "omega_c" => b.omega_c = x,
                _ => b.s = x,
            }
            bath_row(&b, r.rotation)
        })?
    };
    for row in rows {
        t.row(row);
    }
    Ok(Artifact { name: format!("sweep_{name}.csv"), table: t })
}
