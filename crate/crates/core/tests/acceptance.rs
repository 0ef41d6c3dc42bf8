//! Acceptance suite: one PASS/FAIL line per criterion at the stated tolerances.
//!
//! Criteria listed in KNOWN_RED fail for documented reasons (see the README).
//! The run exits nonzero if any other criterion fails, or if a known red one
//! starts passing so the record can be updated.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use gyrosense::appendix::{nd_appendix_raw, AppendixVariant};
use gyrosense::bath::{bound_state, memory_kernel, memory_kernel_by_quadrature, BathSpec};
use gyrosense::dynamics::{step_bound, u_spectral, u_volterra, u_volterra_sampled, Method, TimeGrid};
use gyrosense::fock::{fock_oracle, DEFAULT_CUTOFF};
use gyrosense::gaussian::{evolve_gaussian, nd_from_moments};
use gyrosense::ideal::{case3_profile, g_threshold, h_crossing, h_function, mean_nd, ratio_case1, var_nd};
use gyrosense::sensitivity::{polished_minima, Encoding, Propagator, SensitivityCurve};
use gyrosense::{Execution, ProbeState};
use num_complex::Complex64 as C;

const KNOWN_RED: [u8; 3] = [5, 8, 9];
const HORIZON: f64 = 100.0;
const STEP: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let phis: Vec<f64> = (0..=4000).map(|k| k as f64 * PI / 4000.0).collect();
    let mut worst: f64 = 0.0;
    for g in [0.25, 0.5, 1.0, 2.0] {
        let v: Vec<f64> = phis.iter().map(|&p| ratio_case1(g, p)).collect();
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        worst = worst.max((max - g.exp()).abs()).max((min - (-g).exp()).abs());
    }
    outcome(worst <= 1e-12, format!("max |extreme - e^(+-G)| = {worst:.3e} (tol 1e-12)"))
}

fn criterion_2() -> Outcome {
    let g0 = h_crossing();
    let dh = (h_function(g0) - 1.0).abs();
    let dt = (g_threshold(0.0).unwrap() - g0).abs();
    outcome(dh <= 1e-10 && dt <= 1e-8, format!("G0 = {g0:.15}, |h(G0)-1| = {dh:.3e}, |g_threshold(0)-G0| = {dt:.3e}"))
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut worst_one: f64 = 0.0;
    let mut worst_tail: f64 = 0.0;
    for g in [0.5, 1.0] {
        let below: Vec<f64> = (0..200).map(|k| case3_profile(g, k as f64 / 200.0)).collect();
        let above: Vec<f64> = (1..=200).map(|k| case3_profile(g, 1.0 + k as f64 * 0.05)).collect();
        ok &= below.windows(2).all(|w| w[1] < w[0]);
        ok &= above.windows(2).all(|w| w[1] > w[0]) && above[0] > case3_profile(g, 1.0);
        worst_one = worst_one.max((case3_profile(g, 1.0) - (-g).exp()).abs());
        let h = h_function(g);
        worst_tail = worst_tail.max((case3_profile(g, 0.0) - h).abs()).max((case3_profile(g, 1e6) - h).abs());
    }
    outcome(
        ok && worst_one <= 1e-12 && worst_tail <= 1e-4,
        format!("monotone={ok}, |f(1)-e^-G| = {worst_one:.3e}, |f(0|1e6)-h| = {worst_tail:.3e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [0.1, 0.3, 0.5] {
        for g in [0.1, 0.2, 0.3] {
            for phi in [0.3, 1.2, 2.5] {
                let p = ProbeState::polar(a, 0.2, 0.8 * a, -0.5, g).unwrap();
                let f = fock_oracle(&p, phi, DEFAULT_CUTOFF).unwrap();
                worst = worst.max((f.mean - mean_nd(&p, phi)).abs()).max((f.variance - var_nd(&p, phi).unwrap()).abs());
            }
        }
    }
    outcome(worst <= 1e-6, format!("max abs deviation over 27 points = {worst:.3e} (tol 1e-6)"))
}

fn criterion_5() -> Outcome {
    let pol = C::from_polar;
    let pairs = [
        (C::new(1.0, 0.0), C::new(1.0, 0.0)),
        (pol(1.0, -0.3), pol(1.0, 0.3)),
        (C::new(0.5, 0.0), C::new(0.5, 0.0)),
        (pol(0.8, -0.3), pol(0.7, 0.4)),
        (C::new(0.0, 0.9), C::new(0.6, 0.0)),
        (pol(0.3, 2.0), pol(0.95, -1.0)),
        (C::new(1.0, 0.0), C::new(0.5, 0.0)),
        (C::new(0.2, 0.0), pol(0.9, 0.1)),
    ];
    let mut worst = [0.0f64; 2];
    let mut worst_imag = [0.0f64; 2];
    for g in [0.2, 0.5] {
        for a in [0.5, 2.0] {
            let p = ProbeState::symmetric(a, g).unwrap();
            for (u1, u2) in pairs {
                let (mean, _) = nd_from_moments(&evolve_gaussian(&p, u1, u2).unwrap()).unwrap();
                for (k, v) in [AppendixVariant::Resolved, AppendixVariant::Literal].into_iter().enumerate() {
                    let raw = nd_appendix_raw(&p, u1, u2, v).unwrap();
                    worst[k] = worst[k].max((raw - mean).norm());
                    worst_imag[k] = worst_imag[k].max(raw.im.abs());
                }
            }
        }
    }
    outcome(
        worst[0] <= 1e-8,
        format!(
            "max |appendix - moments|: resolved {:.3e} (|Im| up to {:.3e}), literal {:.3e} (|Im| up to {:.3e}); tol 1e-8",
            worst[0], worst_imag[0], worst[1], worst_imag[1]
        ),
    )
}

fn criterion_6() -> Outcome {
    // s = 1, γ_b = 0.05, Ω = 0.1: ω₁ = 1.1, ω₂ = 0.9
    let onset = |omega_l: f64| {
        (0..=2000)
            .map(|k| 10.0 + k as f64 * 0.01)
            .find(|&wc| bound_state(&BathSpec::ohmic(0.05, wc).unwrap(), omega_l).unwrap().exists)
    };
    let (lo, hi) = (onset(0.9), onset(1.1));
    let close = |x: Option<f64>, want: f64| x.is_some_and(|x| (x / want - 1.0).abs() <= 0.01);
    outcome(
        close(lo, 18.0) && close(hi, 22.0),
        format!("transitions at omega_c = {lo:?} and {hi:?} (expected 18, 22 within 1%)"),
    )
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    let coarse = TimeGrid::new(0.1, 501).unwrap();
    for wc in [10.0, 25.0] {
        let bath = BathSpec::ohmic(0.05, wc).unwrap();
        for w in [0.9, 1.1] {
            let v = u_volterra_sampled(&bath, w, coarse).unwrap();
            let s = u_spectral(&bath, w, coarse).unwrap();
            worst = worst.max(v.samples.iter().zip(&s.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
        let w = 1.1;
        let steps = (20.0 / step_bound(w, &bath)).ceil() as usize;
        let end = |n: usize| {
            *u_volterra(&bath, w, TimeGrid::new(20.0 / n as f64, n + 1).unwrap()).unwrap().samples.last().unwrap()
        };
        let (a, b, c) = (end(steps), end(2 * steps), end(4 * steps));
        ratios.push((a - b).norm() / (b - c).norm());
    }
    let ok = worst <= 1e-3 && ratios.iter().all(|r| (3.5..=4.5).contains(r));
    outcome(ok, format!("max |u_volterra - u_spectral| on [0,50] = {worst:.3e}; Richardson ratios {ratios:.4?}"))
}

type Check = Box<dyn FnOnce(&mut BTreeMap<String, Run>) -> Outcome>;

struct Run {
    curve: SensitivityCurve,
    minima: Vec<(f64, f64)>,
}

fn run(bath: Option<BathSpec>, method: Method) -> Run {
    let probe = ProbeState::symmetric(2.0, 0.5).unwrap();
    let enc = Encoding::new(probe, bath, 0.1, method).unwrap();
    let grid = TimeGrid::spanning(HORIZON, STEP).unwrap();
    let prop = Propagator::new(&enc, HORIZON, Execution::Parallel).unwrap();
    let curve = SensitivityCurve::from_propagator(&enc, &prop, grid, Execution::Parallel).unwrap();
    let minima = polished_minima(&curve, &prop).unwrap();
    Run { curve, minima }
}

fn late(m: &[(f64, f64)]) -> Vec<(f64, f64)> {
    m.iter().copied().filter(|(t, _)| *t >= HORIZON / 2.0).collect()
}

/// Least-squares slope and its standard error.
fn fit_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    (slope, (rss / (n - 2.0) / sxx).sqrt())
}

fn bath(gamma: f64, wc: f64, s: f64) -> Option<BathSpec> {
    Some(BathSpec::new(gamma, wc, s).unwrap())
}

fn criterion_8(cache: &mut BTreeMap<String, Run>) -> Outcome {
    let ideal = run(None, Method::Ideal);
    let values: Vec<f64> = ideal.minima.iter().map(|m| m.1).collect();
    let spread = values.iter().map(|v| (v / values[0] - 1.0).abs()).fold(0.0, f64::max);
    let a = values.len() >= 5 && spread <= 1e-10;

    let markov = run(bath(0.05, 25.0, 1.0), Method::Markov);
    let mv: Vec<f64> = markov.minima.iter().map(|m| m.1).collect();
    let growth = mv.last().unwrap() / mv[0];
    let b = mv.len() >= 3 && mv.windows(2).all(|w| w[1] > w[0]) && growth > 10.0;

    let spectral = cache.entry("s1".into()).or_insert_with(|| run(bath(0.05, 25.0, 1.0), Method::Spectral));
    let lw = late(&spectral.minima);
    let lv: Vec<f64> = lw.iter().map(|m| m.1).collect();
    let band = lv.iter().cloned().fold(f64::MIN, f64::max) / lv.iter().cloned().fold(f64::MAX, f64::min);
    let (slope, se) = if lw.len() >= 3 { fit_slope(&lw) } else { (f64::NAN, f64::NAN) };
    let c = lw.len() >= 3 && band < 2.0 && slope.abs() <= 2.0 * se;

    let best = ideal.minima[0].0;
    let ratio_at = |probe: ProbeState| {
        let enc = Encoding::new(probe, None, 0.1, Method::Ideal).unwrap();
        gyrosense::sensitivity::ratio_t(&enc, best).unwrap()
    };
    let k_inv = ratio_at(ProbeState::symmetric(2.0, 0.5).unwrap());
    let d = k_inv < 1.0;
    // same amplitudes with common phase π/2, for the record
    let k_inv_imag = ratio_at(ProbeState::polar(2.0, FRAC_PI_2, 2.0, FRAC_PI_2, 0.5).unwrap());
    outcome(
        a && b && c && d,
        format!(
            "(a) {} ideal minima, spread {spread:.2e} [{}]; (b) {} Markov minima, last/first {growth:.3e} [{}]; \
             (c) late minima {lv:.6?}, max/min {band:.5}, slope {slope:.2e} +- {se:.2e} [{}]; (d) 1/k at t={best:.4} is {k_inv:.6} [{}] (alpha=beta=2i gives {k_inv_imag:.6})",
            values.len(),
            mark(a),
            mv.len(),
            mark(b),
            mark(c),
            mark(d)
        ),
    )
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "fail"
    }
}

fn last_late(r: &Run) -> f64 {
    late(&r.minima).last().map(|m| m.1).unwrap_or(f64::INFINITY)
}

/// Smallest δφ over the second half of the horizon.
fn late_floor(r: &Run) -> f64 {
    r.curve.points.iter().filter(|p| p.t >= HORIZON / 2.0).map(|p| p.dphi).fold(f64::INFINITY, f64::min)
}

fn criterion_9(cache: &mut BTreeMap<String, Run>) -> Outcome {
    let mut get = |key: &str, b: Option<BathSpec>, m: Method| -> f64 {
        let r = cache.entry(key.into()).or_insert_with(|| run(b, m));
        last_late(r)
    };
    let gammas: Vec<f64> = [("g02", 0.02), ("s1", 0.05), ("g10", 0.1)]
        .iter()
        .map(|(k, g)| get(k, bath(*g, 25.0, 1.0), Method::Spectral))
        .collect();
    let gamma_ok = gammas.windows(2).all(|w| w[1] >= w[0]);
    // the same ordering with the Markov amplitudes, at corresponding minima
    let markov: Vec<Vec<f64>> = [0.02, 0.05, 0.1]
        .iter()
        .map(|&g| run(bath(g, 25.0, 1.0), Method::Markov).minima.iter().map(|m| m.1).collect())
        .collect();
    let common = markov.iter().map(Vec::len).min().unwrap();
    let markov_ok = (0..common).all(|k| markov[0][k] <= markov[1][k] && markov[1][k] <= markov[2][k]);

    let cutoffs = [("wc23", 23.0), ("s1", 25.0), ("wc30", 30.0)];
    let mut per_cut = Vec::new();
    for (k, wc) in cutoffs {
        let r = cache.entry(k.into()).or_insert_with(|| run(bath(0.05, wc, 1.0), Method::Spectral));
        per_cut.push(late(&r.minima).iter().map(|m| m.1).collect::<Vec<f64>>());
    }
    let n = per_cut.iter().map(Vec::len).min().unwrap();
    let sign = |k: usize| (per_cut[1][k] - per_cut[0][k]).signum() + (per_cut[2][k] - per_cut[1][k]).signum();
    let cut_ok = n > 0 && (0..n).all(|k| sign(k).abs() == 2.0 && sign(k) == sign(0));
    let direction = if n > 0 && sign(0) < 0.0 { "decreasing in omega_c" } else { "increasing in omega_c" };

    let mut floors = Vec::new();
    let mut devs = Vec::new();
    for (k, s) in [("s05", 0.5), ("s1", 1.0), ("s3", 3.0)] {
        let spec = cache.entry(k.into()).or_insert_with(|| run(bath(0.05, 25.0, s), Method::Spectral));
        let f = late_floor(spec);
        let m = late_floor(&run(bath(0.05, 25.0, s), Method::Markov));
        floors.push(f);
        devs.push((f / m).ln().abs());
    }
    let distinct = (0..3).all(|i| (0..i).all(|j| (floors[i] / floors[j] - 1.0).abs() > 1e-3));
    let s3_strongest = devs[2] > devs[0] && devs[2] > devs[1];
    outcome(
        gamma_ok && cut_ok && distinct && s3_strongest,
        format!(
            "gamma {{0.02,0.05,0.1}} late minima {gammas:.5?} [{}] (Markov corresponding minima ordered: {markov_ok}); \
             omega_c {{23,25,30}} consistently ordered [{}], {direction}; s {{1/2,1,3}} late floors {floors:.5?} distinct [{}], \
             |ln(spectral/Markov)| {devs:.3?}, s=3 strongest [{}]",
            mark(gamma_ok),
            mark(cut_ok),
            mark(distinct),
            mark(s3_strongest)
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in [0.5, 1.0, 3.0] {
        let b = BathSpec::new(0.05, 25.0, s).unwrap();
        for k in [0.0, 0.01, 0.1, 1.0, 10.0] {
            let x = k / b.omega_c;
            let closed = memory_kernel(&b, x);
            let quad = memory_kernel_by_quadrature(&b, x, 1e-12).unwrap();
            worst = worst.max((closed - quad).norm() / closed.norm());
        }
    }
    outcome(worst <= 1e-8, format!("max relative deviation = {worst:.3e} (tol 1e-8)"))
}

fn main() {
    let mut cache = BTreeMap::new();
    let mut unexpected = Vec::new();
    let checks: Vec<(u8, Check)> = vec![
        (1, Box::new(|_| criterion_1())),
        (2, Box::new(|_| criterion_2())),
        (3, Box::new(|_| criterion_3())),
        (4, Box::new(|_| criterion_4())),
        (5, Box::new(|_| criterion_5())),
        (6, Box::new(|_| criterion_6())),
        (7, Box::new(|_| criterion_7())),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(|_| criterion_10())),
    ];
    for (n, check) in checks {
        let start = Instant::now();
        let o = check(&mut cache);
        let known = KNOWN_RED.contains(&n);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, documented)",
            (false, false) => "FAIL",
        };
        println!("criterion {n:>2} {tag} [{:.1}s]: {}", start.elapsed().as_secs_f64(), o.detail);
        if o.pass == known {
            unexpected.push(n);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all results as recorded ({} known red: {KNOWN_RED:?})", KNOWN_RED.len());
    } else {
        println!("acceptance: unexpected result for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
