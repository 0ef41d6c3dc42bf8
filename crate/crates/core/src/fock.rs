//! Brute-force moments of n_d in a truncated two-mode number basis.
//!
//! Used only to check the closed forms of [`crate::ideal`]. The squeeze
//! operator conserves i − j, so it is exponentiated one sector at a time.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ProbeState;

pub const DEFAULT_CUTOFF: usize = 25;
pub const LEAK_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockMoments {
    pub mean: f64,
    pub variance: f64,
    /// Norm missing from the coherent states plus population on the basis edge.
    pub leak: f64,
}

impl FockMoments {
    pub fn truncation_warning(&self) -> bool {
        self.leak > LEAK_WARNING
    }
}

fn coherent(amplitude: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    c[0] = Complex64::new((-0.5 * amplitude.norm_sqr()).exp(), 0.0);
    for n in 1..=n_max {
        c[n] = c[n - 1] * amplitude / (n as f64).sqrt();
    }
    c
}

/// Mean and variance of n_d for S(G)|α⟩|β⟩ at phase `phi`, basis {|i, j⟩ : i, j ≤ n_max}.
pub fn fock_oracle(probe: &ProbeState, phi: f64, n_max: usize) -> Result<FockMoments> {
    if n_max == 0 {
        return Err(Error::invalid("n_max", "truncation must keep at least one photon"));
    }
    let dim = n_max + 1;
    let idx = |i: usize, j: usize| i * dim + j;
    let ca = coherent(probe.alpha, n_max);
    let cm = coherent(probe.beta, n_max);
    let mut psi = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            psi[idx(i, j)] = ca[i] * cm[j];
        }
    }
    let norm0: f64 = psi.iter().map(|c| c.norm_sqr()).sum();

    let g = probe.squeeze;
    if g != 0.0 {
        for k in -(n_max as isize)..=(n_max as isize) {
            let sector: Vec<(usize, usize)> = (0..dim)
                .filter_map(|j| {
                    let i = j as isize + k;
                    (0..dim as isize).contains(&i).then_some((i as usize, j))
                })
                .collect();
            let len = sector.len();
            // generator G(am - a†m†), real in this basis
            let mut gen = DMatrix::<f64>::zeros(len, len);
            for (t, &(i, j)) in sector.iter().enumerate() {
                if t > 0 {
                    gen[(t - 1, t)] = g * ((i * j) as f64).sqrt();
                }
                if t + 1 < len {
                    gen[(t + 1, t)] = -g * (((i + 1) * (j + 1)) as f64).sqrt();
                }
            }
            let prop = gen.exp();
            let old: Vec<Complex64> = sector.iter().map(|&(i, j)| psi[idx(i, j)]).collect();
            for (r, &(i, j)) in sector.iter().enumerate() {
                psi[idx(i, j)] = (0..len).map(|c| old[c] * prop[(r, c)]).sum();
            }
        }
    }

    let edge: f64 = (0..dim).flat_map(|i| [idx(i, n_max), idx(n_max, i)]).map(|p| psi[p].norm_sqr()).sum();
    let leak = (1.0 - norm0).max(0.0) + edge;

    // n_d = (a†a − m†m) cos φ + (a†m + a m†) sin φ
    let (c, s) = (phi.cos(), phi.sin());
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let amp = psi[idx(i, j)];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            out[idx(i, j)] += amp * (c * (i as f64 - j as f64));
            // a†m : |i, j⟩ → √((i+1) j) |i+1, j−1⟩
            if i < n_max && j > 0 {
                out[idx(i + 1, j - 1)] += amp * (s * (((i + 1) * j) as f64).sqrt());
            }
            // a m† : |i, j⟩ → √(i (j+1)) |i−1, j+1⟩
            if i > 0 && j < n_max {
                out[idx(i - 1, j + 1)] += amp * (s * ((i * (j + 1)) as f64).sqrt());
            }
        }
    }
    let mean: f64 = psi.iter().zip(&out).map(|(p, q)| (p.conj() * q).re).sum();
    let second: f64 = out.iter().map(|q| q.norm_sqr()).sum();
    Ok(FockMoments { mean, variance: (second - mean * mean).max(0.0), leak })
}
