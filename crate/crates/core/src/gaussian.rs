//! Two-mode Gaussian moments under the interferometer and the vacuum-bath map.
//!
//! The probe passes a 50-50 beam splitter, each mode is damped as a_l → u_l a_l
//! (the zero-temperature reservoir adds no noise), and a second beam splitter
//! precedes the photon counters. Everything is tracked through the mean d,
//! the normal moments N_jk = ⟨δa_j† δa_k⟩ and the anomalous ones S_jk = ⟨δa_j δa_k⟩,
//! which fix ⟨n_d⟩ and ⟨n_d²⟩ exactly by Wick factorization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ideal::clamp_variance;
use crate::model::ProbeState;

type C = Complex64;
type Mat = [[C; 2]; 2];

const ZERO: C = C { re: 0.0, im: 0.0 };
const CONTRACTIVE_SLACK: f64 = 1e-6;
const NEGATIVE_VARIANCE_SLACK: f64 = 1e-10;

/// Detector weights for n_d = b₁†b₁ − b₂†b₂; b₁ is the second output port
/// of [`beam_splitter`] in this labelling.
const WEIGHTS: [f64; 2] = [-1.0, 1.0];

fn beam_splitter() -> Mat {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [[C::new(r, 0.0), C::new(0.0, r)], [C::new(0.0, r), C::new(r, 0.0)]]
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn transpose(a: &Mat) -> Mat {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn conj(a: &Mat) -> Mat {
    [[a[0][0].conj(), a[0][1].conj()], [a[1][0].conj(), a[1][1].conj()]]
}

fn apply(a: &Mat, d: &[C; 2]) -> [C; 2] {
    [a[0][0] * d[0] + a[0][1] * d[1], a[1][0] * d[0] + a[1][1] * d[1]]
}

fn diag(u: [C; 2]) -> Mat {
    [[u[0], ZERO], [ZERO, u[1]]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    /// ⟨a⟩, ⟨m⟩
    pub mean: [C; 2],
    /// ⟨δa_j† δa_k⟩
    pub normal: Mat,
    /// ⟨δa_j δa_k⟩
    pub anomalous: Mat,
}

impl GaussianState {
    pub const VACUUM: GaussianState =
        GaussianState { mean: [ZERO; 2], normal: [[ZERO; 2]; 2], anomalous: [[ZERO; 2]; 2] };

    /// S(G)|α⟩|β⟩ before any beam splitter.
    pub fn squeezed_coherent(probe: &ProbeState) -> Self {
        let (c, s) = (probe.squeeze.cosh(), probe.squeeze.sinh());
        let (a, b) = (probe.alpha, probe.beta);
        let occ = C::new(s * s, 0.0);
        let pair = C::new(-c * s, 0.0);
        GaussianState {
            mean: [a * c - b.conj() * s, b * c - a.conj() * s],
            normal: [[occ, ZERO], [ZERO, occ]],
            anomalous: [[ZERO, pair], [pair, ZERO]],
        }
    }

    /// The probe after the first beam splitter: the state the reservoir acts on.
    pub fn initial(probe: &ProbeState) -> Self {
        Self::squeezed_coherent(probe).linear(&beam_splitter())
    }

    /// Image under a ↦ T a.
    pub fn linear(&self, t: &Mat) -> Self {
        let tt = transpose(t);
        GaussianState {
            mean: apply(t, &self.mean),
            normal: mul(&mul(&conj(t), &self.normal), &tt),
            anomalous: mul(&mul(t, &self.anomalous), &tt),
        }
    }

    /// Damp each mode by its amplitude function, a_l → u_l a_l.
    pub fn damp(&self, u: [C; 2]) -> Self {
        self.linear(&diag(u))
    }

    pub fn occupation(&self, k: usize) -> f64 {
        self.mean[k].norm_sqr() + self.normal[k][k].re
    }

    /// ⟨a m⟩
    pub fn pair(&self) -> C {
        self.anomalous[0][1] + self.mean[0] * self.mean[1]
    }

    /// ⟨a_k²⟩
    pub fn square(&self, k: usize) -> C {
        self.anomalous[k][k] + self.mean[k] * self.mean[k]
    }

    /// ⟨a† m⟩
    pub fn coherence(&self) -> C {
        self.normal[0][1] + self.mean[0].conj() * self.mean[1]
    }
}

/// Moments after the first beam splitter and the dissipative map.
pub fn evolve_gaussian(probe: &ProbeState, u1: C, u2: C) -> Result<GaussianState> {
    for (name, u) in [("u1", u1), ("u2", u2)] {
        if !(u.norm() <= 1.0 + CONTRACTIVE_SLACK) {
            return Err(Error::invalid(name, format!("|u| = {} exceeds 1; the map must be contractive", u.norm())));
        }
    }
    Ok(GaussianState::initial(probe).damp([u1, u2]))
}

fn detected_mean(out: &GaussianState) -> f64 {
    (0..2).map(|k| WEIGHTS[k] * out.occupation(k)).sum()
}

/// ⟨n_d⟩ alone, skipping the variance.
pub fn nd_mean(state: &GaussianState) -> f64 {
    detected_mean(&state.linear(&beam_splitter()))
}

/// (⟨n_d⟩, Var n_d) after the final beam splitter.
pub fn nd_from_moments(state: &GaussianState) -> Result<(f64, f64)> {
    let out = state.linear(&beam_splitter());
    let mean = detected_mean(&out);
    let (d, n, s) = (&out.mean, &out.normal, &out.anomalous);
    let w = [d[0] * WEIGHTS[0], d[1] * WEIGHTS[1]];
    let mut var = ZERO;
    for j in 0..2 {
        for k in 0..2 {
            let kron = if j == k { 1.0 } else { 0.0 };
            var += w[j].conj() * w[k].conj() * s[j][k]
                + w[j].conj() * w[k] * (n[k][j] + kron)
                + w[j] * w[k].conj() * n[j][k]
                + w[j] * w[k] * s[j][k].conj();
            var += WEIGHTS[j] * WEIGHTS[k] * (s[j][k].norm_sqr() + n[j][k].norm_sqr() + kron * n[j][j].re);
        }
    }
    if var.im.abs() > 1e-8 * var.re.abs().max(1.0) {
        return Err(Error::TranscriptionFault { imag: var.im });
    }
    Ok((mean, clamp_variance(var.re, NEGATIVE_VARIANCE_SLACK)?))
}

/// Directional derivative of ⟨n_d⟩ when (u₁, u₂) moves along (du₁, du₂).
///
/// ⟨n_d⟩ is a Hermitian form B(U, U) in the diagonal damping matrix, so the
/// derivative is 2 Re B(dU, U), exact with no step size.
pub fn nd_mean_slope(initial: &GaussianState, u: [C; 2], du: [C; 2]) -> f64 {
    let v = beam_splitter();
    let vt = transpose(&v);
    let (uu, dd) = (diag(u), diag(du));
    let d_u = apply(&v, &apply(&uu, &initial.mean));
    let d_du = apply(&v, &apply(&dd, &initial.mean));
    let n_mixed = mul(&mul(&conj(&v), &mul(&mul(&conj(&dd), &initial.normal), &uu)), &vt);
    let mut b = ZERO;
    for k in 0..2 {
        b += (d_du[k].conj() * d_u[k] + n_mixed[k][k]) * WEIGHTS[k];
    }
    2.0 * b.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_oracle, DEFAULT_CUTOFF};
    use crate::ideal::{mean_nd, var_nd};
    use proptest::prelude::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn lossless(phi: f64) -> (C, C) {
        (C::from_polar(1.0, -phi / 2.0), C::from_polar(1.0, phi / 2.0))
    }

    #[test]
    fn identity_and_full_decay() {
        let p = ProbeState::symmetric(2.0, 0.5).unwrap();
        let init = GaussianState::initial(&p);
        let one = C::new(1.0, 0.0);
        assert_eq!(evolve_gaussian(&p, one, one).unwrap(), init);
        let gone = evolve_gaussian(&p, ZERO, ZERO).unwrap();
        assert_eq!(gone, GaussianState::VACUUM);
        assert_eq!(nd_from_moments(&GaussianState::VACUUM).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn phase_rotation_keeps_occupation() {
        let p = ProbeState::symmetric(2.0, 0.0).unwrap();
        let init = GaussianState::initial(&p);
        let st = evolve_gaussian(&p, C::from_polar(1.0, -0.7), C::new(1.0, 0.0)).unwrap();
        assert!((st.mean[0] - init.mean[0] * C::from_polar(1.0, -0.7)).norm() < 1e-15);
        assert!((st.occupation(0) - init.occupation(0)).abs() < 1e-14);
    }

    #[test]
    fn lossless_reproduces_closed_form() {
        let p = ProbeState::symmetric(2.0, 0.5).unwrap();
        let (u1, u2) = lossless(FRAC_PI_2);
        let (mean, _) = nd_from_moments(&evolve_gaussian(&p, u1, u2).unwrap()).unwrap();
        assert!((mean - 8.0 / E).abs() < 1e-12);
        let p = ProbeState::new(C::new(0.3, 0.2), C::new(-0.1, 0.4), 0.3).unwrap();
        for phi in [0.0, 0.7, 2.9, 5.0] {
            let (u1, u2) = lossless(phi);
            let (m, v) = nd_from_moments(&evolve_gaussian(&p, u1, u2).unwrap()).unwrap();
            assert!((m - mean_nd(&p, phi)).abs() < 1e-13);
            assert!((v - var_nd(&p, phi).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_fock_oracle() {
        let p = ProbeState::symmetric(0.3, 0.2).unwrap();
        let one = C::new(1.0, 0.0);
        let (m, v) = nd_from_moments(&evolve_gaussian(&p, one, one).unwrap()).unwrap();
        let f = fock_oracle(&p, 0.0, DEFAULT_CUTOFF).unwrap();
        assert!((m - f.mean).abs() < 1e-6 && (v - f.variance).abs() < 1e-6);
    }

    #[test]
    fn rejects_amplifying_maps() {
        let p = ProbeState::symmetric(1.0, 0.2).unwrap();
        assert!(evolve_gaussian(&p, C::new(1.01, 0.0), C::new(1.0, 0.0)).is_err());
    }

    fn arb_u() -> impl Strategy<Value = C> {
        (0.0f64..1.0, -4.0f64..4.0).prop_map(|(r, a)| C::from_polar(r, a))
    }

    proptest! {
        #[test]
        fn physical_moments(a in 0.0f64..2.5, g in 0.0f64..1.0, u1 in arb_u(), u2 in arb_u()) {
            let p = ProbeState::symmetric(a, g).unwrap();
            let st = evolve_gaussian(&p, u1, u2).unwrap();
            let (n1, n2) = (st.occupation(0), st.occupation(1));
            prop_assert!(n1 >= 0.0 && n2 >= 0.0);
            prop_assert!(st.pair().norm_sqr() <= (n1 + 1.0) * (n2 + 1.0) + 1e-9);
            let (_, var) = nd_from_moments(&st).unwrap();
            prop_assert!(var >= 0.0);
        }

        #[test]
        fn slope_is_exact_derivative(a in 0.1f64..2.5, g in 0.0f64..1.0, u1 in arb_u(), u2 in arb_u(),
                                     d1 in arb_u(), d2 in arb_u()) {
            let p = ProbeState::symmetric(a, g).unwrap();
            let init = GaussianState::initial(&p);
            let h = 1e-3;
            let at = |s: f64| nd_mean(&init.damp([u1 + d1 * s, u2 + d2 * s]));
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let exact = nd_mean_slope(&init, [u1, u2], [d1, d2]);
            prop_assert!((fd - exact).abs() <= 1e-9 * (1.0 + exact.abs()) * (1.0 + a * a) * (2.0 * g).cosh());
        }
    }
}
