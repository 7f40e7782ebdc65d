//! Truncated photon-number oracle for the interference measurement.
//!
//! States are two-mode amplitude arrays `c[n_A][n_B]`, `n ≤ n_max`. The
//! measurement is: pure loss `η` on each arm, a balanced beamsplitter,
//! misalignment, and two threshold detectors with dark counts.
//!
//! The arms have equal loss, so loss commutes with the passive optics and
//! every output mode `o` is a row `u_o` of a linear map acting on the two
//! input modes. The probability that no photon reaches detector `D` is the
//! expectation of the normally ordered operator `:exp(-a† M_D a):` with
//! `M_D = η Σ_{o∈D} u_o† u_o`. Writing `M_D = W diag(d) W†`, that operator
//! is `Π_k (1 - d_k)^{n_k}` in the eigenmodes `b = W† a`, so the oracle
//! re-expands the input amplitudes in the eigenmode Fock basis and weights
//! each photon-number pair. Nothing here assumes the input is coherent.

use num_complex::Complex64;

use super::{arm_transmittance, ChannelParams, ClickOutcome, CoherentDetection, DEFAULT_N_MAX};
use crate::error::{Error, Result};
use crate::photon::{class_terms, PhaseCount, SeriesPolicy};

/// Largest truncated weight a state may lose before the oracle refuses it.
pub const TAIL_LIMIT: f64 = 1e-10;

const NORM_TOL: f64 = 1e-10;

/// How misalignment acts on the interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Misalignment {
    /// Each pulse carries a fraction `e_d` of its amplitude-squared in an
    /// orthogonal polarization (Alice rotated by `+φ`, Bob by `-φ`,
    /// `sin²φ = e_d`). The parallel parts interfere, the orthogonal parts
    /// interfere with the opposite sign. On coherent inputs this reproduces
    /// the closed-form visibility `1 - 2e_d` exactly.
    #[default]
    ModeMismatch,
    /// With probability `e_d` the two detector outputs are swapped.
    OutputSwap,
}

/// A single-mode truncated state vector with the weight lost to truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub amps: Vec<Complex64>,
    pub tail: f64,
}

impl ModeState {
    pub fn vacuum(n_max: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); n_max + 1];
        amps[0] = Complex64::new(1.0, 0.0);
        ModeState { amps, tail: 0.0 }
    }

    /// Coherent state `|α⟩` truncated at `n_max`.
    pub fn coherent(alpha: Complex64, n_max: usize) -> Self {
        let mu = alpha.norm_sqr();
        let mut amps = Vec::with_capacity(n_max + 1);
        let mut c = Complex64::new((-0.5 * mu).exp(), 0.0);
        amps.push(c);
        for n in 1..=n_max {
            c = c * alpha / (n as f64).sqrt();
            amps.push(c);
        }
        ModeState {
            amps,
            tail: poisson_tail(mu, n_max),
        }
    }

    /// Normalized class state `|λ_j⟩` at intensity `mu`.
    pub fn class(
        mu: f64,
        n: PhaseCount,
        j: u32,
        n_max: usize,
        policy: &SeriesPolicy,
    ) -> Result<Self> {
        let terms = class_terms(mu, n, j, policy)?;
        let total: f64 = terms.iter().sum();
        if total == 0.0 {
            return Err(Error::domain(format!(
                "class-{j} state of a vacuum source is undefined"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let mut lost = 0.0;
        for (k, t) in terms.iter().enumerate() {
            let photons = k * n.get() as usize + j as usize;
            if photons <= n_max {
                amps[photons] = Complex64::new((t / total).sqrt(), 0.0);
            } else {
                lost += t;
            }
        }
        Ok(ModeState {
            amps,
            tail: lost / total,
        })
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }
}

/// `Σ_{n > n_max} e^{-μ} μ^n / n!`, summed directly.
fn poisson_tail(mu: f64, n_max: usize) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let mut term = (-mu).exp();
    for n in 1..=n_max {
        term *= mu / n as f64;
    }
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        term *= mu / n as f64;
        tail += term;
        if term <= 1e-18 * tail || term == 0.0 {
            return tail;
        }
        n += 1;
    }
}

/// Convenience: the class state as a bare amplitude vector plus tail.
pub fn class_state(
    mu: f64,
    n: PhaseCount,
    j: u32,
    n_max: usize,
    policy: &SeriesPolicy,
) -> Result<ModeState> {
    ModeState::class(mu, n, j, n_max, policy)
}

/// Truncated two-mode pure state, Alice's mode first.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState2 {
    dim: usize,
    amps: Vec<Complex64>,
    tail: f64,
}

impl FockState2 {
    pub fn from_amplitudes(n_max: usize, amps: Vec<Complex64>, tail: f64) -> Result<Self> {
        let dim = n_max + 1;
        if amps.len() != dim * dim {
            return Err(Error::domain(format!(
                "expected {} amplitudes for n_max = {n_max}, got {}",
                dim * dim,
                amps.len()
            )));
        }
        Ok(FockState2 { dim, amps, tail })
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::product(&ModeState::vacuum(n_max), &ModeState::vacuum(n_max))
    }

    pub fn product(a: &ModeState, b: &ModeState) -> Self {
        assert_eq!(a.amps.len(), b.amps.len(), "mode cutoffs differ");
        let dim = a.amps.len();
        let mut amps = Vec::with_capacity(dim * dim);
        for ca in &a.amps {
            for cb in &b.amps {
                amps.push(ca * cb);
            }
        }
        FockState2 {
            dim,
            amps,
            tail: a.tail + b.tail,
        }
    }

    /// `|α⟩_A ⊗ |β⟩_B`.
    pub fn coherent_pair(alpha: Complex64, beta: Complex64, n_max: usize) -> Self {
        Self::product(
            &ModeState::coherent(alpha, n_max),
            &ModeState::coherent(beta, n_max),
        )
    }

    /// `ca |self⟩ + cb |other⟩`; the caller is responsible for normalization.
    pub fn superpose(&self, ca: Complex64, other: &Self, cb: Complex64) -> Self {
        assert_eq!(self.dim, other.dim, "mode cutoffs differ");
        let amps = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| ca * x + cb * y)
            .collect();
        FockState2 {
            dim: self.dim,
            amps,
            tail: ca.norm() * self.tail + cb.norm() * other.tail,
        }
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> Complex64 {
        self.amps[n_a * self.dim + n_b]
    }

    /// Upper estimate of the weight lost to truncation.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    /// Rejects states that lost too much weight or are not normalized.
    pub fn check(&self) -> Result<()> {
        if self.tail > TAIL_LIMIT {
            return Err(Error::Truncation {
                tail: self.tail,
                limit: TAIL_LIMIT,
            });
        }
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL + self.tail {
            return Err(Error::domain(format!(
                "state norm {norm} differs from 1 by more than {NORM_TOL:e}"
            )));
        }
        Ok(())
    }

    /// Photon-number distribution in the modes `b = W† a`.
    ///
    /// `w` is unitary, given by columns. Returns a `(2 n_max + 1)²` grid.
    fn distribution_in(&self, w: &[[Complex64; 2]; 2]) -> (usize, Vec<f64>) {
        let dim = self.dim;
        if w[0][1].norm() == 0.0 && w[1][0].norm() == 0.0 {
            return (dim, self.amps.iter().map(|c| c.norm_sqr()).collect());
        }
        let out_dim = 2 * dim - 1;
        // a_i† = Σ_k conj(W_ik) b_k†
        let t = [
            [w[0][0].conj(), w[0][1].conj()],
            [w[1][0].conj(), w[1][1].conj()],
        ];
        let powers = |z: Complex64| {
            let mut p = Vec::with_capacity(dim);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..dim {
                p.push(acc);
                acc *= z;
            }
            p
        };
        let (p00, p01, p10, p11) = (
            powers(t[0][0]),
            powers(t[0][1]),
            powers(t[1][0]),
            powers(t[1][1]),
        );
        let sqrt_fact = sqrt_factorials(out_dim);
        let binom = binomials(dim);
        let mut out = vec![Complex64::new(0.0, 0.0); out_dim * out_dim];
        for na in 0..dim {
            for nb in 0..dim {
                let c = self.amps[na * dim + nb];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let pref = c / (sqrt_fact[na] * sqrt_fact[nb]);
                for k in 0..=na {
                    let fa = pref * binom[na][k] * p00[k] * p01[na - k];
                    for l in 0..=nb {
                        let fb = binom[nb][l] * p10[l] * p11[nb - l];
                        let m1 = k + l;
                        let m2 = na + nb - m1;
                        out[m1 * out_dim + m2] += fa * fb * (sqrt_fact[m1] * sqrt_fact[m2]);
                    }
                }
            }
        }
        (out_dim, out.iter().map(|c| c.norm_sqr()).collect())
    }

    /// Probability that at least one photon survives `:exp(-a† M a):`,
    /// i.e. one minus the vacuum-outcome probability.
    fn detection_probability(&self, m: &Hermitian2) -> f64 {
        let (d, w) = m.eigen();
        let (dim, dist) = self.distribution_in(&w);
        let log_survive = |count: usize, d: f64| {
            if count == 0 {
                0.0
            } else {
                count as f64 * (-d).ln_1p()
            }
        };
        let mut total = 0.0;
        for m1 in 0..dim {
            for m2 in 0..dim {
                let p = dist[m1 * dim + m2];
                if p == 0.0 {
                    continue;
                }
                let log_w = log_survive(m1, d[0]) + log_survive(m2, d[1]);
                total += p * -log_w.exp_m1();
            }
        }
        total
    }
}

fn sqrt_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 1.0f64;
    out.push(1.0);
    for n in 1..len {
        acc *= (n as f64).sqrt();
        out.push(acc);
    }
    out
}

fn binomials(len: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(len);
    for n in 0..len {
        let mut row = vec![1.0; n + 1];
        for k in 1..n {
            row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
        }
        rows.push(row);
    }
    rows
}

/// 2×2 Hermitian matrix `[[p, z], [conj z, r]]`.
#[derive(Debug, Clone, Copy)]
struct Hermitian2 {
    p: f64,
    r: f64,
    z: Complex64,
}

impl Hermitian2 {
    /// `η Σ_o u_o† u_o` over output-mode rows `u_o`.
    fn from_rows(rows: &[[Complex64; 2]], eta: f64) -> Self {
        let mut h = Hermitian2 {
            p: 0.0,
            r: 0.0,
            z: Complex64::new(0.0, 0.0),
        };
        for u in rows {
            h.p += eta * u[0].norm_sqr();
            h.r += eta * u[1].norm_sqr();
            h.z += eta * u[0].conj() * u[1];
        }
        h
    }

    /// Eigenvalues (clamped to `[0, 1]`) and eigenvectors as columns.
    fn eigen(&self) -> ([f64; 2], [[Complex64; 2]; 2]) {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if self.z.norm() == 0.0 {
            return (
                [self.p.clamp(0.0, 1.0), self.r.clamp(0.0, 1.0)],
                [[one, zero], [zero, one]],
            );
        }
        let half_diff = 0.5 * (self.p - self.r);
        let z2 = self.z.norm_sqr();
        let rad = (half_diff * half_diff + z2).sqrt();
        let mid = 0.5 * (self.p + self.r);
        // λ1 - p = rad - half_diff, written without cancellation
        let gap = if half_diff > 0.0 {
            z2 / (rad + half_diff)
        } else {
            rad - half_diff
        };
        let norm = (z2 + gap * gap).sqrt();
        let v1 = [self.z / norm, Complex64::new(gap / norm, 0.0)];
        let v2 = [-v1[1].conj(), v1[0].conj()];
        (
            [(mid + rad).clamp(0.0, 1.0), (mid - rad).clamp(0.0, 1.0)],
            [[v1[0], v2[0]], [v1[1], v2[1]]],
        )
    }

    fn add(&self, other: &Self) -> Self {
        Hermitian2 {
            p: self.p + other.p,
            r: self.r + other.r,
            z: self.z + other.z,
        }
    }
}

/// Output-mode rows reaching the left and right detectors.
fn detector_rows(
    misalignment: Misalignment,
    e_d: f64,
) -> (Vec<[Complex64; 2]>, Vec<[Complex64; 2]>) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    match misalignment {
        Misalignment::ModeMismatch => {
            let (s, co) = (e_d.sqrt(), (1.0 - e_d).sqrt());
            let left = vec![[c(h * co), c(h * co)], [c(h * s), c(-h * s)]];
            let right = vec![[c(h * co), c(-h * co)], [c(h * s), c(h * s)]];
            (left, right)
        }
        Misalignment::OutputSwap => (vec![[c(h), c(h)]], vec![[c(h), c(-h)]]),
    }
}

/// Exactly-one-click probabilities of `state` sent through the channel.
pub fn oracle_detect(state: &FockState2, ch: &ChannelParams) -> Result<ClickOutcome> {
    oracle_detect_with(state, ch, Misalignment::default())
}

pub fn oracle_detect_with(
    state: &FockState2,
    ch: &ChannelParams,
    misalignment: Misalignment,
) -> Result<ClickOutcome> {
    ch.validate()?;
    state.check()?;
    let eta = arm_transmittance(ch);
    let (left_rows, right_rows) = detector_rows(misalignment, ch.e_d);
    let m_left = Hermitian2::from_rows(&left_rows, eta);
    let m_right = Hermitian2::from_rows(&right_rows, eta);
    let g_left = state.detection_probability(&m_left);
    let g_right = state.detection_probability(&m_right);
    let g_any = state.detection_probability(&m_left.add(&m_right));
    let q = 1.0 - ch.p_d;
    // P(L fires, R silent) = P(R silent) - P(both silent)
    let left_only = q * (ch.p_d + q * g_any - g_right);
    let right_only = q * (ch.p_d + q * g_any - g_left);
    let out = ClickOutcome {
        left_only: left_only.max(0.0),
        right_only: right_only.max(0.0),
    };
    Ok(match misalignment {
        Misalignment::ModeMismatch => out,
        Misalignment::OutputSwap => out.mix(&out.swapped(), ch.e_d),
    })
}

/// The Fock oracle driven by coherent inputs.
#[derive(Debug, Clone, Copy)]
pub struct FockOracle {
    ch: ChannelParams,
    n_max: usize,
    misalignment: Misalignment,
}

impl FockOracle {
    pub fn new(ch: ChannelParams) -> Self {
        FockOracle {
            ch,
            n_max: DEFAULT_N_MAX,
            misalignment: Misalignment::default(),
        }
    }

    pub fn with_cutoff(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_misalignment(mut self, misalignment: Misalignment) -> Self {
        self.misalignment = misalignment;
        self
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.ch
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn detect_state(&self, state: &FockState2) -> Result<ClickOutcome> {
        oracle_detect_with(state, &self.ch, self.misalignment)
    }
}

impl CoherentDetection for FockOracle {
    fn detect(&self, mu_a: f64, mu_b: f64, theta: f64) -> Result<ClickOutcome> {
        let alpha = Complex64::from_polar(mu_a.sqrt(), theta);
        let beta = Complex64::new(mu_b.sqrt(), 0.0);
        self.detect_state(&FockState2::coherent_pair(alpha, beta, self.n_max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::click_probs_coherent;

    fn ideal(length_km: f64) -> ChannelParams {
        ChannelParams {
            p_d: 0.0,
            e_d: 0.0,
            ..ChannelParams::standard(length_km)
        }
    }

    #[test]
    fn vacuum_gives_dark_counts() {
        let ch = ChannelParams::standard(50.0);
        let out = oracle_detect(&FockState2::vacuum(10), &ch).unwrap();
        let expected = ch.p_d * (1.0 - ch.p_d);
        assert!((out.left_only - expected).abs() < 1e-20);
        assert!((out.right_only - expected).abs() < 1e-20);
    }

    #[test]
    fn single_photon_splits_evenly() {
        let ch = ChannelParams {
            eta_d: 1.0,
            ..ideal(0.0)
        };
        let mut one = ModeState::vacuum(4);
        one.amps[0] = Complex64::new(0.0, 0.0);
        one.amps[1] = Complex64::new(1.0, 0.0);
        let state = FockState2::product(&ModeState::vacuum(4), &one);
        let out = oracle_detect(&state, &ch).unwrap();
        assert!((out.left_only - 0.5).abs() < 1e-15);
        assert!((out.right_only - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetric_single_photon_always_left() {
        let ch = ChannelParams {
            eta_d: 1.0,
            ..ideal(0.0)
        };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 9];
        amps[1] = Complex64::new(h, 0.0); // |0,1⟩
        amps[3] = Complex64::new(h, 0.0); // |1,0⟩
        let state = FockState2::from_amplitudes(2, amps, 0.0).unwrap();
        let out = oracle_detect(&state, &ch).unwrap();
        assert!((out.left_only - 1.0).abs() < 1e-15);
        assert!(out.right_only.abs() < 1e-15);
    }

    #[test]
    fn misaligned_single_photon_error_rate() {
        // both misalignment models send a symmetric photon to the wrong
        // detector with probability η e_d
        let ch = ChannelParams {
            p_d: 0.0,
            ..ChannelParams::standard(20.0)
        };
        let eta = arm_transmittance(&ch);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 9];
        amps[1] = Complex64::new(h, 0.0);
        amps[3] = Complex64::new(h, 0.0);
        let state = FockState2::from_amplitudes(2, amps, 0.0).unwrap();
        for model in [Misalignment::ModeMismatch, Misalignment::OutputSwap] {
            let out = oracle_detect_with(&state, &ch, model).unwrap();
            assert!((out.right_only - eta * ch.e_d).abs() < 1e-15);
            assert!((out.left_only - eta * (1.0 - ch.e_d)).abs() < 1e-15);
        }
    }

    #[test]
    fn coherent_input_matches_closed_form() {
        let ch = ChannelParams::standard(0.0);
        let eta = arm_transmittance(&ch);
        for &(x, y, theta) in &[(0.3, 0.3, 0.0), (0.5, 0.1, 1.0), (0.02, 0.4, 2.5)] {
            let oracle = FockOracle::new(ch).detect(x, y, theta).unwrap();
            let closed = click_probs_coherent(eta * x, eta * y, theta, &ch);
            assert!((oracle.left_only - closed.left_only).abs() < 1e-12);
            assert!((oracle.right_only - closed.right_only).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_rejected() {
        let ch = ChannelParams::standard(0.0);
        let err = FockOracle::new(ch).with_cutoff(5).detect(2.0, 0.0, 0.0);
        assert!(matches!(err, Err(Error::Truncation { .. })));
    }

    #[test]
    fn class_state_is_normalized() {
        let pol = SeriesPolicy::default();
        let n = PhaseCount::new(4).unwrap();
        let s = ModeState::class(0.8, n, 1, 30, &pol).unwrap();
        let norm: f64 = s.amps.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm + s.tail - 1.0).abs() < 1e-14);
        assert!(s.tail < 1e-20);
        for (k, c) in s.amps.iter().enumerate() {
            if k % 4 != 1 {
                assert_eq!(c.norm_sqr(), 0.0);
            }
        }
    }

    #[test]
    fn eigen_decomposition_reconstructs() {
        let m = Hermitian2 {
            p: 0.3,
            r: 0.1,
            z: Complex64::new(0.05, -0.02),
        };
        let (d, w) = m.eigen();
        for i in 0..2 {
            for k in 0..2 {
                let rebuilt: Complex64 = (0..2).map(|e| w[i][e] * d[e] * w[k][e].conj()).sum();
                let target = match (i, k) {
                    (0, 0) => Complex64::new(m.p, 0.0),
                    (1, 1) => Complex64::new(m.r, 0.0),
                    (0, 1) => m.z,
                    _ => m.z.conj(),
                };
                assert!((rebuilt - target).norm() < 1e-15);
            }
        }
    }
}
