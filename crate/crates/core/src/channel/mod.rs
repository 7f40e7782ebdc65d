//! Symmetric fiber channel to an untrusted interference node.
//!
//! Two observation models share one interface ([`CoherentDetection`]): the
//! closed-form linear model used for key-rate curves, and a truncated
//! photon-number oracle that evaluates arbitrary two-mode states and is
//! used to certify the decoy bounds.

mod fock;
mod linear;
mod observe;
mod truth;

pub use fock::{
    class_state, oracle_detect, oracle_detect_with, FockOracle, FockState2, Misalignment,
    ModeState, TAIL_LIMIT,
};
pub use linear::{click_probs_coherent, LinearModel};
pub use observe::{simulate_observables, simulate_observables_with};
pub use truth::{oracle_untagged_truth, oracle_untagged_truth_with, UntaggedTruth};

use crate::error::{Error, Result};

/// Default photon-number cutoff per mode for the Fock oracle.
pub const DEFAULT_N_MAX: usize = 30;

/// Physical channel and detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Total Alice–Bob fiber length; each arm is half of it.
    pub length_km: f64,
    pub alpha_db_per_km: f64,
    /// Detector efficiency.
    pub eta_d: f64,
    /// Dark count probability per detector per window.
    pub p_d: f64,
    /// Misalignment error probability.
    pub e_d: f64,
}

impl ChannelParams {
    /// Standard defaults: `p_d = 1e-8`, `e_d = 3%`, `η_d = 30%`, `α = 0.2 dB/km`.
    pub fn standard(length_km: f64) -> Self {
        ChannelParams {
            length_km,
            alpha_db_per_km: 0.2,
            eta_d: 0.30,
            p_d: 1e-8,
            e_d: 0.03,
        }
    }

    pub fn with_length(self, length_km: f64) -> Self {
        ChannelParams { length_km, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Domain(msg));
        if !(self.length_km.is_finite() && self.length_km >= 0.0) {
            return fail(format!("length_km must be >= 0, got {}", self.length_km));
        }
        if !(self.alpha_db_per_km.is_finite() && self.alpha_db_per_km >= 0.0) {
            return fail(format!(
                "alpha_db_per_km must be >= 0, got {}",
                self.alpha_db_per_km
            ));
        }
        if !(self.eta_d > 0.0 && self.eta_d <= 1.0) {
            return fail(format!("eta_d must lie in (0, 1], got {}", self.eta_d));
        }
        if !(self.p_d >= 0.0 && self.p_d < 1.0) {
            return fail(format!("p_d must lie in [0, 1), got {}", self.p_d));
        }
        if !(self.e_d >= 0.0 && self.e_d < 0.5) {
            return fail(format!("e_d must lie in [0, 0.5), got {}", self.e_d));
        }
        Ok(())
    }

    /// Fiber transmittance of the whole Alice–Bob link, detectors excluded.
    pub fn fiber_transmittance(&self) -> f64 {
        10f64.powf(-self.alpha_db_per_km * self.length_km / 10.0)
    }
}

/// Transmittance of one arm including detector efficiency:
/// `η = η_d · 10^(-α (L/2) / 10)`.
pub fn arm_transmittance(ch: &ChannelParams) -> f64 {
    ch.eta_d * 10f64.powf(-ch.alpha_db_per_km * (ch.length_km / 2.0) / 10.0)
}

/// Repeaterless bound `-log2(1 - η_tot)` in bits per channel use.
///
/// `η_tot` is the fiber transmittance of the full link, multiplied by the
/// detector efficiency when `include_detector` is set. A lossless link
/// yields `f64::INFINITY`.
pub fn plob_bound(ch: &ChannelParams, include_detector: bool) -> f64 {
    let mut eta = ch.fiber_transmittance();
    if include_detector {
        eta *= ch.eta_d;
    }
    plob_from_transmittance(eta)
}

pub fn plob_from_transmittance(eta: f64) -> f64 {
    if eta >= 1.0 {
        return f64::INFINITY;
    }
    -(-eta).ln_1p() / std::f64::consts::LN_2
}

/// Exactly-one-detector click probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClickOutcome {
    pub left_only: f64,
    pub right_only: f64,
}

impl ClickOutcome {
    /// Probability of a one-detector heralded event.
    pub fn total(&self) -> f64 {
        self.left_only + self.right_only
    }

    pub fn swapped(&self) -> Self {
        ClickOutcome {
            left_only: self.right_only,
            right_only: self.left_only,
        }
    }

    pub(crate) fn mix(&self, other: &Self, weight_other: f64) -> Self {
        let w = 1.0 - weight_other;
        ClickOutcome {
            left_only: w * self.left_only + weight_other * other.left_only,
            right_only: w * self.right_only + weight_other * other.right_only,
        }
    }
}

/// Click statistics for a pair of phase-randomized-by-hand coherent pulses.
///
/// `mu_a`, `mu_b` are the intensities Alice and Bob *send*; the model applies
/// the arm loss itself. `theta` is Alice's phase minus Bob's phase. With
/// `theta = 0` constructive interference lands on the left detector.
pub trait CoherentDetection {
    fn detect(&self, mu_a: f64, mu_b: f64, theta: f64) -> Result<ClickOutcome>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transmittance_values() {
        let ch = ChannelParams::standard(0.0);
        assert_eq!(arm_transmittance(&ch), 0.3);
        let eta100 = arm_transmittance(&ch.with_length(100.0));
        assert!((eta100 - 0.03).abs() < 1e-15);
        let eta300 = arm_transmittance(&ch.with_length(300.0));
        assert!((eta300 - 3e-4).abs() < 1e-18);
    }

    #[test]
    fn plob_values() {
        assert!((plob_from_transmittance(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(plob_from_transmittance(0.0), 0.0);
        assert!(plob_from_transmittance(1.0).is_infinite());
        let ch = ChannelParams::standard(300.0);
        let expected = (1e-6 + 0.5e-12 + 1e-18 / 3.0) / std::f64::consts::LN_2;
        assert!((plob_bound(&ch, false) - expected).abs() < 1e-12 * expected);
        assert!((plob_bound(&ch, false) - 1.4427e-6).abs() < 1e-10);
        assert!(plob_bound(&ch, true) < plob_bound(&ch, false));
        assert!(plob_bound(&ChannelParams::standard(0.0), false).is_infinite());
    }

    #[test]
    fn validation() {
        assert!(ChannelParams::standard(10.0).validate().is_ok());
        let bad = ChannelParams {
            e_d: 0.5,
            ..ChannelParams::standard(10.0)
        };
        assert!(bad.validate().is_err());
        let bad = ChannelParams {
            eta_d: 0.0,
            ..ChannelParams::standard(10.0)
        };
        assert!(bad.validate().is_err());
    }
}
