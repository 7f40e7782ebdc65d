use super::{arm_transmittance, ChannelParams, ClickOutcome, CoherentDetection};
use crate::error::Result;

/// One-detector probabilities for received coherent intensities `x`, `y`
/// with relative phase `theta`.
///
/// Misalignment reduces the interference visibility to `1 - 2 e_d`:
/// `I_L,R = (x + y)/2 ± (1 - 2 e_d) sqrt(xy) cos θ`. Each threshold detector
/// fires with probability `1 - (1 - p_d) exp(-I)`, independently.
pub fn click_probs_coherent(x: f64, y: f64, theta: f64, ch: &ChannelParams) -> ClickOutcome {
    let mean = 0.5 * (x + y);
    let fringe = (1.0 - 2.0 * ch.e_d) * (x * y).sqrt() * theta.cos();
    let i_left = (mean + fringe).max(0.0);
    let i_right = (mean - fringe).max(0.0);
    let log_dark = (-ch.p_d).ln_1p();
    // probability that a detector stays silent, and its complement
    let silent = |i: f64| (log_dark - i).exp();
    let fires = |i: f64| -(log_dark - i).exp_m1();
    ClickOutcome {
        left_only: fires(i_left) * silent(i_right),
        right_only: fires(i_right) * silent(i_left),
    }
}

/// Closed-form coherent-state channel.
#[derive(Debug, Clone, Copy)]
pub struct LinearModel {
    ch: ChannelParams,
    eta: f64,
}

impl LinearModel {
    pub fn new(ch: ChannelParams) -> Self {
        LinearModel {
            ch,
            eta: arm_transmittance(&ch),
        }
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.ch
    }
}

impl CoherentDetection for LinearModel {
    fn detect(&self, mu_a: f64, mu_b: f64, theta: f64) -> Result<ClickOutcome> {
        Ok(click_probs_coherent(
            self.eta * mu_a,
            self.eta * mu_b,
            theta,
            &self.ch,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dark_counts_only() {
        let ch = ChannelParams::standard(0.0);
        let out = click_probs_coherent(0.0, 0.0, 0.0, &ch);
        let expected = ch.p_d * (1.0 - ch.p_d);
        assert!((out.left_only - expected).abs() < 1e-22);
        assert!((out.right_only - expected).abs() < 1e-22);
    }

    #[test]
    fn perfect_interference() {
        let ch = ChannelParams {
            p_d: 0.0,
            e_d: 0.0,
            ..ChannelParams::standard(0.0)
        };
        let x = 0.2;
        let out = click_probs_coherent(x, x, 0.0, &ch);
        assert_eq!(out.right_only, 0.0);
        assert!((out.left_only - (1.0 - (-2.0 * x).exp())).abs() < 1e-15);
    }

    #[test]
    fn misaligned_weak_pulses() {
        let ch = ChannelParams::standard(0.0);
        let x = 0.01;
        let out = click_probs_coherent(x, x, 0.0, &ch);
        // I_R = 2 x e_d = 6e-4, I_L = 2x - I_R
        let i_r: f64 = 6e-4;
        let i_l: f64 = 0.02 - i_r;
        let q = 1.0 - ch.p_d;
        let p_l = 1.0 - q * (-i_l).exp();
        let p_r = 1.0 - q * (-i_r).exp();
        assert!((out.right_only - p_r * (1.0 - p_l)).abs() < 1e-16);
        assert!((out.left_only - p_l * (1.0 - p_r)).abs() < 1e-16);
    }

    #[test]
    fn antipodal_phase_swaps_detectors() {
        let ch = ChannelParams::standard(0.0);
        for &(x, y, t) in &[(0.1, 0.3, 0.4), (0.02, 0.02, 1.9), (0.5, 0.0, 0.0)] {
            let a = click_probs_coherent(x, y, t, &ch);
            let b = click_probs_coherent(x, y, t + PI, &ch);
            assert!((a.left_only - b.right_only).abs() < 1e-15);
            assert!((a.right_only - b.left_only).abs() < 1e-15);
        }
    }
}
