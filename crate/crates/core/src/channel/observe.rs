use std::f64::consts::PI;

use super::{ChannelParams, CoherentDetection, LinearModel};
use crate::decoy::{ObservedRates, ProtocolParams};
use crate::error::Result;

/// Observed rates predicted by the closed-form linear model.
pub fn simulate_observables(p: &ProtocolParams, ch: &ChannelParams) -> Result<ObservedRates> {
    ch.validate()?;
    simulate_observables_with(p, &LinearModel::new(*ch))
}

/// Observed rates under any coherent-input detection model.
///
/// Decoy sources with one side silent are phase-insensitive and need one
/// evaluation. `X_1` windows use a relative phase of 0 (`T_+^R`) or π
/// (`T_-^L`). In `Z` windows the both-send relative phase is averaged over
/// the `N` discrete values; only exactly-one-send heralds carry a correct bit.
pub fn simulate_observables_with<D: CoherentDetection + ?Sized>(
    p: &ProtocolParams,
    det: &D,
) -> Result<ObservedRates> {
    p.validate()?;
    let vacuum = det.detect(0.0, 0.0, 0.0)?;
    let single = |mu: f64| -> Result<(f64, f64)> {
        Ok((
            det.detect(0.0, mu, 0.0)?.total(),
            det.detect(mu, 0.0, 0.0)?.total(),
        ))
    };
    let (s_ox, s_xo) = single(p.mu_x)?;
    let (s_oy, s_yo) = single(p.mu_y)?;
    let matched = det.detect(p.mu_x, p.mu_x, 0.0)?;
    let opposite = det.detect(p.mu_x, p.mu_x, PI)?;

    let n = p.n.get();
    let mut both_send = 0.0;
    for d in 0..n {
        let theta = 2.0 * PI * d as f64 / n as f64;
        both_send += det.detect(p.mu_z, p.mu_z, theta)?.total();
    }
    both_send /= n as f64;
    let (z_ob, z_bo) = single(p.mu_z)?;

    let eps = p.epsilon;
    let none = (1.0 - eps) * (1.0 - eps) * vacuum.total();
    let both = eps * eps * both_send;
    let one = eps * (1.0 - eps) * (z_ob + z_bo);
    let s_z = none + one + both;
    let e_z = if s_z > 0.0 { (none + both) / s_z } else { 0.0 };

    Ok(ObservedRates {
        s_oo: vacuum.total(),
        s_ox,
        s_oy,
        s_xo,
        s_yo,
        t_plus_r: matched.right_only,
        t_minus_l: opposite.left_only,
        t_00: vacuum.right_only,
        t_00p: vacuum.left_only,
        s_z,
        e_z,
    })
}

/// Both-send Z-window rate averaged over `N` relative phases offset by `shift`.
#[cfg(test)]
fn shifted_phase_average<D: CoherentDetection>(det: &D, mu: f64, n: u32, shift: u32) -> f64 {
    (0..n)
        .map(|d| {
            let theta = 2.0 * PI * ((d + shift) % n) as f64 / n as f64;
            det.detect(mu, mu, theta).unwrap().total()
        })
        .sum::<f64>()
        / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::PhaseCount;

    fn params(eps: f64) -> ProtocolParams {
        ProtocolParams::new(PhaseCount::new(12).unwrap(), 0.001, 0.002, 0.4, eps, 1.1).unwrap()
    }

    #[test]
    fn no_sending_means_all_errors() {
        // ε → 0: only neither-send heralds remain
        let ch = ChannelParams::standard(100.0);
        let obs = simulate_observables(&params(1e-300), &ch).unwrap();
        let dark = 2.0 * ch.p_d * (1.0 - ch.p_d);
        assert!((obs.s_z - dark).abs() < 1e-20);
        assert!((obs.e_z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn only_both_send_in_ideal_detectors() {
        let ch = ChannelParams {
            p_d: 0.0,
            e_d: 0.0,
            ..ChannelParams::standard(50.0)
        };
        let obs = simulate_observables(&params(1.0 - 1e-16), &ch).unwrap();
        assert!(obs.e_z > 1.0 - 1e-12);
    }

    #[test]
    fn symmetric_arms_give_symmetric_rates() {
        let ch = ChannelParams::standard(150.0);
        let obs = simulate_observables(&params(0.05), &ch).unwrap();
        assert_eq!(obs.s_ox, obs.s_xo);
        assert_eq!(obs.s_oy, obs.s_yo);
        assert_eq!(obs.t_00, obs.t_00p);
        assert!(obs.validate().is_ok());
    }

    #[test]
    fn phase_average_invariant_under_global_shift() {
        let model = LinearModel::new(ChannelParams::standard(80.0));
        let base = shifted_phase_average(&model, 0.3, 8, 0);
        for shift in 1..8 {
            let shifted = shifted_phase_average(&model, 0.3, 8, shift);
            assert!((base - shifted).abs() <= 1e-15 * base);
        }
    }
}
