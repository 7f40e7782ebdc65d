use num_complex::Complex64;

use super::fock::ModeState;
use super::{ChannelParams, FockOracle, FockState2};
use crate::decoy::ProtocolParams;
use crate::error::Result;
use crate::photon::SeriesPolicy;

/// Exact untagged quantities of the virtual protocol, as seen by the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UntaggedTruth {
    /// Yield of `|0 λ_1⟩` (Bob sends).
    pub s01: f64,
    /// Yield of `|λ_1 0⟩` (Alice sends).
    pub s10: f64,
    /// Right-only rate of `|χ_0⟩`.
    pub t0r: f64,
    /// Left-only rate of `|χ_1⟩`.
    pub t1l: f64,
    /// `(T_0^R + T_1^L) / (s_01 + s_10)`.
    pub eph: f64,
}

impl UntaggedTruth {
    pub fn s1(&self) -> f64 {
        0.5 * (self.s01 + self.s10)
    }
}

/// Builds `|0λ_1⟩`, `|λ_1 0⟩`, `|χ_0⟩`, `|χ_1⟩` at the signal intensity and
/// runs each through the oracle.
pub fn oracle_untagged_truth(
    p: &ProtocolParams,
    ch: &ChannelParams,
    n_max: usize,
    policy: &SeriesPolicy,
) -> Result<UntaggedTruth> {
    oracle_untagged_truth_with(p, &FockOracle::new(*ch).with_cutoff(n_max), policy)
}

pub fn oracle_untagged_truth_with(
    p: &ProtocolParams,
    oracle: &FockOracle,
    policy: &SeriesPolicy,
) -> Result<UntaggedTruth> {
    let n_max = oracle.n_max();
    let lambda = ModeState::class(p.mu_z, p.n, 1, n_max, policy)?;
    let vacuum = ModeState::vacuum(n_max);
    let bob_sends = FockState2::product(&vacuum, &lambda);
    let alice_sends = FockState2::product(&lambda, &vacuum);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let chi0 = bob_sends.superpose(h, &alice_sends, h);
    let chi1 = bob_sends.superpose(h, &alice_sends, -h);

    let s01 = oracle.detect_state(&bob_sends)?.total();
    let s10 = oracle.detect_state(&alice_sends)?.total();
    let t0r = oracle.detect_state(&chi0)?.right_only;
    let t1l = oracle.detect_state(&chi1)?.left_only;
    let eph = if s01 + s10 > 0.0 {
        (t0r + t1l) / (s01 + s10)
    } else {
        0.0
    };
    Ok(UntaggedTruth {
        s01,
        s10,
        t0r,
        t1l,
        eph,
    })
}
