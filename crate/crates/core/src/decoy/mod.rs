//! Decoy-state estimation for the sending-or-not-sending protocol.
//!
//! From the one-detector rates of the vacuum/decoy sources and of the
//! phase-matched `X_1` windows, this module bounds the untagged yield
//! `s_1 = (s_01 + s_10)/2` from below and the phase-flip error rate from
//! above. Every trace-distance correction enters through
//! [`SourceConstants`], which depends only on the intensities and `N`.

mod lp;

pub use lp::{lp_s1_lower, LpBound, DEFAULT_LP_BUDGET};

use crate::entropy::binary_entropy;
use crate::error::{Error, Result};
use crate::fidelity::{delta_upper, fidelity_f0, fidelity_f00, fidelity_f1, fidelity_f11, XSign};
use crate::photon::{check_ratio_condition, class_probabilities, p_j, PhaseCount, SeriesPolicy};

/// Smallest admissible weak-decoy intensity.
pub const MIN_MU_X: f64 = 0.001;

/// Source settings chosen by Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub n: PhaseCount,
    pub mu_x: f64,
    pub mu_y: f64,
    pub mu_z: f64,
    /// Sending probability in signal windows.
    pub epsilon: f64,
    /// Error-correction inefficiency.
    pub f: f64,
}

impl ProtocolParams {
    pub fn new(
        n: PhaseCount,
        mu_x: f64,
        mu_y: f64,
        mu_z: f64,
        epsilon: f64,
        f: f64,
    ) -> Result<Self> {
        let p = ProtocolParams {
            n,
            mu_x,
            mu_y,
            mu_z,
            epsilon,
            f,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Domain(msg));
        if !(self.mu_x.is_finite() && self.mu_x >= MIN_MU_X) {
            return fail(format!("mu_x must be >= {MIN_MU_X}, got {}", self.mu_x));
        }
        if !(self.mu_y.is_finite() && self.mu_y > self.mu_x) {
            return fail(format!(
                "mu_y must exceed mu_x, got mu_x = {}, mu_y = {}",
                self.mu_x, self.mu_y
            ));
        }
        if !(self.mu_z.is_finite() && self.mu_z > 0.0) {
            return fail(format!("mu_z must be > 0, got {}", self.mu_z));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return fail(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.f.is_finite() && self.f >= 1.0) {
            return fail(format!("f must be >= 1, got {}", self.f));
        }
        Ok(())
    }
}

/// Observed one-detector rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObservedRates {
    pub s_oo: f64,
    pub s_ox: f64,
    pub s_oy: f64,
    pub s_xo: f64,
    pub s_yo: f64,
    /// Right clicks of `X_1` pairs with equal phases.
    pub t_plus_r: f64,
    /// Left clicks of `X_1` pairs with opposite phases.
    pub t_minus_l: f64,
    /// Right clicks of the vacuum pair.
    pub t_00: f64,
    /// Left clicks of the vacuum pair.
    pub t_00p: f64,
    pub s_z: f64,
    pub e_z: f64,
}

impl ObservedRates {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("S_oo", self.s_oo),
            ("S_ox", self.s_ox),
            ("S_oy", self.s_oy),
            ("S_xo", self.s_xo),
            ("S_yo", self.s_yo),
            ("T_+^R", self.t_plus_r),
            ("T_-^L", self.t_minus_l),
            ("T_00", self.t_00),
            ("T_00'", self.t_00p),
            ("S_z", self.s_z),
            ("E_z", self.e_z),
        ];
        for (name, v) in fields {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Decoy-state bounds for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecoyBounds {
    pub s01_l: f64,
    pub s10_l: f64,
    pub s1_l: f64,
    pub t0r_u: f64,
    pub t1l_u: f64,
    pub eph_u: f64,
}

/// Class probabilities and trace-distance penalties for one set of intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceConstants {
    pub p_x: Vec<f64>,
    pub p_y: Vec<f64>,
    pub p1_z: f64,
    pub px0: f64,
    pub px1: f64,
    /// `Δ^U`
    pub delta_u: f64,
    /// `sqrt(1 - F_0²)`
    pub vacuum_pen: f64,
    /// `sqrt(1 - F_1²)`
    pub signal_pen: f64,
    /// `sqrt(1 - F_00²)`
    pub pair_vacuum_pen: f64,
    /// `sqrt(1 - F_11^+(0)²)`
    pub plus_pen: f64,
    /// `sqrt(1 - F_11^-(N/2)²)`
    pub minus_pen: f64,
    pub ratio_condition: bool,
}

impl SourceConstants {
    pub fn new(p: &ProtocolParams, policy: &SeriesPolicy) -> Result<Self> {
        let n = p.n;
        let p_x = class_probabilities(p.mu_x, n, policy)?;
        let p_y = class_probabilities(p.mu_y, n, policy)?;
        Ok(SourceConstants {
            p1_z: p_j(p.mu_z, n, 1, policy)?,
            px0: p_j(2.0 * p.mu_x, n, 0, policy)?,
            px1: p_j(2.0 * p.mu_x, n, 1, policy)?,
            delta_u: delta_upper(p.mu_x, p.mu_y, n, policy)?,
            vacuum_pen: fidelity_f0(p.mu_y, n, policy)?.trace_bound(),
            signal_pen: fidelity_f1(p.mu_y, p.mu_z, n, policy)?.trace_bound(),
            pair_vacuum_pen: fidelity_f00(p.mu_x, n, policy)?.trace_bound(),
            plus_pen: fidelity_f11(p.mu_x, p.mu_z, n, 0, XSign::Plus, policy)?.trace_bound(),
            minus_pen: fidelity_f11(p.mu_x, p.mu_z, n, n.half(), XSign::Minus, policy)?
                .trace_bound(),
            ratio_condition: check_ratio_condition(p.mu_x, p.mu_y, n, policy)?,
            p_x,
            p_y,
        })
    }

    /// `P_1(μx)P_2(μy) - P_1(μy)P_2(μx)`; zero for `N = 2`, where class 2 does not exist.
    fn denominator(&self) -> f64 {
        match (self.p_x.get(2), self.p_y.get(2)) {
            (Some(p2x), Some(p2y)) => self.p_x[1] * p2y - self.p_y[1] * p2x,
            _ => 0.0,
        }
    }

    fn check_usable(&self) -> Result<f64> {
        if !self.ratio_condition {
            return Err(Error::validity(
                "ratio condition P_1(μx)/P_1(μy) ≥ P_2(μx)/P_2(μy) ≥ P_j(μx)/P_j(μy) violated",
            ));
        }
        let den = self.denominator();
        if !(den > 0.0) {
            return Err(Error::validity(format!(
                "decoy denominator P_1(μx)P_2(μy) - P_1(μy)P_2(μx) = {den:e} is not positive"
            )));
        }
        Ok(den)
    }

    /// Lower bound on the yield of a single-side class-1 state from the
    /// rates of the `x` and `y` decoys on that side.
    fn single_side_lower(&self, s_oo: f64, s_weak: f64, s_strong: f64) -> Result<f64> {
        let den = self.check_usable()?;
        let (p0x, p2x) = (self.p_x[0], self.p_x[2]);
        let (p0y, p2y) = (self.p_y[0], self.p_y[2]);
        let vacuum_coeff = p0x * p2y - p0y * p2x;
        let num = p2y * s_weak
            - p2x * s_strong
            - vacuum_coeff * (s_oo + self.vacuum_pen)
            - p2y * self.delta_u;
        Ok((num / den - self.signal_pen).max(0.0))
    }

    fn click_upper(&self, t_matched: f64, t_vacuum: f64, fidelity_pen: f64) -> Result<f64> {
        if !(self.px1 > 0.0) {
            return Err(Error::validity("PX_1(μx) must be positive"));
        }
        let bound =
            (t_matched - self.px0 * (t_vacuum - self.pair_vacuum_pen)) / self.px1 + fidelity_pen;
        Ok(bound.clamp(0.0, 1.0))
    }
}

/// `s_01^L` using the rates of Bob's decoys with Alice silent.
pub fn s01_lower(obs: &ObservedRates, p: &ProtocolParams, policy: &SeriesPolicy) -> Result<f64> {
    let c = SourceConstants::new(p, policy)?;
    c.single_side_lower(obs.s_oo, obs.s_ox, obs.s_oy)
}

/// `s_10^L`, the mirror of [`s01_lower`].
pub fn s10_lower(obs: &ObservedRates, p: &ProtocolParams, policy: &SeriesPolicy) -> Result<f64> {
    let c = SourceConstants::new(p, policy)?;
    c.single_side_lower(obs.s_oo, obs.s_xo, obs.s_yo)
}

/// `T_0^{R,U}`.
pub fn t0r_upper(obs: &ObservedRates, p: &ProtocolParams, policy: &SeriesPolicy) -> Result<f64> {
    let c = SourceConstants::new(p, policy)?;
    c.click_upper(obs.t_plus_r, obs.t_00, c.plus_pen)
}

/// `T_1^{L,U}`.
pub fn t1l_upper(obs: &ObservedRates, p: &ProtocolParams, policy: &SeriesPolicy) -> Result<f64> {
    let c = SourceConstants::new(p, policy)?;
    c.click_upper(obs.t_minus_l, obs.t_00p, c.minus_pen)
}

/// `min{(T_0^{R,U} + T_1^{L,U}) / (s_01^L + s_10^L), 1/2}`; a vanishing
/// yield bound saturates at 1/2.
pub fn ephase_upper(s01_l: f64, s10_l: f64, t0r_u: f64, t1l_u: f64) -> f64 {
    let den = s01_l + s10_l;
    if !(den > 0.0) {
        return 0.5;
    }
    ((t0r_u + t1l_u) / den).min(0.5)
}

/// All analytic bounds with precomputed source constants.
pub fn decoy_bounds_with(obs: &ObservedRates, c: &SourceConstants) -> Result<DecoyBounds> {
    let s01_l = c.single_side_lower(obs.s_oo, obs.s_ox, obs.s_oy)?;
    let s10_l = c.single_side_lower(obs.s_oo, obs.s_xo, obs.s_yo)?;
    let t0r_u = c.click_upper(obs.t_plus_r, obs.t_00, c.plus_pen)?;
    let t1l_u = c.click_upper(obs.t_minus_l, obs.t_00p, c.minus_pen)?;
    Ok(DecoyBounds {
        s01_l,
        s10_l,
        s1_l: 0.5 * (s01_l + s10_l),
        t0r_u,
        t1l_u,
        eph_u: ephase_upper(s01_l, s10_l, t0r_u, t1l_u),
    })
}

pub fn decoy_bounds(
    obs: &ObservedRates,
    p: &ProtocolParams,
    policy: &SeriesPolicy,
) -> Result<DecoyBounds> {
    decoy_bounds_with(obs, &SourceConstants::new(p, policy)?)
}

/// Asymptotic key rate per pulse pair,
/// `max{0, 2ε(1-ε) P_1(μz) s_1 [1 - H(e_ph)] - S_z f H(E_z)}`.
pub fn key_rate_with(
    p: &ProtocolParams,
    p1_z: f64,
    obs: &ObservedRates,
    bounds: &DecoyBounds,
) -> Result<f64> {
    let eps = p.epsilon;
    let privacy =
        2.0 * eps * (1.0 - eps) * p1_z * bounds.s1_l * (1.0 - binary_entropy(bounds.eph_u)?);
    let leak = obs.s_z * p.f * binary_entropy(obs.e_z)?;
    Ok((privacy - leak).max(0.0))
}

pub fn key_rate(
    p: &ProtocolParams,
    obs: &ObservedRates,
    bounds: &DecoyBounds,
    policy: &SeriesPolicy,
) -> Result<f64> {
    key_rate_with(p, p_j(p.mu_z, p.n, 1, policy)?, obs, bounds)
}
