//! Soundness checks of the decoy bounds against the Fock-space oracle.
//!
//! Observations are produced by sending coherent states through the oracle,
//! the analytic and LP bounds are computed from them, and each bound is
//! compared with the oracle's exact untagged quantities.

use crate::channel::{
    oracle_untagged_truth_with, simulate_observables_with, FockOracle, UntaggedTruth,
};
use crate::decoy::{
    decoy_bounds_with, lp_s1_lower, DecoyBounds, LpBound, ObservedRates, ProtocolParams,
    SourceConstants,
};
use crate::error::Result;
use crate::photon::SeriesPolicy;

/// Slack allowed when the analytic `s_1` bound is compared with the LP bound.
pub const LP_DOMINANCE_TOL: f64 = 1e-9;

/// Which way a bound must sit relative to the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `bound <= truth + tol`
    Lower,
    /// `bound >= truth - tol`
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub side: Side,
    pub bound: f64,
    pub reference: f64,
    pub tol: f64,
}

impl Check {
    fn new(name: &'static str, side: Side, bound: f64, reference: f64, tol: f64) -> Self {
        Check {
            name,
            side,
            bound,
            reference,
            tol,
        }
    }

    pub fn holds(&self) -> bool {
        match self.side {
            Side::Lower => self.bound <= self.reference + self.tol,
            Side::Upper => self.bound >= self.reference - self.tol,
        }
    }

    /// How far the bound sits on the safe side (negative on violation).
    pub fn margin(&self) -> f64 {
        match self.side {
            Side::Lower => self.reference - self.bound,
            Side::Upper => self.bound - self.reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub length_km: f64,
    pub params: ProtocolParams,
    pub observed: ObservedRates,
    pub bounds: DecoyBounds,
    pub lp: LpBound,
    pub truth: UntaggedTruth,
    pub checks: Vec<Check>,
}

impl PointReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds())
    }
}

/// Runs the full oracle comparison at one parameter point.
pub fn verify_point(
    p: &ProtocolParams,
    oracle: &FockOracle,
    policy: &SeriesPolicy,
    lp_budget: usize,
) -> Result<PointReport> {
    let consts = SourceConstants::new(p, policy)?;
    let observed = simulate_observables_with(p, oracle)?;
    let bounds = decoy_bounds_with(&observed, &consts)?;
    let lp = lp_s1_lower(&observed, p, policy, lp_budget)?;
    let truth = oracle_untagged_truth_with(p, oracle, policy)?;

    let checks = vec![
        Check::new("s01_L <= s01", Side::Lower, bounds.s01_l, truth.s01, 0.0),
        Check::new("s10_L <= s10", Side::Lower, bounds.s10_l, truth.s10, 0.0),
        Check::new("t0r_U >= T0R", Side::Upper, bounds.t0r_u, truth.t0r, 0.0),
        Check::new("t1l_U >= T1L", Side::Upper, bounds.t1l_u, truth.t1l, 0.0),
        Check::new("eph_U >= eph", Side::Upper, bounds.eph_u, truth.eph, 0.0),
        Check::new(
            "s1_L <= s1_LP",
            Side::Lower,
            bounds.s1_l,
            lp.s1,
            LP_DOMINANCE_TOL,
        ),
        Check::new("s1_LP <= s1", Side::Lower, lp.s1, truth.s1(), 0.0),
    ];
    Ok(PointReport {
        length_km: oracle.channel().length_km,
        params: *p,
        observed,
        bounds,
        lp,
        truth,
        checks,
    })
}
