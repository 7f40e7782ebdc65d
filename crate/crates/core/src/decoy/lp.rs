//! Linear-programming lower bound on `s_1`, used to cross-check the
//! analytic bound.

use super::{ObservedRates, ProtocolParams, SourceConstants};
use crate::error::{Error, Result};
use crate::fidelity::fidelity_lambda;
use crate::photon::SeriesPolicy;
use crate::simplex::{LinearProgram, Relation};

pub const DEFAULT_LP_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpBound {
    pub s1: f64,
    pub s01: f64,
    pub s10: f64,
}

/// Variable layout: `Y_vj^x`, `Y_vj^y`, `Y_jv^x`, `Y_jv^y` for `j < N`, then `s_01`, `s_10`.
struct Layout {
    n: usize,
}

impl Layout {
    fn vj_x(&self, j: usize) -> usize {
        j
    }
    fn vj_y(&self, j: usize) -> usize {
        self.n + j
    }
    fn jv_x(&self, j: usize) -> usize {
        2 * self.n + j
    }
    fn jv_y(&self, j: usize) -> usize {
        3 * self.n + j
    }
    fn s01(&self) -> usize {
        4 * self.n
    }
    fn s10(&self) -> usize {
        4 * self.n + 1
    }
    fn len(&self) -> usize {
        4 * self.n + 2
    }
}

/// Minimum of `(s_01 + s_10)/2` over all class yields consistent with the
/// observed decoy rates and the trace-distance constraints.
pub fn lp_s1_lower(
    obs: &ObservedRates,
    p: &ProtocolParams,
    policy: &SeriesPolicy,
    budget: usize,
) -> Result<LpBound> {
    obs.validate()?;
    let c = SourceConstants::new(p, policy)?;
    let n = p.n.get() as usize;
    let at = Layout { n };
    let mut lp = LinearProgram::new(at.len());
    lp.set_objective(at.s01(), 0.5);
    lp.set_objective(at.s10(), 0.5);

    let expansion = |var: &dyn Fn(usize) -> usize, weights: &[f64]| -> Vec<(usize, f64)> {
        (0..n).map(|j| (var(j), weights[j])).collect()
    };
    lp.add_constraint(&expansion(&|j| at.vj_x(j), &c.p_x), Relation::Eq, obs.s_ox);
    lp.add_constraint(&expansion(&|j| at.vj_y(j), &c.p_y), Relation::Eq, obs.s_oy);
    lp.add_constraint(&expansion(&|j| at.jv_x(j), &c.p_x), Relation::Eq, obs.s_xo);
    lp.add_constraint(&expansion(&|j| at.jv_y(j), &c.p_y), Relation::Eq, obs.s_yo);

    let d0 = c.vacuum_pen;
    lp.add_range(&[(at.vj_y(0), 1.0)], obs.s_oo - d0, obs.s_oo + d0);
    lp.add_range(&[(at.jv_y(0), 1.0)], obs.s_oo - d0, obs.s_oo + d0);

    for j in 0..n {
        let dj = fidelity_lambda(p.mu_x, p.mu_y, p.n, j as u32, policy)?.trace_bound();
        lp.add_range(&[(at.vj_x(j), 1.0), (at.vj_y(j), -1.0)], -dj, dj);
        lp.add_range(&[(at.jv_x(j), 1.0), (at.jv_y(j), -1.0)], -dj, dj);
    }

    let d1 = c.signal_pen;
    lp.add_range(&[(at.s01(), 1.0), (at.vj_y(1), -1.0)], -d1, d1);
    lp.add_range(&[(at.s10(), 1.0), (at.jv_y(1), -1.0)], -d1, d1);

    for v in 0..at.len() {
        lp.add_constraint(&[(v, 1.0)], Relation::Le, 1.0);
    }

    let sol = lp.minimize(budget).map_err(|e| match e {
        Error::Infeasible(msg) => Error::Validity(format!(
            "observations are inconsistent with the yield model: {msg}"
        )),
        other => other,
    })?;
    Ok(LpBound {
        s1: sol.objective,
        s01: sol.x[at.s01()],
        s10: sol.x[at.s10()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::PhaseCount;

    #[test]
    fn zero_observations_stay_within_signal_penalty() {
        let pol = SeriesPolicy::default();
        let p =
            ProtocolParams::new(PhaseCount::new(4).unwrap(), 0.01, 0.05, 0.3, 0.05, 1.1).unwrap();
        let c = SourceConstants::new(&p, &pol).unwrap();
        let bound = lp_s1_lower(&ObservedRates::default(), &p, &pol, DEFAULT_LP_BUDGET).unwrap();
        assert!(bound.s1 >= 0.0);
        assert!(bound.s1 <= c.signal_pen + 1e-15);
    }

    #[test]
    fn inconsistent_observations_are_rejected() {
        let pol = SeriesPolicy::default();
        let p =
            ProtocolParams::new(PhaseCount::new(4).unwrap(), 0.01, 0.05, 0.3, 0.05, 1.1).unwrap();
        // S_ox = 1 requires every Y_vj^x = 1 but the vacuum term is pinned near 0
        let obs = ObservedRates {
            s_ox: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            lp_s1_lower(&obs, &p, &pol, DEFAULT_LP_BUDGET),
            Err(Error::Validity(_))
        ));
    }
}
