//! Deterministic key-rate maximization and distance scans.
//!
//! The search is a log-spaced coarse grid over `(μx, μy, μz, ε)` followed by
//! coordinate refinement with step halving from the best few grid points.
//! Every candidate is an independent pure evaluation, so both stages fan out
//! through [`Execution`]; reductions run over results in input order.

use std::cmp::Ordering;

use crate::channel::{plob_bound, simulate_observables, ChannelParams};
use crate::decoy::{
    decoy_bounds_with, key_rate_with, DecoyBounds, ObservedRates, ProtocolParams, SourceConstants,
    MIN_MU_X,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::photon::{PhaseCount, SeriesPolicy};

/// Lowest decoy intensity `μy` the search may use.
pub const MIN_MU_Y: f64 = 0.002;

/// Which intensities are free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    FourIntensity,
    /// Signal intensity pinned to the strong decoy, `μz = μy`.
    ThreeIntensity,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::FourIntensity => "4int",
            Mode::ThreeIntensity => "3int",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "4int" => Ok(Mode::FourIntensity),
            "3int" => Ok(Mode::ThreeIntensity),
            other => Err(Error::domain(format!(
                "mode must be 3int or 4int, got {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Closed interval searched on a log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    fn check(&self, name: &str) -> Result<()> {
        if !(self.lo > 0.0 && self.lo <= self.hi && self.hi.is_finite()) {
            return Err(Error::domain(format!(
                "{name} range [{}, {}] must satisfy 0 < lo <= hi",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    fn log_grid(&self, points: usize) -> Vec<f64> {
        if points < 2 || self.lo == self.hi {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..points)
            .map(|i| match i {
                0 => self.lo,
                _ if i == points - 1 => self.hi,
                _ => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
            })
            .collect()
    }

    fn log_width(&self) -> f64 {
        (self.hi / self.lo).ln()
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

/// Search space and effort for [`optimize_rate`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationSpec {
    pub n: PhaseCount,
    pub mode: Mode,
    /// Error-correction inefficiency.
    pub f: f64,
    pub mu_x: Interval,
    pub mu_y: Interval,
    pub mu_z: Interval,
    pub epsilon: Interval,
    /// Grid points per free parameter.
    pub grid_points: usize,
    /// Number of best grid points refined locally.
    pub starts: usize,
    /// Number of step halvings in the local refinement.
    pub refine_depth: u32,
    /// Refinement stops early once a halving gains less than this fraction of the rate.
    pub rel_tol: f64,
    pub policy: SeriesPolicy,
    pub execution: Execution,
}

impl OptimizationSpec {
    pub fn new(n: PhaseCount, mode: Mode) -> Self {
        OptimizationSpec {
            n,
            mode,
            f: 1.1,
            mu_x: Interval::new(MIN_MU_X, 0.1),
            mu_y: Interval::new(MIN_MU_Y, 0.5),
            mu_z: Interval::new(0.001, 1.0),
            epsilon: Interval::new(0.001, 0.5),
            grid_points: 7,
            starts: 3,
            refine_depth: 10,
            rel_tol: 1e-3,
            policy: SeriesPolicy::default(),
            execution: Execution::default(),
        }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        OptimizationSpec {
            mode,
            ..self.clone()
        }
    }

    pub fn with_phases(&self, n: PhaseCount) -> Self {
        OptimizationSpec { n, ..self.clone() }
    }

    pub fn with_execution(&self, execution: Execution) -> Self {
        OptimizationSpec {
            execution,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mu_x.check("mu_x")?;
        self.mu_y.check("mu_y")?;
        self.mu_z.check("mu_z")?;
        self.epsilon.check("epsilon")?;
        if self.mu_x.lo < MIN_MU_X {
            return Err(Error::domain(format!("mu_x must be >= {MIN_MU_X}")));
        }
        if self.mu_y.lo < MIN_MU_Y {
            return Err(Error::domain(format!("mu_y must be >= {MIN_MU_Y}")));
        }
        if self.mu_z.hi > 1.0 {
            return Err(Error::domain("mu_z must be <= 1"));
        }
        if self.epsilon.hi > 0.5 {
            return Err(Error::domain("epsilon must be <= 0.5"));
        }
        if self.mode == Mode::ThreeIntensity {
            let shared = self.mu_y.intersect(&self.mu_z);
            if shared.lo > shared.hi {
                return Err(Error::domain(
                    "three-intensity mode needs overlapping mu_y and mu_z ranges",
                ));
            }
        }
        if self.grid_points < 2 {
            return Err(Error::domain("grid_points must be at least 2"));
        }
        if self.starts == 0 {
            return Err(Error::domain("starts must be at least 1"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::domain("rel_tol must lie in (0, 1)"));
        }
        if !(self.f >= 1.0) {
            return Err(Error::domain(format!("f must be >= 1, got {}", self.f)));
        }
        Ok(())
    }

    fn ranges(&self) -> [Interval; 4] {
        match self.mode {
            Mode::FourIntensity => [self.mu_x, self.mu_y, self.mu_z, self.epsilon],
            Mode::ThreeIntensity => {
                let shared = self.mu_y.intersect(&self.mu_z);
                [self.mu_x, shared, shared, self.epsilon]
            }
        }
    }

    /// Indices into `(μx, μy, μz, ε)` that move independently.
    fn free_axes(&self) -> &'static [usize] {
        match self.mode {
            Mode::FourIntensity => &[0, 1, 2, 3],
            Mode::ThreeIntensity => &[0, 1, 3],
        }
    }

    fn params(&self, v: [f64; 4]) -> Result<ProtocolParams> {
        ProtocolParams::new(self.n, v[0], v[1], v[2], v[3], self.f)
    }
}

/// One fully evaluated parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub params: ProtocolParams,
    pub observed: ObservedRates,
    pub bounds: DecoyBounds,
    pub rate: f64,
}

impl Evaluation {
    fn key(&self) -> [f64; 4] {
        let p = &self.params;
        [p.mu_x, p.mu_y, p.mu_z, p.epsilon]
    }

    /// Higher rate first, then lexicographically smaller parameters.
    fn rank(&self, other: &Evaluation) -> Ordering {
        other
            .rate
            .total_cmp(&self.rate)
            .then_with(|| lex(&self.key(), &other.key()))
    }
}

fn lex(a: &[f64; 4], b: &[f64; 4]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Key rate at one parameter point under the linear channel model.
pub fn evaluate(
    p: &ProtocolParams,
    ch: &ChannelParams,
    policy: &SeriesPolicy,
) -> Result<Evaluation> {
    evaluate_with(p, ch, &SourceConstants::new(p, policy)?)
}

fn evaluate_with(
    p: &ProtocolParams,
    ch: &ChannelParams,
    c: &SourceConstants,
) -> Result<Evaluation> {
    let observed = simulate_observables(p, ch)?;
    let bounds = decoy_bounds_with(&observed, c)?;
    let rate = key_rate_with(p, c.p1_z, &observed, &bounds)?;
    Ok(Evaluation {
        params: *p,
        observed,
        bounds,
        rate,
    })
}

/// Outcome of one optimization, including how much of the grid was usable.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    /// `None` when no grid point was feasible.
    pub best: Option<Evaluation>,
    pub feasible: usize,
    pub infeasible: usize,
}

impl Optimum {
    pub fn rate(&self) -> f64 {
        self.best.as_ref().map_or(0.0, |e| e.rate)
    }

    pub fn diagnostic(&self) -> String {
        match &self.best {
            Some(e) => format!(
                "best R = {:e} over {} feasible grid points ({} infeasible)",
                e.rate, self.feasible, self.infeasible
            ),
            None => format!(
                "no feasible point: all {} grid points violate the ratio condition \
                 or have a non-positive decoy denominator",
                self.infeasible
            ),
        }
    }
}

/// Evaluation, with infeasible points mapped to `None`. Errors other than
/// validity failures are real faults and propagate.
fn try_point(
    spec: &OptimizationSpec,
    ch: &ChannelParams,
    v: [f64; 4],
) -> Result<Option<Evaluation>> {
    if !(v[0] < v[1]) {
        return Ok(None);
    }
    let p = spec.params(v)?;
    let c = match SourceConstants::new(&p, &spec.policy) {
        Ok(c) => c,
        Err(Error::Validity(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    match evaluate_with(&p, ch, &c) {
        Ok(e) => Ok(Some(e)),
        Err(Error::Validity(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn coarse_grid(spec: &OptimizationSpec, ch: &ChannelParams) -> Result<(Vec<Evaluation>, usize)> {
    let [rx, ry, rz, re] = spec.ranges();
    let gx = rx.log_grid(spec.grid_points);
    let gy = ry.log_grid(spec.grid_points);
    let gz = rz.log_grid(spec.grid_points);
    let ge = re.log_grid(spec.grid_points);

    // source constants do not depend on ε, so work is split per intensity triple
    let mut triples = Vec::new();
    for &x in &gx {
        for &y in &gy {
            if !(x < y) {
                continue;
            }
            match spec.mode {
                Mode::FourIntensity => triples.extend(gz.iter().map(|&z| [x, y, z])),
                Mode::ThreeIntensity => triples.push([x, y, y]),
            }
        }
    }
    let per_triple = spec
        .execution
        .map(&triples, |t| -> Result<Vec<Option<Evaluation>>> {
            let p = spec.params([t[0], t[1], t[2], ge[0]])?;
            let c = match SourceConstants::new(&p, &spec.policy) {
                Ok(c) => c,
                Err(Error::Validity(_)) => return Ok(vec![None; ge.len()]),
                Err(e) => return Err(e),
            };
            ge.iter()
                .map(|&eps| {
                    let p = spec.params([t[0], t[1], t[2], eps])?;
                    match evaluate_with(&p, ch, &c) {
                        Ok(e) => Ok(Some(e)),
                        Err(Error::Validity(_)) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        });
    let mut feasible = Vec::new();
    let mut infeasible = 0;
    for row in per_triple {
        for e in row? {
            match e {
                Some(e) => feasible.push(e),
                None => infeasible += 1,
            }
        }
    }
    Ok((feasible, infeasible))
}

/// Coordinate search in log space from `start`. Each level moves until no
/// single-axis step improves the rate, then halves the steps.
fn refine(spec: &OptimizationSpec, ch: &ChannelParams, start: Evaluation) -> Result<Evaluation> {
    let ranges = spec.ranges();
    let axes = spec.free_axes();
    let mut step: Vec<f64> = ranges
        .iter()
        .map(|r| r.log_width() / (spec.grid_points - 1) as f64)
        .collect();
    let mut best = start;
    let mut quiet_levels = 0;
    for _ in 0..=spec.refine_depth {
        let level_start = best.rate;
        // bounded number of moves per level
        for _ in 0..64 {
            let here = best.key();
            let mut moves = Vec::with_capacity(2 * axes.len());
            for &a in axes {
                for dir in [-1.0, 1.0] {
                    let mut v = here;
                    v[a] = ranges[a].clamp(here[a] * (dir * step[a]).exp());
                    if spec.mode == Mode::ThreeIntensity && a == 1 {
                        v[2] = v[1];
                    }
                    if v != here {
                        moves.push(v);
                    }
                }
            }
            let tried = spec.execution.map(&moves, |v| try_point(spec, ch, *v));
            let mut improved = false;
            for e in tried {
                if let Some(e) = e? {
                    if e.rate > best.rate {
                        best = e;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        // two consecutive levels below tolerance end the search
        if best.rate - level_start <= spec.rel_tol * best.rate {
            quiet_levels += 1;
            if quiet_levels == 2 {
                break;
            }
        } else {
            quiet_levels = 0;
        }
        for s in step.iter_mut() {
            *s *= 0.5;
        }
    }
    Ok(best)
}

fn optimize_inner(
    ch: &ChannelParams,
    spec: &OptimizationSpec,
    seed: Option<Evaluation>,
) -> Result<Optimum> {
    let (mut grid, infeasible) = coarse_grid(spec, ch)?;
    let feasible = grid.len();
    grid.sort_by(|a, b| a.rank(b));
    let mut starts: Vec<Evaluation> = grid.into_iter().take(spec.starts).collect();
    starts.extend(seed);
    if starts.is_empty() {
        return Ok(Optimum {
            best: None,
            feasible,
            infeasible,
        });
    }
    let refined = spec.execution.map(&starts, |s| refine(spec, ch, s.clone()));
    let mut best: Option<Evaluation> = None;
    for r in refined {
        let r = r?;
        best = match best {
            Some(b) if b.rank(&r) != Ordering::Greater => Some(b),
            _ => Some(r),
        };
    }
    Ok(Optimum {
        best,
        feasible,
        infeasible,
    })
}

/// Maximizes the key rate at the channel's length.
///
/// In four-intensity mode the three-intensity optimum is used as an extra
/// starting point, so the result is never below the constrained one.
pub fn optimize_rate(ch: &ChannelParams, spec: &OptimizationSpec) -> Result<Optimum> {
    ch.validate()?;
    spec.validate()?;
    match spec.mode {
        Mode::ThreeIntensity => optimize_inner(ch, spec, None),
        Mode::FourIntensity => {
            let three = optimize_inner(ch, &spec.with_mode(Mode::ThreeIntensity), None)?;
            optimize_inner(ch, spec, three.best)
        }
    }
}

/// One distance of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub length_km: f64,
    pub optimum: Optimum,
    /// Optimized rate, zero when nothing was feasible.
    pub rate: f64,
    /// Repeaterless bound of the fiber alone.
    pub plob: f64,
    /// Repeaterless bound with the detector efficiency folded in.
    pub plob_with_detector: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub n: PhaseCount,
    pub mode: Mode,
    pub records: Vec<ScanRecord>,
}

/// Runs [`optimize_rate`] at every length in `lengths` (sorted, non-empty).
pub fn scan_distances(
    template: &ChannelParams,
    spec: &OptimizationSpec,
    lengths: &[f64],
) -> Result<ScanResult> {
    if lengths.is_empty() {
        return Err(Error::domain("distance list is empty"));
    }
    if lengths.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("distance list must be sorted ascending"));
    }
    spec.validate()?;
    let records = spec.execution.map(lengths, |&l| -> Result<ScanRecord> {
        let ch = template.with_length(l);
        let optimum = optimize_rate(&ch, spec)?;
        Ok(ScanRecord {
            length_km: l,
            rate: optimum.rate(),
            optimum,
            plob: plob_bound(&ch, false),
            plob_with_detector: plob_bound(&ch, true),
        })
    });
    Ok(ScanResult {
        n: spec.n,
        mode: spec.mode,
        records: records.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(n: u32, mode: Mode) -> OptimizationSpec {
        OptimizationSpec {
            grid_points: 4,
            starts: 2,
            refine_depth: 4,
            ..OptimizationSpec::new(PhaseCount::new(n).unwrap(), mode)
        }
    }

    #[test]
    fn log_grid_hits_endpoints() {
        let g = Interval::new(0.001, 0.1).log_grid(3);
        assert_eq!(g[0], 0.001);
        assert!((g[1] - 0.01).abs() < 1e-15);
        assert_eq!(g[2], 0.1);
    }

    #[test]
    fn mode_labels_round_trip() {
        for m in [Mode::FourIntensity, Mode::ThreeIntensity] {
            assert_eq!(Mode::parse(m.label()).unwrap(), m);
        }
        assert!(Mode::parse("5int").is_err());
    }

    #[test]
    fn spec_validation() {
        let spec = small_spec(8, Mode::FourIntensity);
        assert!(spec.validate().is_ok());
        let bad = OptimizationSpec {
            mu_x: Interval::new(0.0005, 0.1),
            ..spec.clone()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizationSpec {
            epsilon: Interval::new(0.01, 0.6),
            ..spec.clone()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizationSpec {
            grid_points: 1,
            ..spec
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn three_intensity_pins_signal() {
        let spec = small_spec(8, Mode::ThreeIntensity);
        let opt = optimize_rate(&ChannelParams::standard(100.0), &spec).unwrap();
        let best = opt.best.unwrap();
        assert_eq!(best.params.mu_y, best.params.mu_z);
        assert!(best.rate > 0.0);
    }

    #[test]
    fn four_intensity_dominates() {
        let ch = ChannelParams::standard(150.0);
        let r3 = optimize_rate(&ch, &small_spec(6, Mode::ThreeIntensity))
            .unwrap()
            .rate();
        let r4 = optimize_rate(&ch, &small_spec(6, Mode::FourIntensity))
            .unwrap()
            .rate();
        assert!(r3 <= r4 + 1e-12, "{r3} > {r4}");
    }

    #[test]
    fn parallel_matches_sequential() {
        let ch = ChannelParams::standard(200.0);
        let spec = small_spec(4, Mode::FourIntensity);
        let a = optimize_rate(&ch, &spec.with_execution(Execution::Parallel)).unwrap();
        let b = optimize_rate(&ch, &spec.with_execution(Execution::Sequential)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scan_rejects_bad_lists() {
        let spec = small_spec(4, Mode::FourIntensity);
        let ch = ChannelParams::standard(0.0);
        assert!(scan_distances(&ch, &spec, &[]).is_err());
        assert!(scan_distances(&ch, &spec, &[100.0, 50.0]).is_err());
    }
}
