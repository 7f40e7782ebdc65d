//! Modular photon-number classes of discretely phase-randomized coherent states.
//!
//! Averaging a coherent state over `N` equally spaced phases leaves a
//! mixture of `N` orthogonal states, one per residue class `n ≡ j (mod N)`
//! of the photon number. Everything here reduces to the class series
//! `Σ_k x^(kN+j) / (kN+j)!`, evaluated term by term with a relative
//! truncation rule.

use crate::error::{Error, Result};

/// Number of discrete phase values used by each source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseCount(u32);

impl PhaseCount {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "phase count must be an even integer >= 2, got {n}"
            )));
        }
        Ok(PhaseCount(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `N / 2`, the shift that maps a phase onto its antipode.
    pub fn half(self) -> u32 {
        self.0 / 2
    }

    pub(crate) fn check_class(self, j: u32) -> Result<()> {
        if j >= self.0 {
            return Err(Error::domain(format!(
                "class index {j} out of range for N = {}",
                self.0
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for PhaseCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Truncation rule for the infinite class series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPolicy {
    pub(crate) rel_tol: f64,
    pub(crate) k_max: u32,
}

impl SeriesPolicy {
    pub const DEFAULT_REL_TOL: f64 = 1e-16;
    pub const DEFAULT_K_MAX: u32 = 64;

    pub fn new(rel_tol: f64, k_max: u32) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-10) {
            return Err(Error::domain(format!(
                "series rel_tol must lie in (0, 1e-10], got {rel_tol:e}"
            )));
        }
        if k_max < 10 {
            return Err(Error::domain(format!(
                "series k_max must be at least 10, got {k_max}"
            )));
        }
        Ok(SeriesPolicy { rel_tol, k_max })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy {
            rel_tol: Self::DEFAULT_REL_TOL,
            k_max: Self::DEFAULT_K_MAX,
        }
    }
}

pub(crate) fn check_intensity(name: &str, mu: f64) -> Result<()> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::domain(format!(
            "{name} must be finite and non-negative, got {mu}"
        )));
    }
    Ok(())
}

/// `ln n!`, exact summation for small `n`, Stirling series beyond.
pub(crate) fn ln_factorial(n: u32) -> f64 {
    if n <= 20 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `x^n / n!` for a single index, log-space above `n = 20`.
fn power_over_factorial(x: f64, n: u32) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    if n <= 20 {
        (1..=n).fold(1.0, |acc, m| acc * x / m as f64)
    } else {
        (n as f64 * x.ln() - ln_factorial(n)).exp()
    }
}

/// Terms `x^(kN+j) / (kN+j)!` for `k = 0, 1, ...` up to truncation.
///
/// The returned vector has at least one element. Truncation stops once the
/// next term is below `rel_tol` times the running sum (or is exactly zero);
/// reaching `k_max` without meeting that rule is a numeric error.
pub fn class_terms(x: f64, n: PhaseCount, j: u32, policy: &SeriesPolicy) -> Result<Vec<f64>> {
    class_terms_until(x, n, j, policy, 0)
}

/// Like [`class_terms`] but never returns fewer than `min_len` terms.
pub(crate) fn class_terms_until(
    x: f64,
    n: PhaseCount,
    j: u32,
    policy: &SeriesPolicy,
    min_len: usize,
) -> Result<Vec<f64>> {
    n.check_class(j)?;
    let step = n.get();
    let mut term = power_over_factorial(x, j);
    let mut terms = vec![term];
    let mut sum = term;
    let mut index = j;
    for _ in 1..=policy.k_max {
        term *= (1..=step).fold(1.0, |acc, m| acc * x / (index + m) as f64);
        index += step;
        let converged = term == 0.0 || term < policy.rel_tol * sum;
        if converged && terms.len() >= min_len {
            return Ok(terms);
        }
        terms.push(term);
        sum += term;
    }
    Err(Error::Numeric(format!(
        "class series (x = {x}, N = {step}, j = {j}) did not converge within k_max = {}",
        policy.k_max
    )))
}

/// Unnormalized class series `Σ_k x^(kN+j) / (kN+j)!`.
pub fn class_sum(x: f64, n: PhaseCount, j: u32, policy: &SeriesPolicy) -> Result<f64> {
    Ok(class_terms(x, n, j, policy)?.iter().sum())
}

/// Probability `P_j(μ)` that a discretely randomized coherent state of
/// intensity `mu` falls in photon class `j`.
pub fn p_j(mu: f64, n: PhaseCount, j: u32, policy: &SeriesPolicy) -> Result<f64> {
    check_intensity("intensity", mu)?;
    let p = (-mu).exp() * class_sum(mu, n, j, policy)?;
    Ok(p.clamp(0.0, 1.0))
}

/// Class probability of a phase-matched pulse pair, equal to `P_j(2μ_x)`.
pub fn px_j(mu_x: f64, n: PhaseCount, j: u32, policy: &SeriesPolicy) -> Result<f64> {
    check_intensity("mu_x", mu_x)?;
    p_j(2.0 * mu_x, n, j, policy)
}

/// All class probabilities `P_0(μ), ..., P_{N-1}(μ)`.
pub fn class_probabilities(mu: f64, n: PhaseCount, policy: &SeriesPolicy) -> Result<Vec<f64>> {
    (0..n.get()).map(|j| p_j(mu, n, j, policy)).collect()
}

/// True when
/// `P_1(μx)/P_1(μy) ≥ P_2(μx)/P_2(μy) ≥ P_j(μx)/P_j(μy)` for `j = 3..N-1`,
/// the condition under which the multi-photon remainder of the decoy
/// equations is non-positive.
///
/// Ratios are compared by cross-multiplication so that underflowing
/// high-class probabilities compare as equal rather than as NaN.
pub fn check_ratio_condition(
    mu_x: f64,
    mu_y: f64,
    n: PhaseCount,
    policy: &SeriesPolicy,
) -> Result<bool> {
    check_intensity("mu_x", mu_x)?;
    check_intensity("mu_y", mu_y)?;
    let px = class_probabilities(mu_x, n, policy)?;
    let py = class_probabilities(mu_y, n, policy)?;
    // a/b >= c/d  <=>  a d >= c b  for positive b, d
    let ratio_ge = |a: usize, c: usize| px[a] * py[c] >= px[c] * py[a];
    if n.get() > 2 && !ratio_ge(1, 2) {
        return Ok(false);
    }
    Ok((3..n.get() as usize).all(|j| ratio_ge(2, j)))
}
