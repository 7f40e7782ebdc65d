//! Fidelities between the class states produced by discrete phase
//! randomization, and the trace-distance penalties derived from them.
//!
//! Decoy bounds only ever use `sqrt(1 - F^2)`. For nearby states `F` is
//! within a few ulps of one, so `1 - F^2` is never formed from `F`
//! directly; it comes from the Lagrange identity
//! `|u|^2 |v|^2 - |<u,v>|^2 = Σ_{i<j} |u_i v_j - u_j v_i|^2`,
//! which is a sum of non-negative terms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::photon::{
    check_intensity, class_probabilities, class_terms, class_terms_until, PhaseCount, SeriesPolicy,
};

/// Fidelity `F` of two pure states together with `1 - F^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    value: f64,
    deficit: f64,
}

impl Fidelity {
    pub const IDENTICAL: Fidelity = Fidelity {
        value: 1.0,
        deficit: 0.0,
    };

    pub fn value(&self) -> f64 {
        self.value
    }

    /// `1 - F^2`.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// `sqrt(1 - F^2)`, the trace-distance bound on any yield difference.
    pub fn trace_bound(&self) -> f64 {
        self.deficit.sqrt()
    }

    fn from_parts(overlap_sq: f64, norm_product: f64, lagrange: f64) -> Self {
        let deficit = (lagrange / norm_product).clamp(0.0, 1.0);
        if deficit == 0.0 {
            return Fidelity::IDENTICAL;
        }
        let value = (overlap_sq / norm_product).sqrt().clamp(0.0, 1.0);
        Fidelity { value, deficit }
    }
}

/// Which of the two virtual X-basis states the phase-matched pair is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XSign {
    /// `|χ_0⟩ = (|0λ_1⟩ + |λ_1 0⟩)/√2`
    Plus,
    /// `|χ_1⟩ = (|0λ_1⟩ - |λ_1 0⟩)/√2`
    Minus,
}

/// Fidelity of two vectors sharing an index set. `u_off` is the squared
/// norm of `u` outside that set; `v` is assumed to vanish outside it.
///
/// Both vectors are rescaled to unit norm first; high photon classes have
/// norms far below the smallest normal double and their products underflow.
fn overlap(u: &[Complex64], v: &[Complex64], u_off: f64) -> Result<Fidelity> {
    debug_assert_eq!(u.len(), v.len());
    let u_scale = max_modulus(u).max(u_off.sqrt());
    let v_scale = max_modulus(v);
    if u_scale == 0.0 || v_scale == 0.0 {
        return Err(Error::domain("fidelity of a zero-norm state is undefined"));
    }
    let u: Vec<Complex64> = u.iter().map(|c| c / u_scale).collect();
    let v: Vec<Complex64> = v.iter().map(|c| c / v_scale).collect();
    let u_off = u_off / (u_scale * u_scale);
    let u_norm = u.iter().map(|c| c.norm_sqr()).sum::<f64>() + u_off;
    let v_norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let inner: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
    let mut lagrange = u_off * v_norm;
    for i in 0..u.len() {
        for k in (i + 1)..u.len() {
            lagrange += (u[i] * v[k] - u[k] * v[i]).norm_sqr();
        }
    }
    Ok(Fidelity::from_parts(
        inner.norm_sqr(),
        u_norm * v_norm,
        lagrange,
    ))
}

fn max_modulus(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `exp(2πi r / N)`, exact at the real and imaginary axes.
fn root_of_unity(r: u32, n: u32) -> Complex64 {
    let r = r % n;
    if (4 * r).is_multiple_of(n) {
        return match 4 * r / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / n as f64)
}

/// Truncation used inside fidelities. Near `F = 1` the deficit is of the
/// order of the first neglected term ratio, so stopping at `rel_tol` would
/// zero out small but real penalties. The fourth power keeps every term the
/// deficit can resolve while still converging quickly.
fn fine(policy: &SeriesPolicy) -> SeriesPolicy {
    SeriesPolicy {
        rel_tol: policy.rel_tol.powi(4),
        ..*policy
    }
}

/// Two class series truncated to a common length.
fn paired_terms(
    a: f64,
    b: f64,
    n: PhaseCount,
    j: u32,
    policy: &SeriesPolicy,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let policy = &fine(policy);
    let ta = class_terms(a, n, j, policy)?;
    let tb = class_terms_until(b, n, j, policy, ta.len())?;
    let ta = if ta.len() < tb.len() {
        class_terms_until(a, n, j, policy, tb.len())?
    } else {
        ta
    };
    Ok((ta, tb))
}

fn amplitudes(terms: &[f64]) -> Vec<Complex64> {
    terms
        .iter()
        .map(|t| Complex64::new(t.sqrt(), 0.0))
        .collect()
}

/// Fidelity between the class-`j` states `|λ_j⟩` of intensities `mu_a` and `mu_b`.
pub fn fidelity_lambda(
    mu_a: f64,
    mu_b: f64,
    n: PhaseCount,
    j: u32,
    policy: &SeriesPolicy,
) -> Result<Fidelity> {
    check_intensity("mu_a", mu_a)?;
    check_intensity("mu_b", mu_b)?;
    n.check_class(j)?;
    if j > 0 && (mu_a == 0.0 || mu_b == 0.0) {
        return Err(Error::domain(format!(
            "class-{j} state of a vacuum source is undefined"
        )));
    }
    if mu_a == mu_b {
        return Ok(Fidelity::IDENTICAL);
    }
    let (ta, tb) = paired_terms(mu_a, mu_b, n, j, policy)?;
    overlap(&amplitudes(&ta), &amplitudes(&tb), 0.0)
}

/// Overlap of the class-0 state at intensity `x` with the vacuum.
fn vacuum_overlap(x: f64, n: PhaseCount, policy: &SeriesPolicy) -> Result<Fidelity> {
    let terms = class_terms(x, n, 0, &fine(policy))?;
    let excess: f64 = terms[1..].iter().sum();
    if excess == 0.0 {
        return Ok(Fidelity::IDENTICAL);
    }
    let norm = terms[0] + excess;
    Ok(Fidelity {
        value: (1.0 / norm).sqrt().clamp(0.0, 1.0),
        deficit: (excess / norm).clamp(0.0, 1.0),
    })
}

/// `F_0`: overlap of `|λ_0⟩` at intensity `mu_y` with the vacuum.
pub fn fidelity_f0(mu_y: f64, n: PhaseCount, policy: &SeriesPolicy) -> Result<Fidelity> {
    check_intensity("mu_y", mu_y)?;
    vacuum_overlap(mu_y, n, policy)
}

/// `F_1`: class-1 fidelity between the decoy `y` and signal `z` sources.
pub fn fidelity_f1(mu_y: f64, mu_z: f64, n: PhaseCount, policy: &SeriesPolicy) -> Result<Fidelity> {
    fidelity_lambda(mu_y, mu_z, n, 1, policy)
}

/// `F_00`: overlap of the phase-matched class-0 pair state with the vacuum pair.
pub fn fidelity_f00(mu_x: f64, n: PhaseCount, policy: &SeriesPolicy) -> Result<Fidelity> {
    check_intensity("mu_x", mu_x)?;
    vacuum_overlap(2.0 * mu_x, n, policy)
}

/// `F_11^±(q)`: fidelity between the class-1 pair state `|φ_1^q⟩` of two
/// `mu_x` pulses whose phases differ by `2πq/N`, and `|χ_0⟩` (plus) or
/// `|χ_1⟩` (minus) built from `|λ_1⟩` at `mu_z`.
///
/// Only the basis states `|0, n⟩` and `|n, 0⟩` are shared by both vectors;
/// the rest of `|φ_1^q⟩` enters through its norm.
pub fn fidelity_f11(
    mu_x: f64,
    mu_z: f64,
    n: PhaseCount,
    q: u32,
    sign: XSign,
    policy: &SeriesPolicy,
) -> Result<Fidelity> {
    check_intensity("mu_x", mu_x)?;
    check_intensity("mu_z", mu_z)?;
    if q >= n.get() {
        return Err(Error::domain(format!(
            "phase shift q = {q} out of range for N = {n}"
        )));
    }
    if mu_x == 0.0 || mu_z == 0.0 {
        return Err(Error::domain("F_11 requires mu_x > 0 and mu_z > 0"));
    }
    let (tx, tz) = paired_terms(mu_x, mu_z, n, 1, policy)?;
    let side = match sign {
        XSign::Plus => 1.0,
        XSign::Minus => -1.0,
    };
    let mut u = Vec::with_capacity(2 * tx.len());
    let mut v = Vec::with_capacity(2 * tx.len());
    let mut u_off = 0.0;
    for (k, (ax, az)) in tx.iter().zip(&tz).enumerate() {
        let photons = k as u32 * n.get() + 1;
        let phase = root_of_unity((q as u64 * photons as u64 % n.get() as u64) as u32, n.get());
        let a = ax.sqrt();
        let b = az.sqrt() * std::f64::consts::FRAC_1_SQRT_2;
        // |0, n⟩: Bob carries every photon and the relative phase
        u.push(phase * a);
        v.push(Complex64::new(b, 0.0));
        // |n, 0⟩
        u.push(Complex64::new(a, 0.0));
        v.push(Complex64::new(side * b, 0.0));
        // (2μ)^n/n! minus the two edge components 2 μ^n/n!
        if k > 0 && *ax > 0.0 {
            let full = (photons as f64 * std::f64::consts::LN_2 + ax.ln()).exp();
            u_off += (full - 2.0 * ax).max(0.0);
        }
    }
    overlap(&u, &v, u_off)
}

/// `Δ^U = Σ_j P_j(μ_x) sqrt(1 - (F_xy^j)^2)`.
pub fn delta_upper(mu_x: f64, mu_y: f64, n: PhaseCount, policy: &SeriesPolicy) -> Result<f64> {
    check_intensity("mu_x", mu_x)?;
    check_intensity("mu_y", mu_y)?;
    if mu_x > mu_y {
        return Err(Error::domain(format!(
            "delta_upper requires mu_x <= mu_y, got {mu_x} > {mu_y}"
        )));
    }
    if mu_x == mu_y {
        return Ok(0.0);
    }
    let px = class_probabilities(mu_x, n, policy)?;
    let mut total = 0.0;
    for (j, &weight) in px.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let f = fidelity_lambda(mu_x, mu_y, n, j as u32, policy)?;
        total += weight * f.trace_bound();
    }
    Ok(total)
}
