//! Flat TOML run configuration.
//!
//! Every key is optional; missing keys take the defaults below, which
//! reproduce the standard experimental parameter set. Unknown keys are
//! rejected so that typos do not silently fall back to a default.
//!
//! ```toml
//! p_d = 1e-8
//! e_d = 0.03
//! eta_d = 0.30
//! alpha = 0.2
//! f = 1.1
//! phases = [4, 6, 8, 10, 12]
//! modes = ["4int"]
//! distances = [0, 50, 100, 150, 200, 250, 300, 350, 400]
//! plob_include_detector = false
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sns_core::channel::{ChannelParams, DEFAULT_N_MAX};
use sns_core::decoy::{ProtocolParams, DEFAULT_LP_BUDGET};
use sns_core::optimize::{Interval, Mode, OptimizationSpec};
use sns_core::photon::{PhaseCount, SeriesPolicy};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub p_d: f64,
    pub e_d: f64,
    pub eta_d: f64,
    /// Fiber attenuation in dB/km.
    pub alpha: f64,
    /// Error-correction inefficiency.
    pub f: f64,

    pub phases: Vec<u32>,
    pub modes: Vec<String>,
    /// Total Alice-Bob lengths in km, ascending.
    pub distances: Vec<f64>,
    pub plob_include_detector: bool,
    pub out: Option<PathBuf>,

    /// Fixed source settings for `rate`.
    pub mu_x: Option<f64>,
    pub mu_y: Option<f64>,
    pub mu_z: Option<f64>,
    pub epsilon: Option<f64>,

    pub mu_x_range: [f64; 2],
    pub mu_y_range: [f64; 2],
    pub mu_z_range: [f64; 2],
    pub epsilon_range: [f64; 2],
    pub grid_points: usize,
    pub starts: usize,
    pub refine_depth: u32,
    pub opt_rel_tol: f64,
    /// Evaluate grid points and distances on a single thread.
    pub sequential: bool,

    pub series_rel_tol: f64,
    pub series_k_max: u32,

    pub verify_distances: Vec<f64>,
    pub verify_phases: Vec<u32>,
    /// `[mu_x, mu_y, mu_z, epsilon]` settings checked at each verify grid point.
    pub verify_points: Vec<[f64; 4]>,
    pub fock_cutoff: usize,
    pub lp_budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opt = OptimizationSpec::new(PhaseCount::new(12).unwrap(), Mode::FourIntensity);
        let range = |i: Interval| [i.lo, i.hi];
        RunConfig {
            p_d: 1e-8,
            e_d: 0.03,
            eta_d: 0.30,
            alpha: 0.2,
            f: 1.1,
            phases: vec![12],
            modes: vec![Mode::FourIntensity.label().to_string()],
            distances: (0..=8).map(|i| 50.0 * i as f64).collect(),
            plob_include_detector: false,
            out: None,
            mu_x: None,
            mu_y: None,
            mu_z: None,
            epsilon: None,
            mu_x_range: range(opt.mu_x),
            mu_y_range: range(opt.mu_y),
            mu_z_range: range(opt.mu_z),
            epsilon_range: range(opt.epsilon),
            grid_points: opt.grid_points,
            starts: opt.starts,
            refine_depth: opt.refine_depth,
            opt_rel_tol: opt.rel_tol,
            sequential: false,
            series_rel_tol: SeriesPolicy::DEFAULT_REL_TOL,
            series_k_max: SeriesPolicy::DEFAULT_K_MAX,
            verify_distances: vec![50.0, 100.0, 200.0],
            verify_phases: vec![4, 8, 12],
            verify_points: vec![
                [0.001, 0.002, 0.4, 0.05],
                [0.01, 0.1, 0.3, 0.1],
                [0.05, 0.3, 0.6, 0.2],
            ],
            fock_cutoff: DEFAULT_N_MAX,
            lp_budget: DEFAULT_LP_BUDGET,
        }
    }
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub distances: Option<Vec<f64>>,
    pub phases: Option<u32>,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
    pub plob_include_detector: bool,
    pub mu_x: Option<f64>,
    pub mu_y: Option<f64>,
    pub mu_z: Option<f64>,
    pub epsilon: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies flag overrides. `--distance` and `--phases` replace the verify
    /// grid as well, since each subcommand reads only one of the two lists.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.distances {
            self.distances = d.clone();
            self.verify_distances = d.clone();
        }
        if let Some(n) = o.phases {
            self.phases = vec![n];
            self.verify_phases = vec![n];
        }
        if let Some(m) = &o.mode {
            self.modes = vec![m.clone()];
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        self.plob_include_detector |= o.plob_include_detector;
        self.mu_x = o.mu_x.or(self.mu_x);
        self.mu_y = o.mu_y.or(self.mu_y);
        self.mu_z = o.mu_z.or(self.mu_z);
        self.epsilon = o.epsilon.or(self.epsilon);
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            length_km: 0.0,
            alpha_db_per_km: self.alpha,
            eta_d: self.eta_d,
            p_d: self.p_d,
            e_d: self.e_d,
        }
    }

    pub fn policy(&self) -> Result<SeriesPolicy, CliError> {
        Ok(SeriesPolicy::new(self.series_rel_tol, self.series_k_max)?)
    }

    pub fn phase_counts(&self) -> Result<Vec<PhaseCount>, CliError> {
        non_empty("phases", &self.phases)?;
        Ok(self
            .phases
            .iter()
            .map(|&n| PhaseCount::new(n))
            .collect::<Result<_, _>>()?)
    }

    pub fn mode_list(&self) -> Result<Vec<Mode>, CliError> {
        non_empty("modes", &self.modes)?;
        Ok(self
            .modes
            .iter()
            .map(|m| Mode::parse(m))
            .collect::<Result<_, _>>()?)
    }

    pub fn distance_list(&self) -> Result<&[f64], CliError> {
        check_distances("distances", &self.distances)?;
        Ok(&self.distances)
    }

    pub fn spec(&self, n: PhaseCount, mode: Mode) -> Result<OptimizationSpec, CliError> {
        let iv = |[lo, hi]: [f64; 2]| Interval::new(lo, hi);
        let spec = OptimizationSpec {
            f: self.f,
            mu_x: iv(self.mu_x_range),
            mu_y: iv(self.mu_y_range),
            mu_z: iv(self.mu_z_range),
            epsilon: iv(self.epsilon_range),
            grid_points: self.grid_points,
            starts: self.starts,
            refine_depth: self.refine_depth,
            rel_tol: self.opt_rel_tol,
            policy: self.policy()?,
            execution: if self.sequential {
                sns_core::Execution::Sequential
            } else {
                sns_core::Execution::Parallel
            },
            ..OptimizationSpec::new(n, mode)
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Fixed source settings for a single-point evaluation.
    pub fn fixed_params(&self, n: PhaseCount) -> Result<ProtocolParams, CliError> {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| CliError::Validation(format!("{name} is required for this command")))
        };
        let (mu_x, mu_y) = (need("mu_x", self.mu_x)?, need("mu_y", self.mu_y)?);
        if !(mu_x < mu_y) {
            return Err(CliError::Validation(format!(
                "invariant mu_x < mu_y violated: mu_x = {mu_x}, mu_y = {mu_y}"
            )));
        }
        Ok(ProtocolParams::new(
            n,
            mu_x,
            mu_y,
            need("mu_z", self.mu_z)?,
            need("epsilon", self.epsilon)?,
            self.f,
        )?)
    }

    /// Checks everything that does not depend on the subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        self.channel().validate()?;
        if !(self.f.is_finite() && self.f >= 1.0) {
            return Err(CliError::Validation(format!(
                "f must be >= 1, got {}",
                self.f
            )));
        }
        self.policy()?;
        self.phase_counts()?;
        self.mode_list()?;
        Ok(())
    }
}

fn non_empty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Validation(format!("{name} must not be empty")));
    }
    Ok(())
}

pub(crate) fn check_distances(name: &str, d: &[f64]) -> Result<(), CliError> {
    non_empty(name, d)?;
    if let Some(bad) = d.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(CliError::Validation(format!(
            "{name} must be finite and >= 0, got {bad}"
        )));
    }
    if d.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Validation(format!(
            "{name} must be sorted ascending"
        )));
    }
    Ok(())
}
