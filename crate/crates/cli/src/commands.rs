//! Subcommand pipelines.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use sns_core::channel::{plob_bound, FockOracle};
use sns_core::decoy::ProtocolParams;
use sns_core::optimize::{evaluate, optimize_rate, scan_distances, Evaluation, Mode};
use sns_core::verify::{verify_point, PointReport};
use sns_core::Execution;

use crate::config::{check_distances, RunConfig};
use crate::error::CliError;
use crate::table::{render, CsvRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rate,
    Scan,
    Optimize,
    Verify,
}

fn single<'a, T>(name: &str, v: &'a [T]) -> Result<&'a T, CliError> {
    match v {
        [x] => Ok(x),
        _ => Err(CliError::Validation(format!(
            "this command takes exactly one {name}, got {}",
            v.len()
        ))),
    }
}

fn plob(cfg: &RunConfig, length_km: f64) -> f64 {
    plob_bound(
        &cfg.channel().with_length(length_km),
        cfg.plob_include_detector,
    )
}

fn summary(title: &str, length_km: f64, mode: Mode, e: &Evaluation, plob: f64) -> String {
    let p = &e.params;
    let b = &e.bounds;
    let mut s = format!("{title}\n");
    let mut kv = |k: &str, v: String| writeln!(s, "  {k:<8} {v}").unwrap();
    kv("L", format!("{length_km} km"));
    kv("N", p.n.to_string());
    kv("mode", mode.label().to_string());
    kv("mu_x", format!("{:.6e}", p.mu_x));
    kv("mu_y", format!("{:.6e}", p.mu_y));
    kv("mu_z", format!("{:.6e}", p.mu_z));
    kv("epsilon", format!("{:.6e}", p.epsilon));
    kv("s1_L", format!("{:.6e}", b.s1_l));
    kv("eph_U", format!("{:.6e}", b.eph_u));
    kv("S_z", format!("{:.6e}", e.observed.s_z));
    kv("E_z", format!("{:.6e}", e.observed.e_z));
    kv("R", format!("{:.6e}", e.rate));
    kv("plob", format!("{plob:.6e}"));
    s
}

/// Key rate at the configured fixed source settings.
pub fn cmd_rate(cfg: &RunConfig) -> Result<(CsvRow, String), CliError> {
    cfg.validate()?;
    let length = *single("distance", cfg.distance_list()?)?;
    let n = *single("phase count", &cfg.phase_counts()?)?;
    let mode = *single("mode", &cfg.mode_list()?)?;
    let p = cfg.fixed_params(n)?;
    if mode == Mode::ThreeIntensity && p.mu_y != p.mu_z {
        return Err(CliError::Validation(format!(
            "invariant mu_y = mu_z of the three-intensity mode violated: mu_y = {}, mu_z = {}",
            p.mu_y, p.mu_z
        )));
    }
    let e = evaluate(&p, &cfg.channel().with_length(length), &cfg.policy()?)?;
    let pl = plob(cfg, length);
    Ok((
        CsvRow::new(length, mode, &e, pl),
        summary("rate", length, mode, &e, pl),
    ))
}

/// Optimized key rate at one distance.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<(CsvRow, String), CliError> {
    cfg.validate()?;
    let length = *single("distance", cfg.distance_list()?)?;
    let n = *single("phase count", &cfg.phase_counts()?)?;
    let mode = *single("mode", &cfg.mode_list()?)?;
    let opt = optimize_rate(&cfg.channel().with_length(length), &cfg.spec(n, mode)?)?;
    let e = opt
        .best
        .as_ref()
        .ok_or_else(|| CliError::Infeasible(opt.diagnostic()))?;
    let pl = plob(cfg, length);
    let mut text = summary("optimum", length, mode, e, pl);
    writeln!(text, "  {}", opt.diagnostic()).unwrap();
    Ok((CsvRow::new(length, mode, e, pl), text))
}

/// Optimized rows for every (N, mode, L), in config order.
pub fn cmd_scan(cfg: &RunConfig) -> Result<Vec<CsvRow>, CliError> {
    cfg.validate()?;
    let lengths = cfg.distance_list()?;
    let template = cfg.channel();
    let mut rows = Vec::new();
    for n in cfg.phase_counts()? {
        for mode in cfg.mode_list()? {
            let scan = scan_distances(&template, &cfg.spec(n, mode)?, lengths)?;
            for rec in &scan.records {
                let e = rec.optimum.best.as_ref().ok_or_else(|| {
                    CliError::Infeasible(format!(
                        "N = {n}, {mode}, L = {} km: {}",
                        rec.length_km,
                        rec.optimum.diagnostic()
                    ))
                })?;
                let pl = if cfg.plob_include_detector {
                    rec.plob_with_detector
                } else {
                    rec.plob
                };
                rows.push(CsvRow::new(rec.length_km, mode, e, pl));
            }
        }
    }
    Ok(rows)
}

/// Oracle comparison over the verify grid. Violations are reported in the
/// returned reports, not as an error.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Vec<PointReport>, CliError> {
    cfg.validate()?;
    check_distances("verify_distances", &cfg.verify_distances)?;
    if cfg.verify_points.is_empty() {
        return Err(CliError::Validation(
            "verify_points must not be empty".into(),
        ));
    }
    if cfg.fock_cutoff < 4 {
        return Err(CliError::Validation(
            "fock_cutoff must be at least 4".into(),
        ));
    }
    let policy = cfg.policy()?;
    let mut grid = Vec::new();
    for &l in &cfg.verify_distances {
        for &n in &cfg.verify_phases {
            let n = sns_core::photon::PhaseCount::new(n)?;
            for &[mu_x, mu_y, mu_z, eps] in &cfg.verify_points {
                grid.push((l, ProtocolParams::new(n, mu_x, mu_y, mu_z, eps, cfg.f)?));
            }
        }
    }
    let exec = if cfg.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let reports = exec.map(&grid, |(l, p)| {
        let oracle = FockOracle::new(cfg.channel().with_length(*l)).with_cutoff(cfg.fock_cutoff);
        verify_point(p, &oracle, &policy, cfg.lp_budget)
    });
    Ok(reports.into_iter().collect::<Result<_, _>>()?)
}

/// Text table of verify results, one line per grid point.
pub fn verify_table(reports: &[PointReport]) -> String {
    let mut s = format!(
        "{:>8} {:>3} {:>8} {:>8} {:>8} {:>8} {:>12} {:>12}  {}\n",
        "L_km", "N", "mu_x", "mu_y", "mu_z", "epsilon", "eph_U", "eph", "status"
    );
    for r in reports {
        let p = &r.params;
        let status = if r.passed() {
            "pass".to_string()
        } else {
            let names: Vec<&str> = r.violations().map(|c| c.name).collect();
            format!("FAIL ({})", names.join("; "))
        };
        writeln!(
            s,
            "{:>8} {:>3} {:>8} {:>8} {:>8} {:>8} {:>12.5e} {:>12.5e}  {status}",
            r.length_km, p.n, p.mu_x, p.mu_y, p.mu_z, p.epsilon, r.bounds.eph_u, r.truth.eph
        )
        .unwrap();
    }
    s
}

fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => write_file(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Runs a subcommand, sending data to `--out` (or `stdout`) and the
/// human-readable summary to `stderr`.
pub fn run(
    cmd: Command,
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let note = |stderr: &mut dyn Write, text: &str| {
        // a closed stderr is not worth failing the run over
        let _ = stderr.write_all(text.as_bytes());
    };
    match cmd {
        Command::Rate | Command::Optimize => {
            let (row, text) = if cmd == Command::Rate {
                cmd_rate(cfg)?
            } else {
                cmd_optimize(cfg)?
            };
            emit(cfg, &render(&[row]), stdout)?;
            note(stderr, &text);
        }
        Command::Scan => {
            let rows = cmd_scan(cfg)?;
            emit(cfg, &render(&rows), stdout)?;
            let above = rows.iter().filter(|r| r.rate > r.plob).count();
            note(
                stderr,
                &format!(
                    "scan: {} rows, {above} above the repeaterless bound\n",
                    rows.len()
                ),
            );
        }
        Command::Verify => {
            let reports = cmd_verify(cfg)?;
            emit(cfg, &verify_table(&reports), stdout)?;
            if let Some(bad) = reports.iter().find(|r| !r.passed()) {
                let p = &bad.params;
                let names: Vec<String> = bad
                    .violations()
                    .map(|c| {
                        format!(
                            "{} (bound {:e}, reference {:e})",
                            c.name, c.bound, c.reference
                        )
                    })
                    .collect();
                return Err(CliError::Soundness(format!(
                    "L = {} km, N = {}, mu = ({}, {}, {}), epsilon = {}: {}",
                    bad.length_km,
                    p.n,
                    p.mu_x,
                    p.mu_y,
                    p.mu_z,
                    p.epsilon,
                    names.join(", ")
                )));
            }
            note(
                stderr,
                &format!("verify: {} points, all sound\n", reports.len()),
            );
        }
    }
    Ok(())
}
