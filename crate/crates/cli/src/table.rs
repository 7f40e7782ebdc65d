//! CSV rows of key-rate results.

use std::fmt::Write as _;

use sns_core::optimize::{Evaluation, Mode};

/// Column order of every CSV file written by the tool.
pub const HEADER: [&str; 14] = [
    "L_km", "N", "mode", "mu_x", "mu_y", "mu_z", "epsilon", "s01_L", "s10_L", "eph_U", "S_z",
    "E_z", "R", "plob",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub length_km: f64,
    pub n: u32,
    pub mode: Mode,
    pub mu_x: f64,
    pub mu_y: f64,
    pub mu_z: f64,
    pub epsilon: f64,
    pub s01_l: f64,
    pub s10_l: f64,
    pub eph_u: f64,
    pub s_z: f64,
    pub e_z: f64,
    pub rate: f64,
    pub plob: f64,
}

impl CsvRow {
    pub fn new(length_km: f64, mode: Mode, e: &Evaluation, plob: f64) -> Self {
        let p = &e.params;
        CsvRow {
            length_km,
            n: p.n.get(),
            mode,
            mu_x: p.mu_x,
            mu_y: p.mu_y,
            mu_z: p.mu_z,
            epsilon: p.epsilon,
            s01_l: e.bounds.s01_l,
            s10_l: e.bounds.s10_l,
            eph_u: e.bounds.eph_u,
            s_z: e.observed.s_z,
            e_z: e.observed.e_z,
            rate: e.rate,
            plob,
        }
    }

    /// One line, 12 significant digits per number, no trailing newline.
    pub fn line(&self) -> String {
        let nums = [
            self.mu_x,
            self.mu_y,
            self.mu_z,
            self.epsilon,
            self.s01_l,
            self.s10_l,
            self.eph_u,
            self.s_z,
            self.e_z,
            self.rate,
            self.plob,
        ];
        let mut s = format!("{:.11e},{},{}", self.length_km, self.n, self.mode.label());
        for v in nums {
            write!(s, ",{v:.11e}").unwrap();
        }
        s
    }
}

/// Header plus rows, each line newline-terminated.
pub fn render(rows: &[CsvRow]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> CsvRow {
        CsvRow {
            length_km: 300.0,
            n: 6,
            mode: Mode::ThreeIntensity,
            mu_x: 0.001,
            mu_y: 0.25,
            mu_z: 0.25,
            epsilon: 0.05,
            s01_l: 3e-4,
            s10_l: 3e-4,
            eph_u: 0.5,
            s_z: 1.0 / 3.0,
            e_z: 0.0,
            rate: 2.5e-7,
            plob: f64::INFINITY,
        }
    }

    #[test]
    fn header_and_termination() {
        let text = render(&[row(), row()]);
        let lines: Vec<&str> = text.split_terminator('\n').collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "L_km,N,mode,mu_x,mu_y,mu_z,epsilon,s01_L,s10_L,eph_U,S_z,E_z,R,plob"
        );
        assert!(text.ends_with('\n'));
        assert_eq!(render(&[]), format!("{}\n", lines[0]));
    }

    #[test]
    fn twelve_significant_digits() {
        let line = row().line();
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), HEADER.len());
        assert_eq!(cols[0], "3.00000000000e2");
        assert_eq!(cols[1], "6");
        assert_eq!(cols[2], "3int");
        assert_eq!(cols[10], "3.33333333333e-1");
        assert_eq!(cols[11], "0.00000000000e0");
        assert_eq!(cols[13], "inf");
        let back: f64 = cols[10].parse().unwrap();
        assert!((back - 1.0 / 3.0).abs() < 1e-12);
    }
}
