use std::path::Path;
use std::process::{Command, Output};

fn sns(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sns"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const POINT: [&str; 8] = [
    "--mu-x",
    "0.001",
    "--mu-y",
    "0.002",
    "--mu-z",
    "0.1",
    "--epsilon",
    "0.05",
];

#[test]
fn rate_at_300_km_with_six_phases() {
    let mut args = vec!["rate", "--distance", "300", "--phases", "6"];
    args.extend(POINT);
    let o = sns(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], sns_cli::HEADER.join(","));
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols.len(), 14);
    assert_eq!(cols[1], "6");
    let r: f64 = cols[12].parse().unwrap();
    assert!(r > 0.0);
    assert!(stderr(&o).contains("eph_U"));
}

#[test]
fn decoys_out_of_order_exit_2() {
    let o = sns(&[
        "rate",
        "--distance",
        "100",
        "--mu-x",
        "0.2",
        "--mu-y",
        "0.1",
        "--mu-z",
        "0.3",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mu_x < mu_y"), "{}", stderr(&o));
}

#[test]
fn ratio_condition_violation_exit_3() {
    let o = sns(&[
        "rate",
        "--distance",
        "50",
        "--phases",
        "4",
        "--mu-x",
        "3",
        "--mu-y",
        "5",
        "--mu-z",
        "0.3",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("ratio condition"));
}

#[test]
fn missing_rate_parameters_exit_2() {
    let o = sns(&["rate", "--distance", "100"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mu_x"));
}

#[test]
fn empty_distance_list_exit_2() {
    assert_eq!(code(&sns(&["scan", "--distance"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "distances = []\n").unwrap();
    let o = sns(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("distances"));
}

#[test]
fn bad_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "p_dark = 1e-8\n").unwrap();
    assert_eq!(code(&sns(&["scan", "--config", cfg.to_str().unwrap()])), 2);
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        code(&sns(&["scan", "--config", missing.to_str().unwrap()])),
        4
    );
    assert_eq!(code(&sns(&["scan", "--mode", "5int"])), 2);
}

#[test]
fn unwritable_output_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no/such/dir/out.csv");
    let o = sns(&[
        "optimize",
        "--distance",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

fn scan_to(path: &Path, cfg: &Path) {
    let o = sns(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn scan_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    std::fs::write(
        &cfg,
        "phases = [4, 6]\nmodes = [\"3int\", \"4int\"]\ndistances = [0, 100, 200]\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    scan_to(&a, &cfg);
    scan_to(&b, &cfg);
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    assert!(text.ends_with('\n'));
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    // N outermost, then mode, then distance
    assert_eq!((rows[0][1], rows[0][2]), ("4", "3int"));
    assert_eq!((rows[3][1], rows[3][2]), ("4", "4int"));
    assert_eq!((rows[6][1], rows[6][2]), ("6", "3int"));
    for r in &rows {
        let rate: f64 = r[12].parse().unwrap();
        let eph: f64 = r[9].parse().unwrap();
        assert!(rate >= 0.0);
        assert!((0.0..=0.5).contains(&eph));
        // three-intensity rows share one intensity between decoy and signal
        if r[2] == "3int" {
            assert_eq!(r[4], r[5]);
        }
    }
}

#[test]
fn plob_column_follows_flag() {
    let plob_at = |extra: &[&str]| -> f64 {
        let mut args = vec!["rate", "--distance", "100"];
        args.extend(POINT);
        args.extend(extra);
        let o = sns(&args);
        let text = String::from_utf8(o.stdout).unwrap();
        text.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(13)
            .unwrap()
            .parse()
            .unwrap()
    };
    let fiber = plob_at(&[]);
    let with_det = plob_at(&["--plob-include-detector"]);
    assert!((fiber - (-(1.0f64 - 0.01).log2())).abs() < 1e-12);
    assert!((with_det - (-(1.0f64 - 0.003).log2())).abs() < 1e-12);
}

#[test]
fn verify_small_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("verify.toml");
    std::fs::write(
        &cfg,
        "verify_points = [[0.01, 0.1, 0.3, 0.1]]\nfock_cutoff = 20\n",
    )
    .unwrap();
    let o = sns(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--distance",
        "100",
        "--phases",
        "8",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.contains("pass"));
}
