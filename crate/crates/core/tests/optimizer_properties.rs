use sns_core::channel::ChannelParams;
use sns_core::optimize::{optimize_rate, scan_distances, Mode, OptimizationSpec};
use sns_core::photon::{check_ratio_condition, PhaseCount, SeriesPolicy};
use sns_core::Execution;

fn spec(n: u32, mode: Mode) -> OptimizationSpec {
    OptimizationSpec::new(PhaseCount::new(n).unwrap(), mode)
}

#[test]
fn repeated_runs_agree_bitwise() {
    let s = spec(8, Mode::FourIntensity);
    let ch = ChannelParams::standard(150.0);
    let a = optimize_rate(&ch, &s).unwrap().best.unwrap();
    let b = optimize_rate(&ch, &s).unwrap().best.unwrap();
    let c = optimize_rate(&ch, &s.with_execution(Execution::Sequential))
        .unwrap()
        .best
        .unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn rate_falls_with_distance() {
    let lengths: Vec<f64> = (0..=8).map(|i| 50.0 * i as f64).collect();
    let scan = scan_distances(
        &ChannelParams::standard(0.0),
        &spec(12, Mode::FourIntensity),
        &lengths,
    )
    .unwrap();
    for w in scan.records.windows(2) {
        assert!(
            w[1].rate <= w[0].rate * (1.0 + 1e-6),
            "{} km: {} -> {} km: {}",
            w[0].length_km,
            w[0].rate,
            w[1].length_km,
            w[1].rate
        );
    }
    assert!(scan.records[0].rate > 1e-3);
}

#[test]
fn three_intensity_never_beats_four() {
    for n in [4, 12] {
        for l in [0.0, 100.0, 250.0] {
            let ch = ChannelParams::standard(l);
            let r4 = optimize_rate(&ch, &spec(n, Mode::FourIntensity))
                .unwrap()
                .rate();
            let r3 = optimize_rate(&ch, &spec(n, Mode::ThreeIntensity))
                .unwrap()
                .rate();
            assert!(r3 <= r4 + 1e-9, "N={n} L={l}: {r3} > {r4}");
        }
    }
}

#[test]
fn optimum_respects_constraints() {
    let pol = SeriesPolicy::default();
    for n in [4, 6, 12] {
        let s = spec(n, Mode::FourIntensity);
        let best = optimize_rate(&ChannelParams::standard(200.0), &s)
            .unwrap()
            .best
            .unwrap();
        let p = best.params;
        assert!(p.mu_x < p.mu_y);
        assert!(check_ratio_condition(p.mu_x, p.mu_y, s.n, &pol).unwrap());
        assert!(p.mu_x >= s.mu_x.lo && p.mu_x <= s.mu_x.hi);
        assert!(p.mu_y >= s.mu_y.lo && p.mu_y <= s.mu_y.hi);
        assert!(p.mu_z >= s.mu_z.lo && p.mu_z <= s.mu_z.hi);
        assert!(p.epsilon >= s.epsilon.lo && p.epsilon <= s.epsilon.hi);
    }
}

#[test]
fn more_phases_help() {
    let ch = ChannelParams::standard(200.0);
    let rates: Vec<f64> = [4, 6, 8, 12]
        .iter()
        .map(|&n| {
            optimize_rate(&ch, &spec(n, Mode::FourIntensity))
                .unwrap()
                .rate()
        })
        .collect();
    for w in rates.windows(2) {
        assert!(w[1] >= w[0] * (1.0 - 1e-3), "{rates:?}");
    }
}
