use em_shield::design::{design_reverse_alignment, optimal_residual_bound};
use em_shield::harness::{angle_sweep, radar_count_sweep, Algorithm, Strategy};
use em_shield::propagation::{combine, synthesize};
use em_shield::scenario::{validate_scenario, ReflectionMode};
use em_shield::{Scenario, Scenario32};
use proptest::prelude::*;

#[test]
fn f32_path_tracks_f64() {
    let s64 = validate_scenario(&Scenario::default()).unwrap();
    let s32 = validate_scenario(&Scenario32::default()).unwrap();
    let (c64, c32) = (synthesize(&s64).unwrap(), synthesize(&s32).unwrap());
    // f32 resolves a 2 km path to ~0.1 mm, a few hundredths of a radian of
    // round-trip phase per surface point.
    let rel = ((c32.g[0].norm() as f64) - c64.g[0].norm()).abs() / c64.g[0].norm();
    assert!(rel < 2e-2, "echo magnitude differs by {rel}");

    let r = design_reverse_alignment(c32.g[0], &c32.cascade(0), ReflectionMode::UnitModulus).unwrap();
    let residual = combine(c32.g[0], &c32.cascade(0), &r.pattern.coefficients()).norm();
    let bound = optimal_residual_bound(c32.g[0], &c32.cascade(0));
    let scale = c32.g[0].norm() + c32.cascade(0).iter().map(|h| h.norm()).sum::<f32>();
    assert!(residual - bound <= 1e-5 * scale, "residual {residual} bound {bound}");
}

#[test]
fn scenario_json_round_trip() {
    let s = validate_scenario(&Scenario::default()).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let back: Scenario = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
    assert!(serde_json::from_str::<Scenario>(&text.replacen('{', "{\"extra\":1,", 1)).is_err());
}

#[test]
fn sweeps_reproduce() {
    let s = Scenario::default();
    let strategy = Strategy::<f64>::default();
    let grid = [-20.0, 0.0, 20.0];
    let a = angle_sweep(&s, &strategy, &grid).unwrap();
    assert_eq!(a.to_csv(), angle_sweep(&s, &strategy, &grid).unwrap().to_csv());

    let mmse = Strategy {
        algorithm: Algorithm::Mmse,
        ..Strategy::default()
    };
    let b = radar_count_sweep(&s, &[1, 2], &mmse, 3).unwrap();
    let c = radar_count_sweep(&s, &[1, 2], &mmse, 3).unwrap();
    assert_eq!(b.to_json().unwrap(), c.to_json().unwrap());
    let other = radar_count_sweep(&Scenario { seed: 1, ..s }, &[1, 2], &mmse, 3).unwrap();
    assert_ne!(b.to_csv(), other.to_csv());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stealth_never_adds_power(seed in any::<u64>(), bearing in -60.0f64..60.0) {
        let base = Scenario::default();
        let radar_pos = base.bearing_position(bearing, 2000.0);
        let s = validate_scenario(&Scenario {
            seed,
            radars: vec![em_shield::scenario::Radar::at(radar_pos)],
            ..base
        }).unwrap();
        let ch = synthesize(&s).unwrap();
        let h = ch.cascade(0);
        let r = design_reverse_alignment(ch.g[0], &h, ReflectionMode::UnitModulus).unwrap();
        let residual = combine(ch.g[0], &h, &r.pattern.coefficients()).norm();
        prop_assert!(residual <= ch.g[0].norm() * (1.0 + 1e-12));
        prop_assert!(residual >= optimal_residual_bound(ch.g[0], &h) * (1.0 - 1e-9));
    }
}
