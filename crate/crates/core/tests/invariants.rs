use proptest::prelude::*;

use rbslipt::emit::to_csv;
use rbslipt::sweep::{evaluate_point, Point};
use rbslipt::power::DriveMode;
use rbslipt::{run_sweep, ModeCache, SweepSpec, SystemConfig};

fn small_config() -> SystemConfig {
    let mut c = SystemConfig::default();
    c.algorithm.samples = 64;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn link_outputs_stay_in_range(
        distance in 0.5f64..8.0,
        theta in 0.0f64..20.0,
        p_in in 0.0f64..400.0,
        mu in 0.0f64..=1.0,
    ) {
        let point = Point { distance, theta_deg: theta, drive: DriveMode::Power(p_in), mu };
        let m = evaluate_point(&small_config(), &point, &ModeCache::in_memory()).unwrap();
        if !m.mode.closed {
            prop_assert!(m.mode.v1 > 0.0 && m.mode.v1 <= 1.0);
            prop_assert!(m.mode.v2 > 0.0 && m.mode.v2 <= 1.0);
        }
        prop_assert!(m.mode.overlap_efficiency <= 1.0);
        prop_assert!(m.budget.p_out >= 0.0);
        prop_assert!(m.budget.p_out <= m.budget.p_avail);
        prop_assert!(m.p_pv_out() >= 0.0 && m.p_pv_out() <= mu * m.p_out() + 1e-12);
        prop_assert!(m.rate() >= 0.0);
        if m.below_threshold() {
            prop_assert_eq!(m.p_out(), 0.0);
            prop_assert_eq!(m.gamma, 0.0);
            prop_assert_eq!(m.rate(), 0.0);
        }
    }
}

#[test]
fn sweep_rows_follow_grid_order() {
    let spec: SweepSpec = "L_m=3,1,2;theta_deg=5,0".parse().unwrap();
    let rows = run_sweep(&small_config(), &spec, &ModeCache::in_memory(), 2).unwrap();
    let order: Vec<(f64, f64)> = rows.iter().map(|r| (r.point.distance, r.point.theta_deg)).collect();
    assert_eq!(
        order,
        [(3.0, 5.0), (3.0, 0.0), (1.0, 5.0), (1.0, 0.0), (2.0, 5.0), (2.0, 0.0)]
    );
    let again = run_sweep(&small_config(), &spec, &ModeCache::disabled(), 1).unwrap();
    assert_eq!(to_csv(&rows), to_csv(&again));
}
