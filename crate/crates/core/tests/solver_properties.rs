mod common;

use levcap::solver::{
    levered_firm_value, solve_bankruptcy_level, solve_two_stage, sweep_scale_effects, FaceValueGrid, Knob,
    Optimality, SweepMode,
};
use levcap::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn k1_changes_sign_once_around_the_root() {
    for m in [common::case1(), common::case2(), common::constant_loss_model()] {
        let b_star = solve_bankruptcy_level(&m, None).unwrap().b_star;
        let n = 400;
        let signs: Vec<bool> = (0..n)
            .map(|i| b_star - 5.0 + 10.0 * i as f64 / (n - 1) as f64)
            .map(|b| m.k1(b).unwrap() > 0.0)
            .collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
    }
}

#[test]
fn certified_root_beats_every_higher_barrier() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for m in [common::case1(), common::case2()] {
        let solved = solve_bankruptcy_level(&m, None).unwrap();
        assert_eq!(solved.status, Optimality::Optimal);
        assert!(solved.conditions.certifies_optimality());
        let b_star = solved.b_star;
        for _ in 0..20 {
            let b = b_star + rng.gen_range(0.0..2.0);
            let x = b + rng.gen_range(0.0..3.0);
            let e = m.equity_value(x, b).unwrap();
            let e_star = m.equity_value(x, b_star).unwrap();
            assert!(e <= e_star + 1e-8, "B={b} x={x}: {e} > {e_star}");
        }
    }
}

#[test]
fn lower_barriers_break_limited_liability() {
    for m in [common::case1(), common::case2()] {
        let b_star = solve_bankruptcy_level(&m, None).unwrap().b_star;
        for offset in [0.02, 0.1, 0.5] {
            let b = b_star - offset;
            let min = (1..200)
                .map(|i| b + 0.01 * i as f64)
                .map(|x| m.equity_value(x, b).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(min < 0.0, "offset {offset}");
        }
    }
}

#[test]
fn values_reported_with_the_root() {
    let m = common::case1();
    let x = common::x0();
    let solved = solve_bankruptcy_level(&m, Some(x)).unwrap();
    let v = solved.values.unwrap();
    assert_eq!(v, m.valuation(x, solved.b_star).unwrap());
    assert!((solved.bankruptcy_asset_level - solved.b_star.exp()).abs() < 1e-12);
    assert!(solve_bankruptcy_level(&m, Some(solved.b_star - 1.0)).unwrap().values.is_none());
}

#[test]
fn unlevered_firm_has_no_barrier() {
    let m = common::case1_with(0.5, 0.0);
    assert!(matches!(solve_bankruptcy_level(&m, None), Err(Error::Unlevered)));
    let (b, v) = levered_firm_value(&m, common::x0(), 0.0).unwrap();
    assert!(b.is_none());
    assert_eq!(v, 100f64.ln().exp());
}

#[test]
fn two_stage_profile_peaks_once_and_beats_v0() {
    for m in [common::case1(), common::case2()] {
        let two = solve_two_stage(&m, common::x0(), &FaceValueGrid::default()).unwrap();
        assert!(two.firm_value >= 100.0);
        let values: Vec<f64> = two.samples.iter().map(|s| s.firm_value.unwrap()).collect();
        let peak = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(values[..=peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(values[peak..].windows(2).all(|w| w[1] <= w[0]));
        assert!((two.p_star - two.samples[peak].face_value).abs() <= 1.0);
    }
}

#[test]
fn sweep_rows_follow_the_knob_order() {
    let values = [0.9, 0.1, 0.5];
    let rows = sweep_scale_effects(
        &common::case1(),
        common::x0(),
        Knob::CostConcavity,
        &values,
        SweepMode::FixedFaceValue,
    );
    let knobs: Vec<f64> = rows.iter().map(|r| r.as_ref().unwrap().knob_value).collect();
    assert_eq!(knobs, values);
}

#[test]
fn sweep_reports_failed_points() {
    let rows = sweep_scale_effects(
        &common::case1(),
        common::x0(),
        Knob::CostConcavity,
        &[0.5, 1.5],
        SweepMode::FixedFaceValue,
    );
    assert!(rows[0].is_ok());
    assert!(rows[1].as_ref().unwrap_err().contains("a"));
}

/// Observational: how the two-stage firm value moves with cost concavity.
/// Printed for inspection; its direction is not asserted.
#[test]
fn two_stage_concavity_sweep_is_reported() {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let rows = sweep_scale_effects(
        &common::case1(),
        common::x0(),
        Knob::CostConcavity,
        &grid,
        SweepMode::TwoStage(FaceValueGrid::default()),
    );
    for row in rows {
        let row = row.unwrap();
        println!("a={:.1} P*={:.2} V={:.4}", row.knob_value, row.p_star.unwrap(), row.firm);
    }
}
