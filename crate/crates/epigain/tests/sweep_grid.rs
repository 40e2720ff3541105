//! Coarse-grid sweep properties: ordering and gap positivity in every cell,
//! the directional trends along each axis, and the frozen golden export.

use std::path::Path;
use std::sync::OnceLock;

use epigain::sweep::{self, AxisRange, SweepGrid, SweepSpec};

fn coarse_grid() -> &'static SweepGrid {
    static GRID: OnceLock<SweepGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let spec = SweepSpec::new(
            AxisRange::new(1.0, 50.0, 5.0).unwrap(),
            AxisRange::new(1.0, 50.0, 5.0).unwrap(),
        );
        sweep::run_sweep(&spec).unwrap()
    })
}

#[test]
fn coarse_grid_has_hundred_converged_cells() {
    let grid = coarse_grid();
    assert_eq!(grid.records.len(), 100);
    assert_eq!(grid.metadata.total_cells, 100);
    assert_eq!(grid.metadata.failed_cells, 0);
}

#[test]
fn gaps_are_positive_in_every_cell() {
    for record in &coarse_grid().records {
        assert!(
            record.d_delta > 0.0 && record.d_s > 0.0,
            "non-positive gap at s_l={}, s_p={}: d_delta={}, d_s={}",
            record.params.s_l,
            record.params.s_p,
            record.d_delta,
            record.d_s
        );
        assert!(record.delta_kld <= record.delta_ig && record.delta_ig <= record.delta_bs);
    }
}

#[test]
fn max_ig_decreases_with_observation_uncertainty_everywhere() {
    let grid = coarse_grid();
    let n_p = grid.spec.s_p.count();
    for ip in 0..n_p {
        for il in 1..grid.spec.s_l.count() {
            let prev = grid.record(il - 1, ip);
            let next = grid.record(il, ip);
            assert!(
                next.max_ig < prev.max_ig,
                "max_ig not decreasing in s_l at s_p={}: {} -> {}",
                next.params.s_p,
                prev.max_ig,
                next.max_ig
            );
        }
    }
}

#[test]
fn gap_trends_follow_both_uncertainty_axes() {
    // d_delta grows with s_p at fixed s_l and shrinks with s_l at fixed s_p.
    let grid = coarse_grid();
    let slack = 1e-6;
    for il in 0..grid.spec.s_l.count() {
        for ip in 1..grid.spec.s_p.count() {
            let prev = grid.record(il, ip - 1);
            let next = grid.record(il, ip);
            assert!(
                next.d_delta > prev.d_delta - slack,
                "d_delta not increasing in s_p at s_l={}",
                next.params.s_l
            );
        }
    }
    for ip in 0..grid.spec.s_p.count() {
        for il in 1..grid.spec.s_l.count() {
            let prev = grid.record(il - 1, ip);
            let next = grid.record(il, ip);
            assert!(
                next.d_delta < prev.d_delta + slack,
                "d_delta not decreasing in s_l at s_p={}",
                next.params.s_p
            );
        }
    }
}

#[test]
fn optimal_surprise_directions_at_unit_likelihood() {
    // Along s_p at s_l = 1: S_BS rises strictly. S_KLD falls steeply from
    // s_p = 1 into a shallow minimum near s_p ≈ 16 and then creeps back up
    // by ~0.016 toward s_p = 50 (confirmed against a 100k-point brute-force
    // scan), so the decreasing trend is asserted as: always below the
    // starting value, with any rebound past the minimum staying tiny
    // compared to the initial drop.
    let grid = coarse_grid();
    let s_kld: Vec<f64> = (0..grid.spec.s_p.count())
        .map(|ip| grid.record(0, ip).s_kld)
        .collect();
    let start = s_kld[0];
    let (min_idx, &floor) = s_kld
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let initial_drop = start - floor;
    assert!(
        initial_drop > 0.3,
        "expected a pronounced drop, got {initial_drop}"
    );
    for ip in 1..=min_idx {
        assert!(
            s_kld[ip] < s_kld[ip - 1],
            "s_kld not decreasing before its minimum: {} -> {}",
            s_kld[ip - 1],
            s_kld[ip]
        );
    }
    for (ip, &value) in s_kld.iter().enumerate().skip(min_idx + 1) {
        assert!(
            value - floor < 0.05 * initial_drop,
            "s_kld rebound at index {ip} too large: {} above the minimum",
            value - floor
        );
    }

    for ip in 1..grid.spec.s_p.count() {
        let prev = grid.record(0, ip - 1);
        let next = grid.record(0, ip);
        assert!(
            next.s_bs > prev.s_bs,
            "s_bs not increasing in s_p: {} -> {}",
            prev.s_bs,
            next.s_bs
        );
    }
}

#[test]
fn export_matches_frozen_golden_csv() {
    let golden_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_sweep_10x10.csv");
    let golden = std::fs::read(&golden_path)
        .unwrap_or_else(|e| panic!("golden file {}: {e}", golden_path.display()));
    let mut exported = Vec::new();
    sweep::export_csv(coarse_grid(), &mut exported).unwrap();
    assert!(
        exported == golden,
        "coarse-grid export deviates from the frozen golden CSV"
    );
}
