mod common;

use bgrid::grid::grid_dimensions;
use bgrid::image::synthetic_scene;
use bgrid::streaming::{
    audit_memory_accesses, lag_rows, run_streaming_with, stall_condition_holds, PartitionLayout,
    StreamOptions,
};
use bgrid::{bg_denoise, run_streaming, ArithmeticMode, BgConfig, DenoiseParams, TiWeights};
use common::Cases;
use proptest::prelude::*;

fn config(p: &DenoiseParams, shift: bool) -> BgConfig {
    let mode = if shift {
        ArithmeticMode::shift_for(p, 8).unwrap()
    } else {
        ArithmeticMode::Float
    };
    BgConfig::new(mode, TiWeights::Standard)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn streaming_equals_reference(
        seed in any::<u64>(),
        r in prop::sample::select(vec![1usize, 2, 3, 4, 5, 7, 8]),
        dw in 0usize..60,
        h in 1usize..60,
        sigma_s in 1.0f64..16.0,
        sigma_r in 10.0f64..100.0,
        shift in any::<bool>(),
    ) {
        let w = 2 * r + dw;
        let img = Cases::new(seed).image(w, h);
        let p = DenoiseParams::new(r, sigma_s, sigma_r).unwrap();
        let cfg = config(&p, shift);
        let (out, report) = run_streaming(&img, &p, &cfg).unwrap();
        prop_assert_eq!(&out, &bg_denoise(&img, &p, &cfg));
        prop_assert_eq!(report.total_cycles - report.stall_cycles, (w * (h + 2 * r + r / 2)) as u64);
        prop_assert!(audit_memory_accesses(&report).is_ok());
        let dims = grid_dimensions(&p, w, h);
        prop_assert_eq!(report.live_memory.grid_cells, 3 * dims.gy * dims.gz);
        prop_assert_eq!(report.live_memory.blurred_cells, 2 * dims.gy * dims.gz);
        prop_assert!(report.lb_peak <= (2 * r + r / 2 + 1) * w);
    }

    #[test]
    fn far_corner_weights_stream_exactly(
        seed in any::<u64>(),
        r in 1usize..6,
        dw in 0usize..30,
        h in 1usize..30,
    ) {
        let w = 2 * r + dw;
        let img = Cases::new(seed).image(w, h);
        let p = DenoiseParams::new(r, 3.0, 40.0).unwrap();
        let cfg = BgConfig::new(ArithmeticMode::Float, TiWeights::FarCorner);
        let (out, report) = run_streaming(&img, &p, &cfg).unwrap();
        prop_assert_eq!(&out, &bg_denoise(&img, &p, &cfg));
        let lag = lag_rows(r, TiWeights::FarCorner);
        prop_assert_eq!(report.total_cycles - report.stall_cycles, (w * (h + lag)) as u64);
    }
}

#[test]
fn output_cadence() {
    for r in [2usize, 3, 4, 7] {
        let (w, h) = (6 * r + 1, 5 * r + 2);
        let p = DenoiseParams::new(r, 3.0, 40.0).unwrap();
        let (_, report) = run_streaming(&synthetic_scene(w, h), &p, &BgConfig::default()).unwrap();
        let lag = report.lag_rows;
        let rows: Vec<usize> = report
            .emitted_per_iteration
            .chunks(w)
            .map(|row| row.iter().map(|&e| e as usize).sum())
            .collect();
        assert!(rows[..lag].iter().all(|&n| n == 0));
        for block in rows[lag..].chunks(r).filter(|b| b.len() == r) {
            assert_eq!(block.iter().sum::<usize>(), r * w, "r={r}");
        }
    }
}

/// The closed-form predicate is sufficient for stall-free operation, and
/// necessary once the per-plane blur work clearly exceeds the slack.
#[test]
fn stall_predicate() {
    let mut decided = 0;
    for r in [2usize, 3, 4, 5, 7, 8] {
        for (s, t) in [
            (8.0, 70.0),
            (4.0, 50.0),
            (2.0, 30.0),
            (8.0, 30.0),
            (16.0, 40.0),
        ] {
            for w in [64usize, 128, 256, 512, 960] {
                let p = DenoiseParams::new(r, s, t).unwrap();
                let img = synthetic_scene(w, 4 * r + 3);
                let (_, report) = run_streaming(&img, &p, &BgConfig::default()).unwrap();
                let dims = grid_dimensions(&p, w, 1);
                let work = (dims.gy * dims.gz) as f64;
                let slack =
                    (2 * w) as f64 - ((r as f64 / 2.0) + 0.5).floor() - r as f64 - (w % r) as f64;
                if stall_condition_holds(&p, w) {
                    assert_eq!(report.stall_cycles, 0, "r={r} s={s} t={t} w={w}");
                    decided += 1;
                } else if work >= 1.25 * slack {
                    assert!(report.stall_cycles > 0, "r={r} s={s} t={t} w={w}");
                    decided += 1;
                }
            }
        }
    }
    assert!(decided >= 130, "{decided}");
}

#[test]
fn resources_flat_across_radius() {
    let img = synthetic_scene(1920, 40);
    let reports: Vec<_> = [4usize, 7, 15]
        .into_iter()
        .map(|r| {
            let p = DenoiseParams::new(r, 8.0, 70.0).unwrap();
            run_streaming(&img, &p, &BgConfig::default()).unwrap().1
        })
        .collect();
    let mem: Vec<f64> = reports
        .iter()
        .map(|x| {
            (x.live_memory.grid_cells
                + x.live_memory.blurred_cells
                + x.live_memory.line_buffer_capacity) as f64
        })
        .collect();
    let (lo, hi) = mem
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
    assert!(hi / lo < 2.0, "{mem:?}");
    assert!(reports.windows(2).all(|x| x[0].ops == x[1].ops));
}

#[test]
fn merged_partitions_are_flagged() {
    let img = synthetic_scene(96, 24);
    let p = DenoiseParams::new(2, 2.0, 30.0).unwrap();
    let cfg = BgConfig::default();
    let opts = StreamOptions {
        partitions: PartitionLayout {
            grid: 1,
            blurred: 2,
        },
    };
    let (out, report) = run_streaming_with(&img, &p, &cfg, &opts).unwrap();
    assert_eq!(out, run_streaming(&img, &p, &cfg).unwrap().0);
    assert!(audit_memory_accesses(&report).is_err());
    let bad = StreamOptions {
        partitions: PartitionLayout {
            grid: 4,
            blurred: 2,
        },
    };
    assert!(run_streaming_with(&img, &p, &cfg, &bad).is_err());
}
