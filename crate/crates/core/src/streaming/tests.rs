use super::*;
use crate::grid::ArithmeticMode;
use crate::image::{add_gaussian_noise, synthetic_scene};

fn params(r: usize, s: f64, t: f64) -> DenoiseParams {
    DenoiseParams::new(r, s, t).unwrap()
}

fn matches_reference(img: &Image, p: &DenoiseParams, cfg: &BgConfig) -> CycleReport {
    let (out, report) = run_streaming(img, p, cfg).unwrap();
    assert_eq!(out, bg_denoise(img, p, cfg), "r={}", p.radius());
    report
}

#[test]
fn constant_image() {
    let img = Image::filled(64, 64, 90);
    let p = params(4, 2.0, 30.0);
    let (out, report) = run_streaming(&img, &p, &BgConfig::default()).unwrap();
    assert_eq!(out, img);
    assert!(audit_memory_accesses(&report).is_ok());
    assert_eq!(
        report.total_cycles - report.stall_cycles,
        64 * (64 + report.lag_rows) as u64
    );
}

#[test]
fn small_images_match_reference() {
    for r in 1..=6 {
        let img =
            add_gaussian_noise(&synthetic_scene(5 * r + 3, 4 * r + 1), 15.0, r as u64).unwrap();
        let p = params(r, r as f64, 35.0);
        for cfg in [
            BgConfig::default(),
            BgConfig::new(
                ArithmeticMode::shift_for(&p, 8).unwrap(),
                TiWeights::Standard,
            ),
            BgConfig::new(ArithmeticMode::Float, TiWeights::FarCorner),
        ] {
            let report = matches_reference(&img, &p, &cfg);
            assert!(
                audit_memory_accesses(&report).is_ok(),
                "{:?}",
                report.violations
            );
        }
    }
}

#[test]
fn single_row_image() {
    let img = synthetic_scene(40, 1);
    let p = params(3, 2.0, 30.0);
    let report = matches_reference(&img, &p, &BgConfig::default());
    assert!(audit_memory_accesses(&report).is_ok());
}

#[test]
fn narrow_image_falls_back() {
    let img = synthetic_scene(5, 9);
    let p = params(3, 2.0, 30.0);
    let (out, report) = run_streaming(&img, &p, &BgConfig::default()).unwrap();
    assert!(report.fallback);
    assert_eq!(out, bg_denoise(&img, &p, &BgConfig::default()));
}

#[test]
fn no_stalls_when_blur_keeps_up() {
    let img = synthetic_scene(128, 96);
    let p = params(7, 4.0, 50.0);
    assert!(stall_condition_holds(&p, 128));
    let report = matches_reference(&img, &p, &BgConfig::default());
    assert_eq!(report.stall_cycles, 0);
}

#[test]
fn cadence_is_one_pixel_per_iteration() {
    let img = synthetic_scene(50, 30);
    let p = params(3, 2.0, 30.0);
    let report = matches_reference(&img, &p, &BgConfig::default());
    let lead = 50 * report.lag_rows;
    assert!(report.emitted_per_iteration[..lead].iter().all(|&e| e == 0));
    assert!(report.emitted_per_iteration[lead..].iter().all(|&e| e == 1));
    assert_eq!(
        report.emitted_per_iteration.len(),
        50 * (30 + report.lag_rows)
    );
}

#[test]
fn footprint_bounds() {
    let img = synthetic_scene(90, 70);
    for r in [2, 5, 8] {
        let p = params(r, 3.0, 40.0);
        let report = matches_reference(&img, &p, &BgConfig::default());
        let dims = grid_dimensions(&p, 90, 70);
        assert_eq!(report.live_memory.grid_cells, 3 * dims.gy * dims.gz);
        assert_eq!(report.live_memory.blurred_cells, 2 * dims.gy * dims.gz);
        assert!(report.lb_peak <= (2 * r + r / 2 + 1) * 90);
        assert!(report.lb_max_enqueues <= 1 && report.lb_max_dequeues <= 1);
    }
}

#[test]
fn merged_partitions_fail_audit() {
    let img = synthetic_scene(120, 40);
    let p = params(3, 2.0, 30.0);
    let merged = StreamOptions {
        partitions: PartitionLayout {
            grid: 1,
            blurred: 1,
        },
    };
    let (out, report) = run_streaming_with(&img, &p, &BgConfig::default(), &merged).unwrap();
    assert_eq!(out, bg_denoise(&img, &p, &BgConfig::default()));
    let err = audit_memory_accesses(&report).unwrap_err();
    assert!(err.count > 0);
    assert!(!err.violations.is_empty());
}

#[test]
fn report_json_fields() {
    let img = synthetic_scene(40, 20);
    let p = params(2, 2.0, 30.0);
    let (_, report) = run_streaming(&img, &p, &BgConfig::default()).unwrap();
    let v = report.to_json(&[100e6, 200e6]);
    assert_eq!(v["total_cycles"], report.total_cycles);
    assert!(v["partitions"].as_array().unwrap().len() == 5);
    assert_eq!(v["predicted_fps"].as_array().unwrap().len(), 2);
    assert!(v.get("emitted_per_iteration").is_none());
}
