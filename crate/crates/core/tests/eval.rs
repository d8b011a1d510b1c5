mod common;

use civc::codec::encode_i;
use civc::eval::{analyze_rd, DRIFT_CSV_HEADER, RD_CSV_HEADER, SKIP_CSV_HEADER};
use civc::io::StreamId;
use civc::{analyze_drift, analyze_skip, bd_rate, psnr, CodecConfig, FrameType, Schedule};

fn drift_cfg() -> CodecConfig {
    CodecConfig {
        tau_sigma: 0.0,
        quality_index: 2,
        gop_size: 10,
        ..CodecConfig::default()
    }
}

#[test]
fn drift_csv_has_one_row_per_frame() {
    let frames = common::moving_clip(32, 24, 20, (0.5, 0.0), 2.0, 1);
    let rep = analyze_drift(&frames, &drift_cfg(), Schedule::Full).unwrap();
    let csv = rep.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(DRIFT_CSV_HEADER));
    assert_eq!(lines.count(), 20);
    assert!(csv.contains("\n10,cI,"));
}

#[test]
fn drift_ci_matches_standalone() {
    let frames = common::moving_clip(48, 32, 30, (0.5, 0.25), 4.0, 2);
    let cfg = drift_cfg();
    let rep = analyze_drift(&frames, &cfg, Schedule::Full).unwrap();
    for row in rep.rows.iter().filter(|r| r.frame_type == FrameType::CI) {
        let (alone, _) = encode_i(&frames[row.frame_index], &cfg).unwrap();
        let p = psnr(&frames[row.frame_index], &alone.recon).unwrap();
        assert!((row.psnr - p).abs() <= 0.01, "frame {}", row.frame_index);
    }
}

#[test]
fn p_only_quality_trends_down() {
    let frames = common::moving_clip(64, 48, 40, (0.5, 0.25), 4.0, 3);
    let rep = analyze_drift(&frames, &drift_cfg(), Schedule::POnly).unwrap();
    // least-squares slope of PSNR over the P frames
    let pts: Vec<(f64, f64)> = rep.rows[1..]
        .iter()
        .map(|r| (r.frame_index as f64, r.psnr))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!(slope <= 0.0, "slope {slope}");
    assert!(rep
        .rows
        .iter()
        .skip(1)
        .all(|r| r.frame_type == FrameType::P));
}

#[test]
fn drift_rejects_short_sequences() {
    let frames = common::moving_clip(16, 16, 19, (0.0, 0.0), 0.0, 0);
    assert!(analyze_drift(&frames, &drift_cfg(), Schedule::Full).is_err());
}

#[test]
fn skip_ratio_monotone_in_threshold() {
    let frames = common::moving_clip(32, 32, 4, (1.0, 0.0), 2.0, 4);
    let mut last: Option<Vec<f64>> = None;
    for tau in [0.5f32, 0.3, 0.16, 0.05, 0.0] {
        let cfg = CodecConfig {
            tau_sigma: tau,
            ..CodecConfig::default()
        };
        let rep = analyze_skip(&frames, &cfg, &[3]).unwrap();
        let ratios: Vec<f64> = rep.rows.iter().map(|r| r.skip_ratio).collect();
        if let Some(prev) = &last {
            for (a, b) in ratios.iter().zip(prev) {
                assert!(a <= b, "tau {tau}: {a} > {b}");
            }
        }
        if tau == 0.0 {
            assert!(ratios.iter().all(|&r| r == 0.0));
        }
        last = Some(ratios);
    }
}

#[test]
fn skip_csv_schema() {
    let frames = common::moving_clip(16, 16, 3, (0.0, 0.0), 0.0, 0);
    let rep = analyze_skip(&frames, &CodecConfig::default(), &[0, 5]).unwrap();
    let csv = rep.to_csv();
    assert_eq!(csv.lines().next(), Some(SKIP_CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + rep.rows.len());
    assert!(rep.get(5, StreamId::Motion).is_some());
}

#[test]
fn static_scene_skips_flat_half_in_both_streams() {
    let mut frames = common::moving_clip(64, 48, 6, (0.0, 0.0), 0.0, 0);
    for f in &mut frames {
        for y in 0..48 {
            f.plane[y * 64..y * 64 + 32].fill(90);
        }
    }
    let rep = analyze_skip(&frames, &CodecConfig::default(), &[0, 2, 4]).unwrap();
    for q in [0, 2, 4] {
        let m = rep.get(q, StreamId::Motion).unwrap().skip_ratio;
        let r = rep.get(q, StreamId::Residual).unwrap().skip_ratio;
        assert!(
            m >= 0.5 && r >= 0.5,
            "quality {q}: motion {m}, residual {r}"
        );
    }
}

#[test]
fn skip_timing_favours_dense_masks() {
    let mut frames = common::moving_clip(192, 128, 4, (0.0, 0.0), 0.0, 0);
    for f in &mut frames {
        for y in 0..128 {
            f.plane[y * 192..y * 192 + 128].fill(90);
        }
    }
    let rep = analyze_skip(&frames, &CodecConfig::default(), &[4]).unwrap();
    for row in rep.rows.iter().filter(|r| r.skip_ratio >= 0.5) {
        assert!(
            row.time_with_skip <= row.time_without_skip,
            "{:?}: {:?} > {:?}",
            row.stream,
            row.time_with_skip,
            row.time_without_skip
        );
    }
}

#[test]
fn rd_sweep_feeds_bd_rate() {
    let frames = common::moving_clip(32, 24, 4, (1.0, 0.0), 2.0, 5);
    let cfg = CodecConfig::default();
    let rep = analyze_rd(&frames, &cfg, &[0, 1, 2, 3, 4, 5], Schedule::Full).unwrap();
    assert_eq!(rep.rows.len(), 6);
    let csv = rep.to_csv();
    assert_eq!(csv.lines().next(), Some(RD_CSV_HEADER));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(',')));
    let curve = rep.curve();
    assert_eq!(bd_rate(&curve, &curve).unwrap(), 0.0);
    let p_only = analyze_rd(&frames, &cfg, &[0, 1, 2, 3, 4, 5], Schedule::POnly).unwrap();
    assert!(bd_rate(&curve, &p_only.curve()).unwrap().is_finite());
}

#[test]
fn bd_rate_offset_curves_have_opposite_signs() {
    let a = vec![(0.1, 30.0), (0.2, 33.0), (0.4, 36.0), (0.8, 39.0)];
    let b: Vec<_> = a.iter().map(|&(r, p)| (r * 1.3, p)).collect();
    let ab = bd_rate(&a, &b).unwrap();
    let ba = bd_rate(&b, &a).unwrap();
    assert!(ab > 0.0 && ba < 0.0);
    assert!((ab - 30.0).abs() < 1e-9);
}
