use std::fs;

use polarforge::channel::SnrReference;
use polarforge::construction::{Construction, GaussianApproxVariant};
use polarforge::sim::*;

fn config(m: usize, k: usize) -> SimConfig {
    let mut c = SimConfig::new(
        m,
        k,
        Construction::Ga {
            sigma: 0.8,
            variant: GaussianApproxVariant::Omega3,
        },
    );
    c.seed = 2024;
    c
}

/// Two-sided 2-sigma test of `a >= b` between two BLER estimates.
fn at_least_within_2sigma(a: &SimRecord, b: &SimRecord) -> bool {
    let (pa, pb) = (a.bler(), b.bler());
    let var = pa * (1.0 - pa) / a.frames as f64 + pb * (1.0 - pb) / b.frames as f64;
    pa >= pb - 2.0 * var.sqrt()
}

#[test]
fn near_noiseless_point_has_no_errors() {
    for (m, k) in [(64, 32), (100, 40), (256, 200)] {
        let mut c = config(m, k);
        c.snr = SnrSweep::single(30.0, SnrReference::EsN0);
        c.max_frames = 1000;
        c.decoder = "scl:L=4".parse().unwrap();
        let r = &run_campaign(&c, None).unwrap()[0];
        assert_eq!((r.frames, r.block_errors, r.bit_errors), (1000, 0, 0));
    }
}

#[test]
fn csv_has_one_row_per_point_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(128, 64);
    c.snr = SnrSweep {
        start: 1.0,
        stop: 2.0,
        step: 1.0,
        reference: SnrReference::EbN0,
    };
    c.min_block_errors = 10;
    c.max_frames = 500;
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_campaign(&c, Some(&a)).unwrap();
    c.workers = 4;
    run_campaign(&c, Some(&b)).unwrap();
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("1,eb,"));
}

#[test]
fn record_invariants_hold() {
    let mut c = config(128, 56);
    c.crc = Some("CRC8".parse().unwrap());
    c.decoder = "sc".parse().unwrap();
    c.snr = SnrSweep {
        start: 0.0,
        stop: 3.0,
        step: 1.0,
        reference: SnrReference::EbN0,
    };
    c.min_block_errors = 50;
    c.max_frames = 5000;
    for r in run_campaign(&c, None).unwrap() {
        assert!(r.block_errors <= r.frames);
        assert!(r.crc_miss <= r.block_errors);
        assert!((0.0..=1.0).contains(&r.bler()));
        assert!(r.bit_errors >= r.block_errors);
        assert!(r.block_errors == 50 || r.frames == 5000);
    }
}

#[test]
fn bler_falls_with_snr() {
    let mut c = config(256, 128);
    c.decoder = "scl:L=4".parse().unwrap();
    c.snr = SnrSweep {
        start: 0.0,
        stop: 2.0,
        step: 1.0,
        reference: SnrReference::EbN0,
    };
    c.min_block_errors = 100;
    c.max_frames = 50_000;
    let recs = run_campaign(&c, None).unwrap();
    for w in recs.windows(2) {
        assert!(w[0].block_errors >= 100 && w[1].block_errors >= 100);
        assert!(w[0].bler() > w[1].bler(), "{w:?}");
    }
}

#[test]
fn decoder_ordering_on_a_short_code() {
    let mut c = config(256, 120);
    c.crc = Some("CRC8".parse().unwrap());
    c.snr = SnrSweep::single(1.5, SnrReference::EbN0);
    c.min_block_errors = 100;
    c.max_frames = 100_000;
    let mut run = |d: &str| {
        c.decoder = d.parse().unwrap();
        run_campaign(&c, None).unwrap().remove(0)
    };
    let sc = run("sc");
    let l8 = run("ca-scl:L=8");
    let l32 = run("ca-scl:L=32");
    assert!(at_least_within_2sigma(&sc, &l8), "{sc:?} {l8:?}");
    assert!(at_least_within_2sigma(&l8, &l32), "{l8:?} {l32:?}");
    assert!(sc.bler() > l32.bler());
}

#[test]
fn bec_campaign() {
    let mut c = config(64, 16);
    c.construction = Construction::Bhattacharyya { epsilon: 0.3 };
    c.channel = ChannelKind::Bec;
    c.epsilon = 0.3;
    c.max_frames = 2000;
    c.min_block_errors = 1;
    let r = &run_campaign(&c, None).unwrap()[0];
    assert_eq!(r.snr_ref, "eps");
    // rate 1/4 far below capacity 0.7: errors are rare
    assert!(r.bler() < 0.05);
}

#[test]
fn bad_configs_fail_before_simulating() {
    let mut c = config(64, 60);
    c.crc = Some("CRC8".parse().unwrap());
    assert!(run_campaign(&c, None).is_err());
    let mut c = config(64, 32);
    c.snr = SnrSweep {
        start: 2.0,
        stop: 1.0,
        step: 0.5,
        reference: SnrReference::EsN0,
    };
    assert!(run_campaign(&c, None).is_err());
    let mut c = config(64, 32);
    c.min_block_errors = 0;
    assert!(run_campaign(&c, None).is_err());
}
