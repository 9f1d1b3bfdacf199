use polarforge::analysis::*;
use polarforge::construction::{bhattacharyya_bec, select_info_set};
use polarforge::crc::CrcSpec;
use polarforge::CodeSpec;

#[test]
fn minimum_distance_equals_smallest_row_weight() {
    // Holds for nested BEC-ordered codes; any counterexample is listed.
    let mut counterexamples = Vec::new();
    for n in 1..=5u32 {
        let z = bhattacharyya_bec(n, 0.5).unwrap();
        for k in 1..=(1usize << n).min(ENUMERATION_BUDGET_BITS) {
            let info = select_info_set(&z, k).unwrap();
            let spec = CodeSpec::new(n, &info).unwrap();
            let wd = enumerate_weights(&spec, None).unwrap();
            let row_min = info.iter().map(|&i| 1usize << (i - 1).count_ones()).min().unwrap();
            if wd.d_min() != Some(row_min) {
                counterexamples.push((n, k, wd.d_min(), row_min));
            }
        }
    }
    assert!(counterexamples.is_empty(), "{counterexamples:?}");
}

#[test]
fn spectra_are_symmetric_when_all_ones_is_a_codeword() {
    for n in 2..=5u32 {
        let z = bhattacharyya_bec(n, 0.5).unwrap();
        let len = 1usize << n;
        for k in [len / 4, len / 2] {
            let info = select_info_set(&z, k).unwrap();
            // the all-ones word is row N
            assert!(info.contains(&len));
            let wd = enumerate_weights(&CodeSpec::new(n, &info).unwrap(), None).unwrap();
            for w in 0..=len {
                assert_eq!(wd.count(w), wd.count(len - w));
            }
            assert_eq!(wd.total(), 1 << k);
        }
    }
}

#[test]
fn crc_does_not_lower_minimum_distance() {
    let z = bhattacharyya_bec(5, 0.5).unwrap();
    let crc = CrcSpec::parse_poly("0x43", 6).unwrap();
    let plain = enumerate_weights(&CodeSpec::new(5, &select_info_set(&z, 16).unwrap()).unwrap(), None).unwrap();
    let spec = CodeSpec::new(5, &select_info_set(&z, 22).unwrap()).unwrap();
    let concatenated = enumerate_weights(&spec, Some(&crc)).unwrap();
    assert_eq!(concatenated.total(), 1 << 16);
    assert!(concatenated.d_min().unwrap() >= plain.d_min().unwrap());
}

#[test]
fn enumeration_is_deterministic() {
    let z = bhattacharyya_bec(5, 0.5).unwrap();
    let spec = CodeSpec::new(5, &select_info_set(&z, 20).unwrap()).unwrap();
    let a = enumerate_weights(&spec, None).unwrap();
    let b = enumerate_weights(&spec, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn union_bound_decreases_with_snr() {
    let spec = CodeSpec::new(3, &[4, 6, 7, 8]).unwrap();
    let wd = enumerate_weights(&spec, None).unwrap();
    let mut prev = f64::INFINITY;
    for db in [0.0, 2.0, 4.0, 6.0, 8.0] {
        let ub = union_bound(&wd, 0.5, db).unwrap();
        assert!(ub.full < prev);
        assert!(ub.dominant <= ub.full);
        prev = ub.full;
    }
}
