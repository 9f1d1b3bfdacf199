//! Exhaustive ground truth for small codes: weight spectra, the union bound
//! and a brute-force maximum-likelihood decoder.

use std::collections::BTreeMap;

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::crc::{crc_encode, CrcSpec};
use crate::error::{Error, Result};
use crate::polar::{encode_payload, CodeSpec};
use crate::Bit;

/// Largest payload dimension [`enumerate_weights`] accepts.
pub const ENUMERATION_BUDGET_BITS: usize = 24;

/// Largest `K` [`ml_oracle_decode`] accepts.
pub const ML_ORACLE_MAX_K: usize = 16;

/// Weight spectrum `{w: A_w}` of a linear code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDistribution {
    /// Block length `N`.
    pub n: usize,
    /// Payload dimension (information bits before CRC).
    pub k: usize,
    /// Nonzero counts only, keyed by weight.
    pub counts: BTreeMap<usize, u64>,
}

impl WeightDistribution {
    /// Minimum weight over nonzero codewords, `None` for the trivial code.
    pub fn d_min(&self) -> Option<usize> {
        self.counts.keys().copied().find(|&w| w > 0)
    }

    pub fn count(&self, w: usize) -> u64 {
        self.counts.get(&w).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `w,A_w` lines under a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("w,A_w\n");
        for (w, a) in &self.counts {
            out.push_str(&format!("{w},{a}\n"));
        }
        out
    }
}

fn to_words(bits: &[Bit]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b == 1 {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// Rows of the overall generator: the codeword of each unit payload.
fn generator_rows(spec: &CodeSpec, crc: Option<&CrcSpec>) -> Result<Vec<Vec<u64>>> {
    let dim = spec.k() - crc.map_or(0, |c| c.degree());
    (0..dim)
        .map(|j| {
            let mut e = vec![0; dim];
            e[j] = 1;
            let u = match crc {
                Some(c) => crc_encode(&e, c)?,
                None => e,
            };
            Ok(to_words(&encode_payload(&u, spec)?))
        })
        .collect()
}

/// Counts codeword weights over every payload (CRC-encoded first when `crc` is
/// given). The payload dimension must not exceed [`ENUMERATION_BUDGET_BITS`].
pub fn enumerate_weights(spec: &CodeSpec, crc: Option<&CrcSpec>) -> Result<WeightDistribution> {
    let m = crc.map_or(0, |c| c.degree());
    if spec.k() < m {
        return Err(Error::Config(format!("K = {} smaller than CRC degree {m}", spec.k())));
    }
    if spec.frozen_values().iter().any(|&b| b != 0) {
        return Err(Error::InvalidCode("weight enumeration needs all-zero frozen bits".into()));
    }
    let dim = spec.k() - m;
    if dim > ENUMERATION_BUDGET_BITS {
        return Err(Error::OverBudget {
            dim,
            budget: ENUMERATION_BUDGET_BITS,
        });
    }
    let rows = generator_rows(spec, crc)?;
    let words = spec.len().div_ceil(64);

    // Split on the top payload bits; each part walks the rest in Gray order.
    let split = dim.min(8);
    let inner = dim - split;
    let parts: Vec<Vec<u64>> = (0u64..1 << split)
        .into_par_iter()
        .map(|prefix| {
            let mut hist = vec![0u64; spec.len() + 1];
            let mut word = vec![0u64; words];
            for (b, row) in rows[inner..].iter().enumerate() {
                if (prefix >> b) & 1 == 1 {
                    for (w, r) in word.iter_mut().zip(row) {
                        *w ^= r;
                    }
                }
            }
            let weight = |word: &[u64]| word.iter().map(|w| w.count_ones() as usize).sum::<usize>();
            hist[weight(&word)] += 1;
            for step in 1u64..(1 << inner) {
                let flip = step.trailing_zeros() as usize;
                for (w, r) in word.iter_mut().zip(&rows[flip]) {
                    *w ^= r;
                }
                hist[weight(&word)] += 1;
            }
            hist
        })
        .collect();

    let mut counts = BTreeMap::new();
    for hist in parts {
        for (w, c) in hist.into_iter().enumerate() {
            if c > 0 {
                *counts.entry(w).or_insert(0) += c;
            }
        }
    }
    Ok(WeightDistribution {
        n: spec.len(),
        k: dim,
        counts,
    })
}

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Union bound on the ML block error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionBound {
    /// `Σ_{w ≥ d_min} A_w Q(√(2wR·Eb/N0))`.
    pub full: f64,
    /// `A_{d_min} Q(√(2 d_min R·Eb/N0))`.
    pub dominant: f64,
}

pub fn union_bound(wd: &WeightDistribution, rate: f64, eb_n0_db: f64) -> Result<UnionBound> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::OutOfRange(format!("code rate {rate} outside (0, 1]")));
    }
    let ebn0 = 10f64.powf(eb_n0_db / 10.0);
    let term = |w: usize, a: u64| a as f64 * q_function((2.0 * w as f64 * rate * ebn0).sqrt());
    let full = wd
        .counts
        .iter()
        .filter(|(&w, _)| w > 0)
        .map(|(&w, &a)| term(w, a))
        .sum();
    let dominant = wd.d_min().map_or(0.0, |d| term(d, wd.count(d)));
    Ok(UnionBound { full, dominant })
}

/// Maximum-likelihood decoding by exhaustive search over all `2^K` payloads.
///
/// Each codeword costs `Σ_i ln(1 + e^{−(1−2x_i)L_i})`; ties go to the
/// lexicographically smallest payload.
pub fn ml_oracle_decode(channel_llrs: &[f64], spec: &CodeSpec) -> Result<Vec<Bit>> {
    let k = spec.k();
    if k > ML_ORACLE_MAX_K {
        return Err(Error::OverBudget {
            dim: k,
            budget: ML_ORACLE_MAX_K,
        });
    }
    if channel_llrs.len() != spec.len() {
        return Err(Error::LengthMismatch {
            expected: spec.len(),
            actual: channel_llrs.len(),
        });
    }
    // per-position cost of sending 0 and 1
    let costs: Vec<[f64; 2]> = channel_llrs
        .iter()
        .map(|&l| [softplus(-l), softplus(l)])
        .collect();
    let mut best: Option<(f64, u64)> = None;
    let mut payload = vec![0; k];
    for v in 0u64..(1 << k) {
        // payload[0] is the most significant bit, so v runs in lexicographic order
        for (j, p) in payload.iter_mut().enumerate() {
            *p = ((v >> (k - 1 - j)) & 1) as Bit;
        }
        let x = encode_payload(&payload, spec)?;
        let cost: f64 = x.iter().zip(&costs).map(|(&b, c)| c[b as usize]).sum();
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, v));
        }
    }
    let (_, v) = best.expect("at least one payload");
    Ok((0..k).map(|j| ((v >> (k - 1 - j)) & 1) as Bit).collect())
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::LLR_SAT;

    #[test]
    fn weights_8_4() {
        let spec = CodeSpec::new(3, &[4, 6, 7, 8]).unwrap();
        let wd = enumerate_weights(&spec, None).unwrap();
        assert_eq!(wd.counts, BTreeMap::from([(0, 1), (4, 14), (8, 1)]));
        assert_eq!(wd.d_min(), Some(4));
        assert_eq!(wd.total(), 16);
        assert_eq!(wd.to_csv(), "w,A_w\n0,1\n4,14\n8,1\n");
    }

    #[test]
    fn weights_single_row() {
        let spec = CodeSpec::new(2, &[4]).unwrap();
        let wd = enumerate_weights(&spec, None).unwrap();
        assert_eq!(wd.counts, BTreeMap::from([(0, 1), (4, 1)]));
    }

    #[test]
    fn weights_with_crc_only_code() {
        // K == m: the only payload is empty, the code is {0}
        let crc = CrcSpec::parse_poly("0x7", 2).unwrap();
        let spec = CodeSpec::new(3, &[7, 8]).unwrap();
        let wd = enumerate_weights(&spec, Some(&crc)).unwrap();
        assert_eq!(wd.counts, BTreeMap::from([(0, 1)]));
        assert_eq!(wd.d_min(), None);
    }

    #[test]
    fn budget_enforced() {
        let spec = CodeSpec::new(5, &(1..=25).collect::<Vec<_>>()).unwrap();
        assert!(matches!(enumerate_weights(&spec, None), Err(Error::OverBudget { dim: 25, .. })));
    }

    #[test]
    fn union_bound_terms() {
        let spec = CodeSpec::new(3, &[4, 6, 7, 8]).unwrap();
        let wd = enumerate_weights(&spec, None).unwrap();
        let ub = union_bound(&wd, 0.5, 4.0).unwrap();
        assert!(ub.full >= ub.dominant);
        let ebn0 = 10f64.powf(0.4);
        let expect = 14.0 * q_function((4.0 * ebn0).sqrt()) + q_function((8.0 * ebn0).sqrt());
        assert!((ub.full - expect).abs() < 1e-15);
        let trivial = WeightDistribution {
            n: 8,
            k: 0,
            counts: BTreeMap::from([(0, 1)]),
        };
        assert_eq!(union_bound(&trivial, 0.5, 1.0).unwrap().full, 0.0);
        assert!(union_bound(&wd, 0.0, 1.0).is_err());
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        for (x, q) in [(1.0, 0.158_655_253_931_457_05), (3.0, 1.349_898_031_630_094_6e-3), (8.0, 6.220_960_574_271_785e-16)] {
            assert!((q_function(x) / q - 1.0).abs() < 1e-9, "Q({x}) = {}", q_function(x));
        }
    }

    #[test]
    fn ml_noiseless_and_single_bit() {
        let spec = CodeSpec::new(3, &[4, 6, 7, 8]).unwrap();
        let payload = vec![1, 0, 1, 1];
        let x = encode_payload(&payload, &spec).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { LLR_SAT } else { -LLR_SAT }).collect();
        assert_eq!(ml_oracle_decode(&llr, &spec).unwrap(), payload);

        // one information bit on the all-ones row: decision by the LLR sum
        let rep = CodeSpec::new(2, &[4]).unwrap();
        assert_eq!(ml_oracle_decode(&[1.0, -0.5, -0.2, 0.1], &rep).unwrap(), vec![0]);
        assert_eq!(ml_oracle_decode(&[1.0, -0.5, -0.7, 0.1], &rep).unwrap(), vec![1]);
        assert!(ml_oracle_decode(&[0.0; 3], &rep).is_err());
    }
}
