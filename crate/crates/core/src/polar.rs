//! The polar transform `F_2^{⊗n}` and the objects that describe a polar code.
//!
//! Codewords are computed in natural order (`x = u·F^{⊗n}`); the bit-reversal
//! encoder is a permutation wrapper around it.

use crate::error::{Error, Result};
use crate::Bit;

/// Static identity of one polar code: length `N = 2^n`, information set and
/// frozen-bit values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    n: u32,
    info_set: Vec<usize>,
    frozen_values: Vec<Bit>,
    // 0-based, true on information positions
    info_mask: Vec<bool>,
}

impl CodeSpec {
    /// Builds a code of length `2^n` with the given 1-based information set and
    /// all-zero frozen bits.
    pub fn new(n: u32, info_set: &[usize]) -> Result<Self> {
        let len = 1usize << n;
        Self::with_frozen_values(n, info_set, vec![0; len - info_set.len().min(len)])
    }

    pub fn with_frozen_values(n: u32, info_set: &[usize], frozen_values: Vec<Bit>) -> Result<Self> {
        if n > 30 {
            return Err(Error::OutOfRange(format!("exponent n = {n} too large")));
        }
        let len = 1usize << n;
        let mut sorted = info_set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != info_set.len() {
            return Err(Error::InvalidCode("information set has duplicate indices".into()));
        }
        if sorted.is_empty() {
            return Err(Error::InvalidCode("information set is empty (K must be >= 1)".into()));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i == 0 || i > len) {
            return Err(Error::InvalidCode(format!("index {bad} outside [1, {len}]")));
        }
        if frozen_values.len() != len - sorted.len() {
            return Err(Error::LengthMismatch {
                expected: len - sorted.len(),
                actual: frozen_values.len(),
            });
        }
        check_bits(&frozen_values)?;
        let mut info_mask = vec![false; len];
        for &i in &sorted {
            info_mask[i - 1] = true;
        }
        Ok(Self {
            n,
            info_set: sorted,
            frozen_values,
            info_mask,
        })
    }

    /// Exponent `n`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Block length `N`.
    pub fn len(&self) -> usize {
        1 << self.n
    }

    /// Number of information bits `K`.
    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.len() as f64
    }

    /// Sorted 1-based information indices.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Sorted 1-based frozen indices.
    pub fn frozen_set(&self) -> Vec<usize> {
        (1..=self.len()).filter(|&i| !self.info_mask[i - 1]).collect()
    }

    pub fn frozen_values(&self) -> &[Bit] {
        &self.frozen_values
    }

    /// Whether the 1-based channel `i` carries information.
    pub fn is_info(&self, i: usize) -> bool {
        self.info_mask[i - 1]
    }

    pub(crate) fn info_mask(&self) -> &[bool] {
        &self.info_mask
    }

    /// Frozen value per 0-based position (0 on information positions).
    pub(crate) fn frozen_pattern(&self) -> Vec<Bit> {
        let mut out = vec![0; self.len()];
        let mut it = self.frozen_values.iter();
        for (pos, slot) in out.iter_mut().enumerate() {
            if !self.info_mask[pos] {
                *slot = *it.next().expect("frozen count checked at construction");
            }
        }
        out
    }

    /// Reads the information bits out of a source block `u`.
    pub fn extract_payload(&self, u: &[Bit]) -> Result<Vec<Bit>> {
        if u.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: u.len(),
            });
        }
        Ok(self.info_set.iter().map(|&i| u[i - 1]).collect())
    }
}

pub(crate) fn check_bits(bits: &[Bit]) -> Result<()> {
    match bits.iter().find(|&&b| b > 1) {
        Some(&b) => Err(Error::InvalidBit(b)),
        None => Ok(()),
    }
}

fn log2_exact(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

/// Reverses the low `width` bits of `i`.
pub fn reverse_bits(i: usize, width: u32) -> usize {
    if width == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - width)
    }
}

/// The bit-reversal permutation of `[1..2^n]`: `π(i) = 1 + rev_n(i − 1)`.
pub fn bit_reversal_permutation(n: u32) -> Vec<usize> {
    (0..1usize << n).map(|i| 1 + reverse_bits(i, n)).collect()
}

/// In-place `x = u·F_2^{⊗n}` with `n` butterfly stages.
pub(crate) fn transform_in_place(bits: &mut [Bit]) {
    let len = bits.len();
    let mut half = 1;
    while half < len {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Natural-order encoder `x = u·F_2^{⊗n}`.
pub fn encode_natural(u: &[Bit]) -> Result<Vec<Bit>> {
    log2_exact(u.len())?;
    check_bits(u)?;
    let mut x = u.to_vec();
    transform_in_place(&mut x);
    Ok(x)
}

/// Bit-reversal-order encoder `x = u·B_N·F_2^{⊗n}`.
pub fn encode_bitrev(u: &[Bit]) -> Result<Vec<Bit>> {
    let n = log2_exact(u.len())?;
    check_bits(u)?;
    let mut x: Vec<Bit> = (0..u.len()).map(|i| u[reverse_bits(i, n)]).collect();
    transform_in_place(&mut x);
    Ok(x)
}

/// Places `payload` on the information positions (ascending) and frozen values
/// everywhere else.
pub fn assemble_source(payload: &[Bit], spec: &CodeSpec) -> Result<Vec<Bit>> {
    if payload.len() != spec.k() {
        return Err(Error::LengthMismatch {
            expected: spec.k(),
            actual: payload.len(),
        });
    }
    check_bits(payload)?;
    let mut u = spec.frozen_pattern();
    for (&i, &b) in spec.info_set.iter().zip(payload) {
        u[i - 1] = b;
    }
    Ok(u)
}

/// Payload → natural-order codeword.
pub fn encode_payload(payload: &[Bit], spec: &CodeSpec) -> Result<Vec<Bit>> {
    let mut u = assemble_source(payload, spec)?;
    transform_in_place(&mut u);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Direct GF(2) product with the explicit Kronecker power, G[i][j] = 1 iff
    // the bits of j are a subset of the bits of i (0-based).
    fn matrix_encode(u: &[Bit]) -> Vec<Bit> {
        let len = u.len();
        (0..len)
            .map(|j| {
                (0..len)
                    .filter(|&i| i & j == j)
                    .fold(0, |acc, i| acc ^ u[i])
            })
            .collect()
    }

    #[test]
    fn bit_reversal_small() {
        assert_eq!(bit_reversal_permutation(0), vec![1]);
        assert_eq!(bit_reversal_permutation(1), vec![1, 2]);
        assert_eq!(bit_reversal_permutation(2), vec![1, 3, 2, 4]);
        assert_eq!(bit_reversal_permutation(3), vec![1, 5, 3, 7, 2, 6, 4, 8]);
    }

    #[test]
    fn bit_reversal_is_involution() {
        for n in 0..=10 {
            let p = bit_reversal_permutation(n);
            for (i, &pi) in p.iter().enumerate() {
                assert_eq!(p[pi - 1], i + 1);
            }
        }
    }

    #[test]
    fn encode_natural_examples() {
        assert_eq!(encode_natural(&[0; 8]).unwrap(), vec![0; 8]);
        assert_eq!(encode_natural(&[0, 0, 0, 0, 0, 0, 0, 1]).unwrap(), vec![1; 8]);
        assert_eq!(
            encode_natural(&[0, 0, 0, 1, 0, 1, 1, 1]).unwrap(),
            vec![0, 1, 1, 0, 1, 0, 0, 1]
        );
        assert_eq!(
            matrix_encode(&[0, 0, 0, 1, 0, 1, 1, 1]),
            vec![0, 1, 1, 0, 1, 0, 0, 1]
        );
    }

    #[test]
    fn encode_bitrev_examples() {
        assert_eq!(encode_bitrev(&[0; 8]).unwrap(), vec![0; 8]);
        for u in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(encode_bitrev(&u).unwrap(), encode_natural(&u).unwrap());
        }
        assert_eq!(encode_bitrev(&[0, 0, 0, 0, 0, 0, 0, 1]).unwrap(), vec![1; 8]);
    }

    #[test]
    fn encoders_reject_bad_lengths_and_bits() {
        assert_eq!(encode_natural(&[0; 6]), Err(Error::NotPowerOfTwo(6)));
        assert_eq!(encode_bitrev(&[]), Err(Error::NotPowerOfTwo(0)));
        assert_eq!(encode_natural(&[0, 2]), Err(Error::InvalidBit(2)));
    }

    #[test]
    fn row_weight_law() {
        for n in 0..=6u32 {
            let len = 1usize << n;
            for i in 0..len {
                let mut e = vec![0; len];
                e[i] = 1;
                let w = encode_natural(&e).unwrap().iter().filter(|&&b| b == 1).count();
                assert_eq!(w, 1 << i.count_ones(), "n={n} i={}", i + 1);
            }
        }
    }

    #[test]
    fn matches_matrix_oracle_exhaustively_n3() {
        for v in 0..256u32 {
            let u: Vec<Bit> = (0..8).map(|i| ((v >> i) & 1) as Bit).collect();
            assert_eq!(encode_natural(&u).unwrap(), matrix_encode(&u));
        }
    }

    #[test]
    fn assemble_source_examples() {
        let spec = CodeSpec::new(3, &[4, 6, 7, 8]).unwrap();
        assert_eq!(
            assemble_source(&[1, 1, 1, 1], &spec).unwrap(),
            vec![0, 0, 0, 1, 0, 1, 1, 1]
        );
        assert_eq!(assemble_source(&[0; 4], &spec).unwrap(), vec![0; 8]);
        let tiny = CodeSpec::new(1, &[2]).unwrap();
        assert_eq!(assemble_source(&[1], &tiny).unwrap(), vec![0, 1]);
        assert!(matches!(
            assemble_source(&[1, 1], &spec),
            Err(Error::LengthMismatch { expected: 4, actual: 2 })
        ));
    }

    #[test]
    fn code_spec_validation() {
        assert!(CodeSpec::new(3, &[]).is_err());
        assert!(CodeSpec::new(3, &[0, 1]).is_err());
        assert!(CodeSpec::new(3, &[9]).is_err());
        assert!(CodeSpec::new(3, &[2, 2]).is_err());
        let spec = CodeSpec::new(3, &[8, 4, 7, 6]).unwrap();
        assert_eq!(spec.info_set(), &[4, 6, 7, 8]);
        assert_eq!(spec.frozen_set(), vec![1, 2, 3, 5]);
        assert_eq!(spec.k(), 4);
        assert_eq!(spec.len(), 8);
        assert!(CodeSpec::new(3, &[1, 2, 3, 4, 5, 6, 7, 8]).is_ok());
    }

    #[test]
    fn nonzero_frozen_values_are_placed() {
        let spec = CodeSpec::with_frozen_values(2, &[4], vec![1, 0, 1]).unwrap();
        assert_eq!(assemble_source(&[0], &spec).unwrap(), vec![1, 0, 1, 0]);
    }
}
