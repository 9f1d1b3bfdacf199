//! CRC outer code: plain polynomial division, zero initial state, no
//! reflection, MSB first.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::polar::check_bits;
use crate::Bit;

/// A CRC generator polynomial `g(x)` of degree `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CrcSpec {
    degree: u32,
    // g(x) without its leading x^m term; bit j is the coefficient of x^j
    low: u64,
}

/// Polynomials used in the CRC-polar literature, as `(name, hex, degree)`.
pub const KNOWN_POLYNOMIALS: &[(&str, &str, u32)] = &[
    ("CRC6", "0x43", 6),
    ("CRC6-opt", "0x73", 6),
    ("CRC8", "0x9F", 8),
    ("CRC9", "0x2CF", 9),
    ("CRC9-opt", "0x269", 9),
    ("CRC10", "0x633", 10),
    ("CRC10-opt", "0x75F", 10),
    ("CRC16", "0x117B7", 16),
    ("CRC20", "0x1005D1", 20),
    ("CRC24", "0x10001E5", 24),
];

impl CrcSpec {
    /// Builds a spec from the full coefficient vector `[g_m, …, g_0]`
    /// (leading coefficient first, must be 1).
    pub fn from_bits(poly_bits: &[Bit]) -> Result<Self> {
        check_bits(poly_bits)?;
        if poly_bits.len() < 2 || poly_bits.len() > 64 {
            return Err(Error::InvalidPolynomial(format!(
                "degree {} outside [1, 63]",
                poly_bits.len().saturating_sub(1)
            )));
        }
        if poly_bits[0] != 1 {
            return Err(Error::InvalidPolynomial("leading coefficient must be 1".into()));
        }
        let degree = (poly_bits.len() - 1) as u32;
        let low = poly_bits[1..]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        Ok(Self { degree, low })
    }

    /// Parses a hexadecimal polynomial.
    ///
    /// A value that is exactly `m + 1` bits long carries its own leading
    /// term. A value of at most `m` bits gets an implicit `x^m` prepended.
    /// Anything longer than `m + 1` bits is rejected.
    pub fn parse_poly(hex: &str, declared_degree: u32) -> Result<Self> {
        let digits = hex
            .trim()
            .trim_start_matches("0x")
            .trim_start_matches("0X");
        if digits.is_empty() {
            return Err(Error::InvalidPolynomial("empty hex string".into()));
        }
        if declared_degree == 0 || declared_degree > 63 {
            return Err(Error::InvalidPolynomial(format!(
                "degree {declared_degree} outside [1, 63]"
            )));
        }
        let value = u64::from_str_radix(digits, 16)
            .map_err(|e| Error::InvalidPolynomial(format!("'{hex}': {e}")))?;
        let bit_len = u64::BITS - value.leading_zeros();
        let m = declared_degree;
        let mask = (1u64 << m) - 1;
        if bit_len == m + 1 {
            Ok(Self {
                degree: m,
                low: value & mask,
            })
        } else if bit_len <= m {
            Ok(Self {
                degree: m,
                low: value,
            })
        } else {
            Err(Error::InvalidPolynomial(format!(
                "'{hex}' has {bit_len} bits, more than degree {m} + 1"
            )))
        }
    }

    /// Looks up one of [`KNOWN_POLYNOMIALS`] by name (case-insensitive).
    pub fn named(name: &str) -> Option<Self> {
        KNOWN_POLYNOMIALS
            .iter()
            .find(|(n, _, _)| n.eq_ignore_ascii_case(name))
            .map(|&(_, hex, m)| Self::parse_poly(hex, m).expect("catalogue entries are valid"))
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    /// Coefficients `[g_m, …, g_0]`, leading 1 first.
    pub fn poly_bits(&self) -> Vec<Bit> {
        let m = self.degree;
        std::iter::once(1)
            .chain((0..m).rev().map(|j| ((self.low >> j) & 1) as Bit))
            .collect()
    }

    /// The polynomial as hex including its leading term.
    pub fn to_hex(&self) -> String {
        format!("0x{:X}", (1u64 << self.degree) | self.low)
    }

    fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    /// `(bits(x) · x^m) mod g(x)`, MSB first.
    pub fn remainder(&self, bits: &[Bit]) -> Vec<Bit> {
        let m = self.degree;
        let mask = self.mask();
        let mut reg = 0u64;
        for &b in bits {
            let feedback = ((reg >> (m - 1)) & 1) ^ u64::from(b & 1);
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.low;
            }
        }
        (0..m).rev().map(|j| ((reg >> j) & 1) as Bit).collect()
    }

    // block(x) mod g(x) == 0, for any block length
    pub(crate) fn divides(&self, block: &[Bit]) -> bool {
        let m = self.degree;
        let mask = self.mask();
        let mut reg = 0u64;
        for &b in block {
            let top = (reg >> (m - 1)) & 1;
            reg = ((reg << 1) | u64::from(b & 1)) & mask;
            if top == 1 {
                reg ^= self.low;
            }
        }
        reg == 0
    }
}

impl fmt::Display for CrcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.to_hex(), self.degree)
    }
}

/// `<hex>:<degree>`, e.g. `0x9F:8`, or a catalogue name such as `CRC8`.
impl FromStr for CrcSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some((hex, degree)) = s.split_once(':') {
            let degree = degree
                .trim()
                .parse::<u32>()
                .map_err(|e| Error::InvalidPolynomial(format!("degree '{degree}': {e}")))?;
            Self::parse_poly(hex, degree)
        } else {
            Self::named(s.trim())
                .ok_or_else(|| Error::InvalidPolynomial(format!("expected <hex>:<degree>, got '{s}'")))
        }
    }
}

/// Systematic CRC encoding: `payload ‖ remainder`.
pub fn crc_encode(payload: &[Bit], spec: &CrcSpec) -> Result<Vec<Bit>> {
    check_bits(payload)?;
    let mut out = payload.to_vec();
    out.extend(spec.remainder(payload));
    Ok(out)
}

/// True iff `g(x)` divides the block.
pub fn crc_check(block: &[Bit], spec: &CrcSpec) -> Result<bool> {
    if block.len() <= spec.degree() {
        return Err(Error::LengthMismatch {
            expected: spec.degree() + 1,
            actual: block.len(),
        });
    }
    check_bits(block)?;
    Ok(spec.divides(block))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Textbook long division over GF(2) on explicit coefficient vectors.
    fn long_division_remainder(payload: &[Bit], poly: &[Bit]) -> Vec<Bit> {
        let m = poly.len() - 1;
        let mut work: Vec<Bit> = payload.to_vec();
        work.extend(std::iter::repeat(0).take(m));
        for i in 0..payload.len() {
            if work[i] == 1 {
                for (j, &g) in poly.iter().enumerate() {
                    work[i + j] ^= g;
                }
            }
        }
        work[payload.len()..].to_vec()
    }

    #[test]
    fn parse_examples() {
        let c6 = CrcSpec::parse_poly("0x43", 6).unwrap();
        assert_eq!(c6.poly_bits(), vec![1, 0, 0, 0, 0, 1, 1]);
        let c20 = CrcSpec::parse_poly("0x1005D1", 20).unwrap();
        assert_eq!(c20.poly_bits().len(), 21);
        assert_eq!(c20.to_hex(), "0x1005D1");
        let c8 = CrcSpec::parse_poly("0x9F", 8).unwrap();
        assert_eq!(c8.poly_bits(), vec![1, 1, 0, 0, 1, 1, 1, 1, 1]);
        assert_eq!(c8.to_hex(), "0x19F");
        assert!(CrcSpec::parse_poly("0x1FF", 7).is_err());
        assert!(CrcSpec::parse_poly("", 7).is_err());
        assert!(CrcSpec::parse_poly("0xZZ", 7).is_err());
    }

    #[test]
    fn parse_cli_form() {
        let c: CrcSpec = "0x9F:8".parse().unwrap();
        assert_eq!(c.degree(), 8);
        assert_eq!(c, CrcSpec::named("crc8").unwrap());
        assert!("0x9F".parse::<CrcSpec>().is_err());
        assert!("0x9F:x".parse::<CrcSpec>().is_err());
    }

    #[test]
    fn catalogue_is_well_formed() {
        for &(name, hex, m) in KNOWN_POLYNOMIALS {
            let spec = CrcSpec::named(name).unwrap();
            assert_eq!(spec.degree(), m as usize);
            assert_eq!(spec.poly_bits()[0], 1);
            // every catalogue polynomial has a nonzero constant term
            assert_eq!(*spec.poly_bits().last().unwrap(), 1, "{name} {hex}");
        }
    }

    #[test]
    fn encode_examples() {
        let c6 = CrcSpec::parse_poly("0x43", 6).unwrap();
        assert_eq!(crc_encode(&[1], &c6).unwrap(), vec![1, 0, 0, 0, 0, 1, 1]);
        assert_eq!(crc_encode(&[0; 10], &c6).unwrap(), vec![0; 16]);
        assert_eq!(crc_encode(&[], &c6).unwrap(), vec![0; 6]);
    }

    #[test]
    fn matches_long_division() {
        for &(name, _, _) in KNOWN_POLYNOMIALS {
            let spec = CrcSpec::named(name).unwrap();
            for v in 0..200u64 {
                let payload: Vec<Bit> = (0..37).map(|i| ((v.wrapping_mul(0x9E37_79B9) >> (i % 61)) & 1) as Bit).collect();
                assert_eq!(
                    spec.remainder(&payload),
                    long_division_remainder(&payload, &spec.poly_bits())
                );
            }
        }
    }

    #[test]
    fn check_examples_and_single_errors() {
        let c8 = CrcSpec::named("CRC8").unwrap();
        assert!(crc_check(&[0; 12], &c8).unwrap());
        assert!(crc_check(&[0; 8], &c8).is_err());
        let block = crc_encode(&[1, 0, 1, 1, 0, 0, 1], &c8).unwrap();
        assert!(crc_check(&block, &c8).unwrap());
        for pos in 0..block.len() {
            let mut bad = block.clone();
            bad[pos] ^= 1;
            assert!(!crc_check(&bad, &c8).unwrap(), "flip at {pos} undetected");
        }
    }

    #[test]
    fn single_error_detection_all_catalogue_polys() {
        for &(name, _, _) in KNOWN_POLYNOMIALS {
            let spec = CrcSpec::named(name).unwrap();
            let m = spec.degree();
            for len in (m + 1)..=64 {
                for pos in 0..len {
                    let mut e = vec![0; len];
                    e[pos] = 1;
                    assert!(!crc_check(&e, &spec).unwrap(), "{name} len {len} pos {pos}");
                }
            }
        }
    }
}
