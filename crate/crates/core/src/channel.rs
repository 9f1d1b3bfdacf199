//! BEC and BPSK/AWGN channels, LLR computation and SNR conversions.
//!
//! BPSK maps bit `b` to `1 − 2b`. Noise is drawn from a [`ChaCha8Rng`] stream
//! through `rand_distr::StandardNormal` (ziggurat) and scaled by `σ`, so a
//! given stream seed always yields the same noise vector.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{Bit, LLR_SAT};

/// Random stream handed to the channel functions.
pub type RngStream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Bec { epsilon: f64 },
    BiAwgn { sigma: f64 },
}

impl ChannelModel {
    pub fn bec(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(ChannelModel::Bec { epsilon })
    }

    pub fn biawgn(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(ChannelModel::BiAwgn { sigma })
    }

    /// Sends `x` and returns channel LLRs.
    pub fn transmit_llrs(&self, x: &[Bit], rng: &mut RngStream) -> Vec<f64> {
        match *self {
            ChannelModel::Bec { epsilon } => transmit_bec_unchecked(x, epsilon, rng),
            ChannelModel::BiAwgn { sigma } => transmit_awgn_unchecked(x, sigma, rng)
                .into_iter()
                .map(|y| llr_awgn_unchecked(y, sigma))
                .collect(),
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("noise std {sigma} must be > 0")))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("erasure probability {epsilon} outside [0, 1]")))
    }
}

/// `y_i = (1 − 2x_i) + n_i`, `n_i ~ N(0, σ²)`.
pub fn transmit_awgn(x: &[Bit], sigma: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    Ok(transmit_awgn_unchecked(x, sigma, rng))
}

fn transmit_awgn_unchecked(x: &[Bit], sigma: f64, rng: &mut RngStream) -> Vec<f64> {
    x.iter()
        .map(|&b| {
            let noise: f64 = rng.sample(StandardNormal);
            (1.0 - 2.0 * f64::from(b)) + sigma * noise
        })
        .collect()
}

/// `2y/σ²`, clamped to `±LLR_SAT`.
pub fn llr_awgn(y: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(llr_awgn_unchecked(y, sigma))
}

fn llr_awgn_unchecked(y: f64, sigma: f64) -> f64 {
    (2.0 * y / (sigma * sigma)).clamp(-LLR_SAT, LLR_SAT)
}

/// Erases each bit with probability `ε` (LLR 0); delivers the rest as
/// `±LLR_SAT`.
pub fn transmit_bec(x: &[Bit], epsilon: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    Ok(transmit_bec_unchecked(x, epsilon, rng))
}

fn transmit_bec_unchecked(x: &[Bit], epsilon: f64, rng: &mut RngStream) -> Vec<f64> {
    x.iter()
        .map(|&b| {
            let erased = rng.random::<f64>() < epsilon;
            if erased {
                0.0
            } else if b == 0 {
                LLR_SAT
            } else {
                -LLR_SAT
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnrReference {
    /// Energy per transmitted symbol.
    EsN0,
    /// Energy per information bit.
    EbN0,
}

impl FromStr for SnrReference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "es" | "esn0" => Ok(SnrReference::EsN0),
            "eb" | "ebn0" => Ok(SnrReference::EbN0),
            _ => Err(Error::Parse(format!("unknown SNR reference '{s}'"))),
        }
    }
}

impl fmt::Display for SnrReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnrReference::EsN0 => "es",
            SnrReference::EbN0 => "eb",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub db: f64,
    pub reference: SnrReference,
    /// Code rate used for the `Eb/N0 → Es/N0` conversion.
    pub rate: f64,
}

impl SnrPoint {
    pub fn es_n0(db: f64) -> Self {
        Self {
            db,
            reference: SnrReference::EsN0,
            rate: 1.0,
        }
    }

    pub fn eb_n0(db: f64, rate: f64) -> Self {
        Self {
            db,
            reference: SnrReference::EbN0,
            rate,
        }
    }

    /// `Es/N0` in dB: `Eb/N0 + 10·log₁₀ R` for an `Eb/N0` point.
    pub fn es_n0_db(&self) -> Result<f64> {
        match self.reference {
            SnrReference::EsN0 => Ok(self.db),
            SnrReference::EbN0 => {
                if !(self.rate > 0.0) || !self.rate.is_finite() {
                    return Err(Error::OutOfRange(format!("code rate {} must be > 0", self.rate)));
                }
                Ok(self.db + 10.0 * self.rate.log10())
            }
        }
    }
}

/// Noise standard deviation for unit-energy BPSK: `σ² = 1 / (2·10^{Es/N0/10})`.
pub fn snr_to_sigma(point: &SnrPoint) -> Result<f64> {
    let es = point.es_n0_db()?;
    Ok((0.5 / 10f64.powf(es / 10.0)).sqrt())
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one simulated frame, a pure function of
/// `(master_seed, snr_index, frame_index)`.
///
/// The triple is absorbed through SplitMix64 and the four resulting words
/// form the ChaCha8 key.
pub fn frame_stream(master_seed: u64, snr_index: u64, frame_index: u64) -> RngStream {
    let mut state = master_seed;
    let _ = splitmix64(&mut state);
    state ^= snr_index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let _ = splitmix64(&mut state);
    state ^= frame_index.wrapping_mul(0xABC9_8388_FB8F_AC03);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn llr_examples() {
        assert_eq!(llr_awgn(1.0, 1.0).unwrap(), 2.0);
        assert_eq!(llr_awgn(0.0, 0.7).unwrap(), 0.0);
        assert!((llr_awgn(-3.0, 0.5f64.sqrt()).unwrap() + 12.0).abs() < 1e-12);
        assert_eq!(llr_awgn(1.0, 1e-3).unwrap(), LLR_SAT);
        assert!(llr_awgn(1.0, 0.0).is_err());
    }

    #[test]
    fn snr_examples() {
        let s = snr_to_sigma(&SnrPoint::es_n0(0.0)).unwrap();
        assert!((s * s - 0.5).abs() < 1e-15);
        let es = SnrPoint::eb_n0(0.0, 0.5).es_n0_db().unwrap();
        assert!((es + 3.010_299_956_639_812).abs() < 1e-12);
        let a = snr_to_sigma(&SnrPoint::es_n0(2.0)).unwrap();
        let b = snr_to_sigma(&SnrPoint::es_n0(2.0 - 10.0 * 2f64.log10())).unwrap();
        assert!((b * b / (a * a) - 2.0).abs() < 1e-12);
        assert!(snr_to_sigma(&SnrPoint::eb_n0(1.0, 0.0)).is_err());
        assert!(snr_to_sigma(&SnrPoint::eb_n0(1.0, -0.5)).is_err());
    }

    #[test]
    fn noiseless_limit() {
        let mut rng = frame_stream(1, 0, 0);
        let y = transmit_awgn(&[0, 1, 1, 0], 1e-300, &mut rng).unwrap();
        assert_eq!(y, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn bec_extremes() {
        let mut rng = frame_stream(5, 1, 2);
        let x = [0, 1, 0, 1, 1];
        assert_eq!(
            transmit_bec(&x, 0.0, &mut rng).unwrap(),
            vec![LLR_SAT, -LLR_SAT, LLR_SAT, -LLR_SAT, -LLR_SAT]
        );
        assert_eq!(transmit_bec(&x, 1.0, &mut rng).unwrap(), vec![0.0; 5]);
        assert!(transmit_bec(&x, 1.5, &mut rng).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let x = vec![0; 64];
        let a = transmit_awgn(&x, 1.0, &mut frame_stream(9, 2, 3)).unwrap();
        let b = transmit_awgn(&x, 1.0, &mut frame_stream(9, 2, 3)).unwrap();
        let c = transmit_awgn(&x, 1.0, &mut frame_stream(9, 2, 4)).unwrap();
        let d = transmit_awgn(&x, 1.0, &mut frame_stream(9, 3, 3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
