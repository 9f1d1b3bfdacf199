//! Rate matching by quasi-uniform puncturing (QUP) and reversal quasi-uniform
//! shortening (RQUS).
//!
//! A plan deletes `Q = N − M` code bits from the mother codeword. Punctured
//! bits are unknown to the receiver (LLR 0); shortened bits are known zeros
//! (LLR `+LLR_SAT`).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::polar::{check_bits, reverse_bits};
use crate::{Bit, LLR_SAT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMatchMode {
    PunctureQup,
    ShortenRqus,
}

impl RateMatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RateMatchMode::PunctureQup => "qup",
            RateMatchMode::ShortenRqus => "rqus",
        }
    }
}

impl fmt::Display for RateMatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the deleted positions land in the mother codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableOrder {
    /// Mark the first (QUP) or last (RQUS) `Q` table entries, then apply the
    /// bit-reversal permutation to the table.
    BitReversed,
    /// Delete the first (QUP) or last (RQUS) `Q` code bits directly.
    Natural5g,
}

impl FromStr for TableOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitrev" | "bit-reversed" => Ok(TableOrder::BitReversed),
            "natural" | "5g" => Ok(TableOrder::Natural5g),
            _ => Err(Error::Parse(format!("unknown table order '{s}'"))),
        }
    }
}

impl fmt::Display for TableOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableOrder::BitReversed => "bitrev",
            TableOrder::Natural5g => "natural",
        })
    }
}

/// How a plan is chosen from `(K, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMatchSelector {
    Qup,
    Rqus,
    /// QUP when `K/M ≤ 7/16`, RQUS otherwise.
    Auto,
}

impl FromStr for RateMatchSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qup" => Ok(RateMatchSelector::Qup),
            "rqus" => Ok(RateMatchSelector::Rqus),
            "auto" => Ok(RateMatchSelector::Auto),
            _ => Err(Error::Parse(format!("unknown rate-match mode '{s}'"))),
        }
    }
}

impl fmt::Display for RateMatchSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMatchSelector::Qup => "qup",
            RateMatchSelector::Rqus => "rqus",
            RateMatchSelector::Auto => "auto",
        })
    }
}

impl RateMatchSelector {
    pub fn resolve(self, k: usize, m: usize) -> Result<RateMatchMode> {
        match self {
            RateMatchSelector::Qup => Ok(RateMatchMode::PunctureQup),
            RateMatchSelector::Rqus => Ok(RateMatchMode::ShortenRqus),
            RateMatchSelector::Auto => select_mode(k, m),
        }
    }
}

/// An immutable puncturing/shortening plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateMatchPlan {
    mother_len: usize,
    mode: RateMatchMode,
    order: TableOrder,
    table: Vec<Bit>,
    deleted: Vec<usize>,
}

impl RateMatchPlan {
    fn build(mother_len: usize, q: usize, mode: RateMatchMode, order: TableOrder) -> Result<Self> {
        if mother_len == 0 || !mother_len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(mother_len));
        }
        if q >= mother_len {
            return Err(Error::OutOfRange(format!(
                "Q = {q} deletions leave nothing of N = {mother_len}"
            )));
        }
        let n = mother_len.trailing_zeros();
        let mut base = vec![1; mother_len];
        match mode {
            RateMatchMode::PunctureQup => base[..q].fill(0),
            RateMatchMode::ShortenRqus => base[mother_len - q..].fill(0),
        }
        let table: Vec<Bit> = match order {
            TableOrder::Natural5g => base,
            TableOrder::BitReversed => (0..mother_len).map(|i| base[reverse_bits(i, n)]).collect(),
        };
        let deleted = table
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == 0)
            .map(|(i, _)| i + 1)
            .collect();
        Ok(Self {
            mother_len,
            mode,
            order,
            table,
            deleted,
        })
    }

    /// Plan for transmitting `m` bits of a `2^⌈log₂ m⌉` mother code.
    pub fn for_target(m: usize, mode: RateMatchMode, order: TableOrder) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange("target length M must be >= 1".into()));
        }
        let mother = m.next_power_of_two();
        Self::build(mother, mother - m, mode, order)
    }

    pub fn mother_len(&self) -> usize {
        self.mother_len
    }

    /// Transmitted length `M`.
    pub fn target_len(&self) -> usize {
        self.mother_len - self.deleted.len()
    }

    pub fn deletions(&self) -> usize {
        self.deleted.len()
    }

    pub fn mode(&self) -> RateMatchMode {
        self.mode
    }

    pub fn order(&self) -> TableOrder {
        self.order
    }

    /// `T_N`: 0 where the code bit is deleted.
    pub fn table(&self) -> &[Bit] {
        &self.table
    }

    /// Sorted 1-based deleted positions.
    pub fn deleted(&self) -> &[usize] {
        &self.deleted
    }

    /// Source indices that must be frozen to zero: in shortening mode, the
    /// shortened positions themselves (the transform is lower-triangular, so
    /// freezing `u_i` for every shortened `i` forces `x_i = 0`).
    pub fn forced_frozen(&self) -> &[usize] {
        match self.mode {
            RateMatchMode::ShortenRqus => &self.deleted,
            RateMatchMode::PunctureQup => &[],
        }
    }
}

/// QUP plan deleting `q` of `n_len` bits.
pub fn build_qup_table(n_len: usize, q: usize, order: TableOrder) -> Result<RateMatchPlan> {
    RateMatchPlan::build(n_len, q, RateMatchMode::PunctureQup, order)
}

/// RQUS plan deleting `q` of `n_len` bits.
pub fn build_rqus_table(n_len: usize, q: usize, order: TableOrder) -> Result<RateMatchPlan> {
    RateMatchPlan::build(n_len, q, RateMatchMode::ShortenRqus, order)
}

/// QUP for `K/M ≤ 7/16`, RQUS above.
pub fn select_mode(k: usize, m: usize) -> Result<RateMatchMode> {
    if k == 0 || k > m {
        return Err(Error::OutOfRange(format!("need 0 < K <= M, got K = {k}, M = {m}")));
    }
    // K/M <= 7/16 without rounding
    if 16 * k <= 7 * m {
        Ok(RateMatchMode::PunctureQup)
    } else {
        Ok(RateMatchMode::ShortenRqus)
    }
}

/// Removes the deleted positions from a mother codeword.
pub fn apply(x: &[Bit], plan: &RateMatchPlan) -> Result<Vec<Bit>> {
    if x.len() != plan.mother_len {
        return Err(Error::LengthMismatch {
            expected: plan.mother_len,
            actual: x.len(),
        });
    }
    check_bits(x)?;
    if plan.mode == RateMatchMode::ShortenRqus {
        if let Some(&pos) = plan.deleted.iter().find(|&&p| x[p - 1] != 0) {
            return Err(Error::ShortenedBitNonzero(pos));
        }
    }
    Ok(x.iter()
        .zip(&plan.table)
        .filter(|(_, &t)| t == 1)
        .map(|(&b, _)| b)
        .collect())
}

/// Reinserts received LLRs at their mother-code positions: 0 for punctured
/// bits, `+LLR_SAT` for shortened ones.
pub fn fill_llrs(received: &[f64], plan: &RateMatchPlan) -> Result<Vec<f64>> {
    let mut out = vec![0.0; plan.mother_len];
    fill_llrs_into(received, plan, &mut out)?;
    Ok(out)
}

pub fn fill_llrs_into(received: &[f64], plan: &RateMatchPlan, out: &mut [f64]) -> Result<()> {
    if received.len() != plan.target_len() {
        return Err(Error::LengthMismatch {
            expected: plan.target_len(),
            actual: received.len(),
        });
    }
    if out.len() != plan.mother_len {
        return Err(Error::LengthMismatch {
            expected: plan.mother_len,
            actual: out.len(),
        });
    }
    let deleted_llr = match plan.mode {
        RateMatchMode::PunctureQup => 0.0,
        RateMatchMode::ShortenRqus => LLR_SAT,
    };
    let mut it = received.iter();
    for (slot, &t) in out.iter_mut().zip(&plan.table) {
        *slot = if t == 1 {
            *it.next().expect("length checked")
        } else {
            deleted_llr
        };
    }
    Ok(())
}
