//! Successive-cancellation decoders as searches over the code tree.
//!
//! Every decoder works with LLRs (positive ⇒ bit 0) and a path metric where
//! lower is better:
//!
//! * `Exact`: `pm + ln(1 + e^{−(1−2û)·L})`, with the exact box-plus `f`.
//! * `MinSum`: `pm + |L|` when `û` disagrees with the sign of `L`, with the
//!   min-sum `f`.
//!
//! [`sc_decode`] is the greedy search, [`scl_decode`] keeps the `L` best paths
//! level by level, [`scs_decode`] is a best-first stack search. The CRC-aided
//! variants pick the best candidate that passes the outer CRC.

use std::fmt;
use std::str::FromStr;

use crate::crc::CrcSpec;
use crate::error::{Error, Result};
use crate::polar::CodeSpec;
use crate::{Bit, LLR_SAT};

mod list;
mod sc;
mod stack;
mod tree;

pub use list::{ca_scl_decode, scl_decode, ListDecoder, ListOutput};
pub use sc::{sc_decode, ScDecoder};
pub use stack::{ca_scs_decode, scs_decode, StackDecoder};

/// Arithmetic used for `f` and the path metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricMode {
    Exact,
    MinSum,
}

impl FromStr for MetricMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(MetricMode::Exact),
            "minsum" | "min-sum" => Ok(MetricMode::MinSum),
            _ => Err(Error::Parse(format!("unknown metric mode '{s}'"))),
        }
    }
}

impl fmt::Display for MetricMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricMode::Exact => "exact",
            MetricMode::MinSum => "minsum",
        })
    }
}

#[inline]
fn clamp(x: f64) -> f64 {
    x.clamp(-LLR_SAT, LLR_SAT)
}

/// Check-node update. `Exact` evaluates `2·artanh(tanh(a/2)·tanh(b/2))` as
/// `sign·(min − ln(1 + e^{−|a+b|}) + ln(1 + e^{−|a−b|}))`, which stays finite for
/// any finite input.
#[inline]
pub fn f_combine(a: f64, b: f64, mode: MetricMode) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let (ma, mb) = (a.abs(), b.abs());
    let min = ma.min(mb);
    let mag = match mode {
        MetricMode::MinSum => min,
        MetricMode::Exact => {
            let corr = (-(ma + mb)).exp().ln_1p() - (-(ma - mb).abs()).exp().ln_1p();
            (min + corr).max(0.0)
        }
    };
    clamp(sign * mag)
}

/// Variable-node update `(1 − 2·bit)·a + b`.
#[inline]
pub fn g_combine(a: f64, b: f64, partial_bit: Bit) -> f64 {
    clamp(if partial_bit == 0 { b + a } else { b - a })
}

/// Metric after deciding `decision` on a bit whose LLR is `llr`. Never less
/// than `pm`.
#[inline]
pub fn pm_update(pm: f64, llr: f64, decision: Bit, mode: MetricMode) -> f64 {
    let x = if decision == 0 { -llr } else { llr };
    match mode {
        // ln(1 + e^x)
        MetricMode::Exact => pm + x.max(0.0) + (-x.abs()).exp().ln_1p(),
        MetricMode::MinSum => {
            if x > 0.0 {
                pm + x
            } else {
                pm
            }
        }
    }
}

/// Outcome of the CRC test on the selected path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrcStatus {
    Passed,
    Failed,
    NotChecked,
}

/// One candidate from a list or stack search.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodePath {
    /// `û_1 … û_N` (or a prefix).
    pub decisions: Vec<Bit>,
    /// Accumulated cost, lower is better.
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Recovered payload: the `K` information bits, or the `k = K − m`
    /// leading ones for CRC-aided decoders.
    pub payload: Vec<Bit>,
    pub metric: f64,
    pub crc: CrcStatus,
    /// Number of bit-channel LLR evaluations, i.e. code-tree nodes expanded.
    pub visited_nodes: u64,
    /// Full source-block estimate `û`.
    pub decisions: Vec<Bit>,
}

impl DecodeOutcome {
    fn from_decisions(
        decisions: Vec<Bit>,
        metric: f64,
        spec: &CodeSpec,
        crc: Option<&CrcSpec>,
        visited_nodes: u64,
    ) -> Self {
        let info: Vec<Bit> = spec.info_set().iter().map(|&i| decisions[i - 1]).collect();
        let (payload, status) = match crc {
            None => (info, CrcStatus::NotChecked),
            Some(c) => {
                let k = info.len() - c.degree();
                let status = if c.divides(&info) {
                    CrcStatus::Passed
                } else {
                    CrcStatus::Failed
                };
                (info[..k].to_vec(), status)
            }
        };
        Self {
            payload,
            metric,
            crc: status,
            visited_nodes,
            decisions,
        }
    }
}

/// Which decoder to run, as parsed from `sc`, `scl:L=8`, `scs:D=1024`,
/// `ca-scl:L=32`, `ca-scs:D=1024` or `ca-scs:D=1024,L=32`.
///
/// For the stack decoders `L` is the optional search width: the number of
/// times paths of any one length may be popped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Sc,
    Scl { list_size: usize },
    Scs { stack_depth: usize, search_width: Option<usize> },
    CaScl { list_size: usize },
    CaScs { stack_depth: usize, search_width: Option<usize> },
}

impl DecoderKind {
    pub fn uses_crc(self) -> bool {
        matches!(self, DecoderKind::CaScl { .. } | DecoderKind::CaScs { .. })
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stack = |f: &mut fmt::Formatter<'_>, name: &str, d: usize, w: Option<usize>| match w {
            Some(w) => write!(f, "{name}:D={d},L={w}"),
            None => write!(f, "{name}:D={d}"),
        };
        match *self {
            DecoderKind::Sc => write!(f, "sc"),
            DecoderKind::Scl { list_size } => write!(f, "scl:L={list_size}"),
            DecoderKind::CaScl { list_size } => write!(f, "ca-scl:L={list_size}"),
            DecoderKind::Scs { stack_depth, search_width } => stack(f, "scs", stack_depth, search_width),
            DecoderKind::CaScs { stack_depth, search_width } => stack(f, "ca-scs", stack_depth, search_width),
        }
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let mut params: Vec<(&str, usize)> = Vec::new();
        for arg in args.into_iter().flat_map(|a| a.split(',')) {
            let (key, value) = arg
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected <key>=<n>, got '{arg}'")))?;
            let value = value
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("{key}: {e}")))?;
            params.push((key.trim(), value));
        }
        let allowed: &[&str] = match name {
            "sc" => &[],
            "scl" | "ca-scl" => &["L"],
            "scs" | "ca-scs" => &["D", "L"],
            _ => return Err(Error::Parse(format!("unknown decoder '{s}'"))),
        };
        if let Some((key, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::Parse(format!("decoder '{name}' takes no parameter {key}")));
        }
        let lookup = |key: &str| params.iter().rev().find(|(k, _)| *k == key).map(|&(_, v)| v);
        let required = |key: &str| {
            lookup(key).ok_or_else(|| Error::Parse(format!("decoder '{name}' needs {key}=<n>")))
        };
        let kind = match name {
            "sc" => DecoderKind::Sc,
            "scl" => DecoderKind::Scl { list_size: required("L")? },
            "ca-scl" => DecoderKind::CaScl { list_size: required("L")? },
            "scs" => DecoderKind::Scs {
                stack_depth: required("D")?,
                search_width: lookup("L"),
            },
            _ => DecoderKind::CaScs {
                stack_depth: required("D")?,
                search_width: lookup("L"),
            },
        };
        match kind {
            DecoderKind::Scl { list_size: 0 } | DecoderKind::CaScl { list_size: 0 } => {
                Err(Error::Parse("list size must be >= 1".into()))
            }
            DecoderKind::Scs { stack_depth, search_width } | DecoderKind::CaScs { stack_depth, search_width }
                if stack_depth < 2 || search_width == Some(0) =>
            {
                Err(Error::Parse("stack depth must be >= 2 and search width >= 1".into()))
            }
            k => Ok(k),
        }
    }
}

/// A decoder instance with its own scratch memory. One instance handles one
/// frame at a time.
pub enum Decoder {
    Sc(ScDecoder),
    List(ListDecoder),
    Stack(StackDecoder),
}

impl Decoder {
    /// Builds the decoder for `kind`. `crc` is required by the CRC-aided kinds
    /// and ignored otherwise.
    pub fn new(kind: DecoderKind, spec: &CodeSpec, crc: Option<&CrcSpec>, mode: MetricMode) -> Result<Self> {
        let need_crc = || -> Result<CrcSpec> {
            let c = crc.ok_or_else(|| Error::Config(format!("decoder {kind} needs a CRC")))?;
            Ok(c.clone())
        };
        Ok(match kind {
            DecoderKind::Sc => Decoder::Sc(ScDecoder::new(spec.clone(), mode)),
            DecoderKind::Scl { list_size } => Decoder::List(ListDecoder::new(spec.clone(), list_size, mode, None)?),
            DecoderKind::CaScl { list_size } => {
                Decoder::List(ListDecoder::new(spec.clone(), list_size, mode, Some(need_crc()?))?)
            }
            DecoderKind::Scs { stack_depth, search_width } => Decoder::Stack(
                StackDecoder::new(spec.clone(), stack_depth, mode, None)?.with_search_width(search_width),
            ),
            DecoderKind::CaScs { stack_depth, search_width } => Decoder::Stack(
                StackDecoder::new(spec.clone(), stack_depth, mode, Some(need_crc()?))?
                    .with_search_width(search_width),
            ),
        })
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<DecodeOutcome> {
        match self {
            Decoder::Sc(d) => d.decode(channel_llrs),
            Decoder::List(d) => d.decode(channel_llrs).map(|o| o.best),
            Decoder::Stack(d) => d.decode(channel_llrs),
        }
    }
}

pub(crate) fn check_frame(channel_llrs: &[f64], spec: &CodeSpec) -> Result<()> {
    if channel_llrs.len() != spec.len() {
        return Err(Error::LengthMismatch {
            expected: spec.len(),
            actual: channel_llrs.len(),
        });
    }
    if let Some(bad) = channel_llrs.iter().find(|v| !v.is_finite()) {
        return Err(Error::OutOfRange(format!("non-finite channel LLR {bad}")));
    }
    Ok(())
}

pub(crate) fn check_crc_fits(spec: &CodeSpec, crc: Option<&CrcSpec>) -> Result<()> {
    if let Some(c) = crc {
        if spec.k() < c.degree() {
            return Err(Error::Config(format!(
                "K = {} is smaller than the CRC degree {}",
                spec.k(),
                c.degree()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        for x in [-5.0, -0.1, 0.0, 2.0, 300.0] {
            for mode in [MetricMode::Exact, MetricMode::MinSum] {
                assert_eq!(f_combine(0.0, x, mode).abs(), 0.0);
            }
        }
        for b in [-7.5, -1.0, 0.3, 4.0, 42.0] {
            assert!((f_combine(LLR_SAT, b, MetricMode::Exact) - b).abs() < 1e-9);
            assert_eq!(f_combine(LLR_SAT, b, MetricMode::MinSum), b);
        }
        // 2·artanh(tanh(1)·tanh(1.5))
        let v = f_combine(2.0, 3.0, MetricMode::Exact);
        assert!((v - 1.693_453_660_970_895).abs() < 1e-12, "{v}");
        assert_eq!(f_combine(2.0, -3.0, MetricMode::MinSum), -2.0);
        assert!((f_combine(-2.0, -3.0, MetricMode::Exact) - v).abs() < 1e-15);
    }

    #[test]
    fn f_exact_matches_tanh_form() {
        for &a in &[-9.0, -2.5, -0.3, 0.01, 1.0, 4.4, 12.0] {
            for &b in &[-6.0, -1.1, 0.2, 0.7, 3.3, 8.0] {
                let direct = 2.0 * ((a / 2.0f64).tanh() * (b / 2.0f64).tanh()).atanh();
                assert!((f_combine(a, b, MetricMode::Exact) - direct).abs() < 1e-9, "{a} {b}");
            }
        }
        assert_eq!(f_combine(1e6, -1e6, MetricMode::Exact), -LLR_SAT);
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_combine(2.0, 3.0, 0), 5.0);
        assert_eq!(g_combine(2.0, 3.0, 1), 1.0);
        assert_eq!(g_combine(250.0, 250.0, 0), LLR_SAT);
    }

    #[test]
    fn pm_examples() {
        assert_eq!(pm_update(0.0, 4.0, 0, MetricMode::MinSum), 0.0);
        assert_eq!(pm_update(0.0, 4.0, 1, MetricMode::MinSum), 4.0);
        let e = pm_update(0.0, 4.0, 0, MetricMode::Exact);
        assert!((e - 0.018_149_927_917_809_738).abs() < 1e-15);
        let e1 = pm_update(0.0, 4.0, 1, MetricMode::Exact);
        assert!((e1 - (1.0 + 4f64.exp()).ln()).abs() < 1e-12);
        assert_eq!(pm_update(1.0, LLR_SAT, 0, MetricMode::Exact), 1.0);
    }

    #[test]
    fn decoder_kind_parse() {
        assert_eq!("sc".parse::<DecoderKind>().unwrap(), DecoderKind::Sc);
        assert_eq!("scl:L=8".parse::<DecoderKind>().unwrap(), DecoderKind::Scl { list_size: 8 });
        assert_eq!(
            "scs:D=64".parse::<DecoderKind>().unwrap(),
            DecoderKind::Scs { stack_depth: 64, search_width: None }
        );
        assert_eq!("ca-scl:L=32".parse::<DecoderKind>().unwrap(), DecoderKind::CaScl { list_size: 32 });
        assert_eq!(
            "ca-scs:D=1024,L=32".parse::<DecoderKind>().unwrap(),
            DecoderKind::CaScs { stack_depth: 1024, search_width: Some(32) }
        );
        for bad in ["scl", "scl:D=4", "scl:L=0", "scs:D=1", "scs:L=4", "scs:D=8,L=0", "sc:L=2", "bp", "ca-scl:L=x"] {
            assert!(bad.parse::<DecoderKind>().is_err(), "{bad}");
        }
        for k in ["sc", "scl:L=8", "ca-scs:D=1024", "scs:D=64,L=4"] {
            assert_eq!(k.parse::<DecoderKind>().unwrap().to_string(), k);
        }
    }
}
