//! Incremental SC state of one decoding path.
//!
//! Depth `d` of the decoding tree holds nodes of length `N >> d`; depth 0 is
//! the channel (read-only, shared between paths) and depth `n` the leaves.
//! For every depth `d ≥ 1` the state keeps the LLRs of the node currently on
//! the path and the encoded value of its most recent left sibling. Both live
//! in flat vectors where depth `d` starts at `N − (N >> (d − 1))`, so depth
//! `d − 1` immediately precedes depth `d`.

use super::{f_combine, g_combine, MetricMode};
use crate::Bit;

#[derive(Debug, Clone)]
pub(crate) struct TreeState {
    n: u32,
    llr: Vec<f64>,
    left_sums: Vec<Bit>,
    /// Decisions `û_1 … û_len`.
    pub(crate) decisions: Vec<Bit>,
    pub(crate) metric: f64,
}

#[inline]
fn offset(len: usize, depth: u32) -> usize {
    len - (len >> (depth - 1))
}

impl TreeState {
    pub(crate) fn new(n: u32) -> Self {
        let len = 1usize << n;
        Self {
            n,
            llr: vec![0.0; len.saturating_sub(1)],
            left_sums: vec![0; len.saturating_sub(1)],
            decisions: Vec::with_capacity(len),
            metric: 0.0,
        }
    }

    pub(crate) fn reset(&mut self) {
        self.decisions.clear();
        self.metric = 0.0;
    }

    /// Number of decided bits.
    #[inline]
    pub(crate) fn depth(&self) -> usize {
        self.decisions.len()
    }

    /// LLR of the next undecided bit channel.
    pub(crate) fn next_llr(&mut self, channel: &[f64], mode: MetricMode) -> f64 {
        let n = self.n;
        if n == 0 {
            return channel[0];
        }
        let len = 1usize << n;
        let phi = self.decisions.len();
        debug_assert!(phi < len);
        // deepest depth whose node changes between leaf phi−1 and leaf phi
        let start = if phi == 0 { 1 } else { n - phi.trailing_zeros() };
        for depth in start..=n {
            let h = len >> depth;
            let off = offset(len, depth);
            let go_right = depth == start && phi != 0;
            let (before, cur) = self.llr.split_at_mut(off);
            let prev: &[f64] = if depth == 1 {
                channel
            } else {
                &before[offset(len, depth - 1)..]
            };
            let (pl, pr) = prev.split_at(h);
            let out = &mut cur[..h];
            if go_right {
                let sums = &self.left_sums[off..off + h];
                for j in 0..h {
                    out[j] = g_combine(pl[j], pr[j], sums[j]);
                }
            } else {
                for j in 0..h {
                    out[j] = f_combine(pl[j], pr[j], mode);
                }
            }
        }
        self.llr[len - 2]
    }

    /// Appends decision `bit` and propagates partial sums. `scratch` must hold
    /// at least `N` entries.
    pub(crate) fn commit(&mut self, bit: Bit, scratch: &mut [Bit]) {
        let n = self.n;
        let len = 1usize << n;
        let phi = self.decisions.len();
        self.decisions.push(bit);
        if n == 0 {
            return;
        }
        scratch[0] = bit;
        let mut depth = n;
        let mut h = 1usize;
        loop {
            let node = phi >> (n - depth);
            let off = offset(len, depth);
            if node & 1 == 0 {
                self.left_sums[off..off + h].copy_from_slice(&scratch[..h]);
                return;
            }
            if depth == 1 {
                return;
            }
            scratch.copy_within(0..h, h);
            for (s, &l) in scratch[..h].iter_mut().zip(&self.left_sums[off..off + h]) {
                *s ^= l;
            }
            depth -= 1;
            h *= 2;
        }
    }

    /// Copies `other` into `self`, reusing allocations.
    pub(crate) fn copy_from(&mut self, other: &TreeState) {
        self.clone_from(other);
    }
}
