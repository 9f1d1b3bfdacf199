use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::tree::TreeState;
use super::{check_crc_fits, check_frame, pm_update, DecodeOutcome, MetricMode};
use crate::crc::CrcSpec;
use crate::error::{Error, Result};
use crate::polar::CodeSpec;
use crate::Bit;

#[derive(Debug, Clone, Copy)]
struct Entry {
    metric: f64,
    seq: u64,
    slot: usize,
    depth: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.metric
            .total_cmp(&other.metric)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Best-first (stack) decoder over the code tree.
///
/// The lowest-metric path is popped and extended until a full-length path is
/// popped. At most `stack_depth` paths are held; overflow evicts the
/// highest-metric entry. With a CRC, full-length paths failing the check are
/// dropped and the search goes on until `max_pops` extensions have been
/// spent, after which the best failing path is returned.
///
/// An optional search width `L` caps how many paths of each length may be
/// popped. Once length `l` has used its `L` pops, every stored path no longer
/// than `l` is dropped. This keeps short prefixes, which always carry lower
/// metrics, from crowding out the deep paths of a bounded stack.
pub struct StackDecoder {
    spec: CodeSpec,
    stack_depth: usize,
    max_pops: u64,
    search_width: Option<usize>,
    pop_counts: Vec<usize>,
    mode: MetricMode,
    crc: Option<CrcSpec>,
    frozen: Vec<Bit>,
    slab: Vec<TreeState>,
    free: Vec<usize>,
    stack: BTreeSet<Entry>,
    scratch: Vec<Bit>,
    evictions: u64,
}

/// Default extension budget per frame: `64·N`.
pub fn default_max_pops(block_len: usize) -> u64 {
    64 * block_len as u64
}

impl StackDecoder {
    pub fn new(spec: CodeSpec, stack_depth: usize, mode: MetricMode, crc: Option<CrcSpec>) -> Result<Self> {
        if stack_depth < 2 {
            return Err(Error::OutOfRange("stack depth must be >= 2".into()));
        }
        check_crc_fits(&spec, crc.as_ref())?;
        let frozen = spec.frozen_pattern();
        let scratch = vec![0; spec.len()];
        let max_pops = default_max_pops(spec.len());
        Ok(Self {
            spec,
            stack_depth,
            max_pops,
            search_width: None,
            pop_counts: Vec::new(),
            mode,
            crc,
            frozen,
            slab: Vec::new(),
            free: Vec::new(),
            stack: BTreeSet::new(),
            scratch,
            evictions: 0,
        })
    }

    /// Overrides the extension budget.
    pub fn with_max_pops(mut self, max_pops: u64) -> Self {
        self.max_pops = max_pops.max(1);
        self
    }

    /// Sets the per-length pop limit (`None` for plain best-first search).
    pub fn with_search_width(mut self, search_width: Option<usize>) -> Self {
        self.search_width = search_width.map(|w| w.max(1));
        self
    }

    pub fn stack_depth(&self) -> usize {
        self.stack_depth
    }

    /// Paths evicted during the last [`decode`](Self::decode).
    pub fn evictions(&self) -> u64 {
        self.evictions
    }

    fn alloc(&mut self) -> usize {
        match self.free.pop() {
            Some(slot) => slot,
            None => {
                self.slab.push(TreeState::new(self.spec.n()));
                self.slab.len() - 1
            }
        }
    }

    fn passes_crc(&self, decisions: &[Bit]) -> bool {
        match &self.crc {
            None => true,
            Some(c) => {
                let info: Vec<Bit> = self.spec.info_set().iter().map(|&i| decisions[i - 1]).collect();
                c.divides(&info)
            }
        }
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<DecodeOutcome> {
        check_frame(channel_llrs, &self.spec)?;
        let len = self.spec.len();
        self.stack.clear();
        self.free.clear();
        self.free.extend((0..self.slab.len()).rev());
        self.evictions = 0;
        self.pop_counts.clear();
        self.pop_counts.resize(len + 1, 0);

        let mut seq = 0u64;
        let root = self.alloc();
        self.slab[root].reset();
        self.stack.insert(Entry {
            metric: 0.0,
            seq,
            slot: root,
            depth: 0,
        });

        let mut pops = 0u64;
        let mut best_failed: Option<(Vec<Bit>, f64)> = None;
        while let Some(top) = self.stack.pop_first() {
            let slot = top.slot;
            if let Some(width) = self.search_width {
                let count = &mut self.pop_counts[top.depth];
                *count += 1;
                if *count == width {
                    self.prune_up_to(top.depth);
                }
            }
            if top.depth == len {
                let decisions = self.slab[slot].decisions.clone();
                if self.passes_crc(&decisions) {
                    return Ok(DecodeOutcome::from_decisions(
                        decisions,
                        top.metric,
                        &self.spec,
                        self.crc.as_ref(),
                        pops,
                    ));
                }
                if best_failed.is_none() {
                    best_failed = Some((decisions, top.metric));
                }
                self.free.push(slot);
                if self.search_width.is_some_and(|w| self.pop_counts[len] >= w) {
                    break;
                }
                continue;
            }
            if pops >= self.max_pops {
                self.stack.insert(top);
                break;
            }
            pops += 1;

            let phi = self.slab[slot].depth();
            let llr = self.slab[slot].next_llr(channel_llrs, self.mode);
            if !self.spec.info_mask()[phi] {
                let bit = self.frozen[phi];
                let st = &mut self.slab[slot];
                st.metric = pm_update(st.metric, llr, bit, self.mode);
                st.commit(bit, &mut self.scratch);
                seq += 1;
                self.stack.insert(Entry {
                    metric: st.metric,
                    seq,
                    slot,
                    depth: phi + 1,
                });
                continue;
            }

            let twin = self.alloc();
            let (a, b) = if slot < twin {
                let (lo, hi) = self.slab.split_at_mut(twin);
                (&mut lo[slot], &mut hi[0])
            } else {
                let (lo, hi) = self.slab.split_at_mut(slot);
                (&mut hi[0], &mut lo[twin])
            };
            b.copy_from(a);
            let base = a.metric;
            a.metric = pm_update(base, llr, 0, self.mode);
            a.commit(0, &mut self.scratch);
            b.metric = pm_update(base, llr, 1, self.mode);
            b.commit(1, &mut self.scratch);
            let (ma, mb) = (a.metric, b.metric);
            seq += 1;
            self.stack.insert(Entry {
                metric: ma,
                seq,
                slot,
                depth: phi + 1,
            });
            seq += 1;
            self.stack.insert(Entry {
                metric: mb,
                seq,
                slot: twin,
                depth: phi + 1,
            });
            while self.stack.len() > self.stack_depth {
                let worst = self.stack.pop_last().expect("stack is non-empty");
                self.free.push(worst.slot);
                self.evictions += 1;
            }
        }

        // Budget exhausted (or everything failed the CRC).
        if let Some((decisions, metric)) = best_failed {
            return Ok(DecodeOutcome::from_decisions(
                decisions,
                metric,
                &self.spec,
                self.crc.as_ref(),
                pops,
            ));
        }
        // No full-length path was reached: finish the best partial path greedily.
        // Pruning may have emptied the stack; the root is then re-expanded.
        let slot = match self.stack.pop_first() {
            Some(top) => top.slot,
            None => {
                let slot = self.alloc();
                self.slab[slot].reset();
                slot
            }
        };
        let st = &mut self.slab[slot];
        while st.depth() < len {
            let phi = st.depth();
            let llr = st.next_llr(channel_llrs, self.mode);
            let bit = if !self.spec.info_mask()[phi] {
                self.frozen[phi]
            } else if llr >= 0.0 {
                0
            } else {
                1
            };
            st.metric = pm_update(st.metric, llr, bit, self.mode);
            st.commit(bit, &mut self.scratch);
            pops += 1;
        }
        let (decisions, metric) = (st.decisions.clone(), st.metric);
        Ok(DecodeOutcome::from_decisions(
            decisions,
            metric,
            &self.spec,
            self.crc.as_ref(),
            pops,
        ))
    }
}

impl StackDecoder {
    fn prune_up_to(&mut self, depth: usize) {
        let doomed: Vec<Entry> = self.stack.iter().filter(|e| e.depth <= depth).copied().collect();
        for e in doomed {
            self.stack.remove(&e);
            self.free.push(e.slot);
        }
    }
}

/// One-shot stack decoding.
pub fn scs_decode(
    channel_llrs: &[f64],
    spec: &CodeSpec,
    stack_depth: usize,
    mode: MetricMode,
) -> Result<DecodeOutcome> {
    StackDecoder::new(spec.clone(), stack_depth, mode, None)?.decode(channel_llrs)
}

/// One-shot CRC-aided stack decoding.
pub fn ca_scs_decode(
    channel_llrs: &[f64],
    spec: &CodeSpec,
    crc: &CrcSpec,
    stack_depth: usize,
    mode: MetricMode,
) -> Result<DecodeOutcome> {
    StackDecoder::new(spec.clone(), stack_depth, mode, Some(crc.clone()))?.decode(channel_llrs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::{scl_decode, CrcStatus};
    use crate::polar::encode_payload;
    use crate::LLR_SAT;

    #[test]
    fn noiseless_straight_descent() {
        let spec = CodeSpec::new(4, &[8, 10, 11, 12, 13, 14, 15, 16]).unwrap();
        let payload: Vec<Bit> = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let x = encode_payload(&payload, &spec).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { LLR_SAT } else { -LLR_SAT }).collect();
        let out = scs_decode(&llr, &spec, 16, MetricMode::Exact).unwrap();
        assert_eq!(out.payload, payload);
        assert_eq!(out.visited_nodes, 16);
        assert_eq!(out.crc, CrcStatus::NotChecked);
    }

    #[test]
    fn unbounded_stack_finds_list_optimum() {
        let spec = CodeSpec::new(3, &[4, 6, 7, 8]).unwrap();
        let mut seed = 3u64;
        for _ in 0..200 {
            let llr: Vec<f64> = (0..8)
                .map(|_| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                    ((seed >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 1.0
                })
                .collect();
            let scs = scs_decode(&llr, &spec, 16 * 8, MetricMode::Exact).unwrap();
            let scl = scl_decode(&llr, &spec, 16, MetricMode::Exact).unwrap();
            assert_eq!(scs.decisions, scl.best.decisions);
            assert!((scs.metric - scl.best.metric).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_budget_still_returns_full_path() {
        let spec = CodeSpec::new(4, &[8, 10, 11, 12, 13, 14, 15, 16]).unwrap();
        let llr = vec![0.1; 16];
        let mut dec = StackDecoder::new(spec, 4, MetricMode::MinSum, None)
            .unwrap()
            .with_max_pops(3);
        let out = dec.decode(&llr).unwrap();
        assert_eq!(out.decisions.len(), 16);
        assert_eq!(out.payload.len(), 8);
    }

    #[test]
    fn unit_search_width_is_sc() {
        use crate::decoders::sc_decode;
        let spec = CodeSpec::new(5, &[8, 12, 14, 15, 16, 20, 22, 23, 24, 26, 27, 28, 29, 30, 31, 32]).unwrap();
        let mut seed = 11u64;
        for _ in 0..300 {
            let llr: Vec<f64> = (0..32)
                .map(|_| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                    ((seed >> 11) as f64 / (1u64 << 53) as f64) * 5.0 - 1.5
                })
                .collect();
            let sc = sc_decode(&llr, &spec, MetricMode::Exact).unwrap();
            let mut dec = StackDecoder::new(spec.clone(), 8, MetricMode::Exact, None)
                .unwrap()
                .with_search_width(Some(1));
            let out = dec.decode(&llr).unwrap();
            assert_eq!(out.decisions, sc.decisions);
        }
    }

    #[test]
    fn search_width_bounds_work() {
        let spec = CodeSpec::new(6, &(17..=64).collect::<Vec<_>>()).unwrap();
        let llr: Vec<f64> = (0..64).map(|i| if i % 3 == 0 { -0.4 } else { 0.7 }).collect();
        let mut dec = StackDecoder::new(spec, 256, MetricMode::Exact, None)
            .unwrap()
            .with_search_width(Some(4));
        let out = dec.decode(&llr).unwrap();
        assert_eq!(out.decisions.len(), 64);
        assert!(out.visited_nodes <= 4 * 64);
    }

    #[test]
    fn rejects_shallow_stack() {
        let spec = CodeSpec::new(2, &[4]).unwrap();
        assert!(StackDecoder::new(spec, 1, MetricMode::Exact, None).is_err());
    }
}
