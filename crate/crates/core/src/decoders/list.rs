use std::cmp::Ordering;

use super::tree::TreeState;
use super::{check_crc_fits, check_frame, pm_update, CrcStatus, DecodeOutcome, DecodePath, MetricMode};
use crate::crc::CrcSpec;
use crate::error::{Error, Result};
use crate::polar::CodeSpec;
use crate::Bit;

/// Result of a list search: every survivor, best first, and the selected
/// outcome.
#[derive(Debug, Clone)]
pub struct ListOutput {
    pub paths: Vec<DecodePath>,
    pub best: DecodeOutcome,
}

#[derive(Clone, Copy)]
struct Candidate {
    metric: f64,
    path: usize,
    bit: Bit,
}

/// Successive-cancellation list decoder. Survivor states are copied whole
/// when a path forks.
pub struct ListDecoder {
    spec: CodeSpec,
    list_size: usize,
    mode: MetricMode,
    crc: Option<CrcSpec>,
    frozen: Vec<Bit>,
    paths: Vec<TreeState>,
    next: Vec<TreeState>,
    pool: Vec<TreeState>,
    llrs: Vec<f64>,
    candidates: Vec<Candidate>,
    keep: Vec<[bool; 2]>,
    scratch: Vec<Bit>,
}

impl ListDecoder {
    pub fn new(spec: CodeSpec, list_size: usize, mode: MetricMode, crc: Option<CrcSpec>) -> Result<Self> {
        if list_size == 0 {
            return Err(Error::OutOfRange("list size must be >= 1".into()));
        }
        check_crc_fits(&spec, crc.as_ref())?;
        let frozen = spec.frozen_pattern();
        let scratch = vec![0; spec.len()];
        Ok(Self {
            spec,
            list_size,
            mode,
            crc,
            frozen,
            paths: Vec::new(),
            next: Vec::new(),
            pool: Vec::new(),
            llrs: Vec::new(),
            candidates: Vec::new(),
            keep: Vec::new(),
            scratch,
        })
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    fn fresh_state(&mut self) -> TreeState {
        self.pool.pop().unwrap_or_else(|| TreeState::new(self.spec.n()))
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<ListOutput> {
        check_frame(channel_llrs, &self.spec)?;
        self.pool.append(&mut self.paths);
        let mut root = self.fresh_state();
        root.reset();
        self.paths.push(root);

        let len = self.spec.len();
        let mut visited = 0u64;
        for phi in 0..len {
            self.llrs.clear();
            for p in self.paths.iter_mut() {
                self.llrs.push(p.next_llr(channel_llrs, self.mode));
            }
            visited += self.paths.len() as u64;

            if !self.spec.info_mask()[phi] {
                let bit = self.frozen[phi];
                for (p, &llr) in self.paths.iter_mut().zip(&self.llrs) {
                    p.metric = pm_update(p.metric, llr, bit, self.mode);
                    p.commit(bit, &mut self.scratch);
                }
                continue;
            }
            self.fork(phi);
        }

        let mut order: Vec<usize> = (0..self.paths.len()).collect();
        order.sort_by(|&a, &b| cmp_paths(&self.paths[a], &self.paths[b]));
        let paths: Vec<DecodePath> = order
            .iter()
            .map(|&i| DecodePath {
                decisions: self.paths[i].decisions.clone(),
                metric: self.paths[i].metric,
            })
            .collect();

        let pick = match &self.crc {
            None => 0,
            Some(_) => paths
                .iter()
                .position(|p| self.passes_crc(&p.decisions))
                .unwrap_or(0),
        };
        let best = DecodeOutcome::from_decisions(
            paths[pick].decisions.clone(),
            paths[pick].metric,
            &self.spec,
            self.crc.as_ref(),
            visited,
        );
        debug_assert!(self.crc.is_none() || pick == 0 || best.crc == CrcStatus::Passed);
        Ok(ListOutput { paths, best })
    }

    fn passes_crc(&self, decisions: &[Bit]) -> bool {
        let crc = self.crc.as_ref().expect("called only with a CRC");
        let info: Vec<Bit> = self.spec.info_set().iter().map(|&i| decisions[i - 1]).collect();
        crc.divides(&info)
    }

    // Extends every survivor by 0 and 1 and keeps the list_size best children.
    fn fork(&mut self, phi: usize) {
        self.candidates.clear();
        for (i, (p, &llr)) in self.paths.iter().zip(&self.llrs).enumerate() {
            for bit in 0..2 {
                self.candidates.push(Candidate {
                    metric: pm_update(p.metric, llr, bit, self.mode),
                    path: i,
                    bit,
                });
            }
        }
        self.keep.clear();
        self.keep.resize(self.paths.len(), [false; 2]);
        if self.candidates.len() > self.list_size {
            let paths = &self.paths;
            let by_rank = |a: &Candidate, b: &Candidate| {
                a.metric
                    .total_cmp(&b.metric)
                    .then_with(|| paths[a.path].decisions[..phi].cmp(&paths[b.path].decisions[..phi]))
                    .then(a.bit.cmp(&b.bit))
            };
            self.candidates
                .select_nth_unstable_by(self.list_size - 1, by_rank);
            self.candidates.truncate(self.list_size);
        }
        for c in &self.candidates {
            self.keep[c.path][c.bit as usize] = true;
        }

        let metrics: Vec<[f64; 2]> = self
            .paths
            .iter()
            .zip(&self.llrs)
            .map(|(p, &llr)| [pm_update(p.metric, llr, 0, self.mode), pm_update(p.metric, llr, 1, self.mode)])
            .collect();
        let mut old = std::mem::take(&mut self.paths);
        std::mem::swap(&mut self.paths, &mut self.next);
        self.paths.clear();
        for (i, mut p) in old.drain(..).enumerate() {
            match self.keep[i] {
                [true, true] => {
                    let mut twin = self.pool.pop().unwrap_or_else(|| TreeState::new(self.spec.n()));
                    twin.copy_from(&p);
                    p.metric = metrics[i][0];
                    p.commit(0, &mut self.scratch);
                    twin.metric = metrics[i][1];
                    twin.commit(1, &mut self.scratch);
                    self.paths.push(p);
                    self.paths.push(twin);
                }
                [true, false] | [false, true] => {
                    let bit = if self.keep[i][0] { 0 } else { 1 };
                    p.metric = metrics[i][bit as usize];
                    p.commit(bit, &mut self.scratch);
                    self.paths.push(p);
                }
                [false, false] => self.pool.push(p),
            }
        }
        self.next = old;
    }
}

fn cmp_paths(a: &TreeState, b: &TreeState) -> Ordering {
    a.metric
        .total_cmp(&b.metric)
        .then_with(|| a.decisions.cmp(&b.decisions))
}

/// One-shot SCL decoding.
pub fn scl_decode(
    channel_llrs: &[f64],
    spec: &CodeSpec,
    list_size: usize,
    mode: MetricMode,
) -> Result<ListOutput> {
    ListDecoder::new(spec.clone(), list_size, mode, None)?.decode(channel_llrs)
}

/// One-shot CRC-aided SCL decoding: the best survivor whose information bits
/// pass the CRC, or the overall best with [`CrcStatus::Failed`].
pub fn ca_scl_decode(
    channel_llrs: &[f64],
    spec: &CodeSpec,
    crc: &CrcSpec,
    list_size: usize,
    mode: MetricMode,
) -> Result<DecodeOutcome> {
    ListDecoder::new(spec.clone(), list_size, mode, Some(crc.clone()))?
        .decode(channel_llrs)
        .map(|o| o.best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crc::crc_encode;
    use crate::decoders::sc_decode;
    use crate::polar::encode_payload;
    use crate::LLR_SAT;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn list_of_one_is_sc() {
        let spec = CodeSpec::new(5, &[12, 14, 15, 16, 20, 22, 23, 24, 26, 27, 28, 29, 30, 31, 32, 8]).unwrap();
        let mut seed = 7;
        for _ in 0..300 {
            let llr: Vec<f64> = (0..32).map(|_| lcg(&mut seed) * 6.0 - 2.0).collect();
            for mode in [MetricMode::Exact, MetricMode::MinSum] {
                let sc = sc_decode(&llr, &spec, mode).unwrap();
                let l1 = scl_decode(&llr, &spec, 1, mode).unwrap();
                assert_eq!(l1.paths.len(), 1);
                assert_eq!(l1.best.decisions, sc.decisions);
                assert_eq!(l1.best.metric, sc.metric);
            }
        }
    }

    #[test]
    fn survivors_sorted_and_frozen_respected() {
        let spec = CodeSpec::new(4, &[4, 6, 7, 8, 10, 11, 12, 13, 14, 15, 16]).unwrap();
        let mut seed = 99;
        for _ in 0..100 {
            let llr: Vec<f64> = (0..16).map(|_| lcg(&mut seed) * 4.0 - 1.5).collect();
            let out = scl_decode(&llr, &spec, 8, MetricMode::Exact).unwrap();
            assert_eq!(out.paths.len(), 8);
            for w in out.paths.windows(2) {
                assert!(w[0].metric <= w[1].metric);
            }
            for p in &out.paths {
                for f in spec.frozen_set() {
                    assert_eq!(p.decisions[f - 1], 0);
                }
            }
            assert_eq!(out.best.decisions, out.paths[0].decisions);
        }
    }

    #[test]
    fn ca_scl_noiseless_passes() {
        let crc = CrcSpec::named("CRC6").unwrap();
        let spec = CodeSpec::new(5, &(13..=32).collect::<Vec<_>>()).unwrap();
        let payload: Vec<Bit> = (0..14).map(|i| (i % 3 == 0) as Bit).collect();
        let u = crc_encode(&payload, &crc).unwrap();
        let x = encode_payload(&u, &spec).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { LLR_SAT } else { -LLR_SAT }).collect();
        let out = ca_scl_decode(&llr, &spec, &crc, 4, MetricMode::Exact).unwrap();
        assert_eq!(out.crc, CrcStatus::Passed);
        assert_eq!(out.payload, payload);
    }

    #[test]
    fn rejects_bad_config() {
        let spec = CodeSpec::new(3, &[7, 8]).unwrap();
        assert!(ListDecoder::new(spec.clone(), 0, MetricMode::Exact, None).is_err());
        let crc = CrcSpec::named("CRC6").unwrap();
        assert!(ListDecoder::new(spec, 4, MetricMode::Exact, Some(crc)).is_err());
    }
}
