use super::tree::TreeState;
use super::{check_frame, pm_update, DecodeOutcome, MetricMode};
use crate::error::Result;
use crate::polar::CodeSpec;
use crate::Bit;

/// Greedy successive-cancellation decoder: `û_i = 0` iff `L_i ≥ 0` on
/// information positions, the frozen value elsewhere.
pub struct ScDecoder {
    spec: CodeSpec,
    mode: MetricMode,
    frozen: Vec<Bit>,
    state: TreeState,
    scratch: Vec<Bit>,
}

impl ScDecoder {
    pub fn new(spec: CodeSpec, mode: MetricMode) -> Self {
        let frozen = spec.frozen_pattern();
        let state = TreeState::new(spec.n());
        let scratch = vec![0; spec.len()];
        Self {
            spec,
            mode,
            frozen,
            state,
            scratch,
        }
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<DecodeOutcome> {
        check_frame(channel_llrs, &self.spec)?;
        let info = self.spec.info_mask();
        let st = &mut self.state;
        st.reset();
        for phi in 0..self.spec.len() {
            let llr = st.next_llr(channel_llrs, self.mode);
            let bit = if !info[phi] {
                self.frozen[phi]
            } else if llr >= 0.0 {
                0
            } else {
                1
            };
            st.metric = pm_update(st.metric, llr, bit, self.mode);
            st.commit(bit, &mut self.scratch);
        }
        Ok(DecodeOutcome::from_decisions(
            st.decisions.clone(),
            st.metric,
            &self.spec,
            None,
            self.spec.len() as u64,
        ))
    }
}

/// One-shot SC decoding.
pub fn sc_decode(channel_llrs: &[f64], spec: &CodeSpec, mode: MetricMode) -> Result<DecodeOutcome> {
    ScDecoder::new(spec.clone(), mode).decode(channel_llrs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::CrcStatus;
    use crate::polar::encode_payload;
    use crate::LLR_SAT;

    #[test]
    fn hand_trace_n2() {
        let spec = CodeSpec::new(1, &[2]).unwrap();
        let out = sc_decode(&[-1.0, 3.0], &spec, MetricMode::Exact).unwrap();
        assert_eq!(out.payload, vec![0]);
        assert_eq!(out.decisions, vec![0, 0]);
        // L(u2) = -1 + 3 = 2 → agreeing decision: cost ln(1+e^-2) on top of u1's
        let f = super::super::f_combine(-1.0, 3.0, MetricMode::Exact);
        let expect = pm_update(pm_update(0.0, f, 0, MetricMode::Exact), 2.0, 0, MetricMode::Exact);
        assert!((out.metric - expect).abs() < 1e-12);
        assert_eq!(out.crc, CrcStatus::NotChecked);
        assert_eq!(out.visited_nodes, 2);
    }

    #[test]
    fn noiseless_recovery() {
        let spec = CodeSpec::new(4, &[8, 10, 11, 12, 13, 14, 15, 16]).unwrap();
        for v in 0..256u32 {
            let payload: Vec<Bit> = (0..8).map(|i| ((v >> i) & 1) as Bit).collect();
            let x = encode_payload(&payload, &spec).unwrap();
            let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { LLR_SAT } else { -LLR_SAT }).collect();
            for mode in [MetricMode::Exact, MetricMode::MinSum] {
                assert_eq!(sc_decode(&llr, &spec, mode).unwrap().payload, payload);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let spec = CodeSpec::new(2, &[4]).unwrap();
        assert!(sc_decode(&[1.0; 3], &spec, MetricMode::Exact).is_err());
        assert!(sc_decode(&[1.0, f64::NAN, 1.0, 1.0], &spec, MetricMode::Exact).is_err());
    }
}
