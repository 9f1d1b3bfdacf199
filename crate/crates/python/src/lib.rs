//! Python bindings. Codes are described with the same keys as the CLI config
//! file, passed as keyword arguments (`design_sigma=0.8` for `design-sigma`).

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use polarforge::analysis::enumerate_weights;
use polarforge::channel::{frame_stream, snr_to_sigma, ChannelModel, SnrPoint, SnrReference};
use polarforge::construction::export_sequence;
use polarforge::decoders::{CrcStatus, Decoder, DecoderKind, MetricMode};
use polarforge::sim::{run_campaign, PreparedCode, SimConfig};
use polarforge::{Bit, CodeSpec};

create_exception!(polarforge_py, PolarforgeError, PyException);

fn py_err(e: polarforge::Error) -> PyErr {
    PolarforgeError::new_err(e.to_string())
}

fn pairs(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    if let Some(kw) = kwargs {
        for (key, value) in kw.iter() {
            let key: String = key.extract()?;
            let key = match key.as_str() {
                "n" | "m" | "k" => key.to_uppercase(),
                _ => key.replace('_', "-"),
            };
            let value = if let Ok(b) = value.extract::<bool>() {
                b.to_string()
            } else {
                value.str()?.to_string()
            };
            map.insert(key, value);
        }
    }
    Ok(map)
}

fn config(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<SimConfig> {
    SimConfig::from_pairs(&pairs(kwargs)?).map_err(py_err)
}

fn check_bits(bits: &[u8]) -> PyResult<Vec<Bit>> {
    if bits.iter().any(|&b| b > 1) {
        return Err(PolarforgeError::new_err("bits must be 0 or 1"));
    }
    Ok(bits.to_vec())
}

// Returned as `list[int]`; a `Vec<u8>` would become `bytes`.
fn as_list(bits: &[Bit]) -> Vec<u32> {
    bits.iter().map(|&b| u32::from(b)).collect()
}

/// A constructed (optionally CRC-concatenated, rate-matched) polar code.
#[pyclass(module = "polarforge_py")]
struct PolarCode {
    config: SimConfig,
    code: PreparedCode,
}

#[pymethods]
impl PolarCode {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let config = config(kwargs)?;
        let code = config.prepare().map_err(py_err)?;
        Ok(Self { config, code })
    }

    /// Mother code length.
    #[getter]
    fn n(&self) -> usize {
        self.code.spec.len()
    }

    /// Transmitted length.
    #[getter]
    fn m(&self) -> usize {
        self.config.m
    }

    /// Payload bits.
    #[getter]
    fn k(&self) -> usize {
        self.config.k
    }

    /// 1-based information positions (CRC bits included).
    #[getter]
    fn info_set(&self) -> Vec<usize> {
        self.code.spec.info_set().to_vec()
    }

    fn encode(&self, payload: Vec<u8>) -> PyResult<Vec<u32>> {
        let tx = self.code.encode(&check_bits(&payload)?).map_err(py_err)?;
        Ok(as_list(&tx))
    }

    /// Decodes `M` channel LLRs; returns `(payload, crc_status)` with status
    /// `"passed"`, `"failed"` or `"unchecked"`.
    #[pyo3(signature = (llrs, decoder = "sc", metric = "exact"))]
    fn decode(&self, llrs: Vec<f64>, decoder: &str, metric: &str) -> PyResult<(Vec<u32>, &'static str)> {
        let kind: DecoderKind = decoder.parse().map_err(py_err)?;
        let mode: MetricMode = metric.parse().map_err(py_err)?;
        let mut dec = Decoder::new(kind, &self.code.spec, self.code.crc.as_ref(), mode).map_err(py_err)?;
        let mut filled = Vec::new();
        self.code.fill(&llrs, &mut filled).map_err(py_err)?;
        let out = dec.decode(&filled).map_err(py_err)?;
        let status = match out.crc {
            CrcStatus::Passed => "passed",
            CrcStatus::Failed => "failed",
            CrcStatus::NotChecked => "unchecked",
        };
        Ok((as_list(&out.payload[..self.config.k]), status))
    }

    /// Weight spectrum `{w: A_w}` (unmatched codes, small dimension only).
    fn weight_distribution(&self) -> PyResult<BTreeMap<usize, u64>> {
        enumerate_weights(&self.code.spec, self.code.crc.as_ref())
            .map(|wd| wd.counts)
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("PolarCode(N={}, M={}, k={})", self.n(), self.config.m, self.config.k)
    }
}

/// Reliability sequence text (`# N=.. kind=..` then indices, most reliable first).
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn reliability_sequence(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
    let mut map = pairs(kwargs)?;
    map.entry("K".into()).or_insert_with(|| "1".into());
    let config = SimConfig::from_pairs(&map).map_err(py_err)?;
    let code = config.prepare().map_err(py_err)?;
    let metrics = match &code.plan {
        Some(plan) => config.construction.metrics_rate_matched(plan),
        None => config.construction.metrics(code.spec.n()),
    }
    .map_err(py_err)?;
    Ok(export_sequence(&metrics))
}

/// BPSK over AWGN at `es_n0_db`; the noise is drawn from the frame stream
/// `(seed, 0, index)`. Returns channel LLRs.
#[pyfunction]
#[pyo3(signature = (bits, es_n0_db, seed = 0, index = 0))]
fn awgn_llrs(bits: Vec<u8>, es_n0_db: f64, seed: u64, index: u64) -> PyResult<Vec<f64>> {
    let bits = check_bits(&bits)?;
    let sigma = snr_to_sigma(&SnrPoint {
        db: es_n0_db,
        reference: SnrReference::EsN0,
        rate: 1.0,
    })
    .map_err(py_err)?;
    let channel = ChannelModel::biawgn(sigma).map_err(py_err)?;
    Ok(channel.transmit_llrs(&bits, &mut frame_stream(seed, 0, index)))
}

/// Runs a campaign; keys as in the config file. Returns one dict per point.
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn simulate<'py>(py: Python<'py>, kwargs: Option<&Bound<'py, PyDict>>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut map = pairs(kwargs)?;
    let out = map.remove("out");
    let config = SimConfig::from_pairs(&map).map_err(py_err)?;
    let records = py
        .detach(|| run_campaign(&config, out.as_deref().map(std::path::Path::new)))
        .map_err(py_err)?;
    records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("snr_db", r.snr_db)?;
            d.set_item("snr_ref", &r.snr_ref)?;
            d.set_item("frames", r.frames)?;
            d.set_item("block_errors", r.block_errors)?;
            d.set_item("bit_errors", r.bit_errors)?;
            d.set_item("bler", r.bler())?;
            d.set_item("ber", r.ber(config.k))?;
            d.set_item("crc_miss", r.crc_miss)?;
            d.set_item("elapsed_s", r.elapsed_s)?;
            Ok(d)
        })
        .collect()
}

/// Weight spectrum of the code with the given 1-based information set.
#[pyfunction]
fn weights_for_info_set(n: u32, info_set: Vec<usize>) -> PyResult<BTreeMap<usize, u64>> {
    let spec = CodeSpec::new(n, &info_set).map_err(py_err)?;
    enumerate_weights(&spec, None).map(|wd| wd.counts).map_err(py_err)
}

#[pymodule]
fn polarforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PolarforgeError", m.py().get_type::<PolarforgeError>())?;
    m.add_class::<PolarCode>()?;
    m.add_function(wrap_pyfunction!(reliability_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(awgn_llrs, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(weights_for_info_set, m)?)?;
    Ok(())
}
