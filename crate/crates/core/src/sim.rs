//! Monte-Carlo block-error campaigns.
//!
//! Every frame draws its payload and noise from [`frame_stream`], keyed by
//! `(seed, snr_index, frame_index)`. Frames are decoded in parallel batches and
//! then scanned in frame order, so the stopping point and every counter depend
//! only on the seed, never on the worker count or scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{frame_stream, snr_to_sigma, ChannelModel, SnrPoint, SnrReference};
use crate::construction::{default_beta, Construction, GaussianApproxVariant};
use crate::crc::{crc_encode, CrcSpec};
use crate::decoders::{CrcStatus, Decoder, DecoderKind, MetricMode};
use crate::error::{Error, Result};
use crate::polar::{encode_payload, CodeSpec};
use crate::rate_match::{apply, fill_llrs_into, RateMatchPlan, RateMatchSelector, TableOrder};
use crate::Bit;

/// Exact CSV header written by [`write_csv`].
pub const CSV_HEADER: &str = "snr_db,snr_ref,frames,block_errors,bit_errors,bler,ber,crc_miss,elapsed_s";

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "POLARFORGE_WORKERS";

/// Frames decoded per parallel batch before the stopping rule is checked.
const BATCH: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Awgn,
    Bec,
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awgn" | "biawgn" => Ok(ChannelKind::Awgn),
            "bec" => Ok(ChannelKind::Bec),
            _ => Err(Error::Parse(format!("unknown channel '{s}'"))),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Bec => "bec",
        })
    }
}

/// An inclusive SNR grid `start, start + step, ..., ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub reference: SnrReference,
}

impl SnrSweep {
    pub fn single(db: f64, reference: SnrReference) -> Self {
        Self {
            start: db,
            stop: db,
            step: 1.0,
            reference,
        }
    }

    /// Grid points in dB. Points are `start + i·step`, so rounding does not
    /// accumulate; `stop` is included up to a 1e-9 relative slack.
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::Config("SNR sweep bounds must be finite".into()));
        }
        if self.stop < self.start {
            return Err(Error::Config(format!(
                "empty SNR sweep: stop {} < start {}",
                self.stop, self.start
            )));
        }
        if self.stop == self.start {
            return Ok(vec![self.start]);
        }
        if !(self.step > 0.0) {
            return Err(Error::Config(format!("SNR step {} must be > 0", self.step)));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }
}

/// Everything one campaign needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Transmitted length `M`; rate matching applies when it is not a power of two.
    pub m: usize,
    /// Payload bits per frame, CRC excluded.
    pub k: usize,
    pub construction: Construction,
    pub crc: Option<CrcSpec>,
    pub rate_match: RateMatchSelector,
    pub order: TableOrder,
    pub decoder: DecoderKind,
    pub metric: MetricMode,
    pub channel: ChannelKind,
    /// AWGN operating points. Ignored for the BEC.
    pub snr: SnrSweep,
    /// BEC erasure probability. Ignored for AWGN.
    pub epsilon: f64,
    /// A point stops once this many block errors were seen...
    pub min_block_errors: u64,
    /// ...or after this many frames.
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    /// Record wall-clock time in `elapsed_s`; otherwise the column is 0 and the
    /// CSV is reproducible byte for byte.
    pub timing: bool,
}

impl SimConfig {
    /// A config with defaults for everything but the code dimensions.
    pub fn new(m: usize, k: usize, construction: Construction) -> Self {
        Self {
            m,
            k,
            construction,
            crc: None,
            rate_match: RateMatchSelector::Auto,
            order: TableOrder::BitReversed,
            decoder: DecoderKind::Sc,
            metric: MetricMode::Exact,
            channel: ChannelKind::Awgn,
            snr: SnrSweep::single(0.0, SnrReference::EbN0),
            epsilon: 0.5,
            min_block_errors: 100,
            max_frames: 1_000_000,
            seed: 1,
            workers: default_workers(),
            timing: false,
        }
    }

    /// `k / M`: payload bits per transmitted bit.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.m as f64
    }

    /// Builds the code, the rate-matching plan and checks the decoder setup.
    pub fn prepare(&self) -> Result<PreparedCode> {
        if self.m < 2 {
            return Err(Error::Config(format!("code length M = {} must be >= 2", self.m)));
        }
        if self.k == 0 || self.k > self.m {
            return Err(Error::Config(format!("payload k = {} must lie in [1, M = {}]", self.k, self.m)));
        }
        let m_crc = self.crc.as_ref().map_or(0, |c| c.degree());
        let k_total = self.k + m_crc;
        let mother = self.m.next_power_of_two();
        if k_total > self.m {
            return Err(Error::Config(format!(
                "k + CRC degree = {k_total} exceeds M = {}",
                self.m
            )));
        }
        let plan = if mother == self.m {
            None
        } else {
            let mode = self.rate_match.resolve(k_total, self.m)?;
            Some(RateMatchPlan::for_target(self.m, mode, self.order)?)
        };
        let spec = self
            .construction
            .build_code(mother.trailing_zeros(), k_total, plan.as_ref())?;
        if self.decoder.uses_crc() && self.crc.is_none() {
            return Err(Error::Config(format!("decoder {} needs a CRC", self.decoder)));
        }
        // fail early on bad decoder parameters
        Decoder::new(self.decoder, &spec, self.crc.as_ref(), self.metric)?;
        if self.min_block_errors == 0 || self.max_frames == 0 {
            return Err(Error::Config("min-errors and max-frames must be >= 1".into()));
        }
        Ok(PreparedCode {
            spec,
            plan,
            crc: self.crc.clone(),
            k: self.k,
        })
    }

    /// Operating points of the campaign, as `(label in dB or ε, channel)`.
    pub fn operating_points(&self) -> Result<Vec<(f64, ChannelModel)>> {
        match self.channel {
            ChannelKind::Bec => Ok(vec![(self.epsilon, ChannelModel::bec(self.epsilon)?)]),
            ChannelKind::Awgn => {
                let rate = self.rate();
                self.snr
                    .points()?
                    .into_iter()
                    .map(|db| {
                        let point = SnrPoint {
                            db,
                            reference: self.snr.reference,
                            rate,
                        };
                        Ok((db, ChannelModel::biawgn(snr_to_sigma(&point)?)?))
                    })
                    .collect()
            }
        }
    }

    fn snr_label(&self) -> &'static str {
        match (self.channel, self.snr.reference) {
            (ChannelKind::Bec, _) => "eps",
            (ChannelKind::Awgn, SnrReference::EsN0) => "es",
            (ChannelKind::Awgn, SnrReference::EbN0) => "eb",
        }
    }
}

/// `POLARFORGE_WORKERS` when set to a positive integer, else the number of
/// available cores.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// A constructed code ready for simulation.
#[derive(Debug, Clone)]
pub struct PreparedCode {
    pub spec: CodeSpec,
    pub plan: Option<RateMatchPlan>,
    pub crc: Option<CrcSpec>,
    /// Payload bits, CRC excluded.
    pub k: usize,
}

impl PreparedCode {
    /// Payload → transmitted bits.
    pub fn encode(&self, payload: &[Bit]) -> Result<Vec<Bit>> {
        let u = match &self.crc {
            Some(c) => crc_encode(payload, c)?,
            None => payload.to_vec(),
        };
        let x = encode_payload(&u, &self.spec)?;
        match &self.plan {
            Some(p) => apply(&x, p),
            None => Ok(x),
        }
    }

    /// Received LLRs → mother-code LLRs.
    pub fn fill(&self, received: &[f64], out: &mut Vec<f64>) -> Result<()> {
        match &self.plan {
            Some(p) => {
                out.resize(p.mother_len(), 0.0);
                fill_llrs_into(received, p, out)
            }
            None => {
                out.clear();
                out.extend_from_slice(received);
                Ok(())
            }
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    /// SNR in dB, or the erasure probability for the BEC.
    pub snr_db: f64,
    /// `es`, `eb` or `eps`.
    pub snr_ref: String,
    pub frames: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    /// Frames whose decoded block passed the CRC but carried a wrong payload.
    pub crc_miss: u64,
    pub elapsed_s: f64,
}

impl SimRecord {
    pub fn bler(&self) -> f64 {
        ratio(self.block_errors, self.frames)
    }

    /// Bit error rate over payload bits.
    pub fn ber(&self, k: usize) -> f64 {
        ratio(self.bit_errors, self.frames * k as u64)
    }

    fn csv_line(&self, k: usize) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.snr_db,
            self.snr_ref,
            self.frames,
            self.block_errors,
            self.bit_errors,
            self.bler(),
            self.ber(k),
            self.crc_miss,
            self.elapsed_s
        )
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Copy, Default)]
struct FrameResult {
    block_error: bool,
    bit_errors: u32,
    crc_miss: bool,
}

fn run_frame(
    code: &PreparedCode,
    channel: &ChannelModel,
    decoder: &mut Decoder,
    seed: u64,
    snr_index: u64,
    frame: u64,
    llrs: &mut Vec<f64>,
) -> Result<FrameResult> {
    let mut rng = frame_stream(seed, snr_index, frame);
    let payload: Vec<Bit> = (0..code.k).map(|_| rng.random::<bool>() as Bit).collect();
    let x = code.encode(&payload)?;
    let y = channel.transmit_llrs(&x, &mut rng);
    code.fill(&y, llrs)?;
    let out = decoder.decode(llrs)?;
    let bit_errors = payload
        .iter()
        .zip(&out.payload)
        .filter(|(a, b)| a != b)
        .count() as u32;
    let passed = match out.crc {
        CrcStatus::Passed => true,
        CrcStatus::Failed => false,
        CrcStatus::NotChecked => match &code.crc {
            // plain decoders still carry the CRC bits: check them here
            Some(c) => {
                let info: Vec<Bit> = code.spec.info_set().iter().map(|&i| out.decisions[i - 1]).collect();
                c.divides(&info)
            }
            None => false,
        },
    };
    let block_error = bit_errors > 0;
    Ok(FrameResult {
        block_error,
        bit_errors,
        crc_miss: block_error && passed,
    })
}

/// Simulates one operating point until `min_block_errors` block errors or
/// `max_frames` frames, whichever comes first. Runs on the current rayon pool.
pub fn run_point(
    config: &SimConfig,
    code: &PreparedCode,
    snr_index: u64,
    snr_db: f64,
    channel: &ChannelModel,
) -> Result<SimRecord> {
    let started = Instant::now();
    let mut rec = SimRecord {
        snr_db,
        snr_ref: config.snr_label().to_string(),
        frames: 0,
        block_errors: 0,
        bit_errors: 0,
        crc_miss: 0,
        elapsed_s: 0.0,
    };
    let batch = BATCH.max(4 * config.workers as u64);
    'outer: while rec.frames < config.max_frames {
        let lo = rec.frames;
        let hi = (lo + batch).min(config.max_frames);
        let results: Vec<FrameResult> = (lo..hi)
            .into_par_iter()
            .map_init(
                || {
                    (
                        Decoder::new(config.decoder, &code.spec, code.crc.as_ref(), config.metric),
                        Vec::new(),
                    )
                },
                |(dec, llrs), frame| {
                    let dec = dec.as_mut().map_err(|e| e.clone())?;
                    run_frame(code, channel, dec, config.seed, snr_index, frame, llrs)
                },
            )
            .collect::<Result<_>>()?;
        for r in results {
            rec.frames += 1;
            rec.block_errors += u64::from(r.block_error);
            rec.bit_errors += u64::from(r.bit_errors);
            rec.crc_miss += u64::from(r.crc_miss);
            if rec.block_errors >= config.min_block_errors {
                break 'outer;
            }
        }
    }
    if config.timing {
        rec.elapsed_s = started.elapsed().as_secs_f64();
    }
    Ok(rec)
}

/// Runs every operating point of `config` on a pool of `config.workers`
/// threads and, when `out` is given, writes the CSV atomically.
pub fn run_campaign(config: &SimConfig, out: Option<&Path>) -> Result<Vec<SimRecord>> {
    let points = config.operating_points()?;
    let code = config.prepare()?;
    if let Some(path) = out {
        check_writable(path)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records = pool.install(|| {
        points
            .iter()
            .enumerate()
            .map(|(i, (db, ch))| run_point(config, &code, i as u64, *db, ch))
            .collect::<Result<Vec<_>>>()
    })?;
    if let Some(path) = out {
        write_csv(path, &records, config.k)?;
    }
    Ok(records)
}

/// CSV text for `records`.
pub fn to_csv(records: &[SimRecord], k: usize) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_line(k));
        s.push('\n');
    }
    s
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

fn check_writable(path: &Path) -> Result<()> {
    let tmp = temp_path(path);
    fs::File::create(&tmp).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let _ = fs::remove_file(&tmp);
    Ok(())
}

/// Writes the CSV through a temporary file and a rename, so readers never see
/// a partial file.
pub fn write_csv(path: &Path, records: &[SimRecord], k: usize) -> Result<()> {
    let tmp = temp_path(path);
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(to_csv(records, k).as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

/// Parses flat `key = value` text. `#` starts a comment; blank lines are
/// skipped; later keys override earlier ones.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", no + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", no + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Keys understood by [`SimConfig::from_pairs`], one per CLI flag.
pub const CONFIG_KEYS: &[&str] = &[
    "N",
    "M",
    "K",
    "construction",
    "design-sigma",
    "design-epsilon",
    "beta",
    "ga-variant",
    "crc",
    "rate-match",
    "order",
    "decoder",
    "metric",
    "channel",
    "snr-start",
    "snr-stop",
    "snr-step",
    "snr-ref",
    "epsilon",
    "min-errors",
    "max-frames",
    "seed",
    "workers",
    "timing",
    "out",
];

fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: fmt::Display,
{
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("{key} = '{v}': {e}"))))
        .transpose()
}

/// Construction named by `construction` plus its parameter keys. GA requires
/// `design-sigma`.
pub fn construction_from_pairs(map: &BTreeMap<String, String>) -> Result<Construction> {
    let name = map.get("construction").map_or("ga", String::as_str);
    match name {
        "ga" => {
            let sigma: f64 = get(map, "design-sigma")?
                .ok_or_else(|| Error::Config("GA construction needs design-sigma".into()))?;
            let variant: GaussianApproxVariant = get(map, "ga-variant")?.unwrap_or(GaussianApproxVariant::PhiTwoSegment);
            Ok(Construction::Ga { sigma, variant })
        }
        "bhattacharyya" | "bec" | "z" => Ok(Construction::Bhattacharyya {
            epsilon: get(map, "design-epsilon")?.unwrap_or(0.5),
        }),
        "pw" => Ok(Construction::Pw {
            beta: get(map, "beta")?.unwrap_or_else(default_beta),
        }),
        _ => Err(Error::Config(format!("unknown construction '{name}'"))),
    }
}

impl SimConfig {
    /// Builds a config from `key = value` pairs (see [`CONFIG_KEYS`]). `out` is
    /// not part of the config and is ignored here.
    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(bad) = map.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key '{bad}'")));
        }
        let n: Option<usize> = get(map, "N")?;
        let m: Option<usize> = get(map, "M")?;
        let m = match (n, m) {
            (_, Some(m)) => {
                if let Some(n) = n {
                    if n != m.next_power_of_two() {
                        return Err(Error::Config(format!("N = {n} must equal 2^ceil(log2 M) for M = {m}")));
                    }
                }
                m
            }
            (Some(n), None) => {
                if !n.is_power_of_two() {
                    return Err(Error::NotPowerOfTwo(n));
                }
                n
            }
            (None, None) => return Err(Error::Config("code length N or M is required".into())),
        };
        let k: usize = get(map, "K")?.ok_or_else(|| Error::Config("K is required".into()))?;
        let mut c = SimConfig::new(m, k, construction_from_pairs(map)?);
        c.crc = match map.get("crc").map(String::as_str) {
            None | Some("none") | Some("") => None,
            Some(s) => Some(s.parse()?),
        };
        if let Some(v) = get(map, "rate-match")? {
            c.rate_match = v;
        }
        if let Some(v) = get(map, "order")? {
            c.order = v;
        }
        if let Some(v) = get(map, "decoder")? {
            c.decoder = v;
        }
        if let Some(v) = get(map, "metric")? {
            c.metric = v;
        }
        if let Some(v) = get(map, "channel")? {
            c.channel = v;
        }
        let start: Option<f64> = get(map, "snr-start")?;
        let stop: Option<f64> = get(map, "snr-stop")?;
        if let Some(start) = start {
            c.snr.start = start;
            c.snr.stop = stop.unwrap_or(start);
        } else if let Some(stop) = stop {
            c.snr.start = stop;
            c.snr.stop = stop;
        }
        if let Some(v) = get(map, "snr-step")? {
            c.snr.step = v;
        }
        if let Some(v) = get(map, "snr-ref")? {
            c.snr.reference = v;
        }
        if let Some(v) = get(map, "epsilon")? {
            c.epsilon = v;
        }
        if let Some(v) = get(map, "min-errors")? {
            c.min_block_errors = v;
        }
        if let Some(v) = get(map, "max-frames")? {
            c.max_frames = v;
        }
        if let Some(v) = get(map, "seed")? {
            c.seed = v;
        }
        if let Some(v) = get::<usize>(map, "workers")? {
            if v == 0 {
                return Err(Error::Config("workers must be >= 1".into()));
            }
            c.workers = v;
        }
        if let Some(v) = get(map, "timing")? {
            c.timing = v;
        }
        Ok(c)
    }
}
