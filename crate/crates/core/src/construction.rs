//! Bit-channel reliability and information-set selection.
//!
//! Three reliability measures are provided:
//!
//! * Bhattacharyya parameters of a BEC, `Z⁻ = 2Z − Z²`, `Z⁺ = Z²`.
//! * Gaussian approximation (GA) LLR means, `m⁻ = φ⁻¹(1 − (1 − φ(m))²)`,
//!   `m⁺ = 2m`, with `φ` replaced by one of four closed-form approximations.
//! * Polarization weight (PW), `Σ_s i_s β^{n−s}` over the binary expansion of
//!   `i − 1` (MSB first).
//!
//! All vectors are in natural channel order with 1-based indices at the API.
//! The `*_positionwise` variants take one initial value per code-bit position
//! and are what rate-matched construction uses.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::polar::CodeSpec;
use crate::rate_match::{RateMatchMode, RateMatchPlan};
use crate::LLR_SAT;

/// Upper end of the bracket used to invert `φ`. LLR means above it saturate.
pub const GA_MEAN_CAP: f64 = 200.0;

const PHI_INV_TOL: f64 = 1e-12;

/// Default PW weight factor `β = 2^{1/4}`, tuned for `N = 16..1024`.
pub fn default_beta() -> f64 {
    2f64.powf(0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Bhattacharyya,
    GaLlrMean,
    Pw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    LowerIsBetter,
    HigherIsBetter,
}

impl MetricKind {
    pub fn orientation(self) -> Orientation {
        match self {
            MetricKind::Bhattacharyya => Orientation::LowerIsBetter,
            MetricKind::GaLlrMean | MetricKind::Pw => Orientation::HigherIsBetter,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Bhattacharyya => "bhattacharyya",
            MetricKind::GaLlrMean => "ga",
            MetricKind::Pw => "pw",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bhattacharyya" | "bec" | "z" => Ok(MetricKind::Bhattacharyya),
            "ga" | "ga_llr_mean" => Ok(MetricKind::GaLlrMean),
            "pw" => Ok(MetricKind::Pw),
            _ => Err(Error::Parse(format!("unknown metric kind '{s}'"))),
        }
    }
}

/// Per-channel reliability scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityMetricVector {
    values: Vec<f64>,
    kind: MetricKind,
}

impl ReliabilityMetricVector {
    pub fn new(values: Vec<f64>, kind: MetricKind) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(values.len()));
        }
        let ok = values.iter().all(|&v| match kind {
            MetricKind::Bhattacharyya => (0.0..=1.0).contains(&v),
            MetricKind::GaLlrMean | MetricKind::Pw => v >= 0.0 && !v.is_nan(),
        });
        if !ok {
            return Err(Error::OutOfRange(format!("{kind} metric value out of range")));
        }
        Ok(Self { values, kind })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn orientation(&self) -> Orientation {
        self.kind.orientation()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Score of the 1-based channel `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// All 1-based indices, most reliable first. Ties go to the larger index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (1..=self.values.len()).collect();
        let orient = self.orientation();
        idx.sort_by(|&a, &b| {
            let (va, vb) = (self.values[a - 1], self.values[b - 1]);
            let by_value = match orient {
                Orientation::LowerIsBetter => va.total_cmp(&vb),
                Orientation::HigherIsBetter => vb.total_cmp(&va),
            };
            by_value.then(b.cmp(&a))
        });
        idx
    }
}

/// Which approximation of `φ` the GA recursion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GaussianApproxVariant {
    /// The classic two-segment fit with breakpoint 10.
    PhiTwoSegment,
    /// Two segments, breakpoint 7.063.
    Omega2,
    /// Three segments, breakpoints 0.636 and 9.225.
    Omega3,
    /// Four segments, breakpoints 0.191, 0.742 and 9.225.
    Omega4,
}

impl GaussianApproxVariant {
    pub const ALL: [GaussianApproxVariant; 4] = [
        GaussianApproxVariant::PhiTwoSegment,
        GaussianApproxVariant::Omega2,
        GaussianApproxVariant::Omega3,
        GaussianApproxVariant::Omega4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GaussianApproxVariant::PhiTwoSegment => "phi2",
            GaussianApproxVariant::Omega2 => "omega2",
            GaussianApproxVariant::Omega3 => "omega3",
            GaussianApproxVariant::Omega4 => "omega4",
        }
    }
}

impl FromStr for GaussianApproxVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi2" | "phi" | "two-segment" => Ok(GaussianApproxVariant::PhiTwoSegment),
            "omega2" => Ok(GaussianApproxVariant::Omega2),
            "omega3" => Ok(GaussianApproxVariant::Omega3),
            "omega4" => Ok(GaussianApproxVariant::Omega4),
            _ => Err(Error::Parse(format!("unknown GA variant '{s}'"))),
        }
    }
}

impl fmt::Display for GaussianApproxVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn phi_raw(t: f64, variant: GaussianApproxVariant) -> f64 {
    use GaussianApproxVariant::*;
    if t == 0.0 {
        return 1.0;
    }
    match variant {
        PhiTwoSegment => {
            if t < 10.0 {
                (-0.4527 * t.powf(0.86) + 0.0218).exp()
            } else {
                (std::f64::consts::PI / t).sqrt() * (-t / 4.0).exp() * (1.0 - 10.0 / (7.0 * t))
            }
        }
        Omega2 => {
            if t <= 7.063 {
                (0.012 * t * t - 0.421 * t).exp()
            } else {
                (-0.294 * t - 0.317).exp()
            }
        }
        Omega3 => {
            if t <= 0.636 {
                (0.0673 * t * t - 0.491 * t).exp()
            } else if t <= 9.225 {
                (-0.453 * t.powf(0.86) + 0.022).exp()
            } else {
                (-0.283 * t - 0.425).exp()
            }
        }
        Omega4 => {
            if t <= 0.191 {
                (0.105 * t * t - 0.499 * t).exp()
            } else if t <= 0.742 {
                0.998 * (0.053 * t * t - 0.480 * t).exp()
            } else if t <= 9.225 {
                (-0.453 * t.powf(0.86) + 0.022).exp()
            } else {
                (-0.283 * t - 0.425).exp()
            }
        }
    }
}

/// Evaluates the selected approximation of `φ(t)`; `φ(0) = 1`.
pub fn phi_eval(t: f64, variant: GaussianApproxVariant) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::OutOfRange(format!("phi argument {t} must be >= 0")));
    }
    Ok(phi_raw(t, variant))
}

// Generalized inverse by bisection on [0, GA_MEAN_CAP]: the smallest crossing
// point of φ(t) = y. Where an approximation jumps at a breakpoint and y falls
// inside the jump, the breakpoint is returned.
fn phi_inverse_raw(y: f64, variant: GaussianApproxVariant) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    if y <= phi_raw(GA_MEAN_CAP, variant) {
        return GA_MEAN_CAP;
    }
    let (mut lo, mut hi) = (0.0f64, GA_MEAN_CAP);
    while hi - lo > PHI_INV_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi_raw(mid, variant) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse of [`phi_eval`] for `y ∈ (0, 1]`. Values below `φ(GA_MEAN_CAP)`
/// saturate at [`GA_MEAN_CAP`].
pub fn phi_inverse(y: f64, variant: GaussianApproxVariant) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::OutOfRange(format!("phi inverse argument {y} outside (0, 1]")));
    }
    Ok(phi_inverse_raw(y, variant))
}

// Check-node mean for two (possibly different) incoming means.
fn ga_check(a: f64, b: f64, variant: GaussianApproxVariant) -> f64 {
    let (pa, pb) = (phi_raw(a, variant), phi_raw(b, variant));
    // 1 - (1 - pa)(1 - pb) without cancellation
    let y = pa + pb - pa * pb;
    phi_inverse_raw(y, variant)
}

/// Bhattacharyya parameters of the `2^n` bit channels of a BEC(ε).
pub fn bhattacharyya_bec(n: u32, epsilon: f64) -> Result<ReliabilityMetricVector> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::OutOfRange(format!("erasure probability {epsilon} outside [0, 1]")));
    }
    let mut z = vec![epsilon];
    for _ in 0..n {
        z = z.iter().flat_map(|&v| [2.0 * v - v * v, v * v]).collect();
    }
    ReliabilityMetricVector::new(z, MetricKind::Bhattacharyya)
}

/// BEC Bhattacharyya recursion with a separate erasure probability per
/// code-bit position (natural order).
pub fn bhattacharyya_positionwise(initial: &[f64]) -> Result<ReliabilityMetricVector> {
    if initial.is_empty() || !initial.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(initial.len()));
    }
    if let Some(bad) = initial.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::OutOfRange(format!("erasure probability {bad} outside [0, 1]")));
    }
    let z = positionwise(initial, &|a, b| a + b - a * b, &|a, b| a * b);
    ReliabilityMetricVector::new(z, MetricKind::Bhattacharyya)
}

/// GA LLR means of the `2^n` bit channels of a BPSK/AWGN channel with noise
/// standard deviation `sigma`. The channel mean is `2/σ²`.
pub fn ga_llr_means(
    n: u32,
    sigma: f64,
    variant: GaussianApproxVariant,
) -> Result<ReliabilityMetricVector> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::OutOfRange(format!("noise std {sigma} must be > 0")));
    }
    let mut m = vec![2.0 / (sigma * sigma)];
    for _ in 0..n {
        m = m
            .iter()
            .flat_map(|&v| [ga_check(v, v, variant), 2.0 * v])
            .collect();
    }
    ReliabilityMetricVector::new(m, MetricKind::GaLlrMean)
}

/// GA recursion with one initial LLR mean per code-bit position.
pub fn ga_positionwise(
    initial_means: &[f64],
    variant: GaussianApproxVariant,
) -> Result<ReliabilityMetricVector> {
    if initial_means.is_empty() || !initial_means.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(initial_means.len()));
    }
    if let Some(bad) = initial_means.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::OutOfRange(format!("LLR mean {bad} must be >= 0")));
    }
    let m = positionwise(initial_means, &|a, b| ga_check(a, b, variant), &|a, b| a + b);
    ReliabilityMetricVector::new(m, MetricKind::GaLlrMean)
}

// x = u·F^{⊗n} splits as x_left = (u_a ⊕ u_b)·F', x_right = u_b·F', so the
// first half of u sees check-node combinations of (left, right) positions and
// the second half sees variable-node combinations.
fn positionwise(
    init: &[f64],
    check: &dyn Fn(f64, f64) -> f64,
    var: &dyn Fn(f64, f64) -> f64,
) -> Vec<f64> {
    if init.len() == 1 {
        return init.to_vec();
    }
    let h = init.len() / 2;
    let (left, right) = init.split_at(h);
    let minus: Vec<f64> = left.iter().zip(right).map(|(&a, &b)| check(a, b)).collect();
    let plus: Vec<f64> = left.iter().zip(right).map(|(&a, &b)| var(a, b)).collect();
    let mut out = positionwise(&minus, check, var);
    out.extend(positionwise(&plus, check, var));
    out
}

/// Polarization weights `PW(i) = Σ_s i_s β^{n−s}` where `(i_1 … i_n)` is the
/// binary expansion of `i − 1` with `i_1` most significant.
pub fn pw_metrics(n: u32, beta: f64) -> Result<ReliabilityMetricVector> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::OutOfRange(format!("PW weight factor {beta} must be > 0")));
    }
    let values = (0..1usize << n)
        .map(|i| {
            (0..n)
                .filter(|&bit| (i >> bit) & 1 == 1)
                .map(|bit| beta.powi(bit as i32))
                .sum()
        })
        .collect();
    ReliabilityMetricVector::new(values, MetricKind::Pw)
}

/// The `k` most reliable channels, returned as sorted 1-based indices.
pub fn select_info_set(metrics: &ReliabilityMetricVector, k: usize) -> Result<Vec<usize>> {
    select_info_set_excluding(metrics, k, &[])
}

/// As [`select_info_set`], never picking any of the 1-based `excluded`
/// indices.
pub fn select_info_set_excluding(
    metrics: &ReliabilityMetricVector,
    k: usize,
    excluded: &[usize],
) -> Result<Vec<usize>> {
    let len = metrics.len();
    let mut blocked = vec![false; len];
    for &i in excluded {
        if i == 0 || i > len {
            return Err(Error::OutOfRange(format!("excluded index {i} outside [1, {len}]")));
        }
        blocked[i - 1] = true;
    }
    let available = blocked.iter().filter(|b| !**b).count();
    if k > available {
        return Err(Error::OutOfRange(format!(
            "K = {k} exceeds the {available} selectable channels"
        )));
    }
    let mut set: Vec<usize> = metrics
        .ranking()
        .into_iter()
        .filter(|&i| !blocked[i - 1])
        .take(k)
        .collect();
    set.sort_unstable();
    Ok(set)
}

/// SC block-error upper bound `min(1, Σ_{i∈A} Z_i)`.
pub fn sc_bler_upper_bound(z: &ReliabilityMetricVector, info_set: &[usize]) -> Result<f64> {
    if z.kind() != MetricKind::Bhattacharyya {
        return Err(Error::WrongMetricKind {
            expected: MetricKind::Bhattacharyya.as_str(),
            actual: z.kind().as_str(),
        });
    }
    let mut sum = 0.0;
    for &i in info_set {
        if i == 0 || i > z.len() {
            return Err(Error::OutOfRange(format!("index {i} outside [1, {}]", z.len())));
        }
        sum += z.get(i);
    }
    Ok(sum.min(1.0))
}

/// Writes a reliability ranking as text: a `# N=<N> kind=<kind>` header then
/// one 1-based index per line, most reliable first.
pub fn export_sequence(metrics: &ReliabilityMetricVector) -> String {
    let mut out = format!("# N={} kind={}\n", metrics.len(), metrics.kind());
    for i in metrics.ranking() {
        out.push_str(&i.to_string());
        out.push('\n');
    }
    out
}

/// A reliability sequence read back from text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilitySequence {
    pub kind: MetricKind,
    /// 1-based indices, most reliable first.
    pub order: Vec<usize>,
}

impl ReliabilitySequence {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The first `k` entries, sorted.
    pub fn info_set(&self, k: usize) -> Result<Vec<usize>> {
        if k > self.order.len() {
            return Err(Error::OutOfRange(format!("K = {k} > N = {}", self.order.len())));
        }
        let mut set = self.order[..k].to_vec();
        set.sort_unstable();
        Ok(set)
    }
}

pub fn import_sequence(text: &str) -> Result<ReliabilitySequence> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty reliability sequence".into()))?;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("missing header line, got '{header}'")))?;
    let mut len = None;
    let mut kind = None;
    for field in header.split_whitespace() {
        if let Some(v) = field.strip_prefix("N=") {
            len = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("N: {e}")))?);
        } else if let Some(v) = field.strip_prefix("kind=") {
            kind = Some(v.parse::<MetricKind>()?);
        }
    }
    let len = len.ok_or_else(|| Error::Parse("header lacks N=".into()))?;
    let kind = kind.ok_or_else(|| Error::Parse("header lacks kind=".into()))?;
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let order = lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse::<usize>().map_err(|e| Error::Parse(format!("index '{l}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if order.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: order.len(),
        });
    }
    let mut seen = vec![false; len];
    for &i in &order {
        if i == 0 || i > len || seen[i - 1] {
            return Err(Error::Parse(format!("index {i} repeated or outside [1, {len}]")));
        }
        seen[i - 1] = true;
    }
    Ok(ReliabilitySequence { kind, order })
}

/// A construction method with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Construction {
    /// Bhattacharyya parameters of a BEC with erasure probability `epsilon`.
    Bhattacharyya { epsilon: f64 },
    /// GA LLR means at design noise level `sigma`.
    Ga {
        sigma: f64,
        variant: GaussianApproxVariant,
    },
    /// Polarization weight with factor `beta`.
    Pw { beta: f64 },
}

impl Construction {
    /// Reliability of the `2^n` bit channels of the plain (unmatched) code.
    pub fn metrics(&self, n: u32) -> Result<ReliabilityMetricVector> {
        match *self {
            Construction::Bhattacharyya { epsilon } => bhattacharyya_bec(n, epsilon),
            Construction::Ga { sigma, variant } => ga_llr_means(n, sigma, variant),
            Construction::Pw { beta } => pw_metrics(n, beta),
        }
    }

    /// Reliability when some code bits are deleted by `plan`. Punctured
    /// positions start as useless channels (Z = 1, LLR mean 0) and shortened
    /// ones as perfect channels (Z = 0, LLR mean `LLR_SAT`). PW ignores the
    /// plan.
    pub fn metrics_rate_matched(&self, plan: &RateMatchPlan) -> Result<ReliabilityMetricVector> {
        let len = plan.mother_len();
        let (punct, short) = deleted_masks(plan);
        match *self {
            Construction::Bhattacharyya { epsilon } => {
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(Error::OutOfRange(format!("erasure probability {epsilon} outside [0, 1]")));
                }
                let init: Vec<f64> = (0..len)
                    .map(|j| if punct[j] { 1.0 } else if short[j] { 0.0 } else { epsilon })
                    .collect();
                bhattacharyya_positionwise(&init)
            }
            Construction::Ga { sigma, variant } => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::OutOfRange(format!("noise std {sigma} must be > 0")));
                }
                let mean = 2.0 / (sigma * sigma);
                let init: Vec<f64> = (0..len)
                    .map(|j| if punct[j] { 0.0 } else if short[j] { LLR_SAT } else { mean })
                    .collect();
                ga_positionwise(&init, variant)
            }
            Construction::Pw { beta } => pw_metrics(len.trailing_zeros(), beta),
        }
    }

    /// Builds a code with `k` information bits (CRC bits included) for the
    /// mother code of `plan`, or for length `2^n` when there is no plan.
    ///
    /// Under rate matching, source indices that become zero-capacity through
    /// puncturing and the shortened indices themselves are never selected.
    pub fn build_code(&self, n: u32, k: usize, plan: Option<&RateMatchPlan>) -> Result<CodeSpec> {
        let info = match plan {
            None => select_info_set(&self.metrics(n)?, k)?,
            Some(p) => {
                if p.mother_len() != 1usize << n {
                    return Err(Error::Config(format!(
                        "rate-match mother length {} differs from N = {}",
                        p.mother_len(),
                        1usize << n
                    )));
                }
                let metrics = self.metrics_rate_matched(p)?;
                select_info_set_excluding(&metrics, k, &excluded_indices(p)?)?
            }
        };
        CodeSpec::new(n, &info)
    }
}

fn deleted_masks(plan: &RateMatchPlan) -> (Vec<bool>, Vec<bool>) {
    let len = plan.mother_len();
    let mut punct = vec![false; len];
    let mut short = vec![false; len];
    for &i in plan.deleted() {
        match plan.mode() {
            RateMatchMode::PunctureQup => punct[i - 1] = true,
            RateMatchMode::ShortenRqus => short[i - 1] = true,
        }
    }
    (punct, short)
}

/// Source indices no information bit may occupy under `plan`: those whose bit
/// channel has zero capacity once the punctured bits are erased, plus the
/// shortened positions.
pub fn excluded_indices(plan: &RateMatchPlan) -> Result<Vec<usize>> {
    let (punct, _) = deleted_masks(plan);
    let init: Vec<f64> = punct.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect();
    let z = bhattacharyya_positionwise(&init)?;
    let mut out: Vec<usize> = (1..=z.len()).filter(|&i| z.get(i) == 1.0).collect();
    out.extend_from_slice(plan.forced_frozen());
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
