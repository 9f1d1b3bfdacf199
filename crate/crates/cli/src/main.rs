use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use polarforge::analysis::{enumerate_weights, union_bound};
use polarforge::construction::export_sequence;
use polarforge::decoders::{CrcStatus, Decoder};
use polarforge::sim::{parse_config_text, run_campaign, to_csv, SimConfig};
use polarforge::Bit;

/// Polar code construction, encoding, decoding and BLER simulation.
#[derive(Parser)]
#[command(name = "polarforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank bit channels and print the reliability sequence or information set.
    Construct {
        #[command(flatten)]
        code: CodeArgs,
        /// What to print.
        #[arg(long, value_enum, default_value_t = ConstructFormat::Sequence)]
        format: ConstructFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode payloads (bit strings) into transmitted words.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        /// Payload bits, e.g. 0110; read one per line from --input or stdin when absent.
        #[arg(long)]
        payload: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode frames of channel LLRs (one frame per line, comma or space separated).
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        decoder: DecoderArgs,
        /// A single frame of LLRs; otherwise frames are read from --input or stdin.
        #[arg(long, allow_hyphen_values = true)]
        llrs: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo BLER campaign and write CSV.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        decoder: DecoderArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weight spectrum (`w,A_w` CSV) and union bound of small codes.
    Analyze {
        #[command(flatten)]
        code: CodeArgs,
        /// Print the weight distribution.
        #[arg(long)]
        weights: bool,
        /// Print the union bound at these Eb/N0 values (dB, comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        union_bound: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructFormat {
    /// `# N=<N> kind=<kind>` then indices, most reliable first.
    Sequence,
    /// The selected information set, one index per line.
    InfoSet,
}

/// Code definition shared by every verb. Each flag mirrors a config-file key.
#[derive(Args)]
struct CodeArgs {
    /// Flat `key = value` config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mother code length (power of two).
    #[arg(long = "N")]
    n: Option<String>,
    /// Transmitted length; rate matching applies when below N.
    #[arg(long = "M")]
    m: Option<String>,
    /// Payload bits, CRC excluded.
    #[arg(long = "K")]
    k: Option<String>,
    /// ga | bhattacharyya | pw
    #[arg(long)]
    construction: Option<String>,
    /// Design noise std for GA (required with ga).
    #[arg(long)]
    design_sigma: Option<String>,
    /// Design erasure probability for bhattacharyya.
    #[arg(long)]
    design_epsilon: Option<String>,
    /// PW expansion base.
    #[arg(long)]
    beta: Option<String>,
    /// phi2 | omega2 | omega3 | omega4
    #[arg(long)]
    ga_variant: Option<String>,
    /// `<hex>:<degree>` or a catalogue name such as CRC8.
    #[arg(long)]
    crc: Option<String>,
    /// qup | rqus | auto
    #[arg(long)]
    rate_match: Option<String>,
    /// natural | bitrev
    #[arg(long)]
    order: Option<String>,
}

#[derive(Args)]
struct DecoderArgs {
    /// sc | scl:L=n | scs:D=n[,L=w] | ca-scl:L=n | ca-scs:D=n[,L=w]
    #[arg(long)]
    decoder: Option<String>,
    /// exact | minsum
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Args)]
struct SimArgs {
    /// awgn | bec
    #[arg(long)]
    channel: Option<String>,
    /// First SNR point in dB (default 0).
    #[arg(long, allow_hyphen_values = true)]
    snr_start: Option<String>,
    /// Last SNR point in dB, inclusive (default: start).
    #[arg(long, allow_hyphen_values = true)]
    snr_stop: Option<String>,
    /// SNR increment in dB (default 1).
    #[arg(long)]
    snr_step: Option<String>,
    /// es | eb
    #[arg(long)]
    snr_ref: Option<String>,
    /// BEC erasure probability.
    #[arg(long)]
    epsilon: Option<String>,
    /// Stop a point after this many block errors.
    #[arg(long)]
    min_errors: Option<String>,
    /// Stop a point after this many frames.
    #[arg(long)]
    max_frames: Option<String>,
    /// Base seed of the per-frame random streams (default 1).
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (default: $POLARFORGE_WORKERS, else all cores).
    #[arg(long)]
    workers: Option<String>,
    /// Record wall-clock time in elapsed_s (makes the CSV non-reproducible).
    #[arg(long)]
    timing: bool,
}

type Pairs = BTreeMap<String, String>;

fn put(map: &mut Pairs, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        map.insert(key.to_string(), v.clone());
    }
}

impl CodeArgs {
    fn pairs(&self) -> Result<Pairs> {
        let mut map = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_config_text(&text)?
            }
            None => Pairs::new(),
        };
        put(&mut map, "N", &self.n);
        put(&mut map, "M", &self.m);
        put(&mut map, "K", &self.k);
        put(&mut map, "construction", &self.construction);
        put(&mut map, "design-sigma", &self.design_sigma);
        put(&mut map, "design-epsilon", &self.design_epsilon);
        put(&mut map, "beta", &self.beta);
        put(&mut map, "ga-variant", &self.ga_variant);
        put(&mut map, "crc", &self.crc);
        put(&mut map, "rate-match", &self.rate_match);
        put(&mut map, "order", &self.order);
        Ok(map)
    }
}

impl DecoderArgs {
    fn apply(&self, map: &mut Pairs) {
        put(map, "decoder", &self.decoder);
        put(map, "metric", &self.metric);
    }
}

impl SimArgs {
    fn apply(&self, map: &mut Pairs) {
        put(map, "channel", &self.channel);
        put(map, "snr-start", &self.snr_start);
        put(map, "snr-stop", &self.snr_stop);
        put(map, "snr-step", &self.snr_step);
        put(map, "snr-ref", &self.snr_ref);
        put(map, "epsilon", &self.epsilon);
        put(map, "min-errors", &self.min_errors);
        put(map, "max-frames", &self.max_frames);
        put(map, "seed", &self.seed);
        put(map, "workers", &self.workers);
        if self.timing {
            map.insert("timing".into(), "true".into());
        }
    }
}

/// `out` from the flag, else from the config file.
fn take_out(map: &mut Pairs, flag: &Option<PathBuf>) -> Option<PathBuf> {
    let from_file = map.remove("out").map(PathBuf::from);
    flag.clone().or(from_file)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).map_err(Into::into),
    }
}

fn input_lines(inline: Option<&String>, input: Option<&PathBuf>) -> Result<Vec<String>> {
    if let Some(line) = inline {
        return Ok(vec![line.clone()]);
    }
    let lines: Vec<String> = match input {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?
            .lines()
            .map(str::to_string)
            .collect(),
        None => io::stdin().lock().lines().collect::<io::Result<_>>()?,
    };
    Ok(lines
        .into_iter()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect())
}

fn parse_bits(s: &str) -> Result<Vec<Bit>> {
    s.trim()
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(anyhow!("invalid bit '{c}'")),
        })
        .collect()
}

fn bits_to_string(bits: &[Bit]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

fn parse_llrs(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad LLR '{t}'")))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Construct { code, format, out } => {
            let mut map = code.pairs()?;
            let out = take_out(&mut map, &out);
            // K is only needed for the information set
            let has_k = map.contains_key("K");
            if !has_k {
                map.insert("K".into(), "1".into());
            }
            let config = SimConfig::from_pairs(&map)?;
            let text = match format {
                ConstructFormat::Sequence => {
                    let prepared = config.prepare()?;
                    let metrics = match &prepared.plan {
                        Some(plan) => config.construction.metrics_rate_matched(plan)?,
                        None => config.construction.metrics(prepared.spec.n())?,
                    };
                    export_sequence(&metrics)
                }
                ConstructFormat::InfoSet => {
                    if !has_k {
                        bail!("--format info-set needs --K");
                    }
                    let prepared = config.prepare()?;
                    prepared
                        .spec
                        .info_set()
                        .iter()
                        .map(|i| format!("{i}\n"))
                        .collect()
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::Encode {
            code,
            payload,
            input,
            out,
        } => {
            let mut map = code.pairs()?;
            let out = take_out(&mut map, &out);
            let prepared = SimConfig::from_pairs(&map)?.prepare()?;
            let mut text = String::new();
            for line in input_lines(payload.as_ref(), input.as_ref())? {
                let bits = parse_bits(&line)?;
                text.push_str(&bits_to_string(&prepared.encode(&bits)?));
                text.push('\n');
            }
            emit(out.as_deref(), &text)
        }
        Command::Decode {
            code,
            decoder,
            llrs,
            input,
            out,
        } => {
            let mut map = code.pairs()?;
            decoder.apply(&mut map);
            let out = take_out(&mut map, &out);
            let config = SimConfig::from_pairs(&map)?;
            let prepared = config.prepare()?;
            let mut dec = Decoder::new(config.decoder, &prepared.spec, prepared.crc.as_ref(), config.metric)?;
            let mut filled = Vec::new();
            let mut text = String::new();
            for line in input_lines(llrs.as_ref(), input.as_ref())? {
                prepared.fill(&parse_llrs(&line)?, &mut filled)?;
                let res = dec.decode(&filled)?;
                let payload = &res.payload[..config.k];
                let status = match res.crc {
                    CrcStatus::Passed => "passed",
                    CrcStatus::Failed => "failed",
                    CrcStatus::NotChecked => "unchecked",
                };
                text.push_str(&format!("{} {status}\n", bits_to_string(payload)));
            }
            emit(out.as_deref(), &text)
        }
        Command::Simulate {
            code,
            decoder,
            sim,
            out,
        } => {
            let mut map = code.pairs()?;
            decoder.apply(&mut map);
            sim.apply(&mut map);
            let out = take_out(&mut map, &out);
            let config = SimConfig::from_pairs(&map)?;
            let records = run_campaign(&config, out.as_deref())?;
            if out.is_none() {
                print!("{}", to_csv(&records, config.k));
            }
            Ok(())
        }
        Command::Analyze {
            code,
            weights,
            union_bound: points,
            out,
        } => {
            if !weights && points.is_empty() {
                bail!("nothing to analyze: pass --weights and/or --union-bound");
            }
            let mut map = code.pairs()?;
            let out = take_out(&mut map, &out);
            let config = SimConfig::from_pairs(&map)?;
            let prepared = config.prepare()?;
            if prepared.plan.is_some() {
                bail!("analysis works on unmatched codes only (M must be a power of two)");
            }
            let wd = enumerate_weights(&prepared.spec, prepared.crc.as_ref())?;
            let mut text = String::new();
            if weights {
                text.push_str(&wd.to_csv());
            }
            if !points.is_empty() {
                text.push_str("eb_n0_db,union_bound,dominant_term\n");
                for db in points {
                    let ub = union_bound(&wd, config.rate(), db)?;
                    text.push_str(&format!("{db},{},{}\n", ub.full, ub.dominant));
                }
            }
            match out {
                Some(path) => write_atomic(&path, &text),
                None => emit(None, &text),
            }
        }
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn bit_and_llr_parsing() {
        assert_eq!(parse_bits("01 1,0").unwrap(), vec![0, 1, 1, 0]);
        assert!(parse_bits("012").is_err());
        assert_eq!(parse_llrs("1.5, -2 3e1").unwrap(), vec![1.5, -2.0, 30.0]);
        assert!(parse_llrs("x").is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "N = 64\nK = 32 # payload\nconstruction = pw\n").unwrap();
        let cli = Cli::parse_from(["polarforge", "encode", "--config", path.to_str().unwrap(), "--K", "16"]);
        let Command::Encode { code, .. } = cli.command else {
            panic!("wrong verb");
        };
        let map = code.pairs().unwrap();
        assert_eq!(map["K"], "16");
        assert_eq!(map["N"], "64");
    }
}
