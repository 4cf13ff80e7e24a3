//! `orbgrand-bench`: FER campaigns, single-frame decoding, query-budget and
//! cycle-model reports.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors (bad
//! files, infeasible budgets, decode failures of the tool itself).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use orbgrand::campaign::{
    manifest, point_seed, rows_to_csv, run_fer, simulate_frame, CampaignSpec, CodeSelector, DecoderSpec,
    RunOptions,
};
use orbgrand::channel::{ChannelConfig, FrameRecord, QuantSpec};
use orbgrand::decoder::hard_decision;
use orbgrand::hw::{self, parse_trace, ScheduleConfig, REFERENCE_FREQ_MHZ};
use orbgrand::io::{save_matrix, MatrixFormat};
use orbgrand::{count_queries, GrandAb, OrbGrand, PatternBudget};

#[derive(Parser, Debug)]
#[command(name = "orbgrand-bench", version, about = "ORBGRAND / GRANDAB benchmark harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Monte-Carlo FER campaign; CSV rows on stdout or --out.
    Fer(FerArgs),
    /// Decode frames from a frame-dump file; one JSON outcome per line.
    Decode(DecodeArgs),
    /// Exact number of queries in a pattern budget.
    Queries(QueryArgs),
    /// Worst-case and trace-driven cycle report.
    Cycles(CycleArgs),
    /// Write a code's H and G matrices.
    MakeCode(MakeCodeArgs),
    /// Dump simulated frames (`seed snr tx y llr` per line).
    Frames(FramesArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CodeKind {
    CaPolar,
    Random,
    Hamming,
    Files,
}

#[derive(Args, Debug, Default)]
struct CodeArgs {
    /// Code family.
    #[arg(long, value_enum)]
    code: Option<CodeKind>,
    #[arg(long)]
    n: Option<usize>,
    /// Message length (CA-polar: CRC bits excluded).
    #[arg(long)]
    k: Option<usize>,
    /// Seed of a random code.
    #[arg(long)]
    code_seed: Option<u64>,
    /// Parity-check matrix file.
    #[arg(long)]
    h: Option<PathBuf>,
    /// Generator matrix file.
    #[arg(long)]
    g: Option<PathBuf>,
    /// Matrix file format (default: by extension, `.alist` or hex).
    #[arg(long)]
    format: Option<MatrixFormat>,
}

impl CodeArgs {
    fn is_set(&self) -> bool {
        self.code.is_some() || self.h.is_some() || self.g.is_some()
    }

    fn selector(&self) -> Result<CodeSelector, Usage> {
        let kind = match self.code {
            Some(k) => k,
            None if self.h.is_some() || self.g.is_some() => CodeKind::Files,
            None => CodeKind::CaPolar,
        };
        Ok(match kind {
            CodeKind::CaPolar => CodeSelector::CaPolar {
                n: self.n.unwrap_or(128),
                k: self.k.unwrap_or(105),
            },
            CodeKind::Random => CodeSelector::Random {
                n: self.n.ok_or(Usage("--code random needs --n".into()))?,
                k: self.k.ok_or(Usage("--code random needs --k".into()))?,
                seed: self.code_seed.unwrap_or(0),
            },
            CodeKind::Hamming => CodeSelector::Hamming,
            CodeKind::Files => {
                if self.h.is_none() && self.g.is_none() {
                    return Err(Usage("--code files needs --h and/or --g".into()));
                }
                CodeSelector::Files {
                    h: self.h.clone(),
                    g: self.g.clone(),
                    format: self.format,
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecoderKind {
    Orbgrand,
    Grandab,
}

#[derive(Args, Debug, Default)]
struct DecoderArgs {
    #[arg(long, value_enum)]
    decoder: Option<DecoderKind>,
    /// Largest logistic weight (ORBGRAND).
    #[arg(long)]
    lw_max: Option<u64>,
    /// Largest Hamming weight (ORBGRAND); unbounded if omitted.
    #[arg(long)]
    p_max: Option<u32>,
    /// Abandonment Hamming weight (GRANDAB).
    #[arg(long)]
    ab: Option<usize>,
}

impl DecoderArgs {
    fn is_set(&self) -> bool {
        self.decoder.is_some() || self.lw_max.is_some() || self.p_max.is_some() || self.ab.is_some()
    }

    fn spec(&self) -> DecoderSpec {
        match self.decoder {
            Some(DecoderKind::Grandab) => DecoderSpec::Grandab { ab: self.ab.unwrap_or(3) },
            None if self.ab.is_some() && self.lw_max.is_none() => DecoderSpec::Grandab { ab: self.ab.unwrap() },
            _ => DecoderSpec::Orbgrand {
                lw_max: self.lw_max.unwrap_or(64),
                p_max: if self.lw_max.is_none() && self.p_max.is_none() {
                    Some(6)
                } else {
                    self.p_max
                },
            },
        }
    }
}

#[derive(Args, Debug)]
struct FerArgs {
    /// Campaign description (TOML); flags below override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Vec<f64>,
    /// Frame budget per point.
    #[arg(long)]
    max_frames: Option<u64>,
    /// Stop a point after this many frame errors.
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Quantize LLRs to the 5-bit input format.
    #[arg(long)]
    quantize: bool,
    /// Fixed quantizer prescale (default: per-frame peak).
    #[arg(long)]
    prescale: Option<f64>,
    /// Clock for the avg_cycles column.
    #[arg(long)]
    freq_mhz: Option<f64>,
    /// Cycle-model overhead constant.
    #[arg(long, allow_hyphen_values = true)]
    cycle_overhead: Option<i64>,
    /// CSV output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run manifest (JSON) output file.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Print rows as JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Append wall-clock seconds to each CSV row.
    #[arg(long)]
    elapsed: bool,
    /// Write the termination trace of the first SNR point here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Frame-dump file.
    #[arg(long)]
    frames: PathBuf,
    /// Decode only this frame (1-based line among non-empty lines).
    #[arg(long)]
    frame: Option<usize>,
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long, default_value_t = 128)]
    n: u32,
    #[arg(long)]
    lw_max: u64,
    #[arg(long)]
    p_max: Option<u32>,
}

#[derive(Args, Debug)]
struct CycleArgs {
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 105)]
    k: usize,
    #[arg(long, default_value_t = 64)]
    lw_max: u64,
    #[arg(long, default_value_t = 6)]
    p_max: u32,
    #[arg(long, default_value_t = REFERENCE_FREQ_MHZ)]
    freq_mhz: f64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    overhead: i64,
    /// Termination trace file (`initial`, `found lw p rank`, `abandoned`).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MakeCodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Output file for H.
    #[arg(long)]
    out_h: Option<PathBuf>,
    /// Output file for G.
    #[arg(long)]
    out_g: Option<PathBuf>,
    #[arg(long, default_value = "alist")]
    out_format: MatrixFormat,
}

#[derive(Args, Debug)]
struct FramesArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, allow_hyphen_values = true)]
    snr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long)]
    quantize: bool,
    #[arg(long)]
    prescale: Option<f64>,
}

/// Bad invocation, as opposed to bad data.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Fer(a) => fer(a),
        Cmd::Decode(a) => decode(a),
        Cmd::Queries(a) => queries(a),
        Cmd::Cycles(a) => cycles(a),
        Cmd::MakeCode(a) => make_code(a),
        Cmd::Frames(a) => frames(a),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn campaign_spec(a: &FerArgs) -> anyhow::Result<CampaignSpec> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<CampaignSpec>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => {
            if a.snr.is_empty() {
                return Err(Usage("fer needs --snr or --spec".into()).into());
            }
            CampaignSpec {
                code: a.code.selector()?,
                decoder: a.decoder.spec(),
                snr_db: a.snr.clone(),
                max_frames: 100_000,
                min_errors: 100,
                seed: 0,
                workers: 0,
                quantize: false,
                prescale: None,
                freq_mhz: REFERENCE_FREQ_MHZ,
                cycle_overhead: 0,
            }
        }
    };
    if a.spec.is_some() {
        if a.code.is_set() {
            spec.code = a.code.selector()?;
        }
        if a.decoder.is_set() {
            spec.decoder = a.decoder.spec();
        }
        if !a.snr.is_empty() {
            spec.snr_db = a.snr.clone();
        }
    }
    if let Some(v) = a.max_frames {
        spec.max_frames = v;
    }
    if let Some(v) = a.min_errors {
        spec.min_errors = v;
    }
    if let Some(v) = a.seed {
        spec.seed = v;
    }
    if let Some(v) = a.workers {
        spec.workers = v;
    }
    if a.quantize {
        spec.quantize = true;
    }
    if a.prescale.is_some() {
        spec.prescale = a.prescale;
    }
    if let Some(v) = a.freq_mhz {
        spec.freq_mhz = v;
    }
    if let Some(v) = a.cycle_overhead {
        spec.cycle_overhead = v;
    }
    Ok(spec)
}

fn fer(a: FerArgs) -> anyhow::Result<()> {
    let spec = campaign_spec(&a)?;
    let opts = RunOptions {
        collect_trace: a.trace.is_some(),
    };
    let result = run_fer(&spec, &opts)?;
    if a.json {
        let text = serde_json::to_string_pretty(&result.rows)? + "\n";
        write_out(a.out.as_deref(), &text)?;
    } else {
        write_out(a.out.as_deref(), &rows_to_csv(&result.rows, a.elapsed))?;
    }
    if let Some(p) = &a.manifest {
        let text = serde_json::to_string_pretty(&manifest(&spec, &result))?;
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.trace {
        let trace = result.traces.first().map(|t| hw::format_trace(t)).unwrap_or_default();
        fs::write(p, trace).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FrameOutcome<'a> {
    frame: usize,
    #[serde(flatten)]
    outcome: &'a orbgrand::DecodeOutcome,
    codeword_matches_tx: bool,
}

fn decode(a: DecodeArgs) -> anyhow::Result<()> {
    let code = a.code.selector()?.build()?;
    let text = fs::read_to_string(&a.frames).with_context(|| format!("reading {}", a.frames.display()))?;
    let records: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .collect();
    let selected: Vec<(usize, (usize, &str))> = match a.frame {
        Some(0) => return Err(Usage("--frame is 1-based".into()).into()),
        Some(i) => match records.get(i - 1) {
            Some(r) => vec![(i, *r)],
            None => bail!("{} holds {} frames, asked for frame {i}", a.frames.display(), records.len()),
        },
        None => records.iter().enumerate().map(|(i, r)| (i + 1, *r)).collect(),
    };
    let spec = a.decoder.spec();
    let mut orb = None;
    let mut ab = None;
    match spec {
        DecoderSpec::Orbgrand { lw_max, p_max } => {
            orb = Some(OrbGrand::new(&code, PatternBudget::new(lw_max, p_max, code.n() as u32))?)
        }
        DecoderSpec::Grandab { ab: w } => ab = Some(GrandAb::new(&code, w)?),
    }
    for (idx, (line_no, line)) in selected {
        let rec = FrameRecord::parse_line(line, line_no + 1)
            .with_context(|| format!("in {}", a.frames.display()))?;
        let llrs = rec.llrs();
        let out = match (&mut orb, &ab) {
            (Some(d), _) => d.decode(&llrs)?,
            (None, Some(d)) => d.decode(&hard_decision(&llrs))?,
            _ => unreachable!(),
        };
        let line = FrameOutcome {
            frame: idx,
            codeword_matches_tx: out.codeword.as_ref() == Some(&rec.tx),
            outcome: &out,
        };
        println!("{}", serde_json::to_string(&line)?);
    }
    Ok(())
}

#[derive(Serialize)]
struct QueryReport {
    n: u32,
    lw_max: u64,
    p_max: Option<u32>,
    queries: u128,
    /// Rounded to three significant figures.
    scientific: String,
    /// Truncated to three significant figures.
    truncated: String,
}

fn sig3(x: u128, truncate: bool) -> String {
    if x == 0 {
        return "0.00e0".into();
    }
    let digits = x.to_string();
    let exp = digits.len() - 1;
    if truncate {
        let mut d: Vec<char> = digits.chars().take(3).collect();
        while d.len() < 3 {
            d.push('0');
        }
        format!("{}.{}{}e{exp}", d[0], d[1], d[2])
    } else {
        format!("{:.2e}", x as f64)
    }
}

fn queries(a: QueryArgs) -> anyhow::Result<()> {
    let budget = PatternBudget::new(a.lw_max, a.p_max, a.n);
    if !budget.is_valid() {
        bail!("budget lw_max={} p_max={:?} is infeasible for n={}", a.lw_max, a.p_max, a.n);
    }
    let q = count_queries(&budget);
    print_json(&QueryReport {
        n: a.n,
        lw_max: a.lw_max,
        p_max: a.p_max,
        queries: q,
        scientific: sig3(q, false),
        truncated: sig3(q, true),
    })
}

fn cycles(a: CycleArgs) -> anyhow::Result<()> {
    let cfg = ScheduleConfig::new(a.n, a.k, a.lw_max, a.p_max, a.freq_mhz)?.with_overhead(a.overhead);
    let report = match &a.trace {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let trace = parse_trace(&text).with_context(|| format!("in {}", p.display()))?;
            hw::trace_latency(&trace, &cfg)?
        }
        None => hw::report(&cfg),
    };
    print_json(&report)
}

fn make_code(a: MakeCodeArgs) -> anyhow::Result<()> {
    if a.out_h.is_none() && a.out_g.is_none() {
        return Err(Usage("make-code needs --out-h and/or --out-g".into()).into());
    }
    let code = a.code.selector()?.build()?;
    if let Some(p) = &a.out_h {
        save_matrix(p, code.h(), a.out_format)?;
    }
    if let Some(p) = &a.out_g {
        save_matrix(p, code.g(), a.out_format)?;
    }
    print_json(&serde_json::json!({
        "name": code.name(),
        "n": code.n(),
        "k": code.k(),
    }))
}

fn frames(a: FramesArgs) -> anyhow::Result<()> {
    let code = a.code.selector()?.build()?;
    let seed = point_seed(a.seed, a.snr);
    let mut cfg = ChannelConfig::new(a.snr, seed);
    if a.quantize {
        cfg.quant = Some(match a.prescale {
            Some(p) => QuantSpec::with_prescale(p),
            None => QuantSpec::default(),
        });
    }
    let mut out = String::new();
    for f in 0..a.count {
        let fr = simulate_frame(&code, &cfg, seed, f)?;
        let rec = FrameRecord {
            seed: a.seed,
            snr_db: a.snr,
            tx: fr.codeword,
            y: fr.y,
            quantized: cfg.quant.map(|_| fr.llrs),
        };
        out.push_str(&rec.to_line());
        out.push('\n');
    }
    write_out(None, &out)
}
