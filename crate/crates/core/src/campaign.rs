//! Monte-Carlo frame-error-rate campaigns.
//!
//! Frame `f` of SNR point `s` draws its message and noise from
//! [`frame_rng`]`(point_seed(seed, s), f)`, so every decoder sees the same
//! frames and results do not depend on the number of workers. Frames are
//! decoded in fixed-size batches; a point stops at the exact frame where the
//! error target or the frame budget is reached.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{frame_rng, llr, quantize, transmit, ChannelConfig, QuantSpec};
use crate::code::{build_ca_polar, build_random_linear, hamming_7_4, CaPolarSpec, LinearCode};
use crate::decoder::{hard_decision, DecodeOutcome, GrandAb, OrbGrand};
use crate::error::{Error, Result};
use crate::gf2::BitWord;
use crate::hw::{Schedule, ScheduleConfig, Termination, REFERENCE_FREQ_MHZ};
use crate::io::{load_matrix, MatrixFormat};
use crate::partition::PatternBudget;

/// Version of the CSV / manifest layout.
pub const SCHEMA_VERSION: u32 = 1;

/// CSV columns, in order. `elapsed_s` is appended only on request since it
/// breaks byte-for-byte reproducibility.
pub const CSV_COLUMNS: [&str; 7] = [
    "snr_db",
    "frames",
    "frame_errors",
    "fer",
    "avg_queries",
    "wc_queries_observed",
    "avg_cycles",
];

const BATCH: u64 = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CodeSelector {
    /// 5G NR CRC-aided polar code; `k` counts message bits, CRC excluded.
    CaPolar { n: usize, k: usize },
    /// Matrices from files; at least one of `h` and `g`.
    Files {
        #[serde(default)]
        h: Option<PathBuf>,
        #[serde(default)]
        g: Option<PathBuf>,
        #[serde(default)]
        format: Option<MatrixFormat>,
    },
    Random {
        n: usize,
        k: usize,
        #[serde(default)]
        seed: u64,
    },
    Hamming,
}

impl CodeSelector {
    pub fn build(&self) -> Result<LinearCode> {
        match self {
            CodeSelector::CaPolar { n, k } => build_ca_polar(&CaPolarSpec::nr5g(*n, *k)?),
            CodeSelector::Random { n, k, seed } => build_random_linear(*n, *k, *seed),
            CodeSelector::Hamming => Ok(hamming_7_4()),
            CodeSelector::Files { h, g, format } => {
                let load = |p: &PathBuf| load_matrix(p, format.unwrap_or_else(|| MatrixFormat::from_path(p)));
                match (h, g) {
                    (Some(hp), Some(gp)) => {
                        LinearCode::new(hp.display().to_string(), load(gp)?, load(hp)?)
                    }
                    (Some(hp), None) => LinearCode::from_parity_check(hp.display().to_string(), load(hp)?),
                    (None, Some(gp)) => LinearCode::from_generator(gp.display().to_string(), load(gp)?),
                    (None, None) => Err(Error::InvalidArgument(
                        "file code selector needs an H or a G matrix".into(),
                    )),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecoderSpec {
    Orbgrand {
        lw_max: u64,
        #[serde(default)]
        p_max: Option<u32>,
    },
    Grandab { ab: usize },
}

fn default_min_errors() -> u64 {
    100
}

fn default_freq() -> f64 {
    REFERENCE_FREQ_MHZ
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub code: CodeSelector,
    pub decoder: DecoderSpec,
    pub snr_db: Vec<f64>,
    /// Frame budget per SNR point.
    pub max_frames: u64,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub quantize: bool,
    /// Fixed LLR prescale for quantization; per-frame peak scaling if absent.
    #[serde(default)]
    pub prescale: Option<f64>,
    /// Clock used for the `avg_cycles` column's schedule model.
    #[serde(default = "default_freq")]
    pub freq_mhz: f64,
    #[serde(default)]
    pub cycle_overhead: i64,
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_frames == 0 {
            return Err(Error::InvalidArgument("max_frames must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::InvalidArgument("snr_db list is empty".into()));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad SNR value {s}")));
        }
        if let Some(p) = self.prescale {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidArgument(format!("bad prescale {p}")));
            }
        }
        Ok(())
    }

    pub fn quant(&self) -> Option<QuantSpec<f64>> {
        self.quantize.then(|| match self.prescale {
            Some(p) => QuantSpec::with_prescale(p),
            None => QuantSpec::default(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FerRow {
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub avg_queries: f64,
    pub wc_queries_observed: u64,
    /// Average schedule cycles per frame (ORBGRAND only).
    pub avg_cycles: Option<f64>,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Keep each frame's schedule termination point (ORBGRAND only).
    pub collect_trace: bool,
}

#[derive(Clone, Debug)]
pub struct FerResult {
    pub rows: Vec<FerRow>,
    /// Per-point seeds actually used.
    pub point_seeds: Vec<u64>,
    /// One trace per SNR point when requested.
    pub traces: Vec<Vec<Termination>>,
    pub code_name: String,
    pub n: usize,
    pub k: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one SNR point of a campaign.
pub fn point_seed(seed: u64, snr_db: f64) -> u64 {
    splitmix64(seed ^ splitmix64(snr_db.to_bits()))
}

/// One simulated transmission.
#[derive(Clone, Debug)]
pub struct SimFrame {
    pub message: BitWord,
    pub codeword: BitWord,
    pub y: Vec<f64>,
    /// Decoder input: `2y/σ²`, quantized when `cfg.quant` is set.
    pub llrs: Vec<f64>,
}

/// Frame `f` of the point seeded with `seed`: uniform message, encoding,
/// BPSK/AWGN at `cfg.snr_db`, LLRs.
pub fn simulate_frame(code: &LinearCode, cfg: &ChannelConfig<f64>, seed: u64, f: u64) -> Result<SimFrame> {
    let mut rng = frame_rng(seed, f);
    let message = BitWord::from_bits((0..code.k()).map(|_| rng.random::<bool>()));
    let codeword = code.encode(&message)?;
    let y = transmit(&codeword, cfg, &mut rng);
    let mut llrs = llr(&y, cfg.noise_variance());
    if let Some(q) = &cfg.quant {
        llrs = quantize(&llrs, q);
    }
    Ok(SimFrame {
        message,
        codeword,
        y,
        llrs,
    })
}

struct FrameResult {
    error: bool,
    queries: u64,
    term: Option<Termination>,
}

enum Worker<'c> {
    Orb(OrbGrand<'c>),
    Ab(GrandAb<'c>),
}

impl Worker<'_> {
    fn decode(&mut self, llrs: &[f64]) -> Result<DecodeOutcome> {
        match self {
            Worker::Orb(d) => d.decode(llrs),
            Worker::Ab(d) => d.decode(&hard_decision(llrs)),
        }
    }
}

struct Ctx<'c> {
    code: &'c LinearCode,
    decoder: DecoderSpec,
    budget: Option<PatternBudget>,
    schedule: Option<Schedule>,
    quant: Option<QuantSpec<f64>>,
}

impl<'c> Ctx<'c> {
    fn worker(&self) -> Result<Worker<'c>> {
        Ok(match self.decoder {
            DecoderSpec::Orbgrand { .. } => Worker::Orb(OrbGrand::new(self.code, self.budget.expect("set"))?),
            DecoderSpec::Grandab { ab } => Worker::Ab(GrandAb::new(self.code, ab)?),
        })
    }

    fn frame(&self, w: &mut Worker<'c>, cfg: &ChannelConfig<f64>, seed: u64, f: u64) -> Result<FrameResult> {
        let fr = simulate_frame(self.code, cfg, seed, f)?;
        let out = w.decode(&fr.llrs)?;
        let error = !out.found || out.message.as_ref() != Some(&fr.message);
        let term = match &self.schedule {
            Some(s) => Some(s.termination(&out)?),
            None => None,
        };
        Ok(FrameResult {
            error,
            queries: out.queries,
            term,
        })
    }
}

/// Runs every SNR point of `spec`.
pub fn run_fer(spec: &CampaignSpec, opts: &RunOptions) -> Result<FerResult> {
    spec.validate()?;
    let code = spec.code.build()?;
    run_fer_with_code(spec, &code, opts)
}

/// As [`run_fer`] with an already built code; `spec.code` is ignored.
pub fn run_fer_with_code(spec: &CampaignSpec, code: &LinearCode, opts: &RunOptions) -> Result<FerResult> {
    spec.validate()?;
    let n = code.n();
    let (budget, schedule) = match spec.decoder {
        DecoderSpec::Orbgrand { lw_max, p_max } => {
            let budget = PatternBudget::new(lw_max, p_max, n as u32);
            if !budget.is_valid() {
                return Err(Error::InvalidArgument(format!(
                    "budget lw_max={lw_max} p_max={p_max:?} is infeasible for n={n}"
                )));
            }
            let p = budget.effective_p_max();
            let schedule = if p >= 3 {
                let cfg = ScheduleConfig::new(n, code.k(), lw_max, p, spec.freq_mhz)?
                    .with_overhead(spec.cycle_overhead);
                Some(Schedule::new(cfg)?)
            } else {
                None
            };
            (Some(budget), schedule)
        }
        DecoderSpec::Grandab { ab } => {
            if ab > n {
                return Err(Error::InvalidArgument(format!("ab={ab} exceeds n={n}")));
            }
            (None, None)
        }
    };
    let ctx = Ctx {
        code,
        decoder: spec.decoder,
        budget,
        schedule,
        quant: spec.quant(),
    };
    ctx.worker()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let mut rows = Vec::with_capacity(spec.snr_db.len());
    let mut seeds = Vec::with_capacity(spec.snr_db.len());
    let mut traces = Vec::new();
    for &snr in &spec.snr_db {
        let started = std::time::Instant::now();
        let seed = point_seed(spec.seed, snr);
        let mut cfg = ChannelConfig::new(snr, seed);
        cfg.quant = ctx.quant;
        let mut frames = 0u64;
        let mut errors = 0u64;
        let mut queries = 0u128;
        let mut wc_queries = 0u64;
        let mut cycles = 0i128;
        let mut trace = Vec::new();
        'point: while frames < spec.max_frames && errors < spec.min_errors {
            let start = frames;
            let end = (start + BATCH).min(spec.max_frames);
            let batch: Vec<Result<FrameResult>> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map_init(
                        || ctx.worker().expect("validated above"),
                        |w, f| ctx.frame(w, &cfg, seed, f),
                    )
                    .collect()
            });
            for r in batch {
                let r = r?;
                frames += 1;
                errors += r.error as u64;
                queries += r.queries as u128;
                wc_queries = wc_queries.max(r.queries);
                if let (Some(s), Some(t)) = (&ctx.schedule, r.term) {
                    cycles += s.cycles(&t)? as i128;
                    if opts.collect_trace {
                        trace.push(t);
                    }
                }
                if errors >= spec.min_errors {
                    break 'point;
                }
            }
        }
        rows.push(FerRow {
            snr_db: snr,
            frames,
            frame_errors: errors,
            fer: errors as f64 / frames as f64,
            avg_queries: queries as f64 / frames as f64,
            wc_queries_observed: wc_queries,
            avg_cycles: ctx.schedule.as_ref().map(|_| cycles as f64 / frames as f64),
            elapsed_s: started.elapsed().as_secs_f64(),
        });
        seeds.push(seed);
        if opts.collect_trace {
            traces.push(trace);
        }
    }
    Ok(FerResult {
        rows,
        point_seeds: seeds,
        traces,
        code_name: code.name().to_string(),
        n,
        k: code.k(),
    })
}

/// CSV with the fixed [`CSV_COLUMNS`] (plus `elapsed_s` when asked). Empty
/// `avg_cycles` cells mean the decoder has no schedule model.
pub fn rows_to_csv(rows: &[FerRow], with_elapsed: bool) -> String {
    let mut s = CSV_COLUMNS.join(",");
    if with_elapsed {
        s.push_str(",elapsed_s");
    }
    s.push('\n');
    for r in rows {
        write!(
            s,
            "{},{},{},{},{},{},{}",
            r.snr_db,
            r.frames,
            r.frame_errors,
            r.fer,
            r.avg_queries,
            r.wc_queries_observed,
            r.avg_cycles.map_or(String::new(), |c| c.to_string())
        )
        .unwrap();
        if with_elapsed {
            write!(s, ",{}", r.elapsed_s).unwrap();
        }
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub spec: &'a CampaignSpec,
    pub code: String,
    pub n: usize,
    pub k: usize,
    pub point_seeds: &'a [u64],
    pub csv_columns: &'static [&'static str],
    pub rows: &'a [FerRow],
}

pub fn manifest<'a>(spec: &'a CampaignSpec, result: &'a FerResult) -> Manifest<'a> {
    Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        spec,
        code: result.code_name.clone(),
        n: result.n,
        k: result.k,
        point_seeds: &result.point_seeds,
        csv_columns: &CSV_COLUMNS,
        rows: &result.rows,
    }
}

/// SNR at which the FER curve crosses `target`, interpolating `log10(fer)`
/// linearly between the first bracketing pair of points (rows sorted by SNR).
pub fn snr_at_fer(rows: &[FerRow], target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.snr_db, r.fer)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        let ((s0, f0), (s1, f1)) = (w[0], w[1]);
        if f0 >= target && f1 <= target && f0 > 0.0 && f1 > 0.0 {
            if f0 == f1 {
                return Some(s0);
            }
            let (l0, l1, lt) = (f0.log10(), f1.log10(), target.log10());
            return Some(s0 + (lt - l0) * (s1 - s0) / (l1 - l0));
        }
    }
    None
}
