//! Cycle model of a three-shift-register ORBGRAND schedule.
//!
//! One time-step is one clock cycle. A decode runs through
//!
//! 1. one syndrome check of the hard decision,
//! 2. `⌈log2 n⌉` sorter stages,
//! 3. one step testing every single flip,
//! 4. for each `lw` in `3..=lw_max`: one step testing all partitions of size
//!    2 and 3, then one step per fixed suffix `(λ4, ..., λP)` for sizes
//!    `4..=p_max`.
//!
//! A signed `overhead` constant is added to every decode that goes past the
//! initial check; it absorbs fill/drain cycles the schedule above does not
//! name.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::decoder::DecodeOutcome;
use crate::error::{Error, Result};
use crate::partition::{lambda_max, FixedSizePartitions, Partition};

/// Clock frequency of the reference implementation.
pub const REFERENCE_FREQ_MHZ: f64 = 454.0;

/// Overhead that brings the (128, 105, 64, 6) worst case to the reported
/// 4226 cycles; the schedule above gives 4227.
pub const REFERENCE_OVERHEAD: i64 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ScheduleConfig {
    pub n: usize,
    pub k: usize,
    pub lw_max: u64,
    pub p_max: u32,
    pub freq_mhz: f64,
    #[serde(default)]
    pub overhead: i64,
}

impl ScheduleConfig {
    pub fn new(n: usize, k: usize, lw_max: u64, p_max: u32, freq_mhz: f64) -> Result<Self> {
        let cfg = ScheduleConfig {
            n,
            k,
            lw_max,
            p_max,
            freq_mhz,
            overhead: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_overhead(mut self, overhead: i64) -> Self {
        self.overhead = overhead;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_max < 3 {
            return Err(Error::InvalidArgument(format!(
                "p_max = {} but the schedule always tests sizes up to 3",
                self.p_max
            )));
        }
        if self.n < 2 || self.k == 0 || self.k > self.n {
            return Err(Error::InvalidArgument(format!(
                "bad code dimensions ({}, {})",
                self.n, self.k
            )));
        }
        let n = self.n as u64;
        if self.lw_max > n * (n + 1) / 2 {
            return Err(Error::InvalidArgument(format!(
                "lw_max = {} exceeds n(n+1)/2",
                self.lw_max
            )));
        }
        if !(self.freq_mhz.is_finite() && self.freq_mhz > 0.0) {
            return Err(Error::InvalidArgument(format!("bad frequency {}", self.freq_mhz)));
        }
        Ok(())
    }

    pub fn sorter_stages(&self) -> u64 {
        (self.n as u64).next_power_of_two().trailing_zeros() as u64
    }

    fn max_part(&self) -> u32 {
        self.n as u32
    }
}

/// Slot labels of the three shift registers for one logistic weight. A label
/// `j` names the single-flip syndrome `s_j`; `None` marks a slot whose label
/// falls outside `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    pub lw: u64,
    /// Slot `i` (0-based) holds `s_{lw-i-1}`.
    pub reg1: Vec<Option<u32>>,
    /// Slot `i` holds `s_{i+1}`.
    pub reg2: Vec<Option<u32>>,
    /// Slot `i` holds `s_{i+1}`, `i < λ3max`.
    pub reg3: Vec<Option<u32>>,
    pub busses: usize,
}

impl RegisterLayout {
    pub fn new(lw: u64, n: u32) -> Self {
        let l3 = lambda_max(lw, 3, &[]).max(0) as u64;
        let len = 2 * (l3 as usize + 1);
        let label = |v: i64| (v >= 1 && v <= n as i64).then_some(v as u32);
        RegisterLayout {
            lw,
            reg1: (1..=len).map(|i| label(lw as i64 - i as i64)).collect(),
            reg2: (1..=len).map(|i| label(i as i64)).collect(),
            reg3: (1..=l3).map(|i| label(i as i64)).collect(),
            busses: l3 as usize + 1,
        }
    }

    pub fn lambda3_max(&self) -> usize {
        self.busses - 1
    }

    /// Triples produced by bus `b ≥ 1`: `reg1[i + b]`, `reg2[i]`, `reg3[b - 1]`.
    fn bus_triples(&self, b: usize, out: &mut Vec<[u32; 3]>) {
        let Some(c) = self.reg3[b - 1] else { return };
        for i in 0..self.reg2.len().saturating_sub(b) {
            if let (Some(a), Some(m)) = (self.reg1[i + b], self.reg2[i]) {
                if a > m && m > c {
                    out.push([a, m, c]);
                }
            }
        }
    }
}

/// Partitions the register arrangement tests in the size-2/3 step of `lw`:
/// bus 0 pairs `reg1[i]` with `reg2[i]`; bus `b ≥ 1` adds `reg3[b - 1]` to
/// `reg1[i + b] ⊕ reg2[i]`.
pub fn parallel_coverage(lw: u64, layout: &RegisterLayout) -> Vec<Partition> {
    debug_assert_eq!(lw, layout.lw);
    let mut out = Vec::new();
    for i in 0..layout.reg1.len() {
        if let (Some(a), Some(b)) = (layout.reg1[i], layout.reg2[i]) {
            if a > b {
                out.push(Partition::new(vec![a, b]).expect("distinct"));
            }
        }
    }
    let mut triples = Vec::new();
    for b in 1..layout.busses {
        layout.bus_triples(b, &mut triples);
    }
    out.extend(triples.into_iter().map(|t| Partition::new(t.to_vec()).expect("distinct")));
    out
}

/// Partitions tested in the step where the controller holds `suffix`
/// (`λ4 > ... > λP`): the layout of `lw - Σ suffix` restricted to busses
/// `b > λ4`.
pub fn suffix_coverage(lw: u64, suffix: &[u32], n: u32) -> Vec<Partition> {
    let s: u64 = suffix.iter().map(|&v| v as u64).sum();
    let Some(r) = lw.checked_sub(s) else { return Vec::new() };
    let layout = RegisterLayout::new(r, n);
    let l4 = suffix.first().copied().unwrap_or(0) as usize;
    let mut triples = Vec::new();
    for b in l4 + 1..layout.busses {
        layout.bus_triples(b, &mut triples);
    }
    triples
        .into_iter()
        .map(|t| {
            let mut parts = t.to_vec();
            parts.extend_from_slice(suffix);
            Partition::new(parts).expect("suffix below λ3")
        })
        .collect()
}

// Can some λ1 > λ2 > λ3 > l4, all ≤ n, sum to r?
fn triple_fits(r: u64, l4: u64, n: u64) -> bool {
    3 * l4 + 6 <= r && l4 + 3 <= n && r <= 3 * n - 3
}

/// Visits the controller's suffixes for `lw` in schedule order: size `P`
/// ascending, then `λP` slowest, `λ4` fastest, each ascending. Bounds are the
/// nested-sum limits `λ_i^max` restricted to suffixes that leave a valid
/// `(λ1, λ2, λ3)` with parts at most `n`.
fn for_each_suffix(lw: u64, p_max: u32, n: u32, mut f: impl FnMut(&[u32])) {
    let mut buf = Vec::new();
    for p in 4..=p_max {
        if lw < (p as u64) * (p as u64 + 1) / 2 {
            break;
        }
        buf.clear();
        buf.resize((p - 3) as usize, 0);
        walk(lw, p, n as u64, &mut buf, 0, &mut f);
    }

    // buf[j] is λ_{p-j}; depth j fixes λ_{p-j}
    fn walk(lw: u64, p: u32, n: u64, buf: &mut Vec<u32>, depth: usize, f: &mut impl FnMut(&[u32])) {
        let i = p - depth as u32;
        let above: Vec<u32> = buf[..depth].to_vec();
        let lo = above.last().map_or(1, |&v| v as u64 + 1);
        let hi = lambda_max(lw, i, &above);
        if hi < lo as i64 {
            return;
        }
        for v in lo..=hi as u64 {
            buf[depth] = v as u32;
            if i == 4 {
                let s: u64 = buf.iter().map(|&x| x as u64).sum();
                if triple_fits(lw - s, v, n) {
                    let mut suffix = buf.clone();
                    suffix.reverse();
                    f(&suffix);
                }
            } else {
                walk(lw, p, n, buf, depth + 1, f);
            }
        }
    }
}

/// Suffixes `(λ4, ..., λP)` stepped through at `lw`, in schedule order.
pub fn suffix_steps(lw: u64, p_max: u32, n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_suffix(lw, p_max, n, |s| out.push(s.to_vec()));
    out
}

fn has_small_partitions(lw: u64, n: u32) -> bool {
    FixedSizePartitions::new(lw, 2, n).next_parts().is_some()
        || FixedSizePartitions::new(lw, 3, n).next_parts().is_some()
}

/// Time steps spent on weight `lw` (≥ 3) beyond the single-flip step.
pub fn steps_for_lw(lw: u64, p_max: u32, n: u32) -> u64 {
    let mut count = has_small_partitions(lw, n) as u64;
    for_each_suffix(lw, p_max, n, |_| count += 1);
    count
}

/// Worst-case cycles including `cfg.overhead`.
pub fn worst_case_cycles(cfg: &ScheduleConfig) -> i64 {
    let sweep: u64 = (3..=cfg.lw_max)
        .map(|lw| steps_for_lw(lw, cfg.p_max, cfg.max_part()))
        .sum();
    (2 + cfg.sorter_stages() + sweep) as i64 + cfg.overhead
}

/// Where a decode stopped in the schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The hard decision was a codeword.
    Initial,
    /// Accepted pattern of weight `lw` and size `p`; `suffix_rank` is 0 for
    /// sizes up to 3 and the 1-based position of the suffix step otherwise.
    Found { lw: u64, p: u32, suffix_rank: u64 },
    Abandoned,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Initial => write!(f, "initial"),
            Termination::Found { lw, p, suffix_rank } => write!(f, "found {lw} {p} {suffix_rank}"),
            Termination::Abandoned => write!(f, "abandoned"),
        }
    }
}

impl FromStr for Termination {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks.as_slice() {
            ["initial"] => Ok(Termination::Initial),
            ["abandoned"] => Ok(Termination::Abandoned),
            ["found", lw, p, r] => {
                let num = |t: &str| t.parse::<u64>().map_err(|e| format!("{t:?}: {e}"));
                Ok(Termination::Found {
                    lw: num(lw)?,
                    p: num(p)? as u32,
                    suffix_rank: num(r)?,
                })
            }
            _ => Err(format!("unrecognized trace entry {s:?}")),
        }
    }
}

/// Precomputed schedule offsets for one configuration.
#[derive(Clone, Debug)]
pub struct Schedule {
    cfg: ScheduleConfig,
    /// `before[lw]`: cycles elapsed before the first multi-flip step of `lw`,
    /// overhead excluded.
    before: Vec<u64>,
    has_small: Vec<bool>,
}

impl Schedule {
    pub fn new(cfg: ScheduleConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.max_part();
        let top = cfg.lw_max.max(2) as usize + 1;
        let mut before = vec![0u64; top + 1];
        let mut has_small = vec![false; top + 1];
        let mut acc = 2 + cfg.sorter_stages();
        for lw in 0..=top {
            before[lw] = acc;
            if lw >= 3 && lw < top {
                has_small[lw] = has_small_partitions(lw as u64, n);
                acc += steps_for_lw(lw as u64, cfg.p_max, n);
            }
        }
        Ok(Schedule {
            cfg,
            before,
            has_small,
        })
    }

    pub fn config(&self) -> &ScheduleConfig {
        &self.cfg
    }

    pub fn worst_case(&self) -> i64 {
        self.before[self.cfg.lw_max.max(2) as usize + 1] as i64 + self.cfg.overhead
    }

    /// Maps a decoder outcome to its schedule position. Outcomes whose
    /// pattern lies outside this schedule (size above `p_max`, weight above
    /// `lw_max`) are rejected.
    pub fn termination(&self, out: &DecodeOutcome) -> Result<Termination> {
        if !out.found {
            return Ok(Termination::Abandoned);
        }
        let pattern = out.pattern.as_ref().ok_or_else(|| {
            Error::InvalidArgument("found outcome without a pattern".into())
        })?;
        let p = pattern.size() as u32;
        let lw = pattern.weight();
        if p == 0 {
            return Ok(Termination::Initial);
        }
        if p > self.cfg.p_max || lw > self.cfg.lw_max {
            return Err(Error::InvalidArgument(format!(
                "pattern {pattern:?} lies outside the schedule budget"
            )));
        }
        let suffix_rank = if p <= 3 {
            0
        } else {
            let want = &pattern.parts()[3..];
            let mut rank = 0u64;
            let mut hit = None;
            for_each_suffix(lw, self.cfg.p_max, self.cfg.max_part(), |s| {
                rank += 1;
                if hit.is_none() && s == want {
                    hit = Some(rank);
                }
            });
            hit.ok_or_else(|| {
                Error::InvalidArgument(format!("suffix of {pattern:?} is never scheduled"))
            })?
        };
        Ok(Termination::Found { lw, p, suffix_rank })
    }

    /// Cycles until the decoder stops at `t`.
    pub fn cycles(&self, t: &Termination) -> Result<i64> {
        let base = match *t {
            Termination::Initial => return Ok(1),
            Termination::Abandoned => return Ok(self.worst_case()),
            Termination::Found { lw, p, suffix_rank } => {
                if lw > self.cfg.lw_max || p == 0 || p > self.cfg.p_max {
                    return Err(Error::InvalidArgument(format!("{t} is outside the schedule")));
                }
                if p == 1 {
                    2 + self.cfg.sorter_stages()
                } else {
                    let lw = lw as usize;
                    let small = self.has_small[lw] as u64;
                    if p <= 3 {
                        self.before[lw] + small
                    } else {
                        let steps = self.before[lw + 1] - self.before[lw] - small;
                        if suffix_rank == 0 || suffix_rank > steps {
                            return Err(Error::InvalidArgument(format!(
                                "{t}: suffix rank outside 1..={steps}"
                            )));
                        }
                        self.before[lw] + small + suffix_rank
                    }
                }
            }
        };
        Ok(base as i64 + self.cfg.overhead)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleReport {
    pub wc_cycles: i64,
    pub wc_latency_ns: f64,
    pub avg_cycles: Option<f64>,
    pub avg_latency_ns: Option<f64>,
    #[serde(rename = "avg_tp_gbps")]
    pub avg_info_throughput_gbps: Option<f64>,
    pub overhead_constant_used: i64,
}

pub fn cycles_to_ns(cycles: f64, freq_mhz: f64) -> f64 {
    cycles * 1e3 / freq_mhz
}

/// Worst-case figures only.
pub fn report(cfg: &ScheduleConfig) -> CycleReport {
    let wc = worst_case_cycles(cfg);
    CycleReport {
        wc_cycles: wc,
        wc_latency_ns: cycles_to_ns(wc as f64, cfg.freq_mhz),
        avg_cycles: None,
        avg_latency_ns: None,
        avg_info_throughput_gbps: None,
        overhead_constant_used: cfg.overhead,
    }
}

/// Report from average cycles per frame: latency `cycles / f`, information
/// throughput `k / latency`.
pub fn report_with_average(cfg: &ScheduleConfig, avg_cycles: f64) -> CycleReport {
    let mut r = report(cfg);
    let lat = cycles_to_ns(avg_cycles, cfg.freq_mhz);
    r.avg_cycles = Some(avg_cycles);
    r.avg_latency_ns = Some(lat);
    r.avg_info_throughput_gbps = Some(cfg.k as f64 / lat);
    r
}

pub fn trace_latency(trace: &[Termination], cfg: &ScheduleConfig) -> Result<CycleReport> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let sched = Schedule::new(*cfg)?;
    let mut total = 0i128;
    for t in trace {
        total += sched.cycles(t)? as i128;
    }
    Ok(report_with_average(cfg, total as f64 / trace.len() as f64))
}

/// Trace text: one entry per line (`initial`, `found <lw> <p> <rank>`,
/// `abandoned`); blank lines and `#` comments are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<Termination>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let col = line.len() - line.trim_start().len() + 1;
        out.push(body.parse().map_err(|e: String| Error::parse(i + 1, col, e))?);
    }
    Ok(out)
}

pub fn format_trace(trace: &[Termination]) -> String {
    let mut s = String::new();
    for t in trace {
        s.push_str(&t.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{partitions_of, PatternBudget, PatternStream};
    use std::collections::BTreeSet;

    fn cfg(lw_max: u64, p_max: u32) -> ScheduleConfig {
        ScheduleConfig::new(128, 105, lw_max, p_max, REFERENCE_FREQ_MHZ).unwrap()
    }

    // Distinct suffixes (λ4..λP) among all partitions of lw with size 4..=p_max.
    fn suffix_oracle(lw: u64, p_max: u32, n: u32) -> u64 {
        let mut set = BTreeSet::new();
        for p in 4..=p_max {
            for part in partitions_of(lw, p, n) {
                set.insert(part.parts()[3..].to_vec());
            }
        }
        set.len() as u64
    }

    #[test]
    fn steps_examples() {
        assert_eq!(steps_for_lw(3, 3, 128), 1);
        assert_eq!(steps_for_lw(3, 8, 128), 1);
        assert_eq!(steps_for_lw(10, 6, 128), 2);
        assert_eq!(suffix_steps(10, 6, 128), vec![vec![1]]);
    }

    #[test]
    fn steps_match_suffix_oracle() {
        for n in [8u32, 20, 128] {
            for lw in 3..=64u64.min(n as u64 * (n as u64 + 1) / 2) {
                for p_max in 3..=7 {
                    let oracle = has_small_partitions(lw, n) as u64 + suffix_oracle(lw, p_max, n);
                    assert_eq!(steps_for_lw(lw, p_max, n), oracle, "lw {lw} p_max {p_max} n {n}");
                }
            }
        }
    }

    #[test]
    fn bus_count_at_20() {
        let l = RegisterLayout::new(20, 128);
        assert_eq!(l.busses, 6);
        assert_eq!(l.reg1[0], Some(19));
        assert_eq!(l.reg1[3], Some(16));
        assert_eq!(l.reg2[3], Some(4));
        assert_eq!(l.reg2[11], Some(12));
        assert_eq!(l.reg3, (1..=5).map(Some).collect::<Vec<_>>());
        assert_eq!(l.reg1.len(), 12);
    }

    fn as_set(v: Vec<Partition>) -> BTreeSet<Vec<u32>> {
        v.into_iter().map(|p| p.parts().to_vec()).collect()
    }

    #[test]
    fn parallel_coverage_examples() {
        let got = parallel_coverage(10, &RegisterLayout::new(10, 128));
        let expect: BTreeSet<Vec<u32>> = [
            vec![9, 1],
            vec![8, 2],
            vec![7, 3],
            vec![6, 4],
            vec![7, 2, 1],
            vec![6, 3, 1],
            vec![5, 4, 1],
            vec![5, 3, 2],
        ]
        .into_iter()
        .collect();
        assert_eq!(got.len(), expect.len());
        assert_eq!(as_set(got), expect);
        assert_eq!(
            as_set(parallel_coverage(3, &RegisterLayout::new(3, 128))),
            [vec![2, 1]].into_iter().collect()
        );
        for lw in [20u64, 37] {
            let got = parallel_coverage(lw, &RegisterLayout::new(lw, 128));
            let mut oracle = partitions_of(lw, 2, 128);
            oracle.extend(partitions_of(lw, 3, 128));
            assert_eq!(got.len(), oracle.len());
            assert_eq!(as_set(got), as_set(oracle));
        }
    }

    #[test]
    fn worst_case_examples() {
        assert_eq!(worst_case_cycles(&cfg(1, 6)), 9);
        assert_eq!(worst_case_cycles(&cfg(10, 3)), 17);
        assert_eq!(worst_case_cycles(&cfg(64, 6)), 4227);
        assert_eq!(worst_case_cycles(&cfg(64, 6).with_overhead(REFERENCE_OVERHEAD)), 4226);
    }

    #[test]
    fn worst_case_monotone() {
        let mut prev_p = 0;
        for p in 3..=9 {
            let mut prev_lw = 0;
            for lw in [1u64, 5, 10, 20, 40, 64] {
                let w = worst_case_cycles(&cfg(lw, p));
                assert!(w >= prev_lw);
                prev_lw = w;
            }
            assert!(prev_lw >= prev_p);
            prev_p = prev_lw;
        }
    }

    #[test]
    fn every_scheduled_pattern_maps_back() {
        // walking the stream and mapping each pattern to cycles gives a
        // non-decreasing sequence ending at the worst case
        let c = ScheduleConfig::new(32, 16, 30, 6, 100.0).unwrap();
        let s = Schedule::new(c).unwrap();
        let mut last_multi = 0;
        for (lw, p) in PatternStream::new(PatternBudget::new(30, Some(6), 32)) {
            let out = DecodeOutcome {
                found: true,
                message: None,
                codeword: None,
                queries: 0,
                solution_lw: lw,
                solution_hw: p.size(),
                abandoned: false,
                pattern: Some(p.clone()),
            };
            let t = s.termination(&out).unwrap();
            let cyc = s.cycles(&t).unwrap();
            assert!(cyc <= s.worst_case());
            if p.size() >= 2 {
                assert!(cyc >= last_multi, "{p:?}");
                last_multi = cyc;
            }
        }
        assert_eq!(last_multi, s.worst_case());
    }

    #[test]
    fn trace_examples() {
        let c = cfg(64, 6);
        let r = trace_latency(&vec![Termination::Initial; 10], &c).unwrap();
        assert_eq!(r.avg_cycles, Some(1.0));
        assert!((r.avg_latency_ns.unwrap() - 2.2026).abs() < 1e-3);
        let r = trace_latency(&[Termination::Abandoned], &c).unwrap();
        assert_eq!(r.avg_cycles, Some(worst_case_cycles(&c) as f64));
        assert!(matches!(trace_latency(&[], &c), Err(Error::EmptyTrace)));
        let json = serde_json::to_value(&r).unwrap();
        for key in ["wc_cycles", "wc_latency_ns", "avg_cycles", "avg_latency_ns", "avg_tp_gbps", "overhead_constant_used"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn trace_text_round_trip() {
        let t = vec![
            Termination::Initial,
            Termination::Found { lw: 12, p: 4, suffix_rank: 2 },
            Termination::Abandoned,
        ];
        assert_eq!(parse_trace(&format_trace(&t)).unwrap(), t);
        match parse_trace("initial\n\n  found 3 x 0\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(ScheduleConfig::new(128, 105, 64, 2, 454.0).is_err());
        assert!(ScheduleConfig::new(128, 129, 64, 6, 454.0).is_err());
        assert!(ScheduleConfig::new(128, 105, 64, 6, 0.0).is_err());
    }
}
