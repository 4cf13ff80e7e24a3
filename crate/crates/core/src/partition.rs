//! Distinct integer partitions in logistic-weight order.
//!
//! A partition `(λ_1 > λ_2 > ... > λ_P)` of a logistic weight `m` names the
//! reliability ranks to flip: part `λ` flips the `λ`-th least reliable bit
//! (1-based), so the resulting error pattern has Hamming weight `P`.
//!
//! Within one `(m, P)` the parts are swept like an odometer: `λ_P` advances
//! slowest, `λ_2` fastest (ascending), and `λ_1 = m - Σ_{j≥2} λ_j` descends.
//! For `m = 10, P = 2` this yields `(9,1), (8,2), (7,3), (6,4)`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Strictly decreasing positive parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Checks that `parts` is strictly decreasing and positive.
    pub fn new(parts: Vec<u32>) -> Option<Self> {
        let ok = parts.windows(2).all(|w| w[0] > w[1]) && parts.last().is_none_or(|&p| p >= 1);
        ok.then_some(Partition(parts))
    }

    #[inline]
    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of parts, equal to the Hamming weight of the error pattern.
    #[inline]
    pub fn size(&self) -> usize {
        self.0.len()
    }

    /// Sum of the parts, i.e. the logistic weight.
    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&p| p as u64).sum()
    }

    pub fn largest(&self) -> Option<u32> {
        self.0.first().copied()
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Limits on the patterns enumerated by [`PatternStream`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternBudget {
    /// Largest logistic weight enumerated.
    pub lw_max: u64,
    /// Largest partition size (Hamming weight); `None` means unbounded.
    pub p_max: Option<u32>,
    /// Largest admissible part, normally the block length.
    pub n: u32,
}

impl PatternBudget {
    pub fn new(lw_max: u64, p_max: Option<u32>, n: u32) -> Self {
        PatternBudget { lw_max, p_max, n }
    }

    /// Every pattern on `n` bits: `lw_max = n(n+1)/2`, unbounded size.
    pub fn exhaustive(n: u32) -> Self {
        PatternBudget {
            lw_max: triangular(n as u64),
            p_max: None,
            n,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lw_max <= triangular(self.n as u64) && self.p_max.is_none_or(|p| p >= 1)
    }

    /// Largest partition size that can actually occur under this budget.
    pub fn effective_p_max(&self) -> u32 {
        let mut p = 0u32;
        while p < self.n && triangular(p as u64 + 1) <= self.lw_max {
            p += 1;
        }
        self.p_max.map_or(p, |cap| cap.min(p))
    }
}

#[inline]
pub(crate) fn triangular(p: u64) -> u64 {
    p * (p + 1) / 2
}

/// Upper bound on part `λ_i` (1-based position `i ≥ 2`) of a distinct
/// partition of `m`, given the already fixed smaller parts `suffix`
/// (`λ_{i+1}, ..., λ_P`, any order):
///
/// `λ_i < (2m - i(i-1) + 2 - 2·Σ suffix) / (2i)`.
///
/// Returns the largest integer strictly below the bound. A result below 1
/// means no admissible value exists.
pub fn lambda_max(m: u64, i: u32, suffix: &[u32]) -> i64 {
    let i = i as i64;
    let s: i64 = suffix.iter().map(|&p| p as i64).sum();
    let num = 2 * m as i64 - i * (i - 1) + 2 - 2 * s;
    let den = 2 * i;
    let q = num.div_euclid(den);
    if num.rem_euclid(den) == 0 {
        q - 1
    } else {
        q
    }
}

/// Odometer over the distinct partitions of `m` into exactly `p` parts, all
/// at most `max_part`.
#[derive(Clone, Debug)]
pub struct FixedSizePartitions {
    m: u64,
    max_part: u64,
    /// `parts[j]` is `λ_{j+1}`.
    parts: Vec<u32>,
    state: State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Fresh,
    Running,
    Done,
}

impl FixedSizePartitions {
    pub fn new(m: u64, p: u32, max_part: u32) -> Self {
        FixedSizePartitions {
            m,
            max_part: max_part as u64,
            parts: vec![0; p as usize],
            state: State::Fresh,
        }
    }

    /// Sum still to be distributed over `λ_1..λ_i` given the parts above `i`.
    #[inline]
    fn remaining(&self, i: usize) -> u64 {
        self.m - self.parts[i..].iter().map(|&p| p as u64).sum::<u64>()
    }

    // Admissible range of λ_i (1-based i ≥ 2) when λ_{i+1..} are fixed and
    // λ_1..λ_i must sum to `r`. The lower end keeps λ_1 ≤ max_part reachable;
    // the upper end is the distinct-partition bound, capped so that λ_1..λ_{i-1}
    // still fit under max_part.
    #[inline]
    fn range(&self, i: usize, r: u64) -> Option<(u64, u64)> {
        let i64_ = i as u64;
        let prev = if i < self.parts.len() {
            self.parts[i] as u64
        } else {
            0
        };
        // largest possible sum of i-1 distinct parts not exceeding max_part
        let top = if self.max_part + 1 >= i64_ {
            (i64_ - 1) * self.max_part - triangular(i64_ - 2)
        } else {
            return None;
        };
        let lo = (prev + 1).max(r.saturating_sub(top));
        let num = 2 * r as i128 - (i64_ * (i64_ - 1)) as i128 + 2;
        let den = 2 * i64_ as i128;
        let hi_bound = if num.rem_euclid(den) == 0 {
            num.div_euclid(den) - 1
        } else {
            num.div_euclid(den)
        };
        if hi_bound < 1 {
            return None;
        }
        let hi = (hi_bound as u64).min(self.max_part + 1 - i64_);
        (lo <= hi).then_some((lo, hi))
    }

    /// Sets λ_i..λ_2 to their smallest admissible values and λ_1 to the rest.
    fn fill_from(&mut self, i: usize) -> bool {
        let p = self.parts.len();
        for level in (2..=i).rev() {
            let r = self.remaining(level);
            match self.range(level, r) {
                Some((lo, _)) => self.parts[level - 1] = lo as u32,
                None => {
                    debug_assert_eq!(level, p, "completions always exist below the top level");
                    return false;
                }
            }
        }
        let r = self.remaining(1);
        self.parts[0] = r as u32;
        true
    }

    fn start(&mut self) -> bool {
        let p = self.parts.len();
        match p {
            0 => self.m == 0,
            1 => {
                self.parts[0] = self.m as u32;
                self.m >= 1 && self.m <= self.max_part
            }
            _ => {
                if triangular(p as u64) > self.m {
                    return false;
                }
                self.fill_from(p)
            }
        }
    }

    fn advance(&mut self) -> bool {
        let p = self.parts.len();
        for level in 2..=p {
            let r = self.remaining(level);
            let (_, hi) = self.range(level, r).expect("current value is admissible");
            if (self.parts[level - 1] as u64) < hi {
                self.parts[level - 1] += 1;
                return self.fill_from(level - 1);
            }
        }
        false
    }

    /// Advances and returns the next partition's parts, largest first.
    pub fn next_parts(&mut self) -> Option<&[u32]> {
        let ok = match self.state {
            State::Fresh => self.start(),
            State::Running => self.advance(),
            State::Done => false,
        };
        if ok {
            self.state = State::Running;
            Some(&self.parts)
        } else {
            self.state = State::Done;
            None
        }
    }
}

impl Iterator for FixedSizePartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        self.next_parts().map(|p| Partition(p.to_vec()))
    }
}

/// All distinct partitions of `m` into exactly `p` parts not exceeding
/// `max_part`, in enumeration order.
pub fn partitions_of(m: u64, p: u32, max_part: u32) -> Vec<Partition> {
    FixedSizePartitions::new(m, p, max_part).collect()
}

/// Pull-based stream of `(logistic weight, partition)` pairs: the empty
/// partition first, then weights `1..=lw_max`, each grouped by ascending size.
#[derive(Clone, Debug)]
pub struct PatternStream {
    budget: PatternBudget,
    p_cap: u32,
    lw: u64,
    inner: FixedSizePartitions,
}

impl PatternStream {
    pub fn new(budget: PatternBudget) -> Self {
        PatternStream {
            budget,
            p_cap: budget.effective_p_max(),
            lw: 0,
            inner: FixedSizePartitions::new(0, 0, budget.n),
        }
    }

    pub fn budget(&self) -> &PatternBudget {
        &self.budget
    }

    /// Next pattern without allocating; the slice is valid until the next call.
    pub fn next_parts(&mut self) -> Option<(u64, &[u32])> {
        loop {
            if self.inner.next_parts().is_some() {
                return Some((self.lw, &self.inner.parts));
            }
            let p = self.inner.parts.len() as u32;
            let max_p_here = self.p_cap.min(max_size_for(self.lw));
            if self.lw > 0 && p < max_p_here {
                self.inner = FixedSizePartitions::new(self.lw, p + 1, self.budget.n);
            } else if self.lw < self.budget.lw_max {
                self.lw += 1;
                self.inner = FixedSizePartitions::new(self.lw, 1, self.budget.n);
            } else {
                return None;
            }
        }
    }
}

fn max_size_for(m: u64) -> u32 {
    let mut p = 0u32;
    while triangular(p as u64 + 1) <= m {
        p += 1;
    }
    p
}

impl Iterator for PatternStream {
    type Item = (u64, Partition);

    fn next(&mut self) -> Option<(u64, Partition)> {
        self.next_parts().map(|(lw, p)| (lw, Partition(p.to_vec())))
    }
}

/// Exact number of patterns [`PatternStream`] emits for `budget`, including
/// the empty pattern. Saturates at `u128::MAX`.
pub fn count_queries(budget: &PatternBudget) -> u128 {
    let lw_max = budget.lw_max as usize;
    let p_cap = budget.effective_p_max() as usize;
    // ways[m][p]: distinct partitions of m into p parts, all parts ≤ current v
    let mut ways = vec![vec![0u128; p_cap + 1]; lw_max + 1];
    ways[0][0] = 1;
    for v in 1..=(budget.n as usize).min(lw_max) {
        for m in (v..=lw_max).rev() {
            for p in (1..=p_cap).rev() {
                let add = ways[m - v][p - 1];
                ways[m][p] = ways[m][p].saturating_add(add);
            }
        }
    }
    ways.iter()
        .flat_map(|row| row.iter())
        .fold(0u128, |acc, &w| acc.saturating_add(w))
}
