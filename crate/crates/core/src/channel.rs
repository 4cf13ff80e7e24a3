//! BPSK over AWGN with seeded per-frame noise, LLRs and 5-bit quantization.
//!
//! Conventions: bit 0 maps to +1, bit 1 to -1; `SNR = -10·log10(σ²)`;
//! `llr = 2y/σ²`, so a positive LLR favours bit 0.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitWord;
use crate::Real;

/// How LLR magnitudes are scaled before rounding to the fixed-point grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prescale<T> {
    /// Divide by the frame's largest magnitude, then multiply by the largest
    /// representable magnitude.
    PerFrameMax,
    /// Multiply by a fixed factor.
    Fixed(T),
}

/// Sign-magnitude fixed-point input format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantSpec<T> {
    pub total_bits: u32,
    pub sign_bits: u32,
    pub frac_bits: u32,
    pub prescale: Prescale<T>,
}

impl<T: Real> Default for QuantSpec<T> {
    /// 5 bits: 1 sign, 1 integer, 3 fractional; magnitudes 0..=1.875 in steps of 0.125.
    fn default() -> Self {
        QuantSpec {
            total_bits: 5,
            sign_bits: 1,
            frac_bits: 3,
            prescale: Prescale::PerFrameMax,
        }
    }
}

impl<T: Real> QuantSpec<T> {
    pub fn with_prescale(prescale: T) -> Self {
        QuantSpec {
            prescale: Prescale::Fixed(prescale),
            ..Self::default()
        }
    }

    #[inline]
    pub fn step(&self) -> T {
        T::from_f64(0.5f64.powi(self.frac_bits as i32)).unwrap()
    }

    /// Largest magnitude level (in steps).
    #[inline]
    pub fn max_level(&self) -> u32 {
        (1u32 << (self.total_bits - self.sign_bits)) - 1
    }

    pub fn max_magnitude(&self) -> T {
        T::from_u32(self.max_level()).unwrap() * self.step()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig<T> {
    pub snr_db: T,
    pub seed: u64,
    pub quant: Option<QuantSpec<T>>,
}

impl<T: Real> ChannelConfig<T> {
    pub fn new(snr_db: T, seed: u64) -> Self {
        ChannelConfig {
            snr_db,
            seed,
            quant: None,
        }
    }

    /// Noise variance `σ² = 10^(-snr_db/10)`.
    pub fn noise_variance(&self) -> T {
        let ten = T::from_f64(10.0).unwrap();
        ten.powf(-self.snr_db / ten)
    }

    pub fn sigma(&self) -> T {
        self.noise_variance().sqrt()
    }

    /// Independent, reproducible generator for frame number `frame`.
    pub fn frame_rng(&self, frame: u64) -> ChaCha8Rng {
        frame_rng(self.seed, frame)
    }
}

/// ChaCha8 seeded from `seed` with stream id `frame`: each frame owns a
/// disjoint keystream regardless of evaluation order.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

/// BPSK-modulates `codeword` and adds white Gaussian noise of variance `σ²`.
pub fn transmit<T: Real, R: Rng>(codeword: &BitWord, cfg: &ChannelConfig<T>, rng: &mut R) -> Vec<T> {
    let sigma = cfg.sigma();
    codeword
        .iter()
        .map(|b| {
            let x = if b { -T::one() } else { T::one() };
            let z: f64 = rng.sample(StandardNormal);
            x + sigma * T::from_f64(z).unwrap()
        })
        .collect()
}

pub fn llr<T: Real>(y: &[T], noise_variance: T) -> Vec<T> {
    let two = T::from_f64(2.0).unwrap();
    y.iter().map(|&v| two * v / noise_variance).collect()
}

#[inline]
fn round_half_even<T: Real>(x: T) -> T {
    let f = x.floor();
    let d = x - f;
    let half = T::from_f64(0.5).unwrap();
    if d > half {
        f + T::one()
    } else if d < half || (f / (T::one() + T::one())).fract() == T::zero() {
        f
    } else {
        f + T::one()
    }
}

/// Rounds magnitudes to the fixed-point grid (ties to even), saturating at
/// the largest level. The sign is kept, including on values that round to
/// zero magnitude (they become `-0.0`).
pub fn quantize<T: Real>(llrs: &[T], q: &QuantSpec<T>) -> Vec<T> {
    let step = q.step();
    let max_level = T::from_u32(q.max_level()).unwrap();
    let scale = match q.prescale {
        Prescale::Fixed(s) => s,
        Prescale::PerFrameMax => {
            let peak = llrs.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            if peak > T::zero() {
                q.max_magnitude() / peak
            } else {
                T::one()
            }
        }
    };
    llrs.iter()
        .map(|&v| {
            let level = round_half_even(v.abs() * scale / step).min(max_level);
            (level * step).copysign(v)
        })
        .collect()
}

/// One line of a diagnostic frame dump:
/// `seed <TAB> snr_db <TAB> tx_hex <TAB> y,y,... <TAB> q,q,...` where the last
/// field is `-` when the frame was not quantized.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRecord {
    pub seed: u64,
    pub snr_db: f64,
    pub tx: BitWord,
    pub y: Vec<f64>,
    pub quantized: Option<Vec<f64>>,
}

impl FrameRecord {
    pub fn to_line(&self) -> String {
        let join = |v: &[f64]| {
            let mut s = String::new();
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{x}").unwrap();
            }
            s
        };
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.seed,
            self.snr_db,
            self.tx.to_hex(),
            join(&self.y),
            self.quantized.as_deref().map_or_else(|| "-".to_string(), join)
        )
    }

    pub fn parse_line(line: &str, line_no: usize) -> Result<Self> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                line_no,
                1,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let col = |idx: usize| fields[..idx].iter().map(|f| f.len() + 1).sum::<usize>() + 1;
        let seed = fields[0]
            .parse()
            .map_err(|_| Error::parse(line_no, col(0), "bad seed"))?;
        let snr_db = fields[1]
            .parse()
            .map_err(|_| Error::parse(line_no, col(1), "bad snr_db"))?;
        let floats = |idx: usize| -> Result<Vec<f64>> {
            fields[idx]
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(line_no, col(idx), format!("bad value list: {e}")))
        };
        let y = floats(3)?;
        let tx = BitWord::from_hex(fields[2], y.len())
            .map_err(|e| Error::parse(line_no, col(2), e.to_string()))?;
        let quantized = if fields[4].trim() == "-" {
            None
        } else {
            let q = floats(4)?;
            if q.len() != y.len() {
                return Err(Error::parse(line_no, col(4), "quantized LLR count differs from y"));
            }
            Some(q)
        };
        Ok(FrameRecord {
            seed,
            snr_db,
            tx,
            y,
            quantized,
        })
    }

    /// LLRs to decode: the stored quantized values, or `2y/σ²` otherwise.
    pub fn llrs(&self) -> Vec<f64> {
        match &self.quantized {
            Some(q) => q.clone(),
            None => llr(&self.y, ChannelConfig::new(self.snr_db, self.seed).noise_variance()),
        }
    }
}
