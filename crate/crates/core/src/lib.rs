//! Code-agnostic GRAND decoding.
//!
//! * [`gf2`]: bit-packed GF(2) words and matrices, syndromes, right inverses.
//! * [`code`] / [`io`]: linear code containers, 5G CRC-aided polar and random
//!   constructions, alist / hex matrix files.
//! * [`partition`]: distinct integer partitions in logistic-weight order and
//!   exact query counting.
//! * [`decoder`]: ORBGRAND and GRANDAB.
//! * [`channel`]: BPSK over AWGN, LLRs and 5-bit input quantization.
//! * [`hw`]: cycle model of a shift-register ORBGRAND schedule.
//! * [`campaign`]: Monte-Carlo FER campaigns.
//!
//! Soft values are generic over [`Real`] (`f32` or `f64`); the `*F32` / `*F64`
//! aliases below fix the scalar.

pub mod campaign;
pub mod channel;
pub mod code;
pub mod decoder;
pub mod error;
pub mod gf2;
pub mod hw;
pub mod io;
pub mod partition;

use std::fmt::{Debug, Display};

pub use code::{build_ca_polar, build_random_linear, CaPolarSpec, LinearCode};
pub use decoder::{DecodeOutcome, GrandAb, OrbGrand, SortPermutation, SyndromeCheck};
pub use error::{Error, Result};
pub use gf2::{BitWord, Gf2Matrix};
pub use partition::{count_queries, Partition, PatternBudget, PatternStream};

/// Scalar type for channel observations and LLRs.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

pub type ChannelConfigF32 = channel::ChannelConfig<f32>;
pub type ChannelConfigF64 = channel::ChannelConfig<f64>;
pub type QuantSpecF32 = channel::QuantSpec<f32>;
pub type QuantSpecF64 = channel::QuantSpec<f64>;
