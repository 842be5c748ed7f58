//! Polar code construction over heterogeneous binary-input memoryless
//! symmetric channels, with rate matching, SC decoding, Monte-Carlo frame
//! error rate experiments and a cycle-level folded encoder model.
//!
//! Numeric routines are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the common double-precision choice.

pub mod channel;
pub mod codec;
pub mod construction;
pub mod error;
pub mod folded;
pub mod harness;
pub mod rate_matching;
pub mod scalar;
mod sliced;

pub use channel::{channel_stats, degrading_merge, BmsChannel, ChannelKind, ChannelRecord, ChannelStats};
pub use codec::{encode, init_llrs, sc_decode, ChannelModel, ScDecoder, Symbol, LLR_MAX};
pub use construction::{
    construct, construct_bec_z, construct_modified_tal_vardy, exact_oracle, select_info_set,
    select_info_set_excluding, tal_vardy_channels, tran, transform_pair, BitChannelQuality,
    ExactQualities, Metric, TalVardyChannels, ENUMERATION_LIMIT,
};
pub use error::{Error, Result};
pub use folded::{
    build_schedule, leading_frozen_count, simulate, simulate_traced, CycleReport, FoldedSchedule, Stage,
    TraceRow,
};
pub use harness::{
    awgn_sigma2, run_fer, wilson_interval, ChannelFamily, ExperimentConfig, FerPoint, FerResult, Ordering,
};
pub use rate_matching::{bit_reverse, design_code, make_pattern, underlying_vector, CodeSpec, RateMode};
pub use scalar::Real;

pub type Channel = BmsChannel<f64>;
pub type Channel32 = BmsChannel<f32>;
pub type Quality = BitChannelQuality<f64>;
pub type Quality32 = BitChannelQuality<f32>;
pub type Stats = ChannelStats<f64>;
