//! Monte-Carlo frame error rate experiments.
//!
//! Every frame draws its randomness from its own ChaCha stream keyed by
//! `(seed, sweep point, frame index)`, so results do not depend on the
//! number of worker threads. Frames run in parallel batches and are then
//! counted in index order, which keeps early stopping deterministic.
//!
//! Erasure channels take a bit-sliced path that decodes 64 frames per word
//! with the same decisions as the scalar decoder; there the stream is keyed
//! by the 64-frame word instead of the single frame.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::BmsChannel;
use crate::codec::{encode, init_llrs, ChannelModel, ScDecoder, Symbol};
use crate::construction::{construct, select_info_set_excluding};
use crate::error::{Error, Result};
use crate::rate_matching::{design_code, CodeSpec, RateMode};
use crate::sliced::{bernoulli_mask, bernoulli_threshold, encode_words, SlicedDecoder};

pub const SCHEMA_VERSION: u32 = 1;
const BATCH: usize = 512;
const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFamily {
    /// Sweep over the erasure probability.
    Bec,
    /// Sweep over the crossover probability.
    Bsc,
    /// Sweep over Eb/N0 in dB.
    Awgn,
}

impl std::str::FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bec" => Ok(ChannelFamily::Bec),
            "bsc" => Ok(ChannelFamily::Bsc),
            "awgn" => Ok(ChannelFamily::Awgn),
            other => Err(Error::InvalidConfig(format!("unknown channel {other:?}"))),
        }
    }
}

/// How the information set is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// Constructed over the rate-matched underlying channels.
    #[default]
    Reordered,
    /// Constructed as if all `N` bits were sent over the same channel.
    Original,
}

impl std::str::FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reordered" => Ok(Ordering::Reordered),
            "original" => Ok(Ordering::Original),
            other => Err(Error::InvalidConfig(format!("unknown ordering {other:?}"))),
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_mu() -> usize {
    256
}

fn default_alphabet() -> usize {
    2048
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub channel: ChannelFamily,
    pub sweep: Vec<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// Explicit dimension; when absent `K = round(rate * M)`.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default)]
    pub mode: RateMode,
    #[serde(default)]
    pub ordering: Ordering,
    #[serde(default = "default_mu")]
    pub mu: usize,
    /// Output alphabet of the quantized AWGN channel used for construction.
    #[serde(default = "default_alphabet")]
    pub awgn_alphabet: usize,
    pub max_frames: usize,
    pub max_errors: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn dimension(&self) -> Result<usize> {
        match (self.k, self.rate) {
            (Some(k), _) => Ok(k),
            (None, Some(r)) if (0.0..=1.0).contains(&r) => Ok((r * self.m as f64).round() as usize),
            (None, Some(r)) => Err(Error::ParameterDomain {
                name: "rate",
                value: r,
                domain: "[0, 1]",
            }),
            (None, None) => Err(Error::InvalidConfig("either K or rate is required".into())),
        }
    }

    /// Rejects inconsistent settings before any work is done.
    pub fn validate(&self) -> Result<CodeSpec> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        if self.sweep.is_empty() {
            return Err(Error::InvalidConfig("sweep list is empty".into()));
        }
        if self.mu < 2 {
            return Err(Error::InvalidMu(self.mu));
        }
        if self.max_frames == 0 || self.max_errors == 0 {
            return Err(Error::InvalidConfig(
                "maxFrames and maxErrors must be positive".into(),
            ));
        }
        for &x in &self.sweep {
            let (name, ok, domain) = match self.channel {
                ChannelFamily::Bec => ("erasure probability", (0.0..=1.0).contains(&x), "[0, 1]"),
                ChannelFamily::Bsc => ("crossover probability", (0.0..=0.5).contains(&x), "[0, 0.5]"),
                ChannelFamily::Awgn => ("Eb/N0", x.is_finite(), "finite dB"),
            };
            if !ok {
                return Err(Error::ParameterDomain {
                    name,
                    value: x,
                    domain,
                });
            }
        }
        CodeSpec::new(self.n, self.m, self.dimension()?, self.mode)
    }
}

/// Noise variance of unit-energy BPSK at the given Eb/N0 and code rate.
pub fn awgn_sigma2(eb_n0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(eb_n0_db / 10.0))
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: usize, frames: usize) -> (f64, f64) {
    if frames == 0 {
        return (0.0, 1.0);
    }
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FerPoint {
    pub param: f64,
    pub frames: usize,
    pub frame_errors: usize,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub wall_time_secs: f64,
    pub info_set: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FerResult {
    pub config: ExperimentConfig,
    #[serde(rename = "K")]
    pub k: usize,
    pub points: Vec<FerPoint>,
    pub notes: Vec<String>,
}

impl FerResult {
    /// CSV without timing columns, so fixed seeds give identical bytes.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("param,frames,errors,fer,ci_low,ci_high\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{:.6e},{:.6e},{:.6e}",
                p.param, p.frames, p.frame_errors, p.fer, p.ci_low, p.ci_high
            );
        }
        s
    }
}

fn design_channel(cfg: &ExperimentConfig, x: f64, rate: f64) -> Result<(BmsChannel<f64>, ChannelModel<f64>)> {
    Ok(match cfg.channel {
        ChannelFamily::Bec => (BmsChannel::bec(x)?, ChannelModel::Bec { erasure: x }),
        ChannelFamily::Bsc => (BmsChannel::bsc(x)?, ChannelModel::Bsc { crossover: x }),
        ChannelFamily::Awgn => {
            let sigma2 = awgn_sigma2(x, rate);
            (
                BmsChannel::awgn_quantized_sigma2(sigma2, cfg.awgn_alphabet)?,
                ChannelModel::Awgn { sigma2 },
            )
        }
    })
}

/// Information set for one design channel under the configured ordering.
fn info_set_for(cfg: &ExperimentConfig, spec: &CodeSpec, w: &BmsChannel<f64>) -> Result<CodeSpec> {
    match cfg.ordering {
        Ordering::Reordered => Ok(design_code(w, spec.clone(), cfg.mu)?.0),
        Ordering::Original => {
            let quality = construct(&vec![w.clone(); spec.n], cfg.mu)?;
            let info = select_info_set_excluding(&quality, spec.k, &spec.forced_frozen())?;
            spec.clone().with_info_set(info)
        }
    }
}

fn frame_seed(seed: u64, point: usize) -> u64 {
    seed ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn transmit(rng: &mut ChaCha8Rng, model: &ChannelModel<f64>, bit: u8, noise: &Option<Normal<f64>>) -> Symbol<f64> {
    match *model {
        ChannelModel::Bec { erasure } => {
            if rng.random::<f64>() < erasure {
                Symbol::Erasure
            } else {
                Symbol::Bit(bit)
            }
        }
        ChannelModel::Bsc { crossover } => Symbol::Bit(bit ^ u8::from(rng.random::<f64>() < crossover)),
        ChannelModel::Awgn { .. } => {
            let s = if bit == 0 { 1.0 } else { -1.0 };
            Symbol::Real(s + noise.as_ref().map_or(0.0, |d| d.sample(rng)))
        }
    }
}

/// Simulates one frame and reports whether it was decoded wrongly.
fn run_frame(
    spec: &CodeSpec,
    frozen: &[bool],
    model: &ChannelModel<f64>,
    noise: &Option<Normal<f64>>,
    seed: u64,
    index: u64,
    dec: &mut ScDecoder<f64>,
) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut u = vec![0u8; spec.n];
    for &i in &spec.info_set {
        u[i - 1] = rng.random_range(0..2);
    }
    let x = encode(&u)?;
    let received: Vec<Symbol<f64>> = spec
        .transmitted_positions()
        .iter()
        .map(|&j| transmit(&mut rng, model, x[j - 1], noise))
        .collect();
    let llr = init_llrs(&received, model, spec)?;
    Ok(dec.decode(&llr, frozen)? != u)
}

/// Error mask of one 64-frame word on an erasure channel.
fn run_word(spec: &CodeSpec, frozen: &[bool], removed: &[bool], erasure: f64, seed: u64, word: u64, dec: &mut SlicedDecoder) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(word);
    let mut u = vec![0u64; spec.n];
    for &i in &spec.info_set {
        u[i - 1] = rng.random();
    }
    let x = encode_words(&u);
    let threshold = bernoulli_threshold(erasure);
    let known: Vec<u64> = removed
        .iter()
        .map(|&gone| match (gone, spec.mode) {
            (true, RateMode::Shorten) => !0,
            (true, _) => 0,
            (false, _) => !bernoulli_mask(&mut rng, threshold),
        })
        .collect();
    let mut u_hat = vec![0u64; spec.n];
    dec.decode(&known, &x, frozen, &mut u_hat);
    u.iter().zip(&u_hat).fold(0, |acc, (a, b)| acc | (a ^ b))
}

fn run_point_bec(cfg: &ExperimentConfig, spec: &CodeSpec, erasure: f64, seed: u64) -> (usize, usize) {
    let frozen = spec.frozen_mask();
    let mut removed = vec![false; spec.n];
    for &j in &spec.pattern {
        removed[j - 1] = true;
    }
    let words = cfg.max_frames.div_ceil(64);
    let (mut frames, mut errors) = (0usize, 0usize);
    let mut next = 0;
    'outer: while next < words {
        let end = (next + BATCH).min(words);
        let masks: Vec<u64> = (next..end)
            .into_par_iter()
            .map_init(
                || SlicedDecoder::new(spec.n),
                |dec, w| run_word(spec, &frozen, &removed, erasure, seed, w as u64, dec),
            )
            .collect();
        for mask in masks {
            for lane in 0..64 {
                if frames == cfg.max_frames {
                    break 'outer;
                }
                frames += 1;
                errors += (mask >> lane & 1) as usize;
                if errors >= cfg.max_errors {
                    break 'outer;
                }
            }
        }
        next = end;
    }
    (frames, errors)
}

fn run_point(cfg: &ExperimentConfig, spec: &CodeSpec, model: ChannelModel<f64>, seed: u64) -> Result<(usize, usize)> {
    if let ChannelModel::Bec { erasure } = model {
        return Ok(run_point_bec(cfg, spec, erasure, seed));
    }
    let frozen = spec.frozen_mask();
    let noise = match model {
        ChannelModel::Awgn { sigma2 } => Some(
            Normal::new(0.0, sigma2.sqrt())
                .map_err(|e| Error::InvalidConfig(format!("noise distribution: {e}")))?,
        ),
        _ => None,
    };
    let (mut frames, mut errors) = (0usize, 0usize);
    while frames < cfg.max_frames && errors < cfg.max_errors {
        let end = (frames + BATCH).min(cfg.max_frames);
        let outcomes = (frames..end)
            .into_par_iter()
            .map_init(
                || ScDecoder::new(spec.n),
                |dec, i| {
                    let dec = dec.as_mut().map_err(|e| e.clone())?;
                    run_frame(spec, &frozen, &model, &noise, seed, i as u64, dec)
                },
            )
            .collect::<Result<Vec<bool>>>()?;
        for failed in outcomes {
            frames += 1;
            errors += usize::from(failed);
            if errors >= cfg.max_errors {
                break;
            }
        }
    }
    Ok((frames, errors))
}

/// Runs every sweep point of `cfg`.
pub fn run_fer(cfg: &ExperimentConfig) -> Result<FerResult> {
    let base = cfg.validate()?;
    let rate = base.rate();
    let mut notes = vec![
        "sampling stops at maxErrors frame errors or maxFrames frames; the stopped FER is the usual sequential estimate".to_string(),
        "confidence intervals are 95% Wilson score intervals".to_string(),
    ];
    // the original ordering is designed once for AWGN, at the sweep midpoint
    let fixed = match (cfg.channel, cfg.ordering) {
        (ChannelFamily::Awgn, Ordering::Original) => {
            let lo = cfg.sweep.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = cfg.sweep.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mid = 0.5 * (lo + hi);
            notes.push(format!("original ordering designed once at Eb/N0 = {mid} dB"));
            let (w, _) = design_channel(cfg, mid, rate)?;
            Some(info_set_for(cfg, &base, &w)?)
        }
        _ => None,
    };
    if cfg.channel == ChannelFamily::Awgn {
        notes.push("AWGN noise variance is 1/(2 R 10^(EbN0/10)) with unit-energy BPSK".to_string());
        if cfg.ordering == Ordering::Reordered {
            notes.push("reordered construction uses each sweep point as design SNR".to_string());
        }
    }
    let mut points = Vec::with_capacity(cfg.sweep.len());
    for (idx, &x) in cfg.sweep.iter().enumerate() {
        let start = Instant::now();
        let (w, model) = design_channel(cfg, x, rate)?;
        let spec = match &fixed {
            Some(s) => s.clone(),
            None => info_set_for(cfg, &base, &w)?,
        };
        let (frames, errors) = run_point(cfg, &spec, model, frame_seed(cfg.seed, idx))?;
        let (ci_low, ci_high) = wilson_interval(errors, frames);
        points.push(FerPoint {
            param: x,
            frames,
            frame_errors: errors,
            fer: errors as f64 / frames as f64,
            ci_low,
            ci_high,
            wall_time_secs: start.elapsed().as_secs_f64(),
            info_set: spec.info_set,
        });
    }
    Ok(FerResult {
        config: cfg.clone(),
        k: base.k,
        points,
        notes,
    })
}
