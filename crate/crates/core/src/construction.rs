//! Bit-channel qualities for `N = 2^n` independent, possibly different,
//! underlying channels.
//!
//! Positions follow the in-place level schedule: at level `i` the `j`-th
//! Z-shape combines positions `tran(i, j)`. When every level has run,
//! position `p` holds the bit channel whose index is the bit reversal of
//! `p`; the public functions undo that permutation and report values in
//! bit-channel order `1..=N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_stats, degrading_merge, BmsChannel, ChannelKind};
use crate::error::{Error, Result};
use crate::rate_matching::bit_reverse0;
use crate::scalar::{xlog2_ratio, Ordered, Real};

/// Which functional a quality vector holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Metric {
    Bhattacharyya,
    ErrorProb,
}

/// Per-bit-channel quality in bit-channel order; smaller is better.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BitChannelQuality<T> {
    pub values: Vec<T>,
    pub metric: Metric,
    pub mu: Option<usize>,
    /// Degrading-merge invocations made by the level schedule.
    pub approx_calls: usize,
    /// Extra merges applied to underlying channels larger than `mu`
    /// before the first level; not part of `approx_calls`.
    #[serde(default)]
    pub input_reductions: usize,
}

impl<T> BitChannelQuality<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros())
}

/// Positions `(k1, k2)` (1-based) combined by Z-shape `j` at level `i`.
pub fn tran(i: usize, j: usize, n_len: usize) -> Result<(usize, usize)> {
    let levels = log2_exact(n_len)? as usize;
    if i == 0 || i > levels {
        return Err(Error::IndexOutOfRange {
            what: "level",
            value: i,
            max: levels,
        });
    }
    if j == 0 || j > n_len / 2 {
        return Err(Error::IndexOutOfRange {
            what: "z-shape",
            value: j,
            max: n_len / 2,
        });
    }
    Ok(tran_unchecked(i, j))
}

fn tran_unchecked(i: usize, j: usize) -> (usize, usize) {
    let half = 1usize << (i - 1);
    let group = j.div_ceil(half);
    let k1 = (group - 1) * (half << 1) + j - (group - 1) * half;
    (k1, k1 + half)
}

/// One-step transform of `(upper, lower)` into the check-side channel
/// `W0(y1, y2 | u1)` and the variable-side channel `W1(y1, y2, u1 | u2)`.
///
/// Outputs are exact: symbols with identical likelihood ratio arising from
/// conjugate-symmetric combinations are stored once with their joint mass.
pub fn transform_pair<T: Real>(
    upper: &BmsChannel<T>,
    lower: &BmsChannel<T>,
) -> Result<(BmsChannel<T>, BmsChannel<T>)> {
    let eu = upper.self_conjugate().unwrap_or_else(T::zero);
    let eb = lower.self_conjugate().unwrap_or_else(T::zero);
    let su: T = upper.pairs().iter().map(|&(a, b)| a + b).sum();
    let up = upper.pairs();
    let lo = lower.pairs();

    let mut check = Vec::with_capacity(up.len() * lo.len());
    for &(a0, a1) in up {
        for &(b0, b1) in lo {
            check.push((a0 * b0 + a1 * b1, a1 * b0 + a0 * b1));
        }
    }
    let check_erasure = eu + su * eb;

    let mut var = Vec::with_capacity(2 * up.len() * lo.len() + up.len() + lo.len());
    for &(a0, a1) in up {
        for &(b0, b1) in lo {
            var.push((a0 * b0, a1 * b1));
            var.push((a0 * b1, a1 * b0));
        }
    }
    if eu > T::zero() {
        var.extend(lo.iter().map(|&(b0, b1)| (eu * b0, eu * b1)));
    }
    if eb > T::zero() {
        var.extend(up.iter().map(|&(a0, a1)| (a0 * eb, a1 * eb)));
    }
    let var_erasure = eu * eb;

    let w0 = BmsChannel::from_parts(check, Some(check_erasure), ChannelKind::Derived, None)?;
    let w1 = BmsChannel::from_parts(var, Some(var_erasure), ChannelKind::Derived, None)?;
    Ok((w0, w1))
}

fn from_positions<T: Copy>(by_position: &[T]) -> Vec<T> {
    let bits = by_position.len().trailing_zeros();
    (0..by_position.len())
        .map(|i| by_position[bit_reverse0(i, bits)])
        .collect()
}

/// Bhattacharyya recursion for erasure channels with initial values `z`.
pub fn construct_bec_z<T: Real>(z: &[T]) -> Result<BitChannelQuality<T>> {
    let levels = log2_exact(z.len())? as usize;
    if let Some(&bad) = z.iter().find(|&&v| !(v >= T::zero() && v <= T::one())) {
        return Err(Error::ParameterDomain {
            name: "initial Bhattacharyya parameter",
            value: bad.as_f64(),
            domain: "[0, 1]",
        });
    }
    let mut w = z.to_vec();
    for i in 1..=levels {
        for j in 1..=z.len() / 2 {
            let (k1, k2) = tran_unchecked(i, j);
            let (zu, zb) = (w[k1 - 1], w[k2 - 1]);
            w[k1 - 1] = zu + zb - zu * zb;
            w[k2 - 1] = zu * zb;
        }
    }
    Ok(BitChannelQuality {
        values: from_positions(&w),
        metric: Metric::Bhattacharyya,
        mu: None,
        approx_calls: 0,
        input_reductions: 0,
    })
}

/// Approximated bit channels produced by the level schedule.
#[derive(Clone, Debug)]
pub struct TalVardyChannels<T> {
    /// Final channels in bit-channel order.
    pub channels: Vec<BmsChannel<T>>,
    pub approx_calls: usize,
    pub input_reductions: usize,
}

/// Runs every level of the schedule, merging both outputs of every Z-shape
/// down to `mu` symbols. Z-shapes within a level run in parallel.
pub fn tal_vardy_channels<T: Real>(
    channels: &[BmsChannel<T>],
    mu: usize,
) -> Result<TalVardyChannels<T>> {
    let levels = log2_exact(channels.len())? as usize;
    if mu < 2 {
        return Err(Error::InvalidMu(mu));
    }
    let mut input_reductions = 0;
    let mut w: Vec<BmsChannel<T>> = channels
        .iter()
        .map(|c| {
            if c.alphabet_size() > mu {
                input_reductions += 1;
                degrading_merge(c, mu)
            } else {
                Ok(c.clone())
            }
        })
        .collect::<Result<_>>()?;

    let half = channels.len() / 2;
    let mut approx_calls = 0;
    for i in 1..=levels {
        let outputs: Vec<(usize, usize, BmsChannel<T>, BmsChannel<T>)> = (1..=half)
            .into_par_iter()
            .map(|j| {
                let (k1, k2) = tran_unchecked(i, j);
                let (w0, w1) = transform_pair(&w[k1 - 1], &w[k2 - 1])?;
                Ok((k1, k2, degrading_merge(&w0, mu)?, degrading_merge(&w1, mu)?))
            })
            .collect::<Result<_>>()?;
        for (k1, k2, w0, w1) in outputs {
            w[k1 - 1] = w0;
            w[k2 - 1] = w1;
            approx_calls += 2;
        }
    }
    let bits = levels as u32;
    let ordered = (0..w.len())
        .map(|b| w[bit_reverse0(b, bits)].clone())
        .collect();
    Ok(TalVardyChannels {
        channels: ordered,
        approx_calls,
        input_reductions,
    })
}

/// Error probabilities of the approximated bit channels.
pub fn construct_modified_tal_vardy<T: Real>(
    channels: &[BmsChannel<T>],
    mu: usize,
) -> Result<BitChannelQuality<T>> {
    let out = tal_vardy_channels(channels, mu)?;
    Ok(BitChannelQuality {
        values: out
            .channels
            .iter()
            .map(|c| channel_stats(c).error_prob)
            .collect(),
        metric: Metric::ErrorProb,
        mu: Some(mu),
        approx_calls: out.approx_calls,
        input_reductions: out.input_reductions,
    })
}

/// Picks the recursion that fits the inputs: the Bhattacharyya recursion
/// when every channel is an erasure channel, the merged schedule otherwise.
pub fn construct<T: Real>(channels: &[BmsChannel<T>], mu: usize) -> Result<BitChannelQuality<T>> {
    if channels.iter().all(BmsChannel::is_erasure_like) {
        let z: Vec<T> = channels
            .iter()
            .map(|c| c.self_conjugate().unwrap_or_else(T::zero))
            .collect();
        construct_bec_z(&z)
    } else {
        construct_modified_tal_vardy(channels, mu)
    }
}

/// Exact per-bit-channel functionals computed by enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactQualities<T> {
    pub error_prob: Vec<T>,
    pub bhattacharyya: Vec<T>,
    pub capacity: Vec<T>,
}

/// Limit on `|Y_1| * ... * |Y_N| * 2^N` accepted by [`exact_oracle`].
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

/// Evaluates every bit channel by summing the split-channel definition over
/// all outputs and all source words. Only meant for tiny `N`.
///
/// Uses its own dense generator matrix, independent of the encoder and of
/// the level schedule.
pub fn exact_oracle<T: Real>(channels: &[BmsChannel<T>]) -> Result<ExactQualities<T>> {
    let n_len = channels.len();
    let levels = log2_exact(n_len)?;
    let alphabets: Vec<Vec<(T, T)>> = channels.iter().map(BmsChannel::symbols).collect();
    let needed = alphabets
        .iter()
        .fold(1u128 << n_len.min(100), |acc, a| acc.saturating_mul(a.len() as u128));
    if needed > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            needed,
            limit: ENUMERATION_LIMIT,
        });
    }

    let words = 1usize << n_len;
    // Row r of G = B_N F^{(x)n} is row bitrev(r) of F^{(x)n}; that row has
    // ones exactly at columns whose bits are a subset of bitrev(r).
    let rows: Vec<u64> = (0..n_len)
        .map(|r| {
            let fr = bit_reverse0(r, levels);
            (0..n_len)
                .filter(|&c| c & !fr == 0)
                .fold(0u64, |m, c| m | (1 << c))
        })
        .collect();
    let codewords: Vec<u64> = (0..words)
        .map(|u| {
            (0..n_len)
                .filter(|&r| (u >> r) & 1 == 1)
                .fold(0u64, |x, r| x ^ rows[r])
        })
        .collect();

    let scale = T::one() / T::of(2f64.powi(n_len as i32 - 1));
    let half = T::of(0.5);
    let mut error_prob = vec![T::zero(); n_len];
    let mut bhattacharyya = vec![T::zero(); n_len];
    let mut capacity = vec![T::zero(); n_len];
    let mut joint = vec![T::zero(); words];
    let mut digits = vec![0usize; n_len];
    'outputs: loop {
        for (u, slot) in joint.iter_mut().enumerate() {
            let x = codewords[u];
            let mut p = T::one();
            for k in 0..n_len {
                let (w0, w1) = alphabets[k][digits[k]];
                p = p * if (x >> k) & 1 == 0 { w0 } else { w1 };
            }
            *slot = p;
        }
        for i in 0..n_len {
            let prefix_count = 1usize << i;
            for prefix in 0..prefix_count {
                let mut s = [T::zero(); 2];
                for (bit, acc) in s.iter_mut().enumerate() {
                    let base = prefix | (bit << i);
                    for suffix in 0..(words >> (i + 1)) {
                        *acc = *acc + joint[base | (suffix << (i + 1))];
                    }
                    *acc = *acc * scale;
                }
                let mid = (s[0] + s[1]) * half;
                error_prob[i] = error_prob[i] + s[0].min(s[1]) * half;
                bhattacharyya[i] = bhattacharyya[i] + (s[0] * s[1]).sqrt();
                if mid > T::zero() {
                    capacity[i] =
                        capacity[i] + half * (xlog2_ratio(s[0], mid) + xlog2_ratio(s[1], mid));
                }
            }
        }
        // next output word, mixed radix
        for k in 0..n_len {
            digits[k] += 1;
            if digits[k] < alphabets[k].len() {
                continue 'outputs;
            }
            digits[k] = 0;
        }
        break;
    }
    Ok(ExactQualities {
        error_prob,
        bhattacharyya,
        capacity,
    })
}

/// The `k` best bit channels (1-based, ascending); ties go to the lower
/// index.
pub fn select_info_set<T: Real>(quality: &BitChannelQuality<T>, k: usize) -> Result<Vec<usize>> {
    select_info_set_excluding(quality, k, &[])
}

/// Like [`select_info_set`] but never picks an index listed in `frozen`.
pub fn select_info_set_excluding<T: Real>(
    quality: &BitChannelQuality<T>,
    k: usize,
    frozen: &[usize],
) -> Result<Vec<usize>> {
    let n_len = quality.values.len();
    let mut allowed = vec![true; n_len];
    for &f in frozen {
        if f == 0 || f > n_len {
            return Err(Error::IndexOutOfRange {
                what: "frozen index",
                value: f,
                max: n_len,
            });
        }
        allowed[f - 1] = false;
    }
    let available = allowed.iter().filter(|&&a| a).count();
    if k > available {
        return Err(Error::IndexOutOfRange {
            what: "information bits",
            value: k,
            max: available,
        });
    }
    let mut order: Vec<usize> = (0..n_len).filter(|&i| allowed[i]).collect();
    order.sort_by_key(|&i| (Ordered(quality.values[i]), i));
    let mut chosen: Vec<usize> = order[..k].iter().map(|&i| i + 1).collect();
    chosen.sort_unstable();
    Ok(chosen)
}
