//! Puncturing and shortening patterns and the rate-matched code description.
//!
//! Indices in the public interface are 1-based.

use serde::{Deserialize, Serialize};

use crate::channel::BmsChannel;
use crate::construction::{construct, log2_exact, select_info_set_excluding, BitChannelQuality};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reverses the low `bits` bits of a 0-based index.
pub(crate) fn bit_reverse0(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

/// 1-based bit reversal over `bits`-bit indices.
pub fn bit_reverse(i: usize, bits: u32) -> Result<usize> {
    let max = 1usize << bits;
    if i == 0 || i > max {
        return Err(Error::IndexOutOfRange {
            what: "index",
            value: i,
            max,
        });
    }
    Ok(1 + bit_reverse0(i - 1, bits))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    #[default]
    None,
    Puncture,
    Shorten,
}

impl std::str::FromStr for RateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(RateMode::None),
            "puncture" => Ok(RateMode::Puncture),
            "shorten" => Ok(RateMode::Shorten),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// Coded positions removed by quasi-uniform puncturing (bit-reversed
/// `1..=P`) or reversal quasi-uniform shortening (bit-reversed
/// `N-P+1..=N`), in generation order.
pub fn make_pattern(mode: RateMode, n_len: usize, p: usize) -> Result<Vec<usize>> {
    let bits = log2_exact(n_len)?;
    if p >= n_len {
        return Err(Error::InvalidConfig(format!(
            "cannot remove {p} of {n_len} coded bits"
        )));
    }
    let range = match mode {
        RateMode::None if p > 0 => {
            return Err(Error::InvalidConfig(
                "mode none removes no coded bits".into(),
            ))
        }
        RateMode::None => 1..1,
        RateMode::Puncture => 1..p + 1,
        RateMode::Shorten => n_len - p + 1..n_len + 1,
    };
    range.map(|i| bit_reverse(i, bits)).collect()
}

/// A rate-matched polar code. Frozen bits carry zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub mode: RateMode,
    /// Removed coded positions, ascending.
    pub pattern: Vec<usize>,
    /// Information positions of `u`, ascending.
    #[serde(rename = "infoSet")]
    pub info_set: Vec<usize>,
}

impl CodeSpec {
    /// Validates `(N, M, K, mode)` and fills in the pattern; the information
    /// set starts empty.
    pub fn new(n: usize, m: usize, k: usize, mode: RateMode) -> Result<Self> {
        log2_exact(n)?;
        if m == 0 || m > n {
            return Err(Error::InvalidConfig(format!(
                "transmitted length M = {m} must lie in 1..={n}"
            )));
        }
        if k > m {
            return Err(Error::InvalidConfig(format!(
                "K = {k} exceeds transmitted length M = {m}"
            )));
        }
        if mode == RateMode::None && m != n {
            return Err(Error::InvalidConfig(format!(
                "M = {m} differs from N = {n} but no puncturing or shortening is selected"
            )));
        }
        let mut pattern = make_pattern(mode, n, n - m)?;
        pattern.sort_unstable();
        Ok(Self {
            n,
            m,
            k,
            mode,
            pattern,
            info_set: Vec::new(),
        })
    }

    pub fn p(&self) -> usize {
        self.n - self.m
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.m as f64
    }

    /// Source positions that must stay frozen so the shortened coded bits
    /// are zero for every codeword. With `x = u F B`, coded position `j` is
    /// column `bitrev(j)` of `u F`, which only depends on `u` indices that
    /// cover `bitrev(j)`; for the reversal quasi-uniform pattern these are
    /// exactly the bit reversals of the pattern.
    pub fn forced_frozen(&self) -> Vec<usize> {
        if self.mode != RateMode::Shorten {
            return Vec::new();
        }
        let bits = self.n.trailing_zeros();
        let mut out: Vec<usize> = self
            .pattern
            .iter()
            .map(|&j| 1 + bit_reverse0(j - 1, bits))
            .collect();
        out.sort_unstable();
        out
    }

    /// Whether coded position `j` (1-based) is transmitted.
    pub fn transmitted_positions(&self) -> Vec<usize> {
        let mut removed = vec![false; self.n];
        for &j in &self.pattern {
            removed[j - 1] = true;
        }
        (1..=self.n).filter(|&j| !removed[j - 1]).collect()
    }

    pub fn frozen_mask(&self) -> Vec<bool> {
        let mut frozen = vec![true; self.n];
        for &i in &self.info_set {
            frozen[i - 1] = false;
        }
        frozen
    }

    /// Checks the information set against `N`, `K` and the forced-frozen
    /// positions.
    pub fn with_info_set(mut self, info_set: Vec<usize>) -> Result<Self> {
        if info_set.len() != self.k {
            return Err(Error::InvalidConfig(format!(
                "information set has {} entries, K = {}",
                info_set.len(),
                self.k
            )));
        }
        let forced = self.forced_frozen();
        let mut seen = vec![false; self.n];
        for &i in &info_set {
            if i == 0 || i > self.n || seen[i - 1] {
                return Err(Error::InvalidConfig(format!(
                    "information index {i} is out of range or repeated"
                )));
            }
            if forced.binary_search(&i).is_ok() {
                return Err(Error::InvalidConfig(format!(
                    "information index {i} would make a shortened bit nonzero"
                )));
            }
            seen[i - 1] = true;
        }
        self.info_set = info_set;
        self.info_set.sort_unstable();
        Ok(self)
    }
}

/// Underlying channel of every coded position: `w` where the bit is sent,
/// the punctured or shortened model where it is not.
pub fn underlying_vector<T: Real>(w: &BmsChannel<T>, spec: &CodeSpec) -> Vec<BmsChannel<T>> {
    let mut out = vec![w.clone(); spec.n];
    for &j in &spec.pattern {
        out[j - 1] = match spec.mode {
            RateMode::Puncture => BmsChannel::punctured(),
            RateMode::Shorten => BmsChannel::shortened(),
            RateMode::None => w.clone(),
        };
    }
    out
}

/// Constructs the code over the rate-matched underlying channels and picks
/// its information set.
pub fn design_code<T: Real>(
    w: &BmsChannel<T>,
    spec: CodeSpec,
    mu: usize,
) -> Result<(CodeSpec, BitChannelQuality<T>)> {
    let quality = construct(&underlying_vector(w, &spec), mu)?;
    let info = select_info_set_excluding(&quality, spec.k, &spec.forced_frozen())?;
    Ok((spec.with_info_set(info)?, quality))
}
