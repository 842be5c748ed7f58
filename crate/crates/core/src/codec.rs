//! Non-systematic polar encoder and successive-cancellation decoder.
//!
//! `x = u G_N` with `G_N = B_N F^{(x)n}`. The decoder runs in the LLR
//! domain (positive favours 0) with saturating arithmetic at
//! [`LLR_MAX`], so erasure and shortened positions can carry certainties.

use crate::construction::log2_exact;
use crate::error::{Error, Result};
use crate::rate_matching::{bit_reverse0, CodeSpec, RateMode};
use crate::scalar::Real;

/// Saturation magnitude standing in for an infinite LLR.
pub const LLR_MAX: f64 = 300.0;

/// `x = u G_N` over GF(2) in `O(N log N)`.
pub fn encode(u: &[u8]) -> Result<Vec<u8>> {
    let bits = log2_exact(u.len())?;
    let mut v: Vec<u8> = u.iter().map(|b| b & 1).collect();
    let mut half = 1;
    while half < v.len() {
        for block in v.chunks_mut(2 * half) {
            let (upper, lower) = block.split_at_mut(half);
            for (a, b) in upper.iter_mut().zip(lower.iter()) {
                *a ^= *b;
            }
        }
        half <<= 1;
    }
    // F^{(x)n} commutes with B_N, so the bit reversal can come last.
    Ok((0..v.len()).map(|j| v[bit_reverse0(j, bits)]).collect())
}

/// Physical channel a transmitted coded bit goes through.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelModel<T> {
    Bec { erasure: T },
    Bsc { crossover: T },
    /// BPSK with `0 -> +1`, `1 -> -1` and noise variance `sigma2`.
    Awgn { sigma2: T },
}

/// One received channel output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symbol<T> {
    Bit(u8),
    Erasure,
    Real(T),
}

fn saturate<T: Real>(x: T) -> T {
    let max = T::of(LLR_MAX);
    if x.is_nan() {
        T::zero()
    } else {
        x.max(-max).min(max)
    }
}

impl<T: Real> ChannelModel<T> {
    /// LLR of one received symbol.
    pub fn llr(&self, symbol: Symbol<T>) -> Result<T> {
        let max = T::of(LLR_MAX);
        match (*self, symbol) {
            (ChannelModel::Bec { .. }, Symbol::Bit(0)) => Ok(max),
            (ChannelModel::Bec { .. }, Symbol::Bit(1)) => Ok(-max),
            (ChannelModel::Bec { .. }, Symbol::Erasure) => Ok(T::zero()),
            (ChannelModel::Bsc { crossover }, Symbol::Bit(b @ (0 | 1))) => {
                let mag = saturate(((T::one() - crossover) / crossover).ln());
                Ok(if b == 0 { mag } else { -mag })
            }
            (ChannelModel::Awgn { sigma2 }, Symbol::Real(y)) if y.is_finite() => {
                Ok(saturate(T::of(2.0) * y / sigma2))
            }
            (_, s) => Err(Error::SymbolOutsideAlphabet(format!("{s:?}"))),
        }
    }
}

/// Decoder input LLRs for all `N` coded positions.
///
/// `received` holds the `M` transmitted positions in ascending order.
/// Punctured positions get LLR 0; shortened positions are known zeros and
/// get `+LLR_MAX`.
pub fn init_llrs<T: Real>(
    received: &[Symbol<T>],
    model: &ChannelModel<T>,
    spec: &CodeSpec,
) -> Result<Vec<T>> {
    if received.len() != spec.m {
        return Err(Error::InvalidConfig(format!(
            "received {} symbols, code transmits {}",
            received.len(),
            spec.m
        )));
    }
    let removed = match spec.mode {
        RateMode::Shorten => T::of(LLR_MAX),
        _ => T::zero(),
    };
    let mut llr = vec![removed; spec.n];
    for (&j, &s) in spec.transmitted_positions().iter().zip(received) {
        llr[j - 1] = model.llr(s)?;
    }
    Ok(llr)
}

/// Check-node update `2 atanh(tanh(a/2) tanh(b/2))`, evaluated as
/// `sign(a) sign(b) min(|a|, |b|)` plus two correction terms. A saturated
/// input counts as infinite and passes the other input through.
pub fn check_node<T: Real>(a: T, b: T) -> T {
    let sign = if (a < T::zero()) != (b < T::zero()) {
        -T::one()
    } else {
        T::one()
    };
    let max = T::of(LLR_MAX);
    if a.abs() >= max || b.abs() >= max {
        return sign * a.abs().min(b.abs()).min(max);
    }
    let corr = (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
    saturate(sign * a.abs().min(b.abs()) + corr)
}

/// Variable-node update `b + (1 - 2 u) a`.
pub fn variable_node<T: Real>(a: T, b: T, u: u8) -> T {
    saturate(if u & 1 == 0 { b + a } else { b - a })
}

/// Reusable successive-cancellation decoder for one block length.
#[derive(Clone, Debug)]
pub struct ScDecoder<T> {
    n: usize,
    llr: Vec<Vec<T>>,
    sums: Vec<Vec<u8>>,
}

impl<T: Real> ScDecoder<T> {
    pub fn new(n: usize) -> Result<Self> {
        let levels = log2_exact(n)? as usize;
        Ok(Self {
            n,
            llr: (0..=levels).map(|d| vec![T::zero(); n >> d]).collect(),
            sums: (0..=levels).map(|d| vec![0; n >> d]).collect(),
        })
    }

    /// Decodes `llr` (coded order) given a frozen mask over `u`.
    pub fn decode(&mut self, llr: &[T], frozen: &[bool]) -> Result<Vec<u8>> {
        if llr.len() != self.n || frozen.len() != self.n {
            return Err(Error::InvalidConfig(format!(
                "decoder built for N = {}, got {} LLRs and {} frozen flags",
                self.n,
                llr.len(),
                frozen.len()
            )));
        }
        let bits = self.n.trailing_zeros();
        for (m, slot) in self.llr[0].iter_mut().enumerate() {
            *slot = llr[bit_reverse0(m, bits)];
        }
        let mut u_hat = vec![0u8; self.n];
        self.node(0, 0, frozen, &mut u_hat);
        Ok(u_hat)
    }

    fn node(&mut self, depth: usize, base: usize, frozen: &[bool], u_hat: &mut [u8]) {
        let len = self.n >> depth;
        if len == 1 {
            let bit = if frozen[base] || self.llr[depth][0] >= T::zero() {
                0
            } else {
                1
            };
            u_hat[base] = bit;
            self.sums[depth][0] = bit;
            return;
        }
        let half = len / 2;
        {
            let (parent, child) = self.llr.split_at_mut(depth + 1);
            let (l, c) = (&parent[depth], &mut child[0]);
            for i in 0..half {
                c[i] = check_node(l[i], l[i + half]);
            }
        }
        self.node(depth + 1, base, frozen, u_hat);
        {
            let (sp, sc) = self.sums.split_at_mut(depth + 1);
            sp[depth][..half].copy_from_slice(&sc[0][..half]);
            let (parent, child) = self.llr.split_at_mut(depth + 1);
            let (l, c) = (&parent[depth], &mut child[0]);
            for i in 0..half {
                c[i] = variable_node(l[i], l[i + half], sp[depth][i]);
            }
        }
        self.node(depth + 1, base + half, frozen, u_hat);
        let (sp, sc) = self.sums.split_at_mut(depth + 1);
        for i in 0..half {
            sp[depth][i] ^= sc[0][i];
            sp[depth][i + half] = sc[0][i];
        }
    }
}

/// One-shot SC decoding; `frozen` lists 1-based frozen source positions.
pub fn sc_decode<T: Real>(llr: &[T], frozen: &[usize]) -> Result<Vec<u8>> {
    let mut mask = vec![false; llr.len()];
    for &f in frozen {
        if f == 0 || f > llr.len() {
            return Err(Error::IndexOutOfRange {
                what: "frozen index",
                value: f,
                max: llr.len(),
            });
        }
        mask[f - 1] = true;
    }
    ScDecoder::new(llr.len())?.decode(llr, &mask)
}
