//! 64-frame bit-sliced encoder and SC decoder for erasure channels.
//!
//! On an erasure channel every decoder LLR is `+LLR_MAX`, `-LLR_MAX` or
//! zero, and the saturating check and variable updates keep it that way.
//! A word pair `(known, value)` per node therefore carries the exact
//! decoder state of 64 frames at once: lane `b` is frame `b`, `known` marks
//! nonzero LLRs and `value` their sign (1 for negative).

use rand::RngCore;

use crate::rate_matching::bit_reverse0;

/// Lanes where a uniform 32-bit draw falls below `threshold`.
///
/// Bits are compared from the most significant end and the loop stops as
/// soon as every lane is decided, so few words are drawn on average.
pub(crate) fn bernoulli_mask<R: RngCore>(rng: &mut R, threshold: u64) -> u64 {
    if threshold == 0 {
        return 0;
    }
    if threshold >= 1 << 32 {
        return !0;
    }
    let (mut below, mut equal) = (0u64, !0u64);
    for bit in (0..32).rev() {
        let r = rng.next_u64();
        if threshold >> bit & 1 == 1 {
            below |= equal & !r;
            equal &= r;
        } else {
            equal &= !r;
        }
        if equal == 0 {
            break;
        }
    }
    below
}

/// Threshold for [`bernoulli_mask`] approximating probability `p` to 2^-32.
pub(crate) fn bernoulli_threshold(p: f64) -> u64 {
    (p.clamp(0.0, 1.0) * 4_294_967_296.0).round() as u64
}

/// `x = u G_N` on 64 frames at once.
pub(crate) fn encode_words(u: &[u64]) -> Vec<u64> {
    let bits = u.len().trailing_zeros();
    let mut v = u.to_vec();
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
    (0..v.len()).map(|j| v[bit_reverse0(j, bits)]).collect()
}

#[derive(Clone, Copy, Default)]
struct Tern {
    known: u64,
    value: u64,
}

fn check(a: Tern, b: Tern) -> Tern {
    let known = a.known & b.known;
    Tern {
        known,
        value: (a.value ^ b.value) & known,
    }
}

fn variable(a: Tern, b: Tern, s: u64) -> Tern {
    let av = a.value ^ s;
    // two opposite certainties cancel to zero
    let known = (a.known & b.known & !(av ^ b.value)) | (a.known ^ b.known);
    Tern {
        known,
        value: ((a.known & av) | (!a.known & b.value)) & known,
    }
}

pub(crate) struct SlicedDecoder {
    n: usize,
    llr: Vec<Vec<Tern>>,
    sums: Vec<Vec<u64>>,
}

impl SlicedDecoder {
    pub(crate) fn new(n: usize) -> Self {
        let levels = n.trailing_zeros() as usize;
        Self {
            n,
            llr: (0..=levels).map(|d| vec![Tern::default(); n >> d]).collect(),
            sums: (0..=levels).map(|d| vec![0; n >> d]).collect(),
        }
    }

    /// Decodes coded-order `(known, value)` words into `u` words.
    pub(crate) fn decode(&mut self, known: &[u64], value: &[u64], frozen: &[bool], u_hat: &mut [u64]) {
        let bits = self.n.trailing_zeros();
        for (m, slot) in self.llr[0].iter_mut().enumerate() {
            let j = bit_reverse0(m, bits);
            *slot = Tern {
                known: known[j],
                value: value[j] & known[j],
            };
        }
        self.node(0, 0, frozen, u_hat);
    }

    fn node(&mut self, depth: usize, base: usize, frozen: &[bool], u_hat: &mut [u64]) {
        let len = self.n >> depth;
        if len == 1 {
            let t = self.llr[depth][0];
            let bit = if frozen[base] { 0 } else { t.known & t.value };
            u_hat[base] = bit;
            self.sums[depth][0] = bit;
            return;
        }
        let half = len / 2;
        {
            let (parent, child) = self.llr.split_at_mut(depth + 1);
            let (l, c) = (&parent[depth], &mut child[0]);
            for i in 0..half {
                c[i] = check(l[i], l[i + half]);
            }
        }
        self.node(depth + 1, base, frozen, u_hat);
        {
            let (sp, sc) = self.sums.split_at_mut(depth + 1);
            sp[depth][..half].copy_from_slice(&sc[0][..half]);
            let (parent, child) = self.llr.split_at_mut(depth + 1);
            let (l, c) = (&parent[depth], &mut child[0]);
            for i in 0..half {
                c[i] = variable(l[i], l[i + half], sp[depth][i]);
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
