//! Finite-alphabet binary-input memoryless symmetric channels.
//!
//! A [`BmsChannel`] stores one representative `(W(y|0), W(y|1))` per
//! conjugate pair `{y, ȳ}`; the conjugate carries the swapped pair. An
//! optional self-conjugate symbol `e` has `W(e|0) = W(e|1)`. The canonical
//! form keeps every representative with `W(y|0) >= W(y|1)`, drops empty
//! pairs, folds pairs of likelihood ratio one into the self-conjugate
//! symbol and sorts pairs by likelihood ratio, largest first.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::scalar::{xlog2_ratio, Ordered, Real};

/// How a channel came to be; carried along for serialization only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Bec,
    Bsc,
    Punctured,
    Shortened,
    Awgn,
    Derived,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChannelKind::Bec => "bec",
            ChannelKind::Bsc => "bsc",
            ChannelKind::Punctured => "punctured",
            ChannelKind::Shortened => "shortened",
            ChannelKind::Awgn => "awgn",
            ChannelKind::Derived => "derived",
        };
        f.write_str(s)
    }
}

/// Binary-input memoryless symmetric channel over a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct BmsChannel<T> {
    pairs: Vec<(T, T)>,
    self_conjugate: Option<T>,
    kind: ChannelKind,
    param: Option<f64>,
}

/// Capacity, Bhattacharyya parameter and ML error probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats<T> {
    pub capacity: T,
    pub bhattacharyya: T,
    pub error_prob: T,
}

/// Symmetric capacity carried by one conjugate pair (both of its symbols).
pub(crate) fn pair_capacity<T: Real>(p0: T, p1: T) -> T {
    let mid = (p0 + p1) / T::of(2.0);
    if mid <= T::zero() {
        return T::zero();
    }
    xlog2_ratio(p0, mid) + xlog2_ratio(p1, mid)
}

impl<T: Real> BmsChannel<T> {
    /// Builds a channel from raw pair and self-conjugate masses.
    ///
    /// The table is brought to canonical form and renormalized; a total
    /// mass further than [`Real::mass_drift_guard`] from one is rejected.
    pub fn from_parts(
        pairs: Vec<(T, T)>,
        self_conjugate: Option<T>,
        kind: ChannelKind,
        param: Option<f64>,
    ) -> Result<Self> {
        let mut erasure = self_conjugate.unwrap_or_else(T::zero);
        if !(erasure >= T::zero()) || !erasure.is_finite() {
            return Err(Error::InvalidChannel(format!(
                "self-conjugate mass {erasure} is not a probability"
            )));
        }
        let mut canon = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            if !(a >= T::zero() && b >= T::zero()) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidChannel(format!(
                    "pair ({a}, {b}) is not a pair of probabilities"
                )));
            }
            let (p0, p1) = if a >= b { (a, b) } else { (b, a) };
            if p0 == T::zero() {
                continue;
            }
            if p0 == p1 {
                erasure = erasure + p0 + p1;
                continue;
            }
            canon.push((p0, p1));
        }
        Self::finish(canon, erasure, kind, param)
    }

    /// Sorts, renormalizes and checks a table whose pairs already satisfy
    /// `p0 > p1 >= 0`.
    pub(crate) fn finish(
        mut pairs: Vec<(T, T)>,
        erasure: T,
        kind: ChannelKind,
        param: Option<f64>,
    ) -> Result<Self> {
        let total: T = pairs.iter().map(|&(a, b)| a + b).sum::<T>() + erasure;
        let drift = (total - T::one()).abs();
        if !(drift <= T::mass_drift_guard()) {
            return Err(Error::NormalizationDrift(drift.as_f64()));
        }
        for p in pairs.iter_mut() {
            p.0 = p.0 / total;
            p.1 = p.1 / total;
        }
        let erasure = erasure / total;
        // Descending likelihood ratio, i.e. ascending p1/p0 (p0 > 0 here).
        let mut keyed: Vec<(T, (T, T))> = pairs.iter().map(|&(p0, p1)| (p1 / p0, (p0, p1))).collect();
        keyed.sort_unstable_by(|a, b| Ordered(a.0).cmp(&Ordered(b.0)).then(Ordered(b.1 .0).cmp(&Ordered(a.1 .0))));
        // Symbols with equal ratio are one sufficient statistic; joining
        // them loses nothing.
        pairs.clear();
        let mut last = None;
        for (r, (p0, p1)) in keyed {
            match (last, pairs.last_mut()) {
                (Some(prev), Some(top)) if prev == r => {
                    top.0 = top.0 + p0;
                    top.1 = top.1 + p1;
                }
                _ => pairs.push((p0, p1)),
            }
            last = Some(r);
        }
        Ok(Self {
            pairs,
            self_conjugate: (erasure > T::zero()).then_some(erasure),
            kind,
            param,
        })
    }

    /// Binary erasure channel with erasure probability `eps`.
    pub fn bec(eps: T) -> Result<Self> {
        if !(eps >= T::zero() && eps <= T::one()) {
            return Err(Error::ParameterDomain {
                name: "erasure probability",
                value: eps.as_f64(),
                domain: "[0, 1]",
            });
        }
        Self::from_parts(
            vec![(T::one() - eps, T::zero())],
            Some(eps),
            ChannelKind::Bec,
            Some(eps.as_f64()),
        )
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::of(0.5)) {
            return Err(Error::ParameterDomain {
                name: "crossover probability",
                value: p.as_f64(),
                domain: "[0, 1/2]",
            });
        }
        Self::from_parts(
            vec![(T::one() - p, p)],
            None,
            ChannelKind::Bsc,
            Some(p.as_f64()),
        )
    }

    /// Channel seen by a punctured coded bit: one symbol, identical
    /// likelihoods, zero capacity.
    pub fn punctured() -> Self {
        Self {
            pairs: Vec::new(),
            self_conjugate: Some(T::one()),
            kind: ChannelKind::Punctured,
            param: None,
        }
    }

    /// Channel seen by a shortened coded bit: noiseless, unit capacity.
    pub fn shortened() -> Self {
        Self {
            pairs: vec![(T::one(), T::zero())],
            self_conjugate: None,
            kind: ChannelKind::Shortened,
            param: None,
        }
    }

    /// BPSK over AWGN at `es_n0_db` (Es/N0 in dB), quantized to
    /// `alphabet_size` output symbols.
    pub fn awgn_quantized(es_n0_db: f64, alphabet_size: usize) -> Result<Self> {
        let sigma2 = 1.0 / (2.0 * 10f64.powf(es_n0_db / 10.0));
        Self::awgn_quantized_sigma2(sigma2, alphabet_size)
    }

    /// BPSK (`0 -> +1`, `1 -> -1`) over AWGN with noise variance `sigma2`.
    ///
    /// The half line `y >= 0` is split into `alphabet_size / 2` bins of equal
    /// probability under input 0; each bin and its mirror image form one
    /// conjugate pair. Quantization is a degrading operation, so the
    /// capacity never exceeds that of the continuous channel.
    pub fn awgn_quantized_sigma2(sigma2: f64, alphabet_size: usize) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::ParameterDomain {
                name: "noise variance",
                value: sigma2,
                domain: "(0, inf)",
            });
        }
        if alphabet_size < 2 || alphabet_size % 2 != 0 {
            return Err(Error::ParameterDomain {
                name: "alphabet size",
                value: alphabet_size as f64,
                domain: "even integers >= 2",
            });
        }
        let sigma = sigma2.sqrt();
        let q = |z: f64| 0.5 * erfc(z / std::f64::consts::SQRT_2);
        let q_inv = |p: f64| std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
        let bins = alphabet_size / 2;
        let positive_mass = q(-1.0 / sigma);

        let mut thresholds = Vec::with_capacity(bins + 1);
        thresholds.push(0.0);
        for k in 1..bins {
            let tail = positive_mass * (bins - k) as f64 / bins as f64;
            thresholds.push(1.0 + sigma * q_inv(tail));
        }
        thresholds.push(f64::INFINITY);

        let upper_tail = |t: f64, x: f64| {
            if t.is_infinite() {
                0.0
            } else {
                q((t - x) / sigma)
            }
        };
        let pairs = thresholds
            .windows(2)
            .map(|w| {
                let p0 = upper_tail(w[0], 1.0) - upper_tail(w[1], 1.0);
                let p1 = upper_tail(w[0], -1.0) - upper_tail(w[1], -1.0);
                (T::of(p0.max(0.0)), T::of(p1.max(0.0)))
            })
            .collect();
        Self::from_parts(pairs, None, ChannelKind::Awgn, Some(sigma2))
    }

    /// Representative `(W(y|0), W(y|1))` per conjugate pair, sorted by
    /// likelihood ratio, largest first.
    pub fn pairs(&self) -> &[(T, T)] {
        &self.pairs
    }

    /// Mass of the self-conjugate symbol, if any.
    pub fn self_conjugate(&self) -> Option<T> {
        self.self_conjugate
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn param(&self) -> Option<f64> {
        self.param
    }

    /// Number of output symbols, counting both members of every pair.
    pub fn alphabet_size(&self) -> usize {
        2 * self.pairs.len() + usize::from(self.self_conjugate.is_some())
    }

    /// Whether every symbol is either noiseless or an erasure.
    pub fn is_erasure_like(&self) -> bool {
        self.pairs.iter().all(|&(_, p1)| p1 == T::zero())
    }

    /// Full output alphabet as `(W(y|0), W(y|1))`, conjugates adjacent.
    pub fn symbols(&self) -> Vec<(T, T)> {
        let mut out = Vec::with_capacity(self.alphabet_size());
        for &(p0, p1) in &self.pairs {
            out.push((p0, p1));
            out.push((p1, p0));
        }
        if let Some(e) = self.self_conjugate {
            out.push((e, e));
        }
        out
    }

    pub fn total_mass(&self) -> T {
        self.pairs.iter().map(|&(a, b)| a + b).sum::<T>()
            + self.self_conjugate.unwrap_or_else(T::zero)
    }

    pub fn stats(&self) -> ChannelStats<T> {
        channel_stats(self)
    }
}

/// Capacity, Bhattacharyya parameter and error probability of `w`.
///
/// The error probability is `sum_y min(W(y|0), W(y|1)) / 2`; the
/// self-conjugate symbol contributes half its mass.
pub fn channel_stats<T: Real>(w: &BmsChannel<T>) -> ChannelStats<T> {
    let two = T::of(2.0);
    let mut capacity = T::zero();
    let mut bhattacharyya = T::zero();
    let mut error_prob = T::zero();
    for &(p0, p1) in &w.pairs {
        capacity = capacity + pair_capacity(p0, p1);
        bhattacharyya = bhattacharyya + two * (p0 * p1).sqrt();
        error_prob = error_prob + p0.min(p1);
    }
    if let Some(e) = w.self_conjugate {
        bhattacharyya = bhattacharyya + e;
        error_prob = error_prob + e / two;
    }
    ChannelStats {
        capacity,
        bhattacharyya,
        error_prob,
    }
}

struct MergeNode<T> {
    p0: T,
    p1: T,
    cap: T,
    prev: usize,
    next: usize,
    alive: bool,
    erasure: bool,
}

const NIL: usize = usize::MAX;

fn merge_cost<T: Real>(left: &MergeNode<T>, right: &MergeNode<T>) -> T {
    if right.erasure {
        // The pair and its conjugate both collapse into the erasure.
        left.cap
    } else {
        left.cap + right.cap - pair_capacity(left.p0 + right.p0, left.p1 + right.p1)
    }
}

/// Binary min-heap over candidate merges `(cost, left node)` with in-place
/// key updates, so no stale entries pile up.
struct MergeHeap<T> {
    heap: Vec<usize>,
    cost: Vec<T>,
    pos: Vec<usize>,
}

impl<T: Real> MergeHeap<T> {
    fn new(cost: Vec<T>, nodes: usize) -> Self {
        let mut pos = vec![NIL; nodes];
        let heap: Vec<usize> = (0..cost.len()).collect();
        for (i, p) in pos.iter_mut().enumerate().take(cost.len()) {
            *p = i;
        }
        let mut cost = cost;
        cost.resize(nodes, T::zero());
        let mut h = Self { heap, cost, pos };
        for i in (0..h.heap.len() / 2).rev() {
            h.sift_down(i);
        }
        h
    }

    fn less(&self, a: usize, b: usize) -> bool {
        let (ca, cb) = (self.cost[a], self.cost[b]);
        ca < cb || (!(cb < ca) && a < b)
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i]] = i;
        self.pos[self.heap[j]] = j;
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.less(self.heap[i], self.heap[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && self.less(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && self.less(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn peek(&self) -> Option<usize> {
        self.heap.first().copied()
    }

    fn update(&mut self, node: usize, cost: T) {
        let i = self.pos[node];
        self.cost[node] = cost;
        self.sift_up(i);
        self.sift_down(self.pos[node]);
    }

    fn remove(&mut self, node: usize) {
        let i = self.pos[node];
        if i == NIL {
            return;
        }
        let last = self.heap.len() - 1;
        self.swap(i, last);
        self.heap.pop();
        self.pos[node] = NIL;
        if i < self.heap.len() {
            self.sift_up(i);
            self.sift_down(i);
        }
    }
}

/// Greedy degrading merge down to at most `mu` output symbols.
///
/// Repeatedly merges the likelihood-ratio-adjacent pair whose merge loses
/// the least capacity; equal losses go to the leftmost pair. The
/// self-conjugate symbol sits after every pair with ratio one and absorbs a
/// pair together with its conjugate. Channels already within the bound are
/// returned unchanged.
pub fn degrading_merge<T: Real>(w: &BmsChannel<T>, mu: usize) -> Result<BmsChannel<T>> {
    if mu < 2 {
        return Err(Error::InvalidMu(mu));
    }
    let mut symbols = w.alphabet_size();
    if symbols <= mu {
        return Ok(w.clone());
    }

    let mut nodes: Vec<MergeNode<T>> = w
        .pairs
        .iter()
        .map(|&(p0, p1)| MergeNode {
            p0,
            p1,
            cap: pair_capacity(p0, p1),
            prev: NIL,
            next: NIL,
            alive: true,
            erasure: false,
        })
        .collect();
    if let Some(e) = w.self_conjugate {
        nodes.push(MergeNode {
            p0: e / T::of(2.0),
            p1: e / T::of(2.0),
            cap: T::zero(),
            prev: NIL,
            next: NIL,
            alive: true,
            erasure: true,
        });
    }
    let count = nodes.len();
    for i in 0..count {
        nodes[i].prev = if i == 0 { NIL } else { i - 1 };
        nodes[i].next = if i + 1 == count { NIL } else { i + 1 };
    }

    // heap entry `i` stands for merging node i with its right neighbour
    let costs = (0..count.saturating_sub(1))
        .map(|i| merge_cost(&nodes[i], &nodes[i + 1]))
        .collect();
    let mut heap = MergeHeap::new(costs, count);

    while symbols > mu {
        let Some(left) = heap.peek() else {
            break;
        };
        let right = nodes[left].next;
        let prev = nodes[left].prev;
        if nodes[right].erasure {
            // left disappears into the erasure symbol
            let (p0, p1) = (nodes[left].p0, nodes[left].p1);
            let r = &mut nodes[right];
            r.p0 = r.p0 + (p0 + p1) / T::of(2.0);
            r.p1 = r.p0;
            nodes[left].alive = false;
            heap.remove(left);
            nodes[right].prev = prev;
            if prev != NIL {
                nodes[prev].next = right;
                let cost = merge_cost(&nodes[prev], &nodes[right]);
                heap.update(prev, cost);
            }
        } else {
            let (p0, p1) = (nodes[right].p0, nodes[right].p1);
            let next = nodes[right].next;
            nodes[right].alive = false;
            heap.remove(right);
            let l = &mut nodes[left];
            l.p0 = l.p0 + p0;
            l.p1 = l.p1 + p1;
            l.cap = pair_capacity(l.p0, l.p1);
            l.next = next;
            if next != NIL {
                nodes[next].prev = left;
                let cost = merge_cost(&nodes[left], &nodes[next]);
                heap.update(left, cost);
            } else {
                heap.remove(left);
            }
            if prev != NIL {
                let cost = merge_cost(&nodes[prev], &nodes[left]);
                heap.update(prev, cost);
            }
        }
        symbols -= 2;
    }

    let mut pairs = Vec::with_capacity(symbols / 2 + 1);
    let mut erasure = T::zero();
    for n in nodes.iter().filter(|n| n.alive) {
        if n.erasure || n.p0 == n.p1 {
            erasure = erasure + n.p0 + n.p1;
        } else if n.p0 > n.p1 {
            pairs.push((n.p0, n.p1));
        } else {
            pairs.push((n.p1, n.p0));
        }
    }
    BmsChannel::finish(pairs, erasure, ChannelKind::Derived, None)
}

/// JSON form `{kind, param, pairs, selfConjugate}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChannelRecord {
    pub kind: ChannelKind,
    pub param: Option<f64>,
    pub pairs: Vec<[f64; 2]>,
    pub self_conjugate: Option<f64>,
}

impl<T: Real> From<&BmsChannel<T>> for ChannelRecord {
    fn from(w: &BmsChannel<T>) -> Self {
        ChannelRecord {
            kind: w.kind,
            param: w.param,
            pairs: w
                .pairs
                .iter()
                .map(|&(a, b)| [a.as_f64(), b.as_f64()])
                .collect(),
            self_conjugate: w.self_conjugate.map(Real::as_f64),
        }
    }
}

impl<T: Real> TryFrom<ChannelRecord> for BmsChannel<T> {
    type Error = Error;

    fn try_from(r: ChannelRecord) -> Result<Self> {
        BmsChannel::from_parts(
            r.pairs.iter().map(|p| (T::of(p[0]), T::of(p[1]))).collect(),
            r.self_conjugate.map(T::of),
            r.kind,
            r.param,
        )
    }
}

impl<T: Real> Serialize for BmsChannel<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelRecord::from(self).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for BmsChannel<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let record = ChannelRecord::deserialize(d)?;
        BmsChannel::try_from(record).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_stats() {
        let s = BmsChannel::<f64>::bsc(0.1).unwrap().stats();
        assert_abs_diff_eq!(s.bhattacharyya, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(s.error_prob, 0.1, epsilon = 1e-12);

        let s = BmsChannel::<f64>::bec(0.3).unwrap().stats();
        assert_abs_diff_eq!(s.capacity, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(s.bhattacharyya, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(s.error_prob, 0.15, epsilon = 1e-12);

        let s = BmsChannel::<f64>::bec(0.5).unwrap().stats();
        assert_abs_diff_eq!(s.capacity, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.bhattacharyya, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn punctured_and_shortened_models() {
        let p = BmsChannel::<f64>::punctured().stats();
        assert_eq!((p.capacity, p.bhattacharyya, p.error_prob), (0.0, 1.0, 0.5));
        let s = BmsChannel::<f64>::shortened().stats();
        assert_eq!((s.capacity, s.bhattacharyya, s.error_prob), (1.0, 0.0, 0.0));
    }

    #[test]
    fn parameter_domain_errors() {
        assert!(matches!(
            BmsChannel::<f64>::bec(1.5),
            Err(Error::ParameterDomain { .. })
        ));
        assert!(matches!(
            BmsChannel::<f64>::bsc(0.6),
            Err(Error::ParameterDomain { .. })
        ));
        assert!(BmsChannel::<f64>::bsc(f64::NAN).is_err());
        assert!(BmsChannel::<f64>::awgn_quantized_sigma2(0.0, 16).is_err());
        assert!(BmsChannel::<f64>::awgn_quantized_sigma2(1.0, 7).is_err());
    }

    #[test]
    fn canonical_form() {
        let w = BmsChannel::<f64>::from_parts(
            vec![(0.1, 0.2), (0.15, 0.15), (0.3, 0.0), (0.0, 0.0), (0.05, 0.0)],
            Some(0.05),
            ChannelKind::Derived,
            None,
        )
        .unwrap();
        // the two infinite-ratio pairs share a ratio and are joined
        assert_abs_diff_eq!(w.pairs()[0].0, 0.35, epsilon = 1e-15);
        assert_eq!(w.pairs()[0].1, 0.0);
        assert_eq!(w.pairs()[1], (0.2, 0.1));
        assert_abs_diff_eq!(w.self_conjugate().unwrap(), 0.35, epsilon = 1e-15);
        assert_eq!(w.alphabet_size(), 5);
    }

    #[test]
    fn drift_guard_rejects_unnormalized_tables() {
        let r = BmsChannel::<f64>::from_parts(vec![(0.5, 0.1)], None, ChannelKind::Derived, None);
        assert!(matches!(r, Err(Error::NormalizationDrift(_))));
    }

    #[test]
    fn merge_identity_and_errors() {
        let w = BmsChannel::<f64>::bsc(0.1).unwrap();
        assert_eq!(degrading_merge(&w, 2).unwrap(), w);
        assert_eq!(degrading_merge(&w, 1), Err(Error::InvalidMu(1)));
    }

    /// Quadratic greedy: rescans every adjacent candidate after each merge.
    fn naive_merge(w: &BmsChannel<f64>, mu: usize) -> (Vec<(f64, f64)>, f64) {
        let mut items: Vec<(f64, f64, bool)> = w.pairs().iter().map(|&(a, b)| (a, b, false)).collect();
        if let Some(e) = w.self_conjugate() {
            items.push((e / 2.0, e / 2.0, true));
        }
        let mut symbols = w.alphabet_size();
        while symbols > mu {
            let mut best = (f64::INFINITY, 0);
            for i in 0..items.len() - 1 {
                let (a, b) = (items[i], items[i + 1]);
                let c = if b.2 {
                    pair_capacity(a.0, a.1)
                } else {
                    pair_capacity(a.0, a.1) + pair_capacity(b.0, b.1) - pair_capacity(a.0 + b.0, a.1 + b.1)
                };
                if c < best.0 {
                    best = (c, i);
                }
            }
            let i = best.1;
            let (a, b) = (items[i], items[i + 1]);
            if b.2 {
                items[i + 1].0 += (a.0 + a.1) / 2.0;
                items[i + 1].1 = items[i + 1].0;
            } else {
                items[i] = (a.0 + b.0, a.1 + b.1, false);
            }
            items.remove(if b.2 { i } else { i + 1 });
            symbols -= 2;
        }
        let mut pairs = Vec::new();
        let mut e = 0.0;
        for (a, b, er) in items {
            if er || a == b {
                e += a + b;
            } else {
                pairs.push((a, b));
            }
        }
        (pairs, e)
    }

    #[test]
    fn heap_merge_matches_quadratic_greedy() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for case in 0..200 {
            let n = rng.random_range(2..40);
            let raw: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
            let e = if case % 2 == 0 { rng.random::<f64>() } else { 0.0 };
            let total: f64 = raw.iter().map(|p| p.0 + p.1).sum::<f64>() + e;
            let w = BmsChannel::from_parts(
                raw.iter().map(|p| (p.0 / total, p.1 / total)).collect(),
                Some(e / total),
                ChannelKind::Derived,
                None,
            )
            .unwrap();
            let mu = rng.random_range(2..=w.alphabet_size());
            let fast = degrading_merge(&w, mu).unwrap();
            let (pairs, e) = naive_merge(&w, mu);
            let slow = BmsChannel::from_parts(pairs, Some(e), ChannelKind::Derived, None).unwrap();
            assert_eq!(fast.pairs().len(), slow.pairs().len(), "case {case}");
            for (a, b) in fast.pairs().iter().zip(slow.pairs()) {
                assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-12);
                assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn merge_into_erasure() {
        let w = BmsChannel::<f64>::from_parts(
            vec![(0.6, 0.0), (0.16, 0.14)],
            Some(0.1),
            ChannelKind::Derived,
            None,
        )
        .unwrap();
        // Cheapest move folds the nearly useless pair into the erasure.
        let m = degrading_merge(&w, 3).unwrap();
        assert_eq!(m.alphabet_size(), 3);
        assert_eq!(m.pairs(), &[(0.6, 0.0)]);
        assert_abs_diff_eq!(m.self_conjugate().unwrap(), 0.4, epsilon = 1e-12);

        // Here joining the two pairs is cheaper than losing the weak one.
        let w = BmsChannel::<f64>::from_parts(
            vec![(0.5, 0.1), (0.2, 0.1)],
            Some(0.1),
            ChannelKind::Derived,
            None,
        )
        .unwrap();
        let m = degrading_merge(&w, 3).unwrap();
        assert_eq!(m.pairs().len(), 1);
        assert_abs_diff_eq!(m.pairs()[0].0, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(m.self_conjugate().unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let w = BmsChannel::<f64>::bec(0.25).unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains("\"selfConjugate\":0.25"));
        let back: BmsChannel<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn f32_channels() {
        let s = BmsChannel::<f32>::bsc(0.1).unwrap().stats();
        assert!((s.bhattacharyya - 0.6).abs() < 1e-6);
    }
}
