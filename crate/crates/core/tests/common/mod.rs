#![allow(dead_code)]

use polar_construct::{degrading_merge, transform_pair, Channel};
use proptest::prelude::*;

/// One of the four channel families used for rate-matched codes.
pub fn family(kind: u8, param: f64) -> Channel {
    match kind % 4 {
        0 => Channel::bec(param.clamp(0.0, 1.0)).unwrap(),
        1 => Channel::bsc(param.clamp(0.0, 0.5)).unwrap(),
        2 => Channel::punctured(),
        _ => Channel::shortened(),
    }
}

pub fn arb_family() -> impl Strategy<Value = Channel> {
    (0u8..4, 0.0f64..0.5).prop_map(|(k, p)| family(k, p))
}

pub fn arb_erasure_family() -> impl Strategy<Value = Channel> {
    (0u8..3, 0.0f64..1.0).prop_map(|(k, p)| match k {
        0 => Channel::bec(p).unwrap(),
        1 => Channel::punctured(),
        _ => Channel::shortened(),
    })
}

/// Arbitrary finite channel with up to `max_pairs` pairs and an optional
/// erasure symbol.
pub fn arb_channel(max_pairs: usize) -> impl Strategy<Value = Channel> {
    (
        prop::collection::vec((0.001f64..1.0, 0.0f64..1.0), 1..=max_pairs),
        prop::option::of(0.0f64..0.5),
    )
        .prop_map(|(raw, erasure)| {
            // p1 as a fraction of p0 keeps every pair oriented
            let pairs: Vec<(f64, f64)> = raw.iter().map(|&(a, f)| (a, a * f * 0.999)).collect();
            let total: f64 = pairs.iter().map(|&(a, b)| a + b).sum::<f64>() + erasure.unwrap_or(0.0);
            let pairs = pairs.into_iter().map(|(a, b)| (a / total, b / total)).collect();
            Channel::from_parts(
                pairs,
                erasure.map(|e| e / total),
                polar_construct::ChannelKind::Derived,
                None,
            )
            .unwrap()
        })
}

/// Classical single-channel construction: every level transforms each
/// distinct channel once, so `N` inputs cost `2 + 4 + ... + N = 2(N - 1)`
/// transforms. Returns channels in natural bit-channel order and the
/// transform count.
pub fn grouped_reference(w: &Channel, n_len: usize, mu: usize) -> (Vec<Channel>, usize) {
    let mut level = vec![degrading_merge(w, mu).unwrap()];
    let mut transforms = 0;
    while level.len() < n_len {
        let mut next = Vec::with_capacity(level.len() * 2);
        for c in &level {
            let (minus, plus) = transform_pair(c, c).unwrap();
            transforms += 2;
            next.push(degrading_merge(&minus, mu).unwrap());
            next.push(degrading_merge(&plus, mu).unwrap());
        }
        level = next;
    }
    (level, transforms)
}

/// Indices sorted by ascending value, ties by index.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}
