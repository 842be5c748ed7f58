use polar_construct::{
    design_code, encode, init_llrs, Channel, ChannelModel, CodeSpec, RateMode, ScDecoder, Symbol, LLR_MAX,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(serde::Deserialize)]
struct Vector {
    u: Vec<u8>,
    x: Vec<u8>,
}

#[test]
fn encoder_golden_vectors() {
    let vectors: Vec<Vector> = serde_json::from_str(include_str!("data/encoder_vectors.json")).unwrap();
    assert!(!vectors.is_empty());
    for v in vectors {
        assert_eq!(encode(&v.u).unwrap(), v.x, "u = {:?}", v.u);
    }
}

fn noiseless(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| if b == 0 { LLR_MAX } else { -LLR_MAX }).collect()
}

#[test]
fn shortened_positions_are_zero_on_every_codeword() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = Channel::bsc(0.05).unwrap();
    for (n, m) in [(256, 186), (64, 40), (1024, 744)] {
        let spec = CodeSpec::new(n, m, m / 2, RateMode::Shorten).unwrap();
        let (spec, _) = design_code(&w, spec, 16).unwrap();
        let frozen = spec.frozen_mask();
        for _ in 0..1000 {
            let u: Vec<u8> = frozen.iter().map(|&f| if f { 0 } else { rng.random_range(0..2) }).collect();
            let x = encode(&u).unwrap();
            assert!(spec.pattern.iter().all(|&j| x[j - 1] == 0));
        }
    }
}

#[test]
fn rate_matched_noiseless_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let w = Channel::bec(0.3).unwrap();
    let model = ChannelModel::Bsc { crossover: 0.01 };
    for mode in [RateMode::Puncture, RateMode::Shorten] {
        let (spec, _) = design_code(&w, CodeSpec::new(256, 186, 93, mode).unwrap(), 16).unwrap();
        let frozen = spec.frozen_mask();
        let mut dec = ScDecoder::<f64>::new(256).unwrap();
        for _ in 0..200 {
            let u: Vec<u8> = frozen.iter().map(|&f| if f { 0 } else { rng.random_range(0..2) }).collect();
            let x = encode(&u).unwrap();
            let rx: Vec<Symbol<f64>> = spec.transmitted_positions().iter().map(|&j| Symbol::Bit(x[j - 1])).collect();
            let llr = init_llrs(&rx, &model, &spec).unwrap();
            assert_eq!(dec.decode(&llr, &frozen).unwrap(), u);
        }
    }
}

proptest! {
    #[test]
    fn round_trip_without_noise(n in 1u32..=9, seed in any::<u64>(), frozen_frac in 0.0f64..1.0) {
        let n_len = 1usize << n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frozen: Vec<bool> = (0..n_len).map(|_| rng.random_bool(frozen_frac)).collect();
        let u: Vec<u8> = frozen.iter().map(|&f| if f { 0 } else { rng.random_range(0..2) }).collect();
        let x = encode(&u).unwrap();
        let mut dec = ScDecoder::<f64>::new(n_len).unwrap();
        prop_assert_eq!(dec.decode(&noiseless(&x), &frozen).unwrap(), u);
    }

    #[test]
    fn encoder_is_linear(n in 1u32..=8, seed in any::<u64>()) {
        let n_len = 1usize << n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<u8> = (0..n_len).map(|_| rng.random_range(0..2)).collect();
        let b: Vec<u8> = (0..n_len).map(|_| rng.random_range(0..2)).collect();
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let (xa, xb) = (encode(&a).unwrap(), encode(&b).unwrap());
        let xs: Vec<u8> = xa.iter().zip(&xb).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(encode(&sum).unwrap(), xs);
        // G is an involution over GF(2)
        prop_assert_eq!(encode(&xa).unwrap(), a);
    }
}
