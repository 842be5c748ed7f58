//! End-to-end acceptance checks. Runs as a plain binary so every check
//! prints its verdict; the process fails if any check fails.

mod common;

use std::time::{Duration, Instant};

use common::{family, grouped_reference};
use polar_construct::{
    awgn_sigma2, build_schedule, construct, construct_bec_z, construct_modified_tal_vardy, design_code, encode,
    exact_oracle, leading_frozen_count, run_fer, simulate, underlying_vector, Channel, ChannelFamily, CodeSpec,
    ExperimentConfig, FerResult, Ordering, RateMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_pe, mut worst_z) = (0.0f64, 0.0f64);
    for trial in 0..50 {
        let n_len = [2, 4, 8][trial % 3];
        let ch: Vec<Channel> = (0..n_len)
            .map(|_| family(rng.random_range(0..4), rng.random_range(0.0..0.5)))
            .collect();
        let exact = exact_oracle(&ch).unwrap();
        let q = construct_modified_tal_vardy(&ch, 1 << 20).unwrap();
        for i in 0..n_len {
            worst_pe = worst_pe.max((q.values[i] - exact.error_prob[i]).abs());
        }

        let erasures: Vec<Channel> = (0..n_len)
            .map(|_| match rng.random_range(0..3) {
                0 => Channel::bec(rng.random_range(0.0..1.0)).unwrap(),
                1 => Channel::punctured(),
                _ => Channel::shortened(),
            })
            .collect();
        let exact = exact_oracle(&erasures).unwrap();
        let z: Vec<f64> = erasures.iter().map(|c| c.self_conjugate().unwrap_or(0.0)).collect();
        let q = construct_bec_z(&z).unwrap();
        for i in 0..n_len {
            worst_z = worst_z.max((q.values[i] - exact.bhattacharyya[i]).abs());
        }
    }
    let t = start.elapsed();
    verdict(
        worst_pe <= 1e-9 && worst_z <= 1e-12 && t < Duration::from_secs(60),
        format!("max |dPe| = {worst_pe:.2e}, max |dZ| = {worst_z:.2e}, {:.2} s", secs(t)),
    )
}

fn degradation_bound() -> Verdict {
    let w = Channel::bsc(0.1).unwrap();
    let mut instances = vec![vec![w.clone(); 8]];
    for (mode, p) in [(RateMode::Puncture, 3), (RateMode::Shorten, 3), (RateMode::Puncture, 1), (RateMode::Shorten, 5)] {
        instances.push(underlying_vector(&w, &CodeSpec::new(8, 8 - p, 0, mode).unwrap()));
    }
    let mut worst = f64::INFINITY;
    for ch in &instances {
        let exact = exact_oracle(ch).unwrap();
        let q = construct_modified_tal_vardy(ch, 8).unwrap();
        for i in 0..8 {
            worst = worst.min(q.values[i] - exact.error_prob[i]);
        }
    }
    verdict(
        worst >= -1e-12,
        format!("{} instances, min(Pe_approx - Pe_exact) = {worst:.3e}", instances.len()),
    )
}

fn approximation_counters() -> Verdict {
    let w = Channel::bsc(0.1).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for n_len in [8usize, 256, 1024] {
        let calls = construct_modified_tal_vardy(&vec![w.clone(); n_len], 16).unwrap().approx_calls;
        let (_, transforms) = grouped_reference(&w, n_len, 16);
        let log_n = n_len.trailing_zeros() as usize;
        ok &= calls == n_len * log_n && transforms == 2 * (n_len - 1);
        detail.push(format!("N={n_len}: calls {calls}, grouped {transforms}"));
    }
    verdict(ok, detail.join("; "))
}

fn removed_position_capacities() -> Verdict {
    let (p, s) = (Channel::punctured().stats(), Channel::shortened().stats());
    verdict(
        p.capacity.abs() <= 1e-15 && (s.capacity - 1.0).abs() <= 1e-15,
        format!("I(punctured) = {}, I(shortened) = {}", p.capacity, s.capacity),
    )
}

fn rate_matched_ordering() -> Verdict {
    let start = Instant::now();
    let w = Channel::bec(0.5).unwrap();
    let base = construct(&vec![w.clone(); 1024], 2).unwrap().values;
    let z = |mode| {
        let spec = CodeSpec::new(1024, 700, 350, mode).unwrap();
        construct(&underlying_vector(&w, &spec), 2).unwrap().values
    };
    let (punct, short) = (z(RateMode::Puncture), z(RateMode::Shorten));
    let t = start.elapsed();
    let up = (0..1024).filter(|&i| punct[i] >= base[i]).count();
    let down = (0..1024).filter(|&i| short[i] <= base[i]).count();
    verdict(
        up == 1024 && down == 1024 && t < Duration::from_secs(1),
        format!("punctured >= {up}/1024, shortened <= {down}/1024, {:.3} s", secs(t)),
    )
}

fn fer_config(channel: ChannelFamily, sweep: &[f64], ordering: Ordering, max_frames: usize, max_errors: usize) -> ExperimentConfig {
    ExperimentConfig {
        schema: 1,
        channel,
        sweep: sweep.to_vec(),
        n: 256,
        m: 186,
        k: None,
        rate: Some(0.5),
        mode: RateMode::Puncture,
        ordering,
        mu: 256,
        awgn_alphabet: 2048,
        max_frames,
        max_errors,
        seed: 2024,
    }
}

/// Reordered never worse, enough errors everywhere and disjoint 95%
/// intervals at `needed` points.
fn compare(re: &FerResult, orig: &FerResult, min_errors: usize, needed: usize) -> (bool, String) {
    let mut ordered = true;
    let mut enough = true;
    let mut disjoint = 0;
    let mut parts = Vec::new();
    for (a, b) in re.points.iter().zip(&orig.points) {
        ordered &= a.fer <= b.fer;
        enough &= a.frame_errors >= min_errors && b.frame_errors >= min_errors;
        if a.ci_high < b.ci_low {
            disjoint += 1;
        }
        parts.push(format!(
            "{}: {:.2e} ({} err) vs {:.2e} ({} err)",
            a.param, a.fer, a.frame_errors, b.fer, b.frame_errors
        ));
    }
    let pass = ordered && enough && disjoint >= needed;
    (pass, format!("disjoint CIs at {disjoint}/{}; {}", re.points.len(), parts.join(", ")))
}

fn bec_fer() -> Verdict {
    let start = Instant::now();
    let sweep = [0.10, 0.15, 0.20, 0.25, 0.30];
    let re = run_fer(&fer_config(ChannelFamily::Bec, &sweep, Ordering::Reordered, 2_000_000_000, 200)).unwrap();
    let orig = run_fer(&fer_config(ChannelFamily::Bec, &sweep, Ordering::Original, 2_000_000_000, 200)).unwrap();
    let t = start.elapsed();
    let (pass, detail) = compare(&re, &orig, 200, 3);
    verdict(pass && t < Duration::from_secs(600), format!("{detail}; {:.1} s", secs(t)))
}

fn bsc_awgn_fer() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (family, sweep) in [
        (ChannelFamily::Bsc, [0.03, 0.04, 0.05]),
        (ChannelFamily::Awgn, [1.5, 2.0, 2.5]),
    ] {
        let re = run_fer(&fer_config(family, &sweep, Ordering::Reordered, 50_000_000, 100)).unwrap();
        let orig = run_fer(&fer_config(family, &sweep, Ordering::Original, 50_000_000, 100)).unwrap();
        let (ok, d) = compare(&re, &orig, 100, 2);
        pass &= ok;
        detail.push(format!("{family:?} [{d}]"));
    }
    let t = start.elapsed();
    verdict(pass && t < Duration::from_secs(1800), format!("{}; {:.1} s", detail.join(" "), secs(t)))
}

fn folded_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    let mut runs = 0;
    for (n, l, c) in [(16, 4, 4), (256, 32, 95), (1024, 32, 342)] {
        for pruned in [false, true] {
            let s = build_schedule(n, l, pruned, c).unwrap();
            let lead = if pruned { c } else { 0 };
            let frames: Vec<Vec<u8>> = (0..1000)
                .map(|_| (0..n).map(|i| if i < lead { 0 } else { rng.random_range(0..2) }).collect())
                .collect();
            let (out, _) = simulate(&s, &frames).unwrap();
            mismatches += frames.iter().zip(&out).filter(|(u, x)| &encode(u).unwrap() != *x).count();
            runs += frames.len();
        }
    }
    verdict(mismatches == 0, format!("{mismatches} mismatches in {runs} frames"))
}

fn cycle_counts() -> Verdict {
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, l, c, plain, pruned) in [(16, 4, 4, 4, 3), (256, 32, 95, 8, 6), (1024, 32, 342, 32, 22)] {
        let frame = vec![0u8; n];
        let a = simulate(&build_schedule(n, l, false, 0).unwrap(), &[frame.clone(), frame.clone()]).unwrap().1;
        let b = simulate(&build_schedule(n, l, true, c).unwrap(), &[frame.clone(), frame]).unwrap().1;
        let throughput = n as f64 / (n - c).div_ceil(l) as f64;
        pass &= a.latency_cycles == plain && b.latency_cycles == pruned && b.throughput_bits_per_cycle == throughput;
        detail.push(format!(
            "({n},{l},C={c}) {} -> {}, {} bits/cycle",
            a.latency_cycles, b.latency_cycles, b.throughput_bits_per_cycle
        ));
    }
    verdict(pass, detail.join("; "))
}

fn c_reproduction() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, m, target, tol) in [(256usize, 186usize, 95i64, 10i64), (1024, 744, 342, 25)] {
        let spec = CodeSpec::new(n, m, m / 2, RateMode::Puncture).unwrap();
        let w = Channel::awgn_quantized_sigma2(awgn_sigma2(2.0, spec.rate()), 2048).unwrap();
        let (code, _) = design_code(&w, spec, 256).unwrap();
        let c = leading_frozen_count(&code.info_set, n).unwrap() as i64;
        pass &= (c - target).abs() <= tol;
        detail.push(format!("({n},{m}) C = {c} (target {target} +/- {tol})"));
    }
    verdict(pass, format!("{}; {:.1} s", detail.join("; "), secs(start.elapsed())))
}

fn main() {
    let checks: [(&str, fn() -> Verdict); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("degradation bound", degradation_bound),
        ("approximation counters", approximation_counters),
        ("punctured and shortened capacities", removed_position_capacities),
        ("rate-matched Bhattacharyya ordering", rate_matched_ordering),
        ("BEC frame error rates", bec_fer),
        ("BSC and AWGN frame error rates", bsc_awgn_fer),
        ("folded encoder equivalence", folded_equivalence),
        ("folded encoder cycle counts", cycle_counts),
        ("leading frozen count", c_reproduction),
    ];
    let mut failed = 0;
    for (idx, (name, check)) in checks.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {:<38} {}  {}",
            idx + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
