//! Cycle-level model of the folded polar encoder and its pruned variant.
//!
//! `L` source bits enter per cycle in natural order. `log2 L` in-block XP
//! stages act on lane pairs, then `log2(N/L)` delay-switch commutators with
//! delays `1, 2, .., N/(2L)` each swap lane bit 0 with one time bit and feed
//! another XP array. An XP unit maps `(a, b)` to `(a ^ b, b)`.
//!
//! Registers are a state vector advanced once per tick. The pruned encoder
//! runs the ticks of its known-zero input blocks in the same cycle as the
//! last input block of the previous frame, so those outputs come out
//! together on one widened cycle.

use serde::{Deserialize, Serialize};

use crate::construction::log2_exact;
use crate::error::{Error, Result};
use crate::rate_matching::bit_reverse0;

/// Number of frozen positions before the first information bit.
pub fn leading_frozen_count(info_set: &[usize], n: usize) -> Result<usize> {
    if let Some(&bad) = info_set.iter().find(|&&i| i == 0 || i > n) {
        return Err(Error::IndexOutOfRange {
            what: "information index",
            value: bad,
            max: n,
        });
    }
    Ok(info_set.iter().min().map_or(n, |&i| i - 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Stage {
    /// `L/2` XP units on lanes `(l, l + span/2)` inside groups of `span`.
    InBlock { span: usize, pairs: Vec<(usize, usize)> },
    /// Commutators on lanes `(2p, 2p+1)` with `delay` registers per branch,
    /// followed by XP units; `offset` is the pipeline delay in front of it.
    Commutator { delay: usize, offset: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FoldedSchedule {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub stages: Vec<Stage>,
    pub pruned: bool,
    #[serde(rename = "C")]
    pub c: usize,
    /// Input blocks skipped per frame.
    pub skipped_blocks: usize,
    pub latency_cycles: usize,
    pub register_count: usize,
    pub xor_gate_count: usize,
}

impl FoldedSchedule {
    pub fn blocks(&self) -> usize {
        self.n / self.l
    }

    pub fn cycles_per_frame(&self) -> usize {
        self.blocks() - self.skipped_blocks
    }

    /// 0-based coded position of the bit leaving on `lane` in output block
    /// `block` of a frame.
    pub fn output_position(&self, block: usize, lane: usize) -> usize {
        let m = self.l.trailing_zeros();
        let t = self.blocks().trailing_zeros();
        let mut k = lane & !1;
        if t == 0 {
            k |= lane & 1;
        } else {
            k |= block & 1;
            k |= (lane & 1) << (m + t - 1);
            for j in 1..t {
                k |= ((block >> j) & 1) << (m + j - 1);
            }
        }
        bit_reverse0(k, m + t)
    }
}

/// Builds the stage list and resource figures for `(N, L)`.
pub fn build_schedule(n: usize, l: usize, pruned: bool, c: usize) -> Result<FoldedSchedule> {
    let nb = log2_exact(n)?;
    let lb = log2_exact(l)?;
    if l < 2 || l > n {
        return Err(Error::InvalidConfig(format!(
            "parallelism L = {l} must lie in 2..={n}"
        )));
    }
    if pruned && c >= n {
        return Err(Error::InvalidConfig(format!(
            "pruned encoder needs C < N, got C = {c}"
        )));
    }
    let c = if pruned { c } else { 0 };
    let mut stages = Vec::with_capacity(nb as usize);
    for i in 0..lb {
        let span = l >> i;
        let pairs = (0..l)
            .filter(|lane| lane % span < span / 2)
            .map(|lane| (lane, lane + span / 2))
            .collect();
        stages.push(Stage::InBlock { span, pairs });
    }
    for j in 0..nb - lb {
        stages.push(Stage::Commutator {
            delay: 1 << j,
            offset: (1 << j) - 1,
        });
    }
    let skipped_blocks = c / l;
    let blocks = n / l;
    let delays: usize = stages
        .iter()
        .map(|s| match s {
            Stage::Commutator { delay, .. } => 2 * delay * (l / 2),
            Stage::InBlock { .. } => 0,
        })
        .sum();
    let xp_units = stages.len() * (l / 2);
    Ok(FoldedSchedule {
        n,
        l,
        stages,
        pruned,
        c,
        skipped_blocks,
        latency_cycles: blocks - skipped_blocks,
        // zero source and coalescing latch on top of the delay lines
        register_count: delays + if pruned { 2 } else { 0 },
        xor_gate_count: xp_units + if pruned { (l / 2) * c } else { 0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CycleReport {
    /// Cycles from the first input block to the first output block, inclusive.
    pub latency_cycles: usize,
    pub cycles_per_frame: usize,
    pub throughput_bits_per_cycle: f64,
    /// Output bits over the span of cycles that emitted output.
    pub measured_throughput: f64,
    pub xor_gate_count: usize,
    pub register_count: usize,
    pub frames: usize,
    pub total_cycles: usize,
}

/// Register contents after one stage in one cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub cycle: usize,
    pub stage: String,
    pub values: String,
}

struct Pipeline<'a> {
    sched: &'a FoldedSchedule,
    delay_b: Vec<Vec<u8>>,
    delay_q: Vec<Vec<u8>>,
    trace: Option<Vec<TraceRow>>,
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

impl<'a> Pipeline<'a> {
    fn new(sched: &'a FoldedSchedule, trace: bool) -> Self {
        let pairs = sched.l / 2;
        let lines = sched
            .stages
            .iter()
            .filter_map(|s| match s {
                Stage::Commutator { delay, .. } => Some(vec![0u8; delay * pairs]),
                Stage::InBlock { .. } => None,
            })
            .collect::<Vec<_>>();
        Self {
            sched,
            delay_b: lines.clone(),
            delay_q: lines,
            trace: trace.then(Vec::new),
        }
    }

    fn tick(&mut self, tick: usize, cycle: usize, lanes: &mut [u8]) {
        let mut line = 0;
        for (s, stage) in self.sched.stages.iter().enumerate() {
            match stage {
                Stage::InBlock { pairs, .. } => {
                    for &(a, b) in pairs {
                        lanes[a] ^= lanes[b];
                    }
                }
                Stage::Commutator { delay, offset } => {
                    let d = *delay;
                    let phase = (tick as isize - *offset as isize).rem_euclid(2 * d as isize) as usize;
                    let crossed = phase >= d;
                    let slot = tick % d;
                    for p in 0..self.sched.l / 2 {
                        let idx = p * d + slot;
                        let x = std::mem::replace(&mut self.delay_b[line][idx], lanes[2 * p + 1]);
                        let y = lanes[2 * p];
                        let (pv, qv) = if crossed { (y, x) } else { (x, y) };
                        let q = std::mem::replace(&mut self.delay_q[line][idx], qv);
                        lanes[2 * p] = q ^ pv;
                        lanes[2 * p + 1] = pv;
                    }
                    line += 1;
                }
            }
            if let Some(rows) = self.trace.as_mut() {
                let mut values = bits_to_string(lanes);
                if matches!(stage, Stage::Commutator { .. }) {
                    values.push('|');
                    values.push_str(&bits_to_string(&self.delay_b[line - 1]));
                    values.push('|');
                    values.push_str(&bits_to_string(&self.delay_q[line - 1]));
                }
                rows.push(TraceRow {
                    cycle,
                    stage: format!("{s}"),
                    values,
                });
            }
        }
    }
}

/// Streams `frames` back to back through the encoder and returns the coded
/// words in natural coded order together with the cycle report.
pub fn simulate(sched: &FoldedSchedule, frames: &[Vec<u8>]) -> Result<(Vec<Vec<u8>>, CycleReport)> {
    let (out, report, _) = run(sched, frames, false)?;
    Ok((out, report))
}

/// Same as [`simulate`] with one trace row per stage and cycle.
pub fn simulate_traced(
    sched: &FoldedSchedule,
    frames: &[Vec<u8>],
) -> Result<(Vec<Vec<u8>>, CycleReport, Vec<TraceRow>)> {
    run(sched, frames, true)
}

fn run(
    sched: &FoldedSchedule,
    frames: &[Vec<u8>],
    trace: bool,
) -> Result<(Vec<Vec<u8>>, CycleReport, Vec<TraceRow>)> {
    let (n, l) = (sched.n, sched.l);
    let blocks = sched.blocks();
    let c0 = sched.skipped_blocks;
    for u in frames {
        if u.len() != n {
            return Err(Error::InvalidConfig(format!(
                "frame of length {} fed to an N = {n} encoder",
                u.len()
            )));
        }
        if sched.pruned {
            if let Some(pos) = u[..sched.c].iter().position(|&b| b != 0) {
                return Err(Error::PruningViolation {
                    leading_zeros: sched.c,
                    position: pos + 1,
                });
            }
        }
    }

    let mut pipe = Pipeline::new(sched, trace);
    let mut out = vec![vec![0u8; n]; frames.len()];
    let mut lanes = vec![0u8; l];
    let mut first_output = None;
    let mut last_output = 0;
    let mut cycle = 0;

    // Virtual ticks follow the unpruned timeline; a cycle may run several.
    let mut run_tick = |pipe: &mut Pipeline, tick: usize, cycle: usize, input: Option<&[u8]>| {
        match input {
            Some(block) => lanes.copy_from_slice(block),
            None => lanes.fill(0),
        }
        pipe.tick(tick, cycle, &mut lanes);
        if tick + 1 >= blocks {
            let rel = tick + 1 - blocks;
            let (f, r) = (rel / blocks, rel % blocks);
            if f < frames.len() {
                for (lane, &bit) in lanes.iter().enumerate() {
                    out[f][sched.output_position(r, lane)] = bit;
                }
                first_output.get_or_insert(cycle);
                last_output = cycle;
            }
        }
    };

    if !frames.is_empty() {
        for t in 0..c0 {
            run_tick(&mut pipe, t, 0, None);
        }
    }
    for (f, u) in frames.iter().enumerate() {
        for t in c0..blocks {
            let tick = f * blocks + t;
            run_tick(&mut pipe, tick, cycle, Some(&u[t * l..(t + 1) * l]));
            if t + 1 == blocks {
                for z in 0..c0 {
                    run_tick(&mut pipe, tick + 1 + z, cycle, None);
                }
            }
            cycle += 1;
        }
    }
    // the last output block of the last frame leaves on this tick
    let end = frames.len() * blocks + blocks - 1;
    let mut tick = frames.len() * blocks + c0;
    while !frames.is_empty() && tick < end {
        run_tick(&mut pipe, tick, cycle, None);
        tick += 1;
        cycle += 1;
    }

    let cycles_per_frame = sched.cycles_per_frame();
    let latency_cycles = first_output.map_or(sched.latency_cycles, |c| c + 1);
    let span = first_output.map_or(0, |c| last_output - c + 1);
    let report = CycleReport {
        latency_cycles,
        cycles_per_frame,
        throughput_bits_per_cycle: n as f64 / cycles_per_frame as f64,
        measured_throughput: if span == 0 {
            0.0
        } else {
            (frames.len() * n) as f64 / span as f64
        },
        xor_gate_count: sched.xor_gate_count,
        register_count: sched.register_count,
        frames: frames.len(),
        total_cycles: cycle,
    };
    Ok((out, report, pipe.trace.unwrap_or_default()))
}
