//! Batch timing of LBF against the AC sweep over random load scenarios.
//!
//! Scenario generation and topology construction happen before the clock
//! starts; only solver calls are timed. In single-threaded mode each AC solve
//! is timed on its own so that scenarios that fail to converge can be left out
//! of the total. With more threads the totals are batch wall-clock times and
//! include failed scenarios.

use std::time::{Duration, Instant};

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ac::{solve_ac_sweep_with, AcOptions};
use crate::case_io::NetworkCase;
use crate::lbf::{solve_lbf, LbfError};
use crate::topology::{build_radial_topology, TopologyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimingError {
    #[error("scenario count must be at least 1")]
    NoScenarios,
    #[error("invalid multiplier band [{0}, {1}]")]
    Band(f64, f64),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Lbf(#[from] LbfError),
    #[error("thread pool: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingOptions {
    pub threads: usize,
    /// Per-bus load multipliers are drawn uniformly from this closed interval.
    pub multiplier_band: (f64, f64),
    pub a: f64,
    pub ac: AcOptions,
}

impl Default for TimingOptions {
    fn default() -> Self {
        TimingOptions { threads: 1, multiplier_band: (0.8, 1.2), a: 1.0, ac: AcOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub scenario_count: usize,
    pub seed: u64,
    pub threads: usize,
    pub lbf_seconds: f64,
    pub ac_seconds: f64,
    /// Scenarios whose AC sweep failed, with the reason.
    pub failed_scenarios: Vec<(usize, String)>,
}

/// `count` copies of `case` with every bus's P and Q scaled by its own draw
/// from `band`.
pub fn generate_scenarios(
    case: &NetworkCase,
    count: usize,
    seed: u64,
    band: (f64, f64),
) -> Result<Vec<NetworkCase>, TimingError> {
    let (lo, hi) = band;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(TimingError::Band(lo, hi));
    }
    let dist = Uniform::new_inclusive(lo, hi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let mut s = case.clone();
            for b in &mut s.buses {
                let m = dist.sample(&mut rng);
                b.p_load *= m;
                b.q_load *= m;
            }
            s
        })
        .collect())
}

pub fn batch_timing(case: &NetworkCase, scenario_count: usize, seed: u64) -> Result<TimingReport, TimingError> {
    batch_timing_with(case, scenario_count, seed, &TimingOptions::default())
}

pub fn batch_timing_with(
    case: &NetworkCase,
    scenario_count: usize,
    seed: u64,
    opts: &TimingOptions,
) -> Result<TimingReport, TimingError> {
    if scenario_count == 0 {
        return Err(TimingError::NoScenarios);
    }
    let threads = opts.threads.max(1);
    let scenarios = generate_scenarios(case, scenario_count, seed, opts.multiplier_band)?;
    let topo = build_radial_topology(case)?;

    let (lbf_time, ac_time, failed_scenarios) = if threads == 1 {
        let start = Instant::now();
        for s in &scenarios {
            std::hint::black_box(solve_lbf(&topo, s, opts.a)?);
        }
        let lbf_time = start.elapsed();

        let mut ac_time = Duration::ZERO;
        let mut failed = Vec::new();
        for (i, s) in scenarios.iter().enumerate() {
            let start = Instant::now();
            let result = solve_ac_sweep_with(&topo, s, &opts.ac);
            let elapsed = start.elapsed();
            match std::hint::black_box(result) {
                Ok(_) => ac_time += elapsed,
                Err(e) => failed.push((i, e.to_string())),
            }
        }
        (lbf_time, ac_time, failed)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| TimingError::Threads(e.to_string()))?;
        pool.install(|| {
            let start = Instant::now();
            scenarios
                .par_iter()
                .map(|s| solve_lbf(&topo, s, opts.a).map(std::hint::black_box))
                .collect::<Result<Vec<_>, _>>()?;
            let lbf_time = start.elapsed();

            let start = Instant::now();
            let results: Vec<_> = scenarios
                .par_iter()
                .map(|s| solve_ac_sweep_with(&topo, s, &opts.ac).err())
                .collect();
            let ac_time = start.elapsed();
            let failed = results
                .into_iter()
                .enumerate()
                .filter_map(|(i, e)| e.map(|e| (i, e.to_string())))
                .collect();
            Ok::<_, TimingError>((lbf_time, ac_time, failed))
        })?
    };

    Ok(TimingReport {
        scenario_count,
        seed,
        threads,
        lbf_seconds: lbf_time.as_secs_f64(),
        ac_seconds: ac_time.as_secs_f64(),
        failed_scenarios,
    })
}
