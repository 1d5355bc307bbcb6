//! Finite-statistics simulation of a Bell test.
//!
//! Outcomes are drawn from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)` and switched to stream `k` for setting pair `k`
//! (pairs indexed `x · bob_settings + y`). Each shot consumes one `f64` from
//! `Rng::gen` and picks the first outcome whose cumulative probability, in
//! the order `00, 01, 10, 11`, exceeds it.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{behavior_of, noisy_behavior, QuantumModel};
use crate::scenarios::{lhv_bound, Behavior, Event, Inequality};

pub const DEFAULT_SHOTS: u64 = 5000;
/// Violation threshold in standard deviations.
pub const VIOLATION_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    /// Shots per setting pair.
    pub shots: u64,
    pub seed: u64,
    /// Weight of the pure state against white noise.
    pub visibility: f64,
}

impl SimConfig {
    pub fn new(shots: u64, seed: u64, visibility: f64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::invalid(format!("visibility {visibility} outside [0, 1]")));
        }
        Ok(SimConfig { shots, seed, visibility })
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { shots: DEFAULT_SHOTS, seed: 0, visibility: 1.0 }
    }
}

/// Outcome counts `(00, 01, 10, 11)` per setting pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountTable {
    alice_settings: usize,
    bob_settings: usize,
    shots: u64,
    counts: Vec<[u64; 4]>,
}

impl CountTable {
    pub fn new(alice_settings: usize, bob_settings: usize, counts: Vec<[u64; 4]>) -> Result<Self> {
        if alice_settings == 0 || bob_settings == 0 || counts.len() != alice_settings * bob_settings {
            return Err(Error::invalid("count table does not match the setting counts"));
        }
        let shots: u64 = counts[0].iter().sum();
        if shots == 0 || counts.iter().any(|c| c.iter().sum::<u64>() != shots) {
            return Err(Error::invalid("every setting pair needs the same positive number of shots"));
        }
        Ok(CountTable { alice_settings, bob_settings, shots, counts })
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn pair(&self, x: usize, y: usize) -> [u64; 4] {
        self.counts[x * self.bob_settings + y]
    }

    /// Successes and trials for an event. Marginal events pool every
    /// setting of the unconstrained party.
    fn tally(&self, e: &Event) -> Result<(u64, u64)> {
        let in_range = |l: Option<crate::scenarios::Local>, n: usize| l.is_none_or(|l| (l.setting as usize) < n);
        if !in_range(e.alice, self.alice_settings) || !in_range(e.bob, self.bob_settings) {
            return Err(Error::invalid(format!("counts do not cover event {e}")));
        }
        let mut hits = 0;
        let mut trials = 0;
        for x in 0..self.alice_settings {
            for y in 0..self.bob_settings {
                if e.alice.is_some_and(|l| l.setting as usize != x) || e.bob.is_some_and(|l| l.setting as usize != y) {
                    continue;
                }
                let c = self.pair(x, y);
                trials += self.shots;
                for a in 0..2u8 {
                    for b in 0..2u8 {
                        if e.alice.is_none_or(|l| l.outcome == a) && e.bob.is_none_or(|l| l.outcome == b) {
                            hits += c[(2 * a + b) as usize];
                        }
                    }
                }
            }
        }
        Ok((hits, trials))
    }
}

/// Draws `cfg.shots` outcomes per setting pair from the model mixed with
/// white noise at visibility `cfg.visibility`.
pub fn sample_counts(m: &QuantumModel, cfg: &SimConfig) -> Result<CountTable> {
    SimConfig::new(cfg.shots, cfg.seed, cfg.visibility)?;
    let b = noisy_behavior(m, cfg.visibility)?;
    sample_behavior(&b, cfg)
}

pub fn sample_behavior(b: &Behavior, cfg: &SimConfig) -> Result<CountTable> {
    let (na, nb) = (b.alice_settings(), b.bob_settings());
    let counts = (0..na * nb)
        .into_par_iter()
        .map(|k| {
            let p = b.pair(k / nb, k % nb);
            let cumulative = [p[0], p[0] + p[1], p[0] + p[1] + p[2]];
            let mut rng = pair_rng(cfg.seed, k);
            let mut c = [0u64; 4];
            for _ in 0..cfg.shots {
                let u: f64 = rng.gen();
                c[cumulative.iter().position(|&t| u < t).unwrap_or(3)] += 1;
            }
            c
        })
        .collect();
    CountTable::new(na, nb, counts)
}

fn pair_rng(seed: u64, pair: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermEstimate {
    pub event: String,
    pub estimate: f64,
    pub sigma: f64,
    pub trials: u64,
    pub ideal: Option<f64>,
    /// `(p̂ − ideal) / σ`; absent without an ideal value or when `σ = 0`.
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub terms: Vec<TermEstimate>,
    pub omega: f64,
    pub sigma: f64,
    pub ideal: Option<f64>,
    pub lhv: f64,
    pub violated: bool,
}

/// `p̂ = n/N`, `σ = √(p̂(1 − p̂)/N)` per term; `σ_Ω` adds the term
/// variances, ignoring covariances between terms of one setting pair.
pub fn estimate(counts: &CountTable, iq: &Inequality) -> Result<ExperimentReport> {
    iq.validate()?;
    let mut terms = Vec::with_capacity(iq.len());
    for e in &iq.terms {
        let (hits, trials) = counts.tally(e)?;
        let p = hits as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        terms.push(TermEstimate { event: e.to_string(), estimate: p, sigma, trials, ideal: None, z: None });
    }
    let omega = terms.iter().map(|t| t.estimate).sum();
    let sigma = terms.iter().map(|t| t.sigma * t.sigma).sum::<f64>().sqrt();
    let lhv = match &iq.bounds {
        Some(b) => b.lhv,
        None => lhv_bound(iq, iq.alice_settings, iq.bob_settings)?.0 as f64,
    };
    Ok(ExperimentReport {
        name: iq.name.clone(),
        terms,
        omega,
        sigma,
        ideal: None,
        lhv,
        violated: omega - lhv > VIOLATION_SIGMAS * sigma,
    })
}

/// Samples, estimates, and attaches the noiseless ideal column.
pub fn run_experiment(iq: &Inequality, m: &QuantumModel, cfg: &SimConfig) -> Result<ExperimentReport> {
    let counts = sample_counts(m, cfg)?;
    let mut report = estimate(&counts, iq)?;
    let ideal = behavior_of(m)?;
    let mut total = 0.0;
    for (t, e) in report.terms.iter_mut().zip(&iq.terms) {
        let p = ideal.event_probability(e)?;
        total += p;
        t.ideal = Some(p);
        t.z = (t.sigma > 0.0).then(|| (t.estimate - p) / t.sigma);
    }
    report.ideal = Some(total);
    Ok(report)
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Table with experimental and ideal columns, six decimals throughout.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let ideal = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(out, "{}", self.name);
        let _ = writeln!(out, "{:<8} {:>24} {:>10}", "term", "experimental", "ideal");
        for t in &self.terms {
            let exp = format!("{:.6} ± {:.6}", t.estimate, t.sigma);
            let _ = writeln!(out, "{:<8} {:>24} {:>10}", t.event, exp, ideal(t.ideal));
        }
        let exp = format!("{:.6} ± {:.6}", self.omega, self.sigma);
        let _ = writeln!(out, "{:<8} {:>24} {:>10}", "total", exp, ideal(self.ideal));
        let margin = if self.sigma > 0.0 { (self.omega - self.lhv) / self.sigma } else { 0.0 };
        let _ = writeln!(
            out,
            "LHV bound {:.6}; {} ({:.2} sigma above the bound)",
            self.lhv,
            if self.violated { "violated" } else { "not violated" },
            margin
        );
        out
    }
}
