use rand::Rng;
use serde::Serialize;

use super::{DeterministicStrategy, Event};
use crate::error::{Error, Result};

pub const NO_SIGNALING_TOL: f64 = 1e-9;

/// A table `P(ab|xy)` for binary outcomes.
///
/// Entries for a setting pair are stored in the order
/// `(a, b) = (0,0), (0,1), (1,0), (1,1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Behavior {
    alice_settings: usize,
    bob_settings: usize,
    probs: Vec<[f64; 4]>,
}

impl Behavior {
    /// Validates normalization, non-negativity and no-signaling.
    pub fn new(alice_settings: usize, bob_settings: usize, probs: Vec<[f64; 4]>) -> Result<Self> {
        if alice_settings == 0 || bob_settings == 0 {
            return Err(Error::invalid("behavior needs at least one setting per party"));
        }
        if probs.len() != alice_settings * bob_settings {
            return Err(Error::invalid(format!(
                "expected {} setting pairs, got {}",
                alice_settings * bob_settings,
                probs.len()
            )));
        }
        let b = Behavior { alice_settings, bob_settings, probs };
        b.validate()?;
        Ok(b)
    }

    pub fn from_fn(alice_settings: usize, bob_settings: usize, f: impl Fn(u8, u8, u8, u8) -> f64) -> Result<Self> {
        let mut probs = Vec::with_capacity(alice_settings * bob_settings);
        for x in 0..alice_settings as u8 {
            for y in 0..bob_settings as u8 {
                probs.push([f(0, 0, x, y), f(0, 1, x, y), f(1, 0, x, y), f(1, 1, x, y)]);
            }
        }
        Behavior::new(alice_settings, bob_settings, probs)
    }

    pub fn uniform(alice_settings: usize, bob_settings: usize) -> Self {
        Behavior { alice_settings, bob_settings, probs: vec![[0.25; 4]; alice_settings * bob_settings] }
    }

    pub fn deterministic(s: &DeterministicStrategy) -> Self {
        let (na, nb) = (s.alice.len(), s.bob.len());
        let mut probs = Vec::with_capacity(na * nb);
        for x in 0..na {
            for y in 0..nb {
                let mut p = [0.0; 4];
                p[(2 * s.alice[x] + s.bob[y]) as usize] = 1.0;
                probs.push(p);
            }
        }
        Behavior { alice_settings: na, bob_settings: nb, probs }
    }

    /// Convex combination; all components must share the same setting counts.
    pub fn mixture(parts: &[(f64, &Behavior)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::invalid("empty mixture"))?.1;
        let (na, nb) = (first.alice_settings, first.bob_settings);
        let mut probs = vec![[0.0; 4]; na * nb];
        for (w, b) in parts {
            if (b.alice_settings, b.bob_settings) != (na, nb) {
                return Err(Error::invalid("mixture components differ in setting counts"));
            }
            for (acc, p) in probs.iter_mut().zip(&b.probs) {
                for k in 0..4 {
                    acc[k] += w * p[k];
                }
            }
        }
        Behavior::new(na, nb, probs)
    }

    /// The Popescu-Rohrlich box: `P(ab|xy) = 1/2` when `a ⊕ b = xy`.
    pub fn pr_box() -> Self {
        Behavior::from_fn(2, 2, |a, b, x, y| if a ^ b == x & y { 0.5 } else { 0.0 }).expect("PR box is no-signaling")
    }

    fn validate(&self) -> Result<()> {
        for (k, p) in self.probs.iter().enumerate() {
            let (x, y) = (k / self.bob_settings, k % self.bob_settings);
            if p.iter().any(|v| !v.is_finite() || *v < -NO_SIGNALING_TOL) {
                return Err(Error::invalid(format!("negative or non-finite probability at setting pair ({x},{y})")));
            }
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > NO_SIGNALING_TOL {
                return Err(Error::invalid(format!("probabilities at ({x},{y}) sum to {total}")));
            }
        }
        for x in 0..self.alice_settings {
            for y in 1..self.bob_settings {
                let d = (self.raw_alice_marginal(0, x, y) - self.raw_alice_marginal(0, x, 0)).abs();
                if d > NO_SIGNALING_TOL {
                    return Err(Error::invalid(format!("Alice's marginal for setting {x} depends on Bob's setting")));
                }
            }
        }
        for y in 0..self.bob_settings {
            for x in 1..self.alice_settings {
                let d = (self.raw_bob_marginal(0, y, x) - self.raw_bob_marginal(0, y, 0)).abs();
                if d > NO_SIGNALING_TOL {
                    return Err(Error::invalid(format!("Bob's marginal for setting {y} depends on Alice's setting")));
                }
            }
        }
        Ok(())
    }

    pub fn alice_settings(&self) -> usize {
        self.alice_settings
    }

    pub fn bob_settings(&self) -> usize {
        self.bob_settings
    }

    /// The four outcome probabilities for setting pair `(x, y)`.
    pub fn pair(&self, x: usize, y: usize) -> [f64; 4] {
        self.probs[x * self.bob_settings + y]
    }

    pub fn p(&self, a: u8, b: u8, x: u8, y: u8) -> f64 {
        self.pair(x as usize, y as usize)[(2 * a + b) as usize]
    }

    fn raw_alice_marginal(&self, a: u8, x: usize, y: usize) -> f64 {
        let p = self.pair(x, y);
        p[2 * a as usize] + p[2 * a as usize + 1]
    }

    fn raw_bob_marginal(&self, b: u8, y: usize, x: usize) -> f64 {
        let p = self.pair(x, y);
        p[b as usize] + p[2 + b as usize]
    }

    /// `P(a|x)`
    pub fn alice_marginal(&self, a: u8, x: u8) -> f64 {
        self.raw_alice_marginal(a, x as usize, 0)
    }

    /// `P(b|y)`
    pub fn bob_marginal(&self, b: u8, y: u8) -> f64 {
        self.raw_bob_marginal(b, y as usize, 0)
    }

    /// `⟨A_x B_y⟩ = Σ (−1)^(a+b) P(ab|xy)`
    pub fn correlator(&self, x: u8, y: u8) -> f64 {
        let p = self.pair(x as usize, y as usize);
        p[0] - p[1] - p[2] + p[3]
    }

    /// `⟨A_x⟩`
    pub fn alice_expectation(&self, x: u8) -> f64 {
        self.alice_marginal(0, x) - self.alice_marginal(1, x)
    }

    /// `⟨B_y⟩`
    pub fn bob_expectation(&self, y: u8) -> f64 {
        self.bob_marginal(0, y) - self.bob_marginal(1, y)
    }

    /// `⟨A0B0⟩ + ⟨A0B1⟩ + ⟨A1B0⟩ − ⟨A1B1⟩`
    pub fn chsh(&self) -> f64 {
        self.correlator(0, 0) + self.correlator(0, 1) + self.correlator(1, 0) - self.correlator(1, 1)
    }

    pub fn event_probability(&self, e: &Event) -> Result<f64> {
        let in_range = |l: Option<super::Local>, n: usize| l.is_none_or(|l| (l.setting as usize) < n);
        if !in_range(e.alice, self.alice_settings) || !in_range(e.bob, self.bob_settings) {
            return Err(Error::invalid(format!("behavior does not cover event {e}")));
        }
        Ok(match (e.alice, e.bob) {
            (Some(a), Some(b)) => self.p(a.outcome, b.outcome, a.setting, b.setting),
            (Some(a), None) => self.alice_marginal(a.outcome, a.setting),
            (None, Some(b)) => self.bob_marginal(b.outcome, b.setting),
            (None, None) => 1.0,
        })
    }
}

/// A random point of the 2×2 no-signaling polytope: a random convex mixture
/// of the sixteen deterministic behaviors and the PR box.
pub fn random_no_signaling<R: Rng>(rng: &mut R) -> Behavior {
    let mut vertices: Vec<Behavior> =
        (0..16).map(|code| Behavior::deterministic(&DeterministicStrategy::from_code(code, 2, 2))).collect();
    vertices.push(Behavior::pr_box());
    let weights: Vec<f64> = vertices.iter().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = weights.iter().sum();
    let parts: Vec<(f64, &Behavior)> = weights.iter().map(|w| w / total).zip(vertices.iter()).collect();
    Behavior::mixture(&parts).expect("mixture of no-signaling vertices")
}
