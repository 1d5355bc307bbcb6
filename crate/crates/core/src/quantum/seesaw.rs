use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{angle_projector, Measurements, QuantumModel};
use super::bell_operator;
use crate::error::{Error, Result};
use crate::numerics::{eig_sym, max_eig, normalize, Matrix, SymMatrix};
use crate::scenarios::{builtin, Inequality};

pub const DEFAULT_RESTARTS: usize = 32;
const CONVERGENCE_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 10_000;
const MAX_LOCAL_DIM: usize = 4;

/// One see-saw run from a fixed starting point.
#[derive(Clone, Debug)]
pub struct SeesawRun {
    pub value: f64,
    pub model: QuantumModel,
    /// Largest eigenvalue of the Bell operator after each sweep.
    pub history: Vec<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub value: f64,
    pub model: QuantumModel,
    /// Index of the winning restart.
    pub restart: usize,
    /// Final value of every restart, by index.
    pub values: Vec<f64>,
}

/// Projector onto the span of eigenvectors with positive eigenvalue.
fn positive_part(w: &SymMatrix) -> Result<SymMatrix> {
    let eig = eig_sym(w)?;
    let scale = w.as_matrix().max_abs().max(1.0);
    let mut p = SymMatrix::zeros(w.order());
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 1e-14 * scale {
            p = p.add(&SymMatrix::outer(&eig.eigenvector(k)));
        }
    }
    Ok(p)
}

fn sign(outcome: u8) -> f64 {
    if outcome == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Best Alice projectors for the state with coefficient matrix `c`.
fn update_alice(iq: &Inequality, meas: &mut Measurements, c: &Matrix) -> Result<()> {
    for x in 0..meas.alice.len() {
        let mut w = SymMatrix::zeros(meas.dims.0);
        for e in iq.terms.iter().filter(|e| e.alice.is_some_and(|l| l.setting as usize == x)) {
            let q = meas.bob_effect(e.bob)?;
            w = w.add(&q.congruence(&c.transpose()).scale(sign(e.alice.expect("filtered").outcome)));
        }
        meas.alice[x] = positive_part(&w)?;
    }
    Ok(())
}

fn update_bob(iq: &Inequality, meas: &mut Measurements, c: &Matrix) -> Result<()> {
    for y in 0..meas.bob.len() {
        let mut w = SymMatrix::zeros(meas.dims.1);
        for e in iq.terms.iter().filter(|e| e.bob.is_some_and(|l| l.setting as usize == y)) {
            let p = meas.alice_effect(e.alice)?;
            w = w.add(&p.congruence(c).scale(sign(e.bob.expect("filtered").outcome)));
        }
        meas.bob[y] = positive_part(&w)?;
    }
    Ok(())
}

/// Alternates measurement updates (Alice, then Bob) with a state update to
/// the top eigenvector until the value changes by less than `1e-12` over
/// two consecutive sweeps. The value never decreases.
pub fn seesaw_from(iq: &Inequality, init: Measurements, state: Vec<f64>) -> Result<SeesawRun> {
    if init.alice.len() != iq.alice_settings || init.bob.len() != iq.bob_settings {
        return Err(Error::invalid("starting measurements do not match the inequality's settings"));
    }
    let mut model = QuantumModel::new(state, init)?;
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    while history.len() < MAX_SWEEPS {
        let c = model.coefficient_matrix();
        update_alice(iq, &mut model.measurements, &c)?;
        update_bob(iq, &mut model.measurements, &c)?;
        let s = bell_operator(iq, &model.measurements)?;
        model.state = s.top_eigenvector;
        history.push(s.max_eigenvalue);
        let n = history.len();
        if n >= 3 && (history[n - 1] - history[n - 2]).abs() < CONVERGENCE_TOL && (history[n - 2] - history[n - 3]).abs() < CONVERGENCE_TOL {
            converged = true;
            break;
        }
    }
    let value = *history.last().expect("at least one sweep");
    Ok(SeesawRun { value, model, history, converged })
}

fn random_projector(rng: &mut ChaCha8Rng, dim: usize) -> Result<SymMatrix> {
    if dim == 2 {
        return Ok(angle_projector(rng.gen_range(0.0..PI)));
    }
    let w = SymMatrix::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
    positive_part(&w)
}

fn random_start(iq: &Inequality, dims: (usize, usize), seed: u64) -> Result<(Measurements, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alice = (0..iq.alice_settings).map(|_| random_projector(&mut rng, dims.0)).collect::<Result<_>>()?;
    let bob = (0..iq.bob_settings).map(|_| random_projector(&mut rng, dims.1)).collect::<Result<_>>()?;
    let state: Vec<f64> = (0..dims.0 * dims.1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Ok((Measurements { dims, alice, bob }, normalize(&state)))
}

/// Lower bound on the quantum value from `restarts` see-saw runs with local
/// dimensions `dims`. Restart `k` is seeded with `seed + k`; the best run
/// wins, ties going to the lowest index.
pub fn qmax_seesaw(iq: &Inequality, dims: (usize, usize), restarts: usize, seed: u64) -> Result<SeesawResult> {
    if restarts == 0 {
        return Err(Error::invalid("need at least one restart"));
    }
    if dims.0 < 2 || dims.1 < 2 {
        return Err(Error::invalid("local dimensions must be at least 2"));
    }
    if dims.0 > MAX_LOCAL_DIM || dims.1 > MAX_LOCAL_DIM {
        return Err(Error::capacity(format!("local dimensions above {MAX_LOCAL_DIM} are not supported")));
    }
    iq.validate()?;
    let runs: Vec<SeesawRun> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let (meas, state) = random_start(iq, dims, seed.wrapping_add(k as u64))?;
            seesaw_from(iq, meas, state)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = k;
        }
    }
    let values = runs.iter().map(|r| r.value).collect();
    let model = runs[best].model.clone();
    Ok(SeesawResult { value: runs[best].value, model, restart: best, values })
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub value: f64,
    /// Outcome-0 direction of Alice's second setting.
    pub alice_angle: f64,
    /// Outcome-0 direction of Bob's second setting.
    pub bob_angle: f64,
    pub model: QuantumModel,
}

/// Two-parameter search for the first pentagon on qubits. Both parties'
/// first measurement is fixed to `|0⟩`; the second is `(cos θ, sin θ)`.
/// A 1° grid over `[0, π]²` is refined by pattern search down to a step of
/// `1e-10` rad.
pub fn qmax_scan_ineq2() -> Result<ScanResult> {
    let iq = builtin("pentagon-1").expect("built-in scenario");
    let f = |ta: f64, tb: f64| -> Result<f64> {
        let m = Measurements::from_angles(&[0.0, ta], &[0.0, tb]);
        max_eig(&bell_operator_matrix(&iq, &m)?)
    };
    let grid = 180;
    let h = PI / grid as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=grid {
        for j in 0..=grid {
            let (ta, tb) = (i as f64 * h, j as f64 * h);
            let v = f(ta, tb)?;
            if v > best.0 {
                best = (v, ta, tb);
            }
        }
    }
    let mut step = h;
    while step > 1e-10 {
        let mut moved = false;
        for (da, db) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let (ta, tb) = (best.1 + da * step, best.2 + db * step);
            let v = f(ta, tb)?;
            if v > best.0 {
                best = (v, ta, tb);
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    let (_, ta, tb) = best;
    let meas = Measurements::from_angles(&[0.0, ta], &[0.0, tb]);
    let s = bell_operator(&iq, &meas)?;
    let model = QuantumModel::new(s.top_eigenvector, meas)?;
    Ok(ScanResult { value: s.max_eigenvalue, alice_angle: ta, bob_angle: tb, model })
}

fn bell_operator_matrix(iq: &Inequality, m: &Measurements) -> Result<SymMatrix> {
    let mut s = SymMatrix::zeros(m.dims.0 * m.dims.1);
    for e in &iq.terms {
        s = s.add(&m.event_operator(e)?);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Graph;
    use crate::quantum::schmidt;
    use crate::scenarios::exclusivity_graph;
    use crate::theta::{lovasz_theta, DEFAULT_TOL};
    use std::f64::consts::SQRT_2;

    #[test]
    fn history_is_monotone() {
        let iq = builtin("pentagon-1").unwrap();
        for seed in 0..8 {
            let (meas, state) = random_start(&iq, (2, 2), seed).unwrap();
            let run = seesaw_from(&iq, meas, state).unwrap();
            assert!(run.converged);
            for w in run.history.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "seed {seed}: {} then {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn seesaw_reaches_chsh_optimum() {
        let iq = builtin("chsh-prob").unwrap();
        let r = qmax_seesaw(&iq, (2, 2), 8, 1).unwrap();
        assert!((r.value - (2.0 + SQRT_2)).abs() < 1e-6);
    }

    #[test]
    fn seesaw_is_deterministic() {
        let iq = builtin("pentagon-1").unwrap();
        let a = qmax_seesaw(&iq, (2, 2), 4, 42).unwrap();
        let b = qmax_seesaw(&iq, (2, 2), 4, 42).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.restart, b.restart);
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn seesaw_respects_theta() {
        let expected = [("pentagon-1", 2.178, 1e-3), ("pentagon-2", (3.0 + SQRT_2) / 2.0, 1e-6), ("pentagon-3", (3.0 + SQRT_2) / 2.0, 1e-6)];
        for (name, want, tol) in expected {
            let iq = builtin(name).unwrap();
            let (g, _): (Graph, _) = exclusivity_graph(&iq);
            let theta = lovasz_theta(&g, DEFAULT_TOL).unwrap().value;
            let r = qmax_seesaw(&iq, (2, 2), 8, 7).unwrap();
            assert!(r.value <= theta + 1e-6, "{name}: {} > {theta}", r.value);
            assert!((r.value - want).abs() < tol, "{name}: {}", r.value);
        }
    }

    #[test]
    fn second_pentagon_optimum_is_maximally_entangled() {
        let r = qmax_seesaw(&builtin("pentagon-2").unwrap(), (2, 2), DEFAULT_RESTARTS, 0).unwrap();
        let s = schmidt(&r.model.state, (2, 2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s[0] - h).abs() < 1e-4 && (s[1] - h).abs() < 1e-4, "{s:?}");
    }

    #[test]
    fn optimal_behaviors_respect_exclusivity() {
        for name in ["pentagon-1", "pentagon-2", "pentagon-3", "chsh-prob"] {
            let iq = builtin(name).unwrap();
            let r = qmax_seesaw(&iq, (2, 2), 4, 3).unwrap();
            let b = crate::quantum::behavior_of(&r.model).unwrap();
            let report = crate::scenarios::eprinciple_check(&iq, &b).unwrap();
            assert!(!report.clique_violation, "{name}");
            assert!(report.max_clique_sum <= 1.0 + 1e-9, "{name}");
        }
    }

    #[test]
    fn scan_finds_first_pentagon_optimum() {
        let r = qmax_scan_ineq2().unwrap();
        assert!((r.value - 2.178).abs() < 1e-3, "{}", r.value);
        let s = schmidt(&r.model.state, (2, 2)).unwrap();
        assert!((s[0] - 0.7735).abs() < 1e-3 && (s[1] - 0.6338).abs() < 1e-3, "{s:?}");
        let seesaw = qmax_seesaw(&builtin("pentagon-1").unwrap(), (2, 2), DEFAULT_RESTARTS, 0).unwrap();
        assert!((seesaw.value - r.value).abs() < 1e-6, "{} vs {}", seesaw.value, r.value);
    }

    #[test]
    fn higher_dimensions_agree_with_qubits() {
        let iq = builtin("pentagon-1").unwrap();
        let qubit = qmax_seesaw(&iq, (2, 2), DEFAULT_RESTARTS, 0).unwrap().value;
        for d in [3, 4] {
            let v = qmax_seesaw(&iq, (d, d), DEFAULT_RESTARTS, 0).unwrap().value;
            assert!((v - qubit).abs() < 1e-4, "d = {d}: {v} vs {qubit}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let iq = builtin("pentagon-1").unwrap();
        assert!(qmax_seesaw(&iq, (2, 2), 0, 0).is_err());
        assert!(qmax_seesaw(&iq, (1, 2), 1, 0).is_err());
        assert!(matches!(qmax_seesaw(&iq, (5, 2), 1, 0), Err(Error::Capacity(_))));
    }
}
