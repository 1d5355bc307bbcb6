//! Correlator form of two-setting inequalities and the exclusivity-principle
//! check.

use serde::Serialize;

use super::{evaluate, exclusivity_graph, Behavior, DeterministicStrategy, Inequality};
use crate::error::{Error, Result};
use crate::graphs::{cycle, is_isomorphic};
use crate::numerics::{svd, Matrix};

const RESIDUAL_TOL: f64 = 1e-10;

/// Largest pentagon sum allowed when every set of pairwise exclusive events
/// (in any number of independent copies) sums to at most one.
pub const PENTAGON_EXCLUSIVITY_BOUND: f64 = 2.236_067_977_499_79;

/// `value(b) = offset + Σ c_xy ⟨A_x B_y⟩ + Σ α_x ⟨A_x⟩ + Σ β_y ⟨B_y⟩`.
///
/// When the marginal coefficients are not needed, `correlator_only` is set
/// and `alice_marginals`/`bob_marginals` are zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshDecomposition {
    pub offset: f64,
    pub correlators: [[f64; 2]; 2],
    pub alice_marginals: [f64; 2],
    pub bob_marginals: [f64; 2],
    pub correlator_only: bool,
    /// Max fit error over the sixteen deterministic behaviors.
    pub residual: f64,
}

impl ChshDecomposition {
    pub fn value(&self, b: &Behavior) -> f64 {
        let mut v = self.offset;
        for x in 0..2u8 {
            v += self.alice_marginals[x as usize] * b.alice_expectation(x);
            v += self.bob_marginals[x as usize] * b.bob_expectation(x);
            for y in 0..2u8 {
                v += self.correlators[x as usize][y as usize] * b.correlator(x, y);
            }
        }
        v
    }

    /// If the correlator part is `k` times a CHSH-type expression (all four
    /// coefficients of magnitude `k`, an odd number of them negative),
    /// returns `k`.
    pub fn chsh_scale(&self) -> Option<f64> {
        if !self.correlator_only {
            return None;
        }
        let flat = [self.correlators[0][0], self.correlators[0][1], self.correlators[1][0], self.correlators[1][1]];
        let k = flat[0].abs();
        let equal = flat.iter().all(|c| (c.abs() - k).abs() <= 1e-9);
        let negatives = flat.iter().filter(|&&c| c < 0.0).count();
        (k > 1e-9 && equal && negatives % 2 == 1).then_some(k)
    }
}

/// Fits the inequality as an affine function of correlators (and, if
/// needed, single-party expectations) over the sixteen deterministic
/// behaviors. Any identity that holds on those vertices holds on the whole
/// no-signaling set.
pub fn chsh_decomposition(iq: &Inequality) -> Result<ChshDecomposition> {
    if iq.alice_settings > 2 || iq.bob_settings > 2 {
        return Err(Error::invalid(format!("{} is not a two-setting inequality", iq.name)));
    }
    let vertices: Vec<Behavior> =
        (0..16).map(|code| Behavior::deterministic(&DeterministicStrategy::from_code(code, 2, 2))).collect();
    let targets = vertices.iter().map(|b| evaluate(iq, b)).collect::<Result<Vec<f64>>>()?;

    let features = |b: &Behavior, extended: bool| {
        let mut f = vec![1.0, b.correlator(0, 0), b.correlator(0, 1), b.correlator(1, 0), b.correlator(1, 1)];
        if extended {
            f.extend([b.alice_expectation(0), b.alice_expectation(1), b.bob_expectation(0), b.bob_expectation(1)]);
        }
        f
    };

    for extended in [false, true] {
        let rows: Vec<Vec<f64>> = vertices.iter().map(|b| features(b, extended)).collect();
        let design = Matrix::from_rows(&rows)?;
        let (coef, residual) = least_squares(&design, &targets)?;
        if residual <= RESIDUAL_TOL || extended {
            let marg = |k: usize| if extended { coef[k] } else { 0.0 };
            return Ok(ChshDecomposition {
                offset: coef[0],
                correlators: [[coef[1], coef[2]], [coef[3], coef[4]]],
                alice_marginals: [marg(5), marg(6)],
                bob_marginals: [marg(7), marg(8)],
                correlator_only: !extended,
                residual,
            });
        }
    }
    unreachable!("extended fit always returns")
}

/// Minimum-norm least squares through the SVD; returns the solution and the
/// max-abs residual.
fn least_squares(a: &Matrix, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let s = svd(a)?;
    let cutoff = s.singular_values[0] * 1e-12;
    let mut x = vec![0.0; a.cols()];
    for (k, &sigma) in s.singular_values.iter().enumerate() {
        if sigma <= cutoff {
            continue;
        }
        let proj: f64 = (0..a.rows()).map(|i| s.u[(i, k)] * rhs[i]).sum::<f64>() / sigma;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += proj * s.v[(j, k)];
        }
    }
    let fitted = a.matvec(&x);
    let residual = fitted.iter().zip(rhs).fold(0.0f64, |m, (f, r)| m.max((f - r).abs()));
    Ok((x, residual))
}

#[derive(Clone, Debug, Serialize)]
pub struct EPrincipleReport {
    /// Largest probability sum over a clique of pairwise exclusive events.
    pub max_clique_sum: f64,
    /// Term indices of that clique.
    pub max_clique: Vec<usize>,
    pub clique_violation: bool,
    /// Value of the inequality on the behavior.
    pub total: f64,
    /// `√5` when the exclusivity graph is a pentagon.
    pub pentagon_bound: Option<f64>,
    pub exceeds_pentagon_bound: bool,
    /// CHSH cap implied by the pentagon bound through the correlator form.
    pub chsh_cap: Option<f64>,
    pub violated: bool,
}

/// Checks a behavior against the exclusivity principle on the inequality's
/// exclusivity graph. Every clique must sum to at most one; for pentagons
/// the total must also stay below `√5`.
pub fn eprinciple_check(iq: &Inequality, b: &Behavior) -> Result<EPrincipleReport> {
    let (g, _) = exclusivity_graph(iq);
    if g.order() > 16 {
        return Err(Error::capacity(format!("clique enumeration limited to 16 terms, got {}", g.order())));
    }
    let probs = iq.terms.iter().map(|e| b.event_probability(e)).collect::<Result<Vec<f64>>>()?;

    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut stack: Vec<(Vec<usize>, f64, u64)> = (0..g.order())
        .map(|v| (vec![v], probs[v], g.neighbors_mask(v) & !((1u64 << (v + 1)) - 1)))
        .collect();
    while let Some((clique, sum, extend)) = stack.pop() {
        if sum > best.0 || (sum == best.0 && clique < best.1) {
            best = (sum, clique.clone());
        }
        for (w, p) in probs.iter().enumerate() {
            if extend >> w & 1 == 1 {
                let mut next = clique.clone();
                next.push(w);
                stack.push((next, sum + p, extend & g.neighbors_mask(w)));
            }
        }
    }
    let (max_clique_sum, max_clique) = if g.order() == 0 { (0.0, Vec::new()) } else { best };

    let total: f64 = probs.iter().sum();
    let is_pentagon = g.order() == 5 && is_isomorphic(&g, &cycle(5)?)?.is_some();
    let pentagon_bound = is_pentagon.then_some(PENTAGON_EXCLUSIVITY_BOUND);
    let exceeds_pentagon_bound = pentagon_bound.is_some_and(|p| total > p + 1e-9);

    let chsh_cap = match pentagon_bound {
        Some(bound) if iq.alice_settings <= 2 && iq.bob_settings <= 2 => {
            let d = chsh_decomposition(iq)?;
            d.chsh_scale().map(|k| (bound - d.offset) / k)
        }
        _ => None,
    };
    let clique_violation = max_clique_sum > 1.0 + 1e-9;
    Ok(EPrincipleReport {
        max_clique_sum,
        max_clique,
        clique_violation,
        total,
        pentagon_bound,
        exceeds_pentagon_bound,
        chsh_cap,
        violated: clique_violation || exceeds_pentagon_bound,
    })
}
