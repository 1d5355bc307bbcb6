//! Lovász number by semidefinite programming.
//!
//! Solves
//!
//! ```text
//! maximize   Σ_ij X_ij
//! subject to tr X = 1,  X_ij = 0 for every edge {i, j},  X ⪰ 0
//! ```
//!
//! by alternating between the affine constraint set and the PSD cone,
//! with a scaled dual correction and over-relaxation (ADMM). Every result
//! carries a primal certificate `X` and a dual upper bound, so the value can
//! be audited without rerunning the solver.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{Graph, ALPHA_MAX_VERTICES};
use crate::numerics::{eig_sym, max_eig, project_psd, Matrix, SymMatrix};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 200_000;

const RELAXATION: f64 = 1.6;
const CHECK_EVERY: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct ThetaResult {
    pub value: f64,
    /// Primal certificate: unit trace, zero on edges, PSD up to solver accuracy.
    pub x: SymMatrix,
    pub iterations: usize,
    /// Dual bound minus `value`; zero for closed-form short-circuits.
    pub gap: f64,
    /// An upper bound on ϑ: the top eigenvalue of the all-ones matrix with
    /// its edge entries replaced by the dual multipliers.
    pub upper_bound: f64,
}

impl ThetaResult {
    /// Recomputes `Σ_ij X_ij` from the certificate alone.
    pub fn replay_value(&self) -> f64 {
        self.x.as_matrix().sum()
    }

    /// Largest violation of the certificate's constraints:
    /// `(negative eigenvalue, |trace − 1|, max |X_ij| over edges)`.
    pub fn certificate_violation(&self, g: &Graph) -> (f64, f64, f64) {
        let min_eig = eig_sym(&self.x).map(|e| e.eigenvalues[0]).unwrap_or(f64::NAN);
        let trace = (self.x.as_matrix().trace() - 1.0).abs();
        let edge = g.edges().iter().fold(0.0f64, |m, &(i, j)| m.max(self.x.get(i, j).abs()));
        ((-min_eig).max(0.0), trace, edge)
    }
}

/// Lovász number of `g` to within `tol`.
pub fn lovasz_theta(g: &Graph, tol: f64) -> Result<ThetaResult> {
    if !(1e-10..=1e-3).contains(&tol) {
        return Err(Error::invalid(format!("tolerance {tol:e} outside [1e-10, 1e-3]")));
    }
    let n = g.order();
    if n > ALPHA_MAX_VERTICES {
        return Err(Error::capacity(format!("theta limited to {ALPHA_MAX_VERTICES} vertices, got {n}")));
    }
    if n == 0 {
        return Err(Error::invalid("theta of the empty vertex set is undefined"));
    }
    let edges = g.edges();
    if edges.is_empty() {
        let x = SymMatrix::from_fn(n, |_, _| 1.0 / n as f64);
        return Ok(ThetaResult { value: n as f64, x, iterations: 0, gap: 0.0, upper_bound: n as f64 });
    }
    if edges.len() == n * (n - 1) / 2 {
        let x = SymMatrix::identity(n).scale(1.0 / n as f64);
        return Ok(ThetaResult { value: 1.0, x, iterations: 0, gap: 0.0, upper_bound: 1.0 });
    }

    let rho = n as f64;
    let ones = SymMatrix::from_fn(n, |_, _| 1.0);
    let ones_over_rho = ones.scale(1.0 / rho);
    let mut z = SymMatrix::identity(n).scale(1.0 / n as f64);
    let mut u = SymMatrix::zeros(n);
    let mut best: Option<ThetaResult> = None;

    for iter in 1..=MAX_ITERATIONS {
        let x = project_affine(&z.sub(&u).add(&ones_over_rho), &edges);
        let relaxed = x.scale(RELAXATION).add(&z.scale(1.0 - RELAXATION));
        let z_next = project_psd(&relaxed.add(&u))?;
        u = u.add(&relaxed).sub(&z_next);
        z = z_next;

        if iter % CHECK_EVERY != 0 {
            continue;
        }
        let candidate = certify(&z, &u, rho, &edges, iter)?;
        let min_eig = eig_sym(&candidate.x)?.eigenvalues[0];
        if candidate.gap.abs() <= tol && min_eig >= -1e-9 {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|b| candidate.gap.abs() < b.gap.abs()) {
            best = Some(candidate);
        }
    }
    Err(Error::NotConverged(Box::new(best.expect("at least one check"))))
}

/// Orthogonal projection onto `{tr X = 1, X_ij = 0 on edges}`.
fn project_affine(y: &SymMatrix, edges: &[(usize, usize)]) -> SymMatrix {
    let n = y.order();
    let mut x = y.clone();
    for &(i, j) in edges {
        x.set(i, j, 0.0);
    }
    let shift = (1.0 - x.as_matrix().trace()) / n as f64;
    for i in 0..n {
        x.set(i, i, x.get(i, i) + shift);
    }
    x
}

/// Turns the PSD iterate into a certificate and pairs it with a dual bound.
fn certify(z: &SymMatrix, u: &SymMatrix, rho: f64, edges: &[(usize, usize)], iterations: usize) -> Result<ThetaResult> {
    let n = z.order();
    let mut x = z.clone();
    for &(i, j) in edges {
        x.set(i, j, 0.0);
    }
    let trace = x.as_matrix().trace();
    let x = x.scale(1.0 / trace);
    let value = x.as_matrix().sum();

    let mut dual = SymMatrix::from_fn(n, |_, _| 1.0);
    for &(i, j) in edges {
        dual.set(i, j, rho * u.get(i, j));
    }
    let upper_bound = max_eig(&dual)?;
    Ok(ThetaResult { value, x, iterations, gap: upper_bound - value, upper_bound })
}

/// Weak-duality check: for any symmetric `m` agreeing with the all-ones
/// matrix off the edge set, `λ_max(m)` bounds ϑ from above.
pub fn dual_bound(g: &Graph, edge_values: &[f64]) -> Result<f64> {
    let edges = g.edges();
    if edge_values.len() != edges.len() {
        return Err(Error::invalid("one dual value per edge required"));
    }
    let n = g.order();
    let mut m = Matrix::from_fn(n, n, |_, _| 1.0);
    for (&(i, j), &v) in edges.iter().zip(edge_values) {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    max_eig(&SymMatrix::new(m)?)
}
