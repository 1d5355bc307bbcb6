use std::f64::consts::PI;

use serde::Serialize;

use crate::numerics::dot;

/// Five unit vectors in `R³` whose consecutive members are orthogonal,
/// measured on a fixed state.
#[derive(Clone, Debug, Serialize)]
pub struct KcbsModel {
    pub state: [f64; 3],
    pub vectors: [[f64; 3]; 5],
}

impl KcbsModel {
    /// `|⟨v_k|ψ⟩|²` for each vector.
    pub fn probabilities(&self) -> [f64; 5] {
        self.vectors.map(|v| dot(&v, &self.state).powi(2))
    }

    pub fn total(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    /// `|⟨v_k|v_{k+1}⟩|` for `k = 0..5`, cyclically.
    pub fn adjacent_overlaps(&self) -> [f64; 5] {
        std::array::from_fn(|k| dot(&self.vectors[k], &self.vectors[(k + 1) % 5]).abs())
    }
}

/// `v_k = (cos θ, sin θ cos(4πk/5), sin θ sin(4πk/5))` on `ψ = (1, 0, 0)`,
/// with `cos²θ = cos(π/5) / (1 + cos(π/5))`.
pub fn kcbs_model() -> KcbsModel {
    let c = (PI / 5.0).cos();
    let cos_t = (c / (1.0 + c)).sqrt();
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let vectors = std::array::from_fn(|k| {
        let phi = 4.0 * PI * k as f64 / 5.0;
        [cos_t, sin_t * phi.cos(), sin_t * phi.sin()]
    });
    KcbsModel { state: [1.0, 0.0, 0.0], vectors }
}
