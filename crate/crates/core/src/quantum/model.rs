use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{norm, Matrix, SymMatrix};
use crate::scenarios::{Behavior, Event, Inequality, Local};

const PROJECTOR_TOL: f64 = 1e-10;
const STATE_NORM_TOL: f64 = 1e-12;

/// Rank-one projector onto the direction of `v`.
pub fn rank_one(v: &[f64]) -> SymMatrix {
    let n = norm(v);
    SymMatrix::outer(&v.iter().map(|x| x / n).collect::<Vec<_>>())
}

/// Qubit projector onto `(cos θ, sin θ)`.
pub fn angle_projector(theta: f64) -> SymMatrix {
    rank_one(&[theta.cos(), theta.sin()])
}

pub fn check_projector(p: &SymMatrix, dim: usize) -> Result<()> {
    if p.order() != dim {
        return Err(Error::invalid(format!("projector of order {} on a {dim}-dimensional space", p.order())));
    }
    let sq = p.as_matrix().matmul(p.as_matrix());
    let err = (&sq - p.as_matrix()).max_abs();
    if !p.as_matrix().is_finite() || err > PROJECTOR_TOL {
        return Err(Error::invalid(format!("matrix is not a projector (‖P²−P‖ = {err:.3e})")));
    }
    Ok(())
}

/// Projective binary measurements for both parties. Each entry is the
/// projector for outcome 0; outcome 1 is its complement.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurements {
    pub dims: (usize, usize),
    pub alice: Vec<SymMatrix>,
    pub bob: Vec<SymMatrix>,
}

impl Measurements {
    pub fn new(dims: (usize, usize), alice: Vec<SymMatrix>, bob: Vec<SymMatrix>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::invalid("local dimensions must be at least 1"));
        }
        for p in &alice {
            check_projector(p, dims.0)?;
        }
        for p in &bob {
            check_projector(p, dims.1)?;
        }
        Ok(Measurements { dims, alice, bob })
    }

    /// Qubit measurements from outcome-0 directions given as angles.
    pub fn from_angles(alice: &[f64], bob: &[f64]) -> Self {
        Measurements {
            dims: (2, 2),
            alice: alice.iter().map(|&t| angle_projector(t)).collect(),
            bob: bob.iter().map(|&t| angle_projector(t)).collect(),
        }
    }

    fn local(&self, l: Option<Local>, alice: bool) -> Result<SymMatrix> {
        let (dim, list, who) = if alice { (self.dims.0, &self.alice, "Alice") } else { (self.dims.1, &self.bob, "Bob") };
        match l {
            None => Ok(SymMatrix::identity(dim)),
            Some(l) => {
                let p = list
                    .get(l.setting as usize)
                    .ok_or_else(|| Error::invalid(format!("no measurement for {who}'s setting {}", l.setting)))?;
                Ok(if l.outcome == 0 { p.clone() } else { SymMatrix::identity(dim).sub(p) })
            }
        }
    }

    /// `Π^A ⊗ Π^B` for an event; a wildcard party contributes the identity.
    pub fn event_operator(&self, e: &Event) -> Result<SymMatrix> {
        Ok(self.local(e.alice, true)?.kron(&self.local(e.bob, false)?))
    }

    pub(crate) fn alice_effect(&self, l: Option<Local>) -> Result<SymMatrix> {
        self.local(l, true)
    }

    pub(crate) fn bob_effect(&self, l: Option<Local>) -> Result<SymMatrix> {
        self.local(l, false)
    }
}

/// A real bipartite pure state with projective measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumModel {
    pub state: Vec<f64>,
    pub measurements: Measurements,
}

impl QuantumModel {
    pub fn new(state: Vec<f64>, measurements: Measurements) -> Result<Self> {
        let (da, db) = measurements.dims;
        if state.len() != da * db {
            return Err(Error::invalid(format!("state has {} amplitudes, dims {da}x{db} need {}", state.len(), da * db)));
        }
        if state.iter().any(|x| !x.is_finite()) || (norm(&state) - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::invalid(format!("state is not a unit vector (norm {})", norm(&state))));
        }
        Measurements::new(measurements.dims, measurements.alice.clone(), measurements.bob.clone())?;
        Ok(QuantumModel { state, measurements })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.measurements.dims
    }

    /// `⟨ψ| O |ψ⟩`
    pub fn expectation(&self, op: &SymMatrix) -> f64 {
        op.quadratic_form(&self.state)
    }

    /// The `dA × dB` coefficient matrix of the state.
    pub fn coefficient_matrix(&self) -> Matrix {
        let (da, db) = self.dims();
        Matrix::from_vec(da, db, self.state.clone()).expect("state length checked")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile::from(self)).expect("model serializes")
    }
}

/// `P(ab|xy) = ⟨ψ| Π^A_{a|x} ⊗ Π^B_{b|y} |ψ⟩` over all declared settings.
pub fn behavior_of(m: &QuantumModel) -> Result<Behavior> {
    noisy_behavior(m, 1.0)
}

/// Behavior of `v·|ψ⟩⟨ψ| + (1 − v)·I/(dA·dB)`.
pub fn noisy_behavior(m: &QuantumModel, visibility: f64) -> Result<Behavior> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::invalid(format!("visibility {visibility} outside [0, 1]")));
    }
    let (na, nb) = (m.measurements.alice.len(), m.measurements.bob.len());
    if na == 0 || nb == 0 {
        return Err(Error::invalid("model needs at least one measurement per party"));
    }
    let (da, db) = m.dims();
    let mut probs = Vec::with_capacity(na * nb);
    for x in 0..na as u8 {
        for y in 0..nb as u8 {
            let mut p = [0.0; 4];
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let op = m.measurements.event_operator(&Event::joint(a, b, x, y))?;
                    let pure = m.expectation(&op);
                    let mixed = op.as_matrix().trace() / (da * db) as f64;
                    p[(2 * a + b) as usize] = (visibility * pure + (1.0 - visibility) * mixed).max(0.0);
                }
            }
            probs.push(p);
        }
    }
    Behavior::new(na, nb, probs)
}

/// Model file format. Each measurement is given by a direction (rank-one
/// outcome-0 projector) or a full projector matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dims: [usize; 2],
    pub state: Vec<f64>,
    pub alice: Vec<MeasurementFile>,
    pub bob: Vec<MeasurementFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    pub setting: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vector: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matrix: Option<Vec<Vec<f64>>>,
}

fn projectors_from_file(entries: &[MeasurementFile], dim: usize, who: &str) -> Result<Vec<SymMatrix>> {
    let count = entries.iter().map(|e| e.setting + 1).max().unwrap_or(0);
    let mut out: Vec<Option<SymMatrix>> = vec![None; count];
    for e in entries {
        let p = match (&e.vector, &e.matrix) {
            (Some(v), None) => {
                if v.len() != dim || norm(v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid(format!("{who} setting {}: bad vector", e.setting)));
                }
                rank_one(v)
            }
            (None, Some(rows)) => SymMatrix::new(Matrix::from_rows(rows)?)?,
            _ => return Err(Error::invalid(format!("{who} setting {}: give exactly one of vector/matrix", e.setting))),
        };
        check_projector(&p, dim)?;
        if out[e.setting].replace(p).is_some() {
            return Err(Error::invalid(format!("{who} setting {} listed twice", e.setting)));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(k, p)| p.ok_or_else(|| Error::invalid(format!("{who} setting {k} missing"))))
        .collect()
}

impl TryFrom<ModelFile> for QuantumModel {
    type Error = Error;

    /// The state is normalized on load so that rounded amplitudes are accepted.
    fn try_from(file: ModelFile) -> Result<QuantumModel> {
        let [da, db] = file.dims;
        let alice = projectors_from_file(&file.alice, da, "alice")?;
        let bob = projectors_from_file(&file.bob, db, "bob")?;
        let n = norm(&file.state);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("state must be a non-zero finite vector"));
        }
        let state = file.state.iter().map(|x| x / n).collect();
        QuantumModel::new(state, Measurements::new((da, db), alice, bob)?)
    }
}

fn measurement_entries(list: &[SymMatrix]) -> Vec<MeasurementFile> {
    list.iter()
        .enumerate()
        .map(|(setting, p)| {
            let trace = p.as_matrix().trace().round();
            if trace == 1.0 {
                let k = (0..p.order()).max_by(|&i, &j| p.get(i, i).total_cmp(&p.get(j, j))).expect("non-empty");
                let scale = p.get(k, k).sqrt();
                let v = (0..p.order()).map(|i| p.get(i, k) / scale).collect();
                MeasurementFile { setting, vector: Some(v), matrix: None }
            } else {
                let rows = (0..p.order()).map(|i| p.as_matrix().row(i).to_vec()).collect();
                MeasurementFile { setting, vector: None, matrix: Some(rows) }
            }
        })
        .collect()
}

impl From<&QuantumModel> for ModelFile {
    fn from(m: &QuantumModel) -> ModelFile {
        let (da, db) = m.dims();
        ModelFile {
            dims: [da, db],
            state: m.state.clone(),
            alice: measurement_entries(&m.measurements.alice),
            bob: measurement_entries(&m.measurements.bob),
        }
    }
}

/// Constants of the optimal model for the first pentagon.
pub mod first_pentagon {
    pub const C_SMALL: f64 = 0.7911;
    pub const S_SMALL: f64 = 0.6117;
    pub const C_LARGE: f64 = 0.2152;
    pub const S_LARGE: f64 = 0.9766;
    /// Amplitudes of `|00⟩` and `|11⟩`.
    pub const STATE: [f64; 2] = [0.6338, 0.7735];
}

/// The optimal models quoted for the built-in scenarios, as outcome-0
/// directions. `None` for scenarios without a quoted model.
pub fn paper_model(name: &str) -> Option<QuantumModel> {
    use first_pentagon::*;
    let (c8, s8) = ((PI / 8.0).cos(), (PI / 8.0).sin());
    let r = FRAC_1_SQRT_2;
    let phi_plus = vec![r, 0.0, 0.0, r];
    let (state, alice, bob): (Vec<f64>, Vec<[f64; 2]>, Vec<[f64; 2]>) = match name {
        "pentagon-1" => {
            let (a, b) = (STATE[0], STATE[1]);
            let n = (a * a + b * b).sqrt();
            (
                vec![a / n, 0.0, 0.0, b / n],
                vec![[C_SMALL, -S_SMALL], [C_LARGE, -S_LARGE]],
                vec![[-S_SMALL, C_SMALL], [-S_LARGE, C_LARGE]],
            )
        }
        "pentagon-2" => (phi_plus, vec![[0.0, 1.0], [-r, r]], vec![[-s8, c8], [s8, c8]]),
        "pentagon-3" => (phi_plus, vec![[0.0, 1.0], [-r, r], [-s8, c8]], vec![[-s8, c8], [s8, c8]]),
        "chsh-prob" => (phi_plus, vec![[1.0, 0.0], [r, r]], vec![[c8, s8], [c8, -s8]]),
        _ => return None,
    };
    let proj = |vs: Vec<[f64; 2]>| vs.iter().map(|v| rank_one(v)).collect::<Vec<_>>();
    let m = Measurements::new((2, 2), proj(alice), proj(bob)).expect("valid projectors");
    Some(QuantumModel::new(state, m).expect("valid model"))
}

/// `true` when the two measurement sets describe the same projectors.
pub fn same_measurements(a: &Measurements, b: &Measurements, tol: f64) -> bool {
    a.dims == b.dims
        && a.alice.len() == b.alice.len()
        && a.bob.len() == b.bob.len()
        && a.alice.iter().chain(&a.bob).zip(b.alice.iter().chain(&b.bob)).all(|(p, q)| (p.as_matrix() - q.as_matrix()).max_abs() <= tol)
}

/// Evaluates an inequality on a model directly from the state.
pub fn model_value(iq: &Inequality, m: &QuantumModel) -> Result<f64> {
    iq.terms.iter().map(|e| Ok(m.expectation(&m.measurements.event_operator(e)?))).sum()
}
