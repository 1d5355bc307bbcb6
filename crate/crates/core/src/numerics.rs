//! Small dense real linear algebra.
//!
//! Everything here works on `f64` row-major storage and targets the tiny
//! orders that show up in two-party Bell problems (at most a few dozen rows).
//! The symmetric eigensolver is cyclic Jacobi and the SVD is one-sided
//! (Hestenes) Jacobi; both are slow asymptotically but very accurate, which
//! is what the tolerance contracts below rely on.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// Relative off-diagonal threshold for the Jacobi eigensolver.
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const SVD_MAX_SWEEPS: usize = 80;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be at least 1"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Matrix::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// `u vᵀ`
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        Matrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>], rows: usize) -> Self {
        Matrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r, c) = (other.rows, other.cols);
        Matrix::from_fn(self.rows * r, self.cols * c, |i, j| {
            self[(i / r, j / c)] * other[(i % r, j % c)]
        })
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * factor).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &Matrix) -> f64 {
        dot(&self.data, &other.data)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for x in self.row(i) {
                write!(f, "{x:>12.6} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A real symmetric matrix. Symmetry is exact: construction averages the
/// input with its transpose after checking that they agree.
#[derive(Clone, PartialEq, Debug)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid(format!("symmetric matrix must be square, got {}x{}", m.rows, m.cols)));
        }
        if !m.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let tol = 1e-9 * m.max_abs().max(1.0);
        let n = m.rows;
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (out[(i, j)], out[(j, i)]);
                if (a - b).abs() > tol {
                    return Err(Error::invalid(format!("matrix not symmetric at ({i},{j}): {a} vs {b}")));
                }
                let avg = 0.5 * (a + b);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        Ok(SymMatrix(out))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn diag(values: &[f64]) -> Self {
        SymMatrix(Matrix::diag(values))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(Matrix::zeros(n, n))
    }

    /// Fills the upper triangle from `f` and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    /// `v vᵀ`
    pub fn outer(v: &[f64]) -> Self {
        SymMatrix::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn order(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.0[(i, j)] = value;
        self.0[(j, i)] = value;
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &other.0)
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix(self.0.scale(factor))
    }

    pub fn kron(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.kron(&other.0))
    }

    /// `vᵀ M v`
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.0.matvec(v))
    }

    /// Congruence `Wᵀ M W` for a matrix `W` with `order()` rows.
    pub fn congruence(&self, w: &Matrix) -> SymMatrix {
        let m = w.transpose().matmul(&self.0).matmul(w);
        let n = m.rows;
        SymMatrix::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }
}

/// Serialized as a list of rows.
impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Clone, Debug)]
pub struct EigDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Matrix,
}

impl EigDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Unit eigenvector of the largest eigenvalue.
    pub fn top_eigenvector(&self) -> Vec<f64> {
        self.eigenvector(self.eigenvalues.len() - 1)
    }

    /// `V Λ Vᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let n = self.eigenvalues.len();
        Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.eigenvectors[(i, k)] * self.eigenvalues[k] * self.eigenvectors[(j, k)]).sum()
        })
    }
}

#[derive(Clone, Debug)]
pub struct SvdDecomposition {
    /// `rows × k`, orthonormal columns, `k = min(rows, cols)`.
    pub u: Matrix,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// `cols × k`, orthonormal columns.
    pub v: Matrix,
}

impl SvdDecomposition {
    /// `U Σ Vᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let k = self.singular_values.len();
        Matrix::from_fn(self.u.rows(), self.v.rows(), |i, j| {
            (0..k).map(|l| self.u[(i, l)] * self.singular_values[l] * self.v[(j, l)]).sum()
        })
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-12·‖M‖_F`.
/// Eigenvalues come back ascending with matching eigenvector columns.
pub fn eig_sym(m: &SymMatrix) -> Result<EigDecomposition> {
    let a0 = m.as_matrix();
    if !a0.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = m.order();
    let mut a = a0.clone();
    let mut v = Matrix::identity(n);
    let threshold = JACOBI_TOL * a0.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (c, s) = jacobi_rotation(a[(p, p)], a[(q, q)], apq);
                rotate_symmetric(&mut a, p, q, c, s);
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(EigDecomposition { eigenvalues, eigenvectors })
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eig(m: &SymMatrix) -> Result<f64> {
    Ok(eig_sym(m)?.max_eigenvalue())
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Rotation `(c, s)` that annihilates `a_pq` in the 2×2 symmetric block.
fn jacobi_rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

/// `A ← Jᵀ A J` with `J` the plane rotation in `(p, q)`.
fn rotate_symmetric(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

/// Thin singular value decomposition by one-sided Jacobi.
pub fn svd(a: &Matrix) -> Result<SvdDecomposition> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::invalid("matrix dimensions must be at least 1"));
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if a.rows() < a.cols() {
        let t = svd_tall(&a.transpose());
        return Ok(SvdDecomposition { u: t.v, singular_values: t.singular_values, v: t.u });
    }
    Ok(svd_tall(a))
}

fn svd_tall(a: &Matrix) -> SvdDecomposition {
    let (m, n) = (a.rows(), a.cols());
    // Work on columns: cols[j] is column j of A, rotated in place.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| unit_vector(n, j)).collect();

    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let scale = sigma.iter().fold(0.0f64, |acc, &x| acc.max(x));
    let negligible = scale * 1e-14 * (m as f64);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (slot, &k) in order.iter().enumerate() {
        if sigma[k] > negligible && sigma[k] > 0.0 {
            u_cols.push(cols[k].iter().map(|x| x / sigma[k]).collect());
        } else {
            sigma[k] = 0.0;
            u_cols.push(vec![0.0; m]);
            deficient.push(slot);
        }
        values.push(sigma[k]);
        v_cols.push(v[k].clone());
    }
    for slot in deficient {
        u_cols[slot] = orthonormal_complement_vector(&u_cols, slot, m);
    }

    SvdDecomposition {
        u: Matrix::from_columns(&u_cols, m),
        singular_values: values,
        v: Matrix::from_columns(&v_cols, n),
    }
}

fn rotate_pair(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// A unit vector orthogonal to every non-zero column in `cols` other than
/// `skip`, found by Gram-Schmidt over the standard basis.
fn orthonormal_complement_vector(cols: &[Vec<f64>], skip: usize, dim: usize) -> Vec<f64> {
    let mut best = unit_vector(dim, 0);
    let mut best_norm = -1.0;
    for e in 0..dim {
        let mut cand = unit_vector(dim, e);
        for _ in 0..2 {
            for (k, c) in cols.iter().enumerate() {
                if k == skip || norm(c) == 0.0 {
                    continue;
                }
                let proj = dot(&cand, c);
                for (x, y) in cand.iter_mut().zip(c) {
                    *x -= proj * y;
                }
            }
        }
        let nrm = norm(&cand);
        if nrm > best_norm {
            best_norm = nrm;
            best = cand;
        }
        if nrm > 0.5 {
            break;
        }
    }
    best.iter().map(|x| x / best_norm).collect()
}

/// Frobenius-nearest positive semidefinite matrix: negative eigenvalues are
/// clipped to zero.
pub fn project_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = eig_sym(m)?;
    let n = m.order();
    let v = &eig.eigenvectors;
    let kept: Vec<(usize, f64)> =
        eig.eigenvalues.iter().copied().enumerate().filter(|&(_, l)| l > 0.0).collect();
    Ok(SymMatrix::from_fn(n, |i, j| kept.iter().map(|&(k, l)| v[(i, k)] * l * v[(j, k)]).sum()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

pub fn unit_vector(dim: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[k] = 1.0;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        normalize(&(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
    }

    fn orthonormality_error(v: &Matrix) -> f64 {
        let vtv = v.transpose().matmul(v);
        (&vtv - &Matrix::identity(v.cols())).max_abs()
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = eig_sym(&SymMatrix::identity(4)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
        let e = eig_sym(&SymMatrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.eigenvector(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn eig_random_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 8, 16] {
            let m = random_sym(n, &mut rng);
            let e = eig_sym(&m).unwrap();
            assert!(orthonormality_error(&e.eigenvectors) < 1e-10);
            let rec = e.reconstruct();
            assert!((&rec - m.as_matrix()).max_abs() < 1e-10, "n={n}");
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            for k in 0..n {
                let vk = e.eigenvector(k);
                let mv = m.as_matrix().matvec(&vk);
                let resid: f64 = mv.iter().zip(&vk).map(|(a, b)| (a - e.eigenvalues[k] * b).abs()).fold(0.0, f64::max);
                assert!(resid <= 1e-9 * m.as_matrix().frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn eig_rejects_non_finite() {
        let mut m = SymMatrix::identity(2);
        m.set(0, 1, f64::NAN);
        assert!(matches!(eig_sym(&m), Err(Error::InvalidInput(_))));
        let bad = Matrix::from_rows(&[[1.0, f64::INFINITY], [0.0, 1.0]]).unwrap();
        assert!(SymMatrix::new(bad).is_err());
    }

    #[test]
    fn sym_constructor_checks_symmetry() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.5, 1.0]]).unwrap();
        assert!(SymMatrix::new(m).is_err());
        let m = Matrix::from_rows(&[[1.0, 2.0, 0.0], [2.0, 1.0, 0.0]]).unwrap();
        assert!(SymMatrix::new(m).is_err());
    }

    #[test]
    fn max_eig_examples() {
        assert_eq!(max_eig(&SymMatrix::identity(4)).unwrap(), 1.0);
        assert_eq!(max_eig(&SymMatrix::diag(&[0.0, 0.0, 5.0])).unwrap(), 5.0);
    }

    #[test]
    fn rayleigh_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let m = random_sym(6, &mut rng);
            let top = max_eig(&m).unwrap();
            for _ in 0..1000 {
                let v = random_unit(6, &mut rng);
                assert!(m.quadratic_form(&v) <= top + 1e-12);
            }
        }
    }

    #[test]
    fn svd_examples() {
        let s = svd(&Matrix::identity(3)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);

        let u = normalize(&[1.0, 2.0, -1.0]);
        let v = normalize(&[0.5, 0.5, 3.0, 1.0]);
        let s = svd(&Matrix::outer(&u, &v)).unwrap();
        assert!((s.singular_values[0] - 1.0).abs() < 1e-12);
        assert!(s.singular_values[1..].iter().all(|&x| x.abs() < 1e-12));
        assert!(orthonormality_error(&s.u) < 1e-10);
        assert!(orthonormality_error(&s.v) < 1e-10);
    }

    #[test]
    fn svd_random_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (r, c) in [(4, 3), (3, 4), (1, 5), (6, 6), (2, 1)] {
            let a = random_matrix(r, c, &mut rng);
            let s = svd(&a).unwrap();
            assert!((&s.reconstruct() - &a).max_abs() < 1e-10, "{r}x{c}");
            assert!(orthonormality_error(&s.u) < 1e-10);
            assert!(orthonormality_error(&s.v) < 1e-10);
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            assert!(s.singular_values.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn svd_matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(5, 3, &mut rng);
        let s = svd(&a).unwrap();
        let gram = SymMatrix::new(a.transpose().matmul(&a)).unwrap();
        let mut from_eig: Vec<f64> = eig_sym(&gram).unwrap().eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        from_eig.reverse();
        for (x, y) in s.singular_values.iter().zip(&from_eig) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let a = Matrix::from_rows(&[[1.0, f64::NAN]]).unwrap();
        assert!(svd(&a).is_err());
    }

    #[test]
    fn project_psd_examples() {
        let p = project_psd(&SymMatrix::diag(&[1.0, -1.0])).unwrap();
        assert!((p.as_matrix() - &Matrix::diag(&[1.0, 0.0])).max_abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = random_matrix(4, 4, &mut rng);
        let psd = SymMatrix::new(b.matmul(&b.transpose())).unwrap();
        let p = project_psd(&psd).unwrap();
        assert!((p.as_matrix() - psd.as_matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn project_psd_is_nearest_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = random_sym(5, &mut rng);
        let p = project_psd(&m).unwrap();
        assert!(eig_sym(&p).unwrap().eigenvalues[0] >= -1e-10);
        let dist = (p.as_matrix() - m.as_matrix()).frobenius_norm();
        for _ in 0..100 {
            let b = random_matrix(5, 5, &mut rng);
            let other = b.matmul(&b.transpose());
            assert!(dist <= (&other - m.as_matrix()).frobenius_norm() + 1e-12);
        }
        let pp = project_psd(&p).unwrap();
        assert!((pp.as_matrix() - p.as_matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn kron_of_identities() {
        let k = Matrix::identity(2).kron(&Matrix::identity(3));
        assert_eq!(k, Matrix::identity(6));
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k[(0, 1)], 1.0);
        assert_eq!(k[(3, 2)], 4.0);
        assert_eq!(k[(2, 1)], 3.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sym_strategy() -> impl Strategy<Value = SymMatrix> {
            (1usize..9).prop_flat_map(|n| {
                proptest::collection::vec(-10.0f64..10.0, n * n)
                    .prop_map(move |d| SymMatrix::from_fn(n, |i, j| d[i * n + j]))
            })
        }

        proptest! {
            #[test]
            fn eig_invariants(m in sym_strategy()) {
                let e = eig_sym(&m).unwrap();
                prop_assert!(orthonormality_error(&e.eigenvectors) < 1e-10);
                let scale = m.as_matrix().frobenius_norm().max(1e-300);
                prop_assert!((&e.reconstruct() - m.as_matrix()).max_abs() <= 1e-9 * scale);
            }

            #[test]
            fn psd_projection_idempotent(m in sym_strategy()) {
                let p = project_psd(&m).unwrap();
                let pp = project_psd(&p).unwrap();
                prop_assert!((pp.as_matrix() - p.as_matrix()).max_abs() < 1e-10 * (1.0 + m.as_matrix().frobenius_norm()));
            }
        }
    }
}
