use serde::Serialize;

use super::model::check_projector;
use crate::error::{Error, Result};
use crate::numerics::{dot, eig_sym, norm, svd, Matrix, SymMatrix};

/// Orthogonal decomposition of `P1 ⊗ Q1 + P2 ⊗ Q2 + I ⊗ Q0` along the
/// common invariant subspaces of two projectors on Alice's side.
#[derive(Clone, Debug, Serialize)]
pub struct BlockReduction {
    /// Restricted operators, one per invariant subspace of dimension 1 or 2.
    pub blocks: Vec<SymMatrix>,
    /// Orthonormal bases of the invariant subspaces, one column per vector.
    #[serde(skip)]
    pub subspaces: Vec<Matrix>,
    /// Cosines of the principal angles between the two ranges.
    pub principal_cosines: Vec<f64>,
    /// Dimension of the joint kernel of both projectors.
    pub residual_dim: usize,
    /// Eigenvalues of `Q0`, each contributed `residual_dim` times.
    pub residual_spectrum: Vec<f64>,
}

impl BlockReduction {
    /// Eigenvalues of all blocks plus the residual, ascending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let mut all = Vec::new();
        for b in &self.blocks {
            all.extend(eig_sym(b)?.eigenvalues);
        }
        for _ in 0..self.residual_dim {
            all.extend(&self.residual_spectrum);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.spectrum()?.last().copied().unwrap_or(f64::NEG_INFINITY))
    }
}

/// `P1 ⊗ Q1 + P2 ⊗ Q2 + I ⊗ Q0`
pub fn two_projector_operator(
    p1: &SymMatrix,
    p2: &SymMatrix,
    q0: &SymMatrix,
    q1: &SymMatrix,
    q2: &SymMatrix,
) -> Result<SymMatrix> {
    check_shapes(p1, p2, q0, q1, q2)?;
    Ok(p1.kron(q1).add(&p2.kron(q2)).add(&SymMatrix::identity(p1.order()).kron(q0)))
}

fn check_shapes(p1: &SymMatrix, p2: &SymMatrix, q0: &SymMatrix, q1: &SymMatrix, q2: &SymMatrix) -> Result<()> {
    check_projector(p1, p1.order())?;
    check_projector(p2, p1.order())?;
    if q0.order() != q1.order() || q1.order() != q2.order() {
        return Err(Error::invalid("Bob's operators must share one dimension"));
    }
    Ok(())
}

/// Columns spanning the eigenvalue-one eigenspace of a projector.
fn range_basis(p: &SymMatrix) -> Result<Vec<Vec<f64>>> {
    let eig = eig_sym(p)?;
    Ok((0..p.order()).filter(|&k| eig.eigenvalues[k] > 0.5).map(|k| eig.eigenvector(k)).collect())
}

/// Orthonormal basis of the complement of the span of orthonormal `cols` in `R^dim`.
fn complement(cols: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut q = SymMatrix::identity(dim);
    for c in cols {
        q = q.sub(&SymMatrix::outer(c));
    }
    range_basis(&q)
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis.first().map_or(0, Vec::len)];
    for (b, &c) in basis.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

fn orthogonalize(v: &[f64], against: &[f64]) -> Vec<f64> {
    let c = dot(v, against);
    v.iter().zip(against).map(|(x, a)| x - c * a).collect()
}

/// Splits Alice's space into subspaces of dimension at most two that are
/// invariant under both `P1` and `P2`, and restricts the operator to each.
///
/// The principal vectors come from the SVD of `EᵀF`, where the columns of
/// `E` and `F` span the two ranges.
pub fn block_reduce(
    p1: &SymMatrix,
    p2: &SymMatrix,
    q0: &SymMatrix,
    q1: &SymMatrix,
    q2: &SymMatrix,
) -> Result<BlockReduction> {
    check_shapes(p1, p2, q0, q1, q2)?;
    let dim = p1.order();
    let e = range_basis(p1)?;
    let f = range_basis(p2)?;
    let mut subspaces: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut principal_cosines = Vec::new();
    let (mut unpaired_e, mut unpaired_f) = (e.clone(), f.clone());
    if !e.is_empty() && !f.is_empty() {
        let g = Matrix::from_fn(e.len(), f.len(), |i, j| dot(&e[i], &f[j]));
        let d = svd(&g)?;
        let us: Vec<Vec<f64>> = (0..d.u.cols()).map(|k| d.u.column(k)).collect();
        let vs: Vec<Vec<f64>> = (0..d.v.cols()).map(|k| d.v.column(k)).collect();
        for (k, &sigma) in d.singular_values.iter().enumerate() {
            let a = combine(&e, &us[k]);
            let b = combine(&f, &vs[k]);
            principal_cosines.push(sigma);
            let r = orthogonalize(&b, &a);
            let rn = norm(&r);
            if rn <= 1e-8 {
                subspaces.push(vec![a]);
            } else if sigma < 1e-12 {
                subspaces.push(vec![a]);
                subspaces.push(vec![b]);
            } else {
                let w = orthogonalize(&r.iter().map(|x| x / rn).collect::<Vec<_>>(), &a);
                let wn = norm(&w);
                subspaces.push(vec![a, w.iter().map(|x| x / wn).collect()]);
            }
        }
        unpaired_e = complement(&us, e.len())?.iter().map(|c| combine(&e, c)).collect();
        unpaired_f = complement(&vs, f.len())?.iter().map(|c| combine(&f, c)).collect();
    }
    subspaces.extend(unpaired_e.into_iter().map(|v| vec![v]));
    subspaces.extend(unpaired_f.into_iter().map(|v| vec![v]));

    let used: usize = subspaces.iter().map(Vec::len).sum();
    if used > dim {
        return Err(Error::invalid("projector ranges are numerically inconsistent"));
    }
    let mut blocks = Vec::with_capacity(subspaces.len());
    let mut bases = Vec::with_capacity(subspaces.len());
    for s in subspaces {
        let w = Matrix::from_columns(&s, dim);
        let k = s.len();
        let op = p1.congruence(&w).kron(q1).add(&p2.congruence(&w).kron(q2)).add(&SymMatrix::identity(k).kron(q0));
        blocks.push(op);
        bases.push(w);
    }
    Ok(BlockReduction {
        blocks,
        subspaces: bases,
        principal_cosines,
        residual_dim: dim - used,
        residual_spectrum: eig_sym(q0)?.eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::angle_projector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_projector(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> SymMatrix {
        let mut cols: Vec<Vec<f64>> = Vec::new();
        while cols.len() < rank {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for c in &cols {
                v = orthogonalize(&v, c);
            }
            let n = norm(&v);
            if n > 1e-3 {
                cols.push(v.iter().map(|x| x / n).collect());
            }
        }
        let mut p = SymMatrix::zeros(dim);
        for c in &cols {
            p = p.add(&SymMatrix::outer(c));
        }
        p
    }

    fn random_sym(rng: &mut ChaCha8Rng, dim: usize) -> SymMatrix {
        SymMatrix::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn assert_same_spectrum(r: &BlockReduction, full: &SymMatrix) {
        let a = r.spectrum().unwrap();
        let b = eig_sym(full).unwrap().eigenvalues;
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn spectrum_matches_full_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let da = rng.gen_range(1..=6);
            let db = rng.gen_range(1..=3);
            let (r1, r2) = (rng.gen_range(0..=da), rng.gen_range(0..=da));
            let p1 = random_projector(&mut rng, da, r1);
            let p2 = random_projector(&mut rng, da, r2);
            let (q0, q1, q2) = (random_sym(&mut rng, db), random_sym(&mut rng, db), random_sym(&mut rng, db));
            let r = block_reduce(&p1, &p2, &q0, &q1, &q2).unwrap();
            assert!(r.blocks.iter().all(|b| b.order() <= 2 * db));
            assert_same_spectrum(&r, &two_projector_operator(&p1, &p2, &q0, &q1, &q2).unwrap());
        }
    }

    #[test]
    fn degenerate_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q: Vec<SymMatrix> = (0..3).map(|_| random_sym(&mut rng, 2)).collect();
        let p = random_projector(&mut rng, 4, 2);
        // Equal projectors: one-dimensional blocks only.
        let r = block_reduce(&p, &p, &q[0], &q[1], &q[2]).unwrap();
        assert!(r.blocks.iter().all(|b| b.order() == 2));
        assert_eq!(r.residual_dim, 2);
        assert_same_spectrum(&r, &two_projector_operator(&p, &p, &q[0], &q[1], &q[2]).unwrap());
        // Orthogonal projectors.
        let comp = SymMatrix::identity(4).sub(&p);
        let r = block_reduce(&p, &comp, &q[0], &q[1], &q[2]).unwrap();
        assert_eq!(r.residual_dim, 0);
        assert_same_spectrum(&r, &two_projector_operator(&p, &comp, &q[0], &q[1], &q[2]).unwrap());
    }

    #[test]
    fn qubit_pair_principal_cosine() {
        let (p1, p2) = (angle_projector(0.0), angle_projector(0.3));
        let z = SymMatrix::zeros(2);
        let one = SymMatrix::identity(2);
        let r = block_reduce(&p1, &p2, &z, &one, &one).unwrap();
        assert_eq!(r.principal_cosines.len(), 1);
        assert!((r.principal_cosines[0] - 0.3f64.cos()).abs() < 1e-12);
        // P1 + P2 has top eigenvalue 1 + cos θ.
        assert!((r.max_eigenvalue().unwrap() - (1.0 + 0.3f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_projectors() {
        let q = SymMatrix::identity(2);
        let bad = SymMatrix::diag(&[0.5, 1.0]);
        assert!(block_reduce(&bad, &q, &q, &q, &q).is_err());
        assert!(block_reduce(&q, &q, &q, &q, &SymMatrix::identity(3)).is_err());
    }
}
