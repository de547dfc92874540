//! Dense complex linear algebra: eigendecomposition, singular values,
//! numerical rank, nullspaces, Kronecker products and vectorization.
//!
//! Operator vectorization is column-stacking throughout the crate:
//! `vec(X)[i + j*rows] = X[i, j]`, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::ops::{Deref, Index};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Backward-error factor for [`eig`]: every returned pair satisfies
/// `‖A v − λ v‖ ≤ EIG_RESIDUAL_FACTOR · n · ε · ‖A‖_F`.
pub const EIG_RESIDUAL_FACTOR: f64 = 16.0;

const SCHUR_SWEEPS_PER_DIM: usize = 1000;

/// A dense, finite, complex matrix.
///
/// Serialized as `{"rows": r, "cols": c, "entries": [[re, im], ...]}` with
/// entries in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix(CMatrix);

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let entries = repr.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::from_row_major(repr.rows, repr.cols, entries)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: m.row_major_entries().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    /// Wraps a matrix, rejecting NaN or infinite entries.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(ComplexMatrix(m))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                found: entries.len(),
            });
        }
        Self::new(CMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(CMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(CMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        ComplexMatrix(CMatrix::from_diagonal(&CVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let diag: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&diag)
    }

    /// Wraps the result of arithmetic on already-validated matrices.
    pub(crate) fn wrap(m: CMatrix) -> Self {
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        ComplexMatrix(m)
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn is_square(&self) -> bool {
        self.0.is_square()
    }

    pub fn row_major_entries(&self) -> impl Iterator<Item = C64> + '_ {
        let (rows, cols) = self.0.shape();
        (0..rows).flat_map(move |i| (0..cols).map(move |j| self.0[(i, j)]))
    }

    pub fn dagger(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }
}

impl Deref for ComplexMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl From<ComplexMatrix> for CMatrix {
    fn from(m: ComplexMatrix) -> Self {
        m.0
    }
}

/// One eigenvalue together with a unit-norm right eigenvector.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: CVector,
}

/// Outcome of a numerical rank decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankDecision {
    /// Absolute singular-value cutoff actually applied.
    pub tolerance: f64,
    pub rank: usize,
}

fn require_square(a: &CMatrix) -> Result<usize> {
    if a.is_square() {
        Ok(a.nrows())
    } else {
        Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        })
    }
}

/// Complex Schur decomposition `A = Q T Q†` with `T` upper triangular.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = require_square(a)?;
    let iterations = SCHUR_SWEEPS_PER_DIM * n.max(1);
    if let Some(decomposition) = Schur::try_new(a.clone(), f64::EPSILON, iterations) {
        return Ok(decomposition.unpack());
    }
    // The shifted QR iteration can stall on highly structured input.
    // Retrying on a fixed unitary conjugate changes the Hessenberg form
    // without changing the spectrum.
    for attempt in 1..=3 {
        let w = householder_mix(n, attempt);
        let rotated = w.adjoint() * a * &w;
        if let Some(decomposition) = Schur::try_new(rotated, f64::EPSILON, iterations) {
            log::debug!("Schur iteration converged after conjugation {attempt}");
            let (q, t) = decomposition.unpack();
            return Ok((w * q, t));
        }
    }
    // Near-scalar input: remove the mean eigenvalue so that only the
    // perturbation remains, then restore it on the diagonal.
    let mu = a.trace() / C64::new(n as f64, 0.0);
    let centered = a - CMatrix::identity(n, n) * mu;
    if let Some(decomposition) = Schur::try_new(centered, f64::EPSILON, iterations) {
        let (q, mut t) = decomposition.unpack();
        for i in 0..n {
            t[(i, i)] += mu;
        }
        return Ok((q, t));
    }
    Err(Error::NoConvergence { iterations })
}

/// Householder reflector `I − 2vv†` for a fixed, dense unit vector `v`.
fn householder_mix(n: usize, attempt: usize) -> CMatrix {
    let v = CVector::from_fn(n, |i, _| {
        let t = (i + 1) as f64 * (attempt as f64 * 0.7548776662466927);
        C64::from_polar(1.0 + 0.5 * (t * 2.3).sin(), t)
    });
    let v = &v / C64::new(v.norm(), 0.0);
    CMatrix::identity(n, n) - &v * v.adjoint() * C64::new(2.0, 0.0)
}

/// Eigenvalues of a square matrix, with repetition.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let (_, t) = schur(a)?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Eigenvalues with unit right eigenvectors, one pair per eigenvalue
/// counted with algebraic multiplicity.
///
/// Eigenvectors are obtained by back substitution in the Schur factor.
/// For a defective eigenvalue the returned vectors are nearly parallel.
pub fn eig(a: &CMatrix) -> Result<Vec<EigenPair>> {
    let (q, t) = schur(a)?;
    let n = t.nrows();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = vec![C64::new(0.0, 0.0); k + 1];
        x[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * x[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            x[i] = -acc / denom;
            let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big > 1e150 {
                x.iter_mut().for_each(|z| *z /= big);
            }
        }
        let mut v = q.columns(0, k + 1) * CVector::from_vec(x);
        let norm = v.norm();
        v /= C64::new(norm, 0.0);
        pairs.push(EigenPair {
            value: lambda,
            vector: v,
        });
    }
    Ok(pairs)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    a.singular_values().iter().copied().collect()
}

/// Numerical rank with a relative tolerance.
///
/// The applied cutoff is `tol · σ_max`; `tol = 0` selects the default
/// `max(rows, cols) · ε · σ_max`.
pub fn numerical_rank(a: &CMatrix, tol: f64) -> Result<RankDecision> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("rank tolerance {tol}")));
    }
    let sv = singular_values(a);
    let cutoff = relative_cutoff(a, &sv, tol);
    Ok(RankDecision {
        tolerance: cutoff,
        rank: sv.iter().filter(|&&s| s > cutoff).count(),
    })
}

fn relative_cutoff(a: &CMatrix, sv: &[f64], tol: f64) -> f64 {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if tol == 0.0 {
        a.nrows().max(a.ncols()) as f64 * f64::EPSILON * smax
    } else {
        tol * smax
    }
}

/// Orthonormal basis of the numerical nullspace, relative tolerance as in
/// [`numerical_rank`].
pub fn nullspace(a: &CMatrix, tol: f64) -> Result<Vec<CVector>> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("nullspace tolerance {tol}")));
    }
    let (sv, vt) = full_right_svd(a);
    let cutoff = relative_cutoff(a, &sv, tol);
    Ok(select_null_rows(&sv, &vt, cutoff))
}

/// Orthonormal basis of the nullspace with an absolute singular-value cutoff.
pub fn nullspace_abs(a: &CMatrix, cutoff: f64) -> Vec<CVector> {
    let (sv, vt) = full_right_svd(a);
    select_null_rows(&sv, &vt, cutoff)
}

fn select_null_rows(sv: &[f64], vt: &CMatrix, cutoff: f64) -> Vec<CVector> {
    (0..vt.nrows())
        .filter(|&i| sv[i] <= cutoff)
        .map(|i| vt.row(i).adjoint())
        .collect()
}

/// Singular values (padded with zeros to `cols`) and a full `cols × cols`
/// conjugate-transposed right singular basis.
fn full_right_svd(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (rows, cols) = a.shape();
    let reduced = if rows > 2 * cols {
        // Same right singular structure, much smaller SVD.
        a.clone().qr().r()
    } else {
        a.clone()
    };
    let square = if reduced.nrows() < cols {
        let mut padded = CMatrix::zeros(cols, cols);
        padded.rows_mut(0, reduced.nrows()).copy_from(&reduced);
        padded
    } else {
        reduced
    };
    let svd = square.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().copied().collect(), vt)
}

/// Orthonormal basis for the span of `vectors`, dropping directions whose
/// singular value falls below `rel_tol · σ_max`.
pub fn orthonormal_span(vectors: &[CVector], rel_tol: f64) -> Vec<CVector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = CMatrix::from_columns(vectors);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax)
        .map(|i| u.column(i).into_owned())
        .collect()
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vectorize(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vectorize`] for a `rows × cols` operator.
pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `a`.
pub fn hermitian_eig(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(a);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    require_square(a)?;
    let e = a.exp();
    if e.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(e)
    } else {
        Err(Error::NonFinite)
    }
}

pub fn spectral_radius(eigs: &[C64]) -> f64 {
    eigs.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm of the Hermitian-antisymmetric part, `‖A − A†‖_F`.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ginibre(rng: &mut ChaCha8Rng, r: usize, c_: usize) -> CMatrix {
        CMatrix::from_fn(r, c_, |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let ev = eigenvalues(&CMatrix::identity(3, 3)).unwrap();
        assert_eq!(ev.len(), 3);
        assert!(ev.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-14));

        let d = ComplexMatrix::from_real_diagonal(&[2.0, 5.0]);
        let mut ev: Vec<f64> = eigenvalues(&d).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_square() {
        let a = CMatrix::zeros(2, 3);
        assert!(matches!(eig(&a), Err(Error::NotSquare { rows: 2, cols: 3 })));
    }

    #[test]
    fn eig_residuals_within_documented_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 9, 16] {
            let a = ginibre(&mut rng, n, n);
            let pairs = eig(&a).unwrap();
            assert_eq!(pairs.len(), n);
            let bound = EIG_RESIDUAL_FACTOR * n as f64 * f64::EPSILON * a.norm();
            for p in &pairs {
                let r = (&a * &p.vector - &p.vector * p.value).norm();
                assert!(r <= bound, "n={n} residual {r:e} > {bound:e}");
                assert!((p.vector.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eig_defective_matrix_has_small_residual() {
        let mut j = CMatrix::zeros(3, 3);
        j[(0, 1)] = c(1.0, 0.0);
        j[(1, 2)] = c(1.0, 0.0);
        for p in eig(&j).unwrap() {
            assert!((&j * &p.vector - &p.vector * p.value).norm() < 1e-10);
        }
    }

    #[test]
    fn rank_examples() {
        let z = CMatrix::zeros(4, 4);
        assert_eq!(numerical_rank(&z, 0.0).unwrap().rank, 0);
        assert_eq!(numerical_rank(&CMatrix::identity(4, 4), 0.0).unwrap().rank, 4);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = ginibre(&mut rng, 5, 1);
        let v = ginibre(&mut rng, 4, 1);
        let outer = &u * v.adjoint();
        assert_eq!(numerical_rank(&outer, 0.0).unwrap().rank, 1);
        assert!(numerical_rank(&outer, -1.0).is_err());
    }

    #[test]
    fn nullspace_examples() {
        assert!(nullspace(&CMatrix::identity(3, 3), 0.0).unwrap().is_empty());

        let d = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]);
        let ns = nullspace(&d, 0.0).unwrap();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(v[0].norm() < 1e-14);
        }

        // Commutation map X -> AX - XA for A = diag(1, 1, 2).
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 2.0]);
        let id = CMatrix::identity(3, 3);
        let comm = kron(&id, &a) - kron(&a.transpose(), &id);
        assert_eq!(nullspace(&comm, 0.0).unwrap().len(), 5);
    }

    #[test]
    fn nullspace_of_wide_and_tall_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let wide = ginibre(&mut rng, 2, 6);
        let ns = nullspace(&wide, 0.0).unwrap();
        assert_eq!(ns.len(), 4);
        for v in &ns {
            assert!((&wide * v).norm() < 1e-12 * wide.norm());
        }
        let tall = CMatrix::from_fn(20, 3, |i, j| if j == 2 { c(0.0, 0.0) } else { c((i + j) as f64, 1.0) });
        assert_eq!(nullspace(&tall, 0.0).unwrap().len(), 1);
    }

    #[test]
    fn kron_examples() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
        let (a, b) = (c(2.0, 1.0), c(-3.0, 0.5));
        let k = kron(&ComplexMatrix::from_diagonal(&[a, b]), &i2);
        assert_eq!(k, CMatrix::from_diagonal(&CVector::from_vec(vec![a, a, b, b])));
    }

    #[test]
    fn kron_matches_elementwise_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let x = ginibre(&mut rng, 3, 3);
            let y = ginibre(&mut rng, 3, 3);
            let k = kron(&x, &y);
            for i in 0..3 {
                for j in 0..3 {
                    for p in 0..3 {
                        for q in 0..3 {
                            assert_eq!(k[(i * 3 + p, j * 3 + q)], x[(i, j)] * y[(p, q)]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn vectorization_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (a, x, b) = (
            ginibre(&mut rng, 3, 3),
            ginibre(&mut rng, 3, 3),
            ginibre(&mut rng, 3, 3),
        );
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12 * a.norm() * x.norm() * b.norm());
        assert_eq!(unvectorize(&vectorize(&x), 3, 3), x);
    }

    #[test]
    fn json_encoding_is_row_major() {
        let m = ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(2.0, -1.0), c(3.0, 0.0), c(4.0, 0.5)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"rows":2,"cols":2,"entries":[[1.0,0.0],[2.0,-1.0],[3.0,0.0],[4.0,0.5]]}"#
        );
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_bad_shapes() {
        let bad = r#"{"rows":2,"cols":2,"entries":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
        assert!(ComplexMatrix::new(CMatrix::from_element(1, 1, c(f64::NAN, 0.0))).is_err());
    }

    #[test]
    fn hermitian_eig_sorted() {
        let h = ComplexMatrix::from_real_diagonal(&[3.0, -1.0, 2.0]);
        let (vals, vecs) = hermitian_eig(&h);
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        assert!((vecs.adjoint() * &vecs - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn expm_of_diagonal() {
        let a = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(-1.0, 0.0)]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - c(0.0, 1.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - (-1.0f64).exp()).norm() < 1e-14);
    }
}
