//! Commutants of finite operator sets, the commutant dimension of a single
//! operator from its Jordan data, and numerical Weyr characteristics.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{SubspaceBasis, SubspaceLabel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ComplexMatrix, C64};
use crate::spectra;

/// Relative singular-value cutoff for the stacked commutation map.
pub const DEFAULT_COMMUTANT_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanGroup {
    pub value: C64,
    /// Block sizes `d_{j,k}`, descending.
    pub block_sizes: Vec<usize>,
}

impl JordanGroup {
    pub fn multiplicity(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Weyr characteristic `s_i = |{j : d_j ≥ i}|` for `i = 1, 2, …`.
    pub fn weyr(&self) -> Vec<usize> {
        let largest = self.block_sizes.iter().copied().max().unwrap_or(0);
        (1..=largest)
            .map(|i| self.block_sizes.iter().filter(|&&b| b >= i).count())
            .collect()
    }
}

/// Jordan structure: one group of blocks per distinct eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanProfile {
    pub eigenvalues: Vec<JordanGroup>,
}

impl JordanProfile {
    pub fn dim(&self) -> usize {
        self.eigenvalues.iter().map(JordanGroup::multiplicity).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.eigenvalues.is_empty() {
            return Err(Error::InvalidParameter("empty Jordan profile".into()));
        }
        for g in &self.eigenvalues {
            if g.block_sizes.is_empty() || g.block_sizes.contains(&0) {
                return Err(Error::InvalidParameter(format!(
                    "invalid block sizes {:?} at {}",
                    g.block_sizes, g.value
                )));
            }
        }
        Ok(())
    }

    /// Whether the profile describes a multiple of the identity.
    pub fn is_scalar(&self) -> bool {
        self.eigenvalues.len() == 1 && self.eigenvalues[0].block_sizes.iter().all(|&b| b == 1)
    }

    fn normalized(mut self) -> Self {
        for g in &mut self.eigenvalues {
            g.block_sizes.sort_unstable_by(|a, b| b.cmp(a));
        }
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutantResult {
    pub dimension: usize,
    pub basis: Option<SubspaceBasis>,
    /// Absolute singular-value cutoff actually applied.
    pub tolerance: f64,
}

impl CommutantResult {
    /// Largest distance from the commutant of a product of two basis
    /// elements, over all ordered pairs.
    pub fn product_closure_residual(&self) -> f64 {
        let Some(basis) = &self.basis else {
            return 0.0;
        };
        let ops = basis.operators();
        let mut worst: f64 = 0.0;
        for a in &ops {
            for b in &ops {
                let p = &**a * &**b;
                let scale = p.norm().max(1.0);
                worst = worst.max(basis.distance(&linalg::vectorize(&p)) / scale);
            }
        }
        worst
    }
}

fn check_ops(ops: &[ComplexMatrix]) -> Result<usize> {
    let first = ops.first().ok_or(Error::EmptyOperatorList)?;
    if !first.is_square() {
        return Err(Error::NotSquare {
            rows: first.nrows(),
            cols: first.ncols(),
        });
    }
    let d = first.nrows();
    for op in ops {
        if !op.is_square() {
            return Err(Error::NotSquare {
                rows: op.nrows(),
                cols: op.ncols(),
            });
        }
        if op.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: op.nrows(),
            });
        }
    }
    Ok(d)
}

/// The stacked commutation map with blocks `I ⊗ A_k − A_kᵀ ⊗ I`.
pub fn commutation_map(ops: &[ComplexMatrix]) -> Result<CMatrix> {
    let d = check_ops(ops)?;
    let id = CMatrix::identity(d, d);
    let n = d * d;
    let mut stacked = CMatrix::zeros(n * ops.len(), n);
    for (k, a) in ops.iter().enumerate() {
        let block = linalg::kron(&id, a) - linalg::kron(&a.transpose(), &id);
        stacked.rows_mut(k * n, n).copy_from(&block);
    }
    Ok(stacked)
}

/// `S′ = {B : A_k B = B A_k for all k}`, with an orthonormal basis.
///
/// `tol` is relative to the largest singular value of the commutation map;
/// `0` selects [`DEFAULT_COMMUTANT_TOL`]. A set of scalar operators has the
/// full space as commutant.
pub fn commutant(ops: &[ComplexMatrix], tol: f64) -> Result<CommutantResult> {
    let d = check_ops(ops)?;
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!("commutant tolerance {tol}")));
    }
    let tol = if tol == 0.0 { DEFAULT_COMMUTANT_TOL } else { tol };
    let stacked = commutation_map(ops)?;
    let smax = linalg::singular_values(&stacked).into_iter().fold(0.0, f64::max);
    // A set of scalars has a numerically zero map, so the reference scale
    // also includes the operator norms.
    let scale = ops.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let cutoff = tol * smax.max(scale);
    let basis = linalg::nullspace_abs(&stacked, cutoff);
    Ok(CommutantResult {
        dimension: basis.len(),
        basis: Some(SubspaceBasis::new(SubspaceLabel::Commutant, d, basis, cutoff)),
        tolerance: cutoff,
    })
}

/// `c_A = Σ_k Σ_i s_{i,k}²`.
pub fn commutant_dim_from_jordan(profile: &JordanProfile) -> usize {
    profile.eigenvalues.iter().flat_map(|g| g.weyr()).map(|s| s * s).sum()
}

/// Upper bound `d² − 2d + 2` on the commutant dimension of a non-scalar
/// operator.
pub fn nonscalar_commutant_bound(d: usize) -> usize {
    d * d + 2 - 2 * d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeyrTolerances {
    /// Eigenvalue clustering distance relative to `max(1, spectral radius)`.
    pub cluster: f64,
    /// Required ratio of cluster separation to clustering distance.
    pub separation_factor: f64,
    /// Rank cutoff relative to `σ_max(A − λI)`.
    pub rank: f64,
}

impl Default for WeyrTolerances {
    fn default() -> Self {
        WeyrTolerances {
            cluster: 5e-3,
            separation_factor: 100.0,
            rank: 1e-8,
        }
    }
}

/// Numerical Jordan structure from the rank sequence of `(A − λI)^i`.
///
/// The kernels of successive powers are built one step at a time:
/// `ker (A−λ)^i` is the kernel of `(I − QQ†)(A − λ)` where `Q` is an
/// orthonormal basis of `ker (A−λ)^{i−1}`. Refuses inputs whose eigenvalue
/// clusters are not separated by `separation_factor` clustering distances.
pub fn weyr_profile(a: &ComplexMatrix, tols: &WeyrTolerances) -> Result<JordanProfile> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let d = a.nrows();
    let eigs = linalg::eigenvalues(a)?;
    let radius = linalg::spectral_radius(&eigs);
    let cluster_abs = tols.cluster * radius.max(1.0);
    let clusters = spectra::cluster(&eigs, cluster_abs);
    let required = tols.separation_factor * cluster_abs;
    for (i, x) in clusters.iter().enumerate() {
        for y in &clusters[i + 1..] {
            let separation = (x.center - y.center).norm();
            if separation < required {
                return Err(Error::IllSeparatedClusters { separation, required });
            }
        }
    }

    let mut groups = Vec::with_capacity(clusters.len());
    for c in clusters {
        let b = &**a - CMatrix::identity(d, d) * c.center;
        let smax = linalg::singular_values(&b).into_iter().fold(0.0, f64::max);
        let cutoff = tols.rank * smax.max(1.0);
        let mut weyr = Vec::new();
        let mut kernel: Vec<linalg::CVector> = Vec::new();
        loop {
            let m = if kernel.is_empty() {
                b.clone()
            } else {
                let q = CMatrix::from_columns(&kernel);
                (CMatrix::identity(d, d) - &q * q.adjoint()) * &b
            };
            let next = linalg::nullspace_abs(&m, cutoff);
            if next.len() <= kernel.len() {
                break;
            }
            let step = next.len() - kernel.len();
            if weyr.last().is_some_and(|&prev| step > prev) || next.len() > c.multiplicity {
                return Err(Error::InconsistentWeyr {
                    value: c.center,
                    expected: c.multiplicity,
                    found: next.len(),
                });
            }
            weyr.push(step);
            kernel = next;
            if kernel.len() == c.multiplicity {
                break;
            }
        }
        if kernel.len() != c.multiplicity {
            return Err(Error::InconsistentWeyr {
                value: c.center,
                expected: c.multiplicity,
                found: kernel.len(),
            });
        }
        groups.push(JordanGroup {
            value: c.center,
            block_sizes: blocks_from_weyr(&weyr),
        });
    }
    Ok(JordanProfile { eigenvalues: groups }.normalized())
}

/// Block sizes (descending) from a non-increasing Weyr characteristic.
pub fn blocks_from_weyr(weyr: &[usize]) -> Vec<usize> {
    let mut blocks = Vec::new();
    for (i, &s) in weyr.iter().enumerate() {
        let next = weyr.get(i + 1).copied().unwrap_or(0);
        blocks.extend(std::iter::repeat_n(i + 1, s - next));
    }
    blocks.sort_unstable_by(|a, b| b.cmp(a));
    blocks
}

/// Matrix in Jordan normal form for `profile`.
pub fn jordan_matrix(profile: &JordanProfile) -> CMatrix {
    let d = profile.dim();
    let mut j = CMatrix::zeros(d, d);
    let mut at = 0;
    for g in &profile.eigenvalues {
        for &size in &g.block_sizes {
            for i in 0..size {
                j[(at + i, at + i)] = g.value;
                if i + 1 < size {
                    j[(at + i, at + i + 1)] = C64::new(1.0, 0.0);
                }
            }
            at += size;
        }
    }
    j
}
