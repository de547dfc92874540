//! Quantum channels: Kraus, superoperator and Choi representations.
//!
//! A channel on a `d`-dimensional system acts on `d × d` operators. Its
//! superoperator matrix `M` satisfies `M vec(X) = vec(Φ(X))` with
//! column-stacking, so a Kraus set `{B_k}` realizes `M = Σ conj(B_k) ⊗ B_k`.
//! The Choi matrix is `(Φ ⊗ id)(|Ω⟩⟨Ω|)` with `|Ω⟩ = Σ_i |i⟩|i⟩`, i.e.
//! `Choi[a·d + i, b·d + j] = Φ(|i⟩⟨j|)[a, b]`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ComplexMatrix, C64};

/// Default tolerance for the trace-preservation check `‖Σ B†B − I‖_F`.
pub const DEFAULT_TP_TOL: f64 = 1e-8;
/// Default tolerance on the smallest Choi eigenvalue.
pub const DEFAULT_CP_TOL: f64 = 1e-8;
/// Choi eigenvalues below this fraction of the trace are dropped when
/// extracting Kraus operators.
pub const KRAUS_EXTRACTION_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Origin {
    Kraus,
    Superop,
}

/// A completely positive trace-preserving map on `d × d` operators.
///
/// The superoperator matrix is always held; Kraus and Choi forms are
/// derived on first use and cached.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    dim: usize,
    superop: ComplexMatrix,
    kraus: OnceLock<Vec<ComplexMatrix>>,
    choi: OnceLock<ComplexMatrix>,
    origin: Origin,
}

impl QuantumChannel {
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::from_kraus_with_tol(kraus, DEFAULT_TP_TOL)
    }

    pub fn from_kraus_with_tol(kraus: Vec<ComplexMatrix>, tp_tol: f64) -> Result<Self> {
        let dim = common_square_dim(&kraus)?;
        let residual = kraus_tp_residual(&kraus);
        if residual > tp_tol {
            return Err(Error::TraceNotPreserved {
                residual,
                tolerance: tp_tol,
            });
        }
        let superop = ComplexMatrix::wrap(superop_from_kraus(&kraus));
        Ok(QuantumChannel {
            dim,
            superop,
            kraus: OnceLock::from(kraus),
            choi: OnceLock::new(),
            origin: Origin::Kraus,
        })
    }

    pub fn from_superop(superop: ComplexMatrix) -> Result<Self> {
        Self::from_superop_with_tol(superop, DEFAULT_TP_TOL, DEFAULT_CP_TOL)
    }

    /// Builds a channel from its superoperator matrix, checking trace
    /// preservation and complete positivity.
    pub fn from_superop_with_tol(superop: ComplexMatrix, tp_tol: f64, cp_tol: f64) -> Result<Self> {
        let dim = superop_dim(&superop)?;
        let residual = superop_tp_residual(&superop, dim);
        if residual > tp_tol {
            return Err(Error::TraceNotPreserved {
                residual,
                tolerance: tp_tol,
            });
        }
        let choi = choi_from_superop(&superop, dim);
        let min_eigenvalue = min_hermitian_eigenvalue(&choi);
        if min_eigenvalue < -cp_tol {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue,
                tolerance: cp_tol,
            });
        }
        Ok(QuantumChannel {
            dim,
            superop,
            kraus: OnceLock::new(),
            choi: OnceLock::from(ComplexMatrix::wrap(choi)),
            origin: Origin::Superop,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(vec![ComplexMatrix::identity(dim)]).expect("identity is a channel")
    }

    /// The unitary channel `X ↦ U X U†`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::from_kraus(vec![u])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }

    pub fn choi(&self) -> &ComplexMatrix {
        self.choi
            .get_or_init(|| ComplexMatrix::wrap(choi_from_superop(&self.superop, self.dim)))
    }

    /// A Kraus set; minimal (from the Choi eigendecomposition) unless the
    /// channel was built from Kraus operators.
    pub fn kraus(&self) -> &[ComplexMatrix] {
        self.kraus.get_or_init(|| kraus_from_choi(self.choi(), self.dim))
    }

    pub fn has_explicit_kraus(&self) -> bool {
        self.origin == Origin::Kraus
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let v = &*self.superop * linalg::vectorize(x);
        linalg::unvectorize(&v, self.dim, self.dim)
    }

    /// Adjoint map with respect to the Hilbert-Schmidt inner product.
    pub fn dual(&self) -> DualMap {
        DualMap {
            dim: self.dim,
            superop: self.superop.dagger(),
            kraus: self.kraus().iter().map(ComplexMatrix::dagger).collect(),
        }
    }
}

/// The Heisenberg-picture dual `Φ*` of a channel: unital and completely
/// positive, but not trace preserving in general.
#[derive(Clone, Debug)]
pub struct DualMap {
    pub dim: usize,
    pub superop: ComplexMatrix,
    /// Operators `B_k†`; the dual acts as `X ↦ Σ B_k† X B_k`.
    pub kraus: Vec<ComplexMatrix>,
}

impl DualMap {
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let v = &*self.superop * linalg::vectorize(x);
        linalg::unvectorize(&v, self.dim, self.dim)
    }

    /// `‖Φ*(I) − I‖_F`.
    pub fn unitality_residual(&self) -> f64 {
        let id = CMatrix::identity(self.dim, self.dim);
        (self.apply(&id) - id).norm()
    }
}

fn common_square_dim(ops: &[ComplexMatrix]) -> Result<usize> {
    let first = ops.first().ok_or(Error::EmptyOperatorList)?;
    if !first.is_square() {
        return Err(Error::NotSquare {
            rows: first.nrows(),
            cols: first.ncols(),
        });
    }
    let dim = first.nrows();
    for op in ops {
        if !op.is_square() {
            return Err(Error::NotSquare {
                rows: op.nrows(),
                cols: op.ncols(),
            });
        }
        if op.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.nrows(),
            });
        }
    }
    Ok(dim)
}

fn superop_dim(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::InvalidParameter(format!(
            "superoperator size {n} is not a perfect square"
        )));
    }
    Ok(d)
}

/// `‖Σ B_k† B_k − I‖_F`.
pub fn kraus_tp_residual(kraus: &[ComplexMatrix]) -> f64 {
    let d = kraus[0].nrows();
    let sum = kraus
        .iter()
        .fold(CMatrix::zeros(d, d), |acc, b| acc + b.adjoint() * &**b);
    (sum - CMatrix::identity(d, d)).norm()
}

/// `‖vec(I)† M − vec(I)†‖`, the trace-preservation residual of a
/// superoperator.
pub fn superop_tp_residual(m: &CMatrix, dim: usize) -> f64 {
    let vid = linalg::vectorize(&CMatrix::identity(dim, dim));
    (m.adjoint() * &vid - vid).norm()
}

pub fn superop_from_kraus(kraus: &[ComplexMatrix]) -> CMatrix {
    let d = kraus[0].nrows();
    kraus.iter().fold(CMatrix::zeros(d * d, d * d), |acc, b| {
        acc + linalg::kron(&b.map(|z| z.conj()), b)
    })
}

/// Reshuffles a superoperator matrix into the Choi matrix.
pub fn choi_from_superop(m: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (a, i) = (r / d, r % d);
        let (b, j) = (c / d, c % d);
        m[(a + b * d, i + j * d)]
    })
}

/// Inverse reshuffle of [`choi_from_superop`].
pub fn superop_from_choi(choi: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (a, b) = (r % d, r / d);
        let (i, j) = (c % d, c / d);
        choi[(a * d + i, b * d + j)]
    })
}

pub fn to_superop(channel: &QuantumChannel) -> &ComplexMatrix {
    channel.superop()
}

pub fn to_choi(channel: &QuantumChannel) -> &ComplexMatrix {
    channel.choi()
}

fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    let (vals, _) = linalg::hermitian_eig(m);
    vals.first().copied().unwrap_or(0.0)
}

/// True iff the Hermitian part of `choi` has no eigenvalue below `-tol`.
pub fn choi_is_cp(choi: &CMatrix, tol: f64) -> bool {
    min_hermitian_eigenvalue(choi) >= -tol
}

/// Minimal Kraus set from the Choi eigendecomposition.
pub fn kraus_from_choi(choi: &CMatrix, d: usize) -> Vec<ComplexMatrix> {
    let (vals, vecs) = linalg::hermitian_eig(choi);
    let trace: f64 = vals.iter().sum();
    let cutoff = KRAUS_EXTRACTION_CUTOFF * trace.abs().max(f64::MIN_POSITIVE);
    let mut kraus: Vec<ComplexMatrix> = vals
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &v)| v > cutoff)
        .map(|(k, &v)| {
            let scale = C64::new(v.sqrt(), 0.0);
            let col = vecs.column(k);
            ComplexMatrix::wrap(CMatrix::from_fn(d, d, |a, i| col[a * d + i] * scale))
        })
        .collect();
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(d, d));
    }
    kraus
}

/// `a ∘ b`: apply `b` first, then `a`.
pub fn compose(a: &QuantumChannel, b: &QuantumChannel) -> Result<QuantumChannel> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    if a.has_explicit_kraus() && b.has_explicit_kraus() {
        let kraus = a
            .kraus()
            .iter()
            .flat_map(|x| b.kraus().iter().map(move |y| ComplexMatrix::wrap(&**x * &**y)))
            .collect();
        return QuantumChannel::from_kraus_with_tol(kraus, 1e-7);
    }
    let m = ComplexMatrix::wrap(&**a.superop() * &**b.superop());
    QuantumChannel::from_superop_with_tol(m, 1e-7, 1e-7)
}

/// `n`-fold composition, by repeated squaring of the superoperator.
pub fn power(channel: &QuantumChannel, n: u32) -> QuantumChannel {
    let d = channel.dim;
    if n == 0 {
        return QuantumChannel::identity(d);
    }
    if n == 1 {
        return channel.clone();
    }
    let mut result = CMatrix::identity(d * d, d * d);
    let mut base = channel.superop().as_matrix().clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    QuantumChannel {
        dim: d,
        superop: ComplexMatrix::wrap(result),
        kraus: OnceLock::new(),
        choi: OnceLock::new(),
        origin: Origin::Superop,
    }
}

/// A channel is unitary iff its whole spectrum lies on the unit circle.
pub fn is_unitary_channel(channel: &QuantumChannel, tol: f64) -> Result<bool> {
    let eigs = linalg::eigenvalues(channel.superop())?;
    Ok(eigs.iter().all(|z| z.norm() >= 1.0 - tol))
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kraus: Option<Vec<ComplexMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    superop: Option<ComplexMatrix>,
}

impl Serialize for QuantumChannel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self.origin {
            Origin::Kraus => ChannelRepr {
                dim: self.dim,
                kraus: Some(self.kraus().to_vec()),
                superop: None,
            },
            Origin::Superop => ChannelRepr {
                dim: self.dim,
                kraus: None,
                superop: Some(self.superop.clone()),
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumChannel {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ChannelRepr::deserialize(de)?;
        let channel = match (repr.kraus, repr.superop) {
            (Some(kraus), superop) => {
                let ch = QuantumChannel::from_kraus(kraus).map_err(D::Error::custom)?;
                if let Some(m) = superop {
                    if (&*m - &**ch.superop()).norm() > 1e-10 {
                        return Err(D::Error::custom("kraus and superop representations disagree"));
                    }
                }
                ch
            }
            (None, Some(m)) => QuantumChannel::from_superop(m).map_err(D::Error::custom)?,
            (None, None) => return Err(D::Error::custom("channel needs \"kraus\" or \"superop\"")),
        };
        if channel.dim != repr.dim {
            return Err(D::Error::custom(format!(
                "declared dim {} but operators are {}x{}",
                repr.dim, channel.dim, channel.dim
            )));
        }
        Ok(channel)
    }
}
