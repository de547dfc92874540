//! GKLS generators `L(X) = -i[H, X] + Σ_k (A_k X A_k† − ½{A_k†A_k, X})`
//! and their superoperator matrices.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ComplexMatrix, C64};
use crate::spectra::{self, SpectralTolerances};
use crate::superop::QuantumChannel;

/// Hermiticity residual above which the Hamiltonian is rejected.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Residuals below this are treated as exact; between this and
/// [`HERMITIAN_TOL`] the Hamiltonian is symmetrized with a warning.
pub const HERMITIAN_SILENT_TOL: f64 = 1e-12;
/// Validation tolerance applied to `e^{tL}`.
pub const EXPONENTIAL_TOL: f64 = 1e-7;

/// A GKLS generator given by a Hamiltonian and a list of noise operators.
#[derive(Clone, Debug)]
pub struct GklsGenerator {
    dim: usize,
    hamiltonian: ComplexMatrix,
    noise_ops: Vec<ComplexMatrix>,
    superop: OnceLock<ComplexMatrix>,
}

impl GklsGenerator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn noise_ops(&self) -> &[ComplexMatrix] {
        &self.noise_ops
    }

    /// The `d² × d²` matrix of `L` under column-stacking vectorization.
    pub fn superop(&self) -> &ComplexMatrix {
        self.superop
            .get_or_init(|| ComplexMatrix::wrap(gkls_superop(&self.hamiltonian, &self.noise_ops)))
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let v = &**self.superop() * linalg::vectorize(x);
        linalg::unvectorize(&v, self.dim, self.dim)
    }

    /// Direct operator-form evaluation of `L(X)`, independent of the
    /// superoperator matrix.
    pub fn apply_operator_form(&self, x: &CMatrix) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let h = &*self.hamiltonian;
        let mut out = (h * x - x * h) * (-i);
        for a in &self.noise_ops {
            let a = &**a;
            let ada = a.adjoint() * a;
            out += a * x * a.adjoint() - (&ada * x + x * &ada) * C64::new(0.5, 0.0);
        }
        out
    }

    /// `‖L*(I)‖_F`; zero for every generator of a trace-preserving semigroup.
    pub fn trace_preservation_residual(&self) -> f64 {
        let vid = linalg::vectorize(&CMatrix::identity(self.dim, self.dim));
        (self.superop().adjoint() * vid).norm()
    }

    /// `‖L(I)‖_F`; zero for unital generators.
    pub fn unitality_residual(&self) -> f64 {
        self.apply(&CMatrix::identity(self.dim, self.dim)).norm()
    }

    /// The operator set `{H, A_k, A_k†}`, whose commutant lies inside
    /// `Ker(L*)`.
    pub fn operator_set(&self) -> Vec<ComplexMatrix> {
        let mut ops = vec![self.hamiltonian.clone()];
        for a in &self.noise_ops {
            ops.push(a.clone());
            ops.push(a.dagger());
        }
        ops
    }
}

/// Superoperator matrix
/// `−i(I⊗H − Hᵀ⊗I) + Σ_k [conj(A_k)⊗A_k − ½(I⊗A_k†A_k + (A_k†A_k)ᵀ⊗I)]`.
pub fn gkls_superop(h: &CMatrix, noise_ops: &[ComplexMatrix]) -> CMatrix {
    let d = h.nrows();
    let id = CMatrix::identity(d, d);
    let i = C64::new(0.0, 1.0);
    let half = C64::new(0.5, 0.0);
    let mut l = (linalg::kron(&id, h) - linalg::kron(&h.transpose(), &id)) * (-i);
    for a in noise_ops {
        let a = &**a;
        let ada = a.adjoint() * a;
        l += linalg::kron(&a.map(|z| z.conj()), a);
        l -= (linalg::kron(&id, &ada) + linalg::kron(&ada.transpose(), &id)) * half;
    }
    l
}

/// Builds a generator, validating dimensions and hermiticity of `H`.
pub fn build_generator(hamiltonian: ComplexMatrix, noise_ops: Vec<ComplexMatrix>) -> Result<GklsGenerator> {
    if !hamiltonian.is_square() {
        return Err(Error::NotSquare {
            rows: hamiltonian.nrows(),
            cols: hamiltonian.ncols(),
        });
    }
    let dim = hamiltonian.nrows();
    for a in &noise_ops {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if a.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.nrows(),
            });
        }
    }
    let residual = linalg::hermiticity_residual(&hamiltonian);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            residual,
            tolerance: HERMITIAN_TOL,
        });
    }
    let hamiltonian = if residual > HERMITIAN_SILENT_TOL {
        log::warn!("symmetrizing Hamiltonian with hermiticity residual {residual:.3e}");
        ComplexMatrix::wrap(linalg::hermitian_part(&hamiltonian))
    } else {
        hamiltonian
    };
    if noise_ops.len() + 1 > dim * dim {
        log::debug!(
            "{} noise operators exceed d²−1 = {}; the representation is redundant",
            noise_ops.len(),
            dim * dim - 1
        );
    }
    Ok(GklsGenerator {
        dim,
        hamiltonian,
        noise_ops,
        superop: OnceLock::new(),
    })
}

/// Spectral test: every eigenvalue of `L` has `|Re λ| ≤ tol`.
pub fn is_hamiltonian(generator: &GklsGenerator, tol: f64) -> Result<bool> {
    let eigs = linalg::eigenvalues(generator.superop())?;
    Ok(eigs.iter().all(|z| z.re.abs() <= tol))
}

/// The Markovian channel `e^{tL}`.
pub fn exponentiate(generator: &GklsGenerator, t: f64) -> Result<QuantumChannel> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time {t} must be nonnegative")));
    }
    let scaled = &**generator.superop() * C64::new(t, 0.0);
    let m = ComplexMatrix::new(linalg::expm(&scaled)?)?;
    QuantumChannel::from_superop_with_tol(m, EXPONENTIAL_TOL, EXPONENTIAL_TOL)
}

/// A relaxation rate `Γ = −Re λ` together with the algebraic multiplicity
/// of its eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationRate {
    pub eigenvalue: C64,
    pub rate: f64,
    pub multiplicity: usize,
}

/// One rate per distinct eigenvalue of `L`.
pub fn relaxation_rates(generator: &GklsGenerator, tols: &SpectralTolerances) -> Result<Vec<RelaxationRate>> {
    let summary = spectra::summarize_generator(generator, tols)?;
    Ok(summary
        .distinct
        .iter()
        .map(|e| RelaxationRate {
            eigenvalue: e.value,
            rate: -e.value.re,
            multiplicity: e.multiplicity,
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct GeneratorRepr {
    dim: usize,
    hamiltonian: ComplexMatrix,
    #[serde(default)]
    noise_ops: Vec<ComplexMatrix>,
}

impl Serialize for GklsGenerator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GeneratorRepr {
            dim: self.dim,
            hamiltonian: self.hamiltonian.clone(),
            noise_ops: self.noise_ops.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GklsGenerator {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = GeneratorRepr::deserialize(de)?;
        let generator = build_generator(repr.hamiltonian, repr.noise_ops).map_err(D::Error::custom)?;
        if generator.dim != repr.dim {
            return Err(D::Error::custom(format!(
                "declared dim {} but the Hamiltonian is {}x{}",
                repr.dim, generator.dim, generator.dim
            )));
        }
        Ok(generator)
    }
}
