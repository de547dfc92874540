//! Fixed-point spaces, kernels, attractor subspaces, spectral projections,
//! the faithful reduction of a channel, and steady-state extraction.

use serde::{Deserialize, Serialize};

use crate::commutant;
use crate::error::{Error, Result};
use crate::gkls::GklsGenerator;
use crate::linalg::{self, CMatrix, CVector, ComplexMatrix, C64};
use crate::spectra::{self, SpectralSummary, SpectralTolerances};
use crate::subject::Subject;
use crate::superop::QuantumChannel;

/// Relative support threshold for the reference state `𝒫(I)/d`.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-9;
/// Absolute tolerance on `‖(I − VV†) B V‖` in the faithful reduction.
pub const DEFAULT_LEAKAGE_TOL: f64 = 1e-8;
/// Smallest admissible singular value of the left/right overlap matrix.
pub const BIORTHOGONAL_MIN: f64 = 1e-8;
/// Cesàro averaging length used as an independent projection oracle.
pub const DEFAULT_CESARO_LENGTH: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTolerances {
    pub spectral: SpectralTolerances,
    pub support: f64,
    pub leakage: f64,
}

impl Default for AsymptoticTolerances {
    fn default() -> Self {
        AsymptoticTolerances {
            spectral: SpectralTolerances::default(),
            support: DEFAULT_SUPPORT_TOL,
            leakage: DEFAULT_LEAKAGE_TOL,
        }
    }
}

impl From<SpectralTolerances> for AsymptoticTolerances {
    fn from(spectral: SpectralTolerances) -> Self {
        AsymptoticTolerances {
            spectral,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceLabel {
    Fix,
    Ker,
    Attractor,
    Commutant,
    DualFix,
    DualKer,
}

/// An orthonormal basis of a subspace of vectorized `d × d` operators.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    pub label: SubspaceLabel,
    pub op_dim: usize,
    pub basis: Vec<CVector>,
    /// Singular-value cutoff used to decide the subspace.
    pub tolerance: f64,
}

impl SubspaceBasis {
    pub fn new(label: SubspaceLabel, op_dim: usize, basis: Vec<CVector>, tolerance: f64) -> Self {
        SubspaceBasis {
            label,
            op_dim,
            basis,
            tolerance,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.op_dim * self.op_dim
    }

    pub fn operators(&self) -> Vec<ComplexMatrix> {
        self.basis
            .iter()
            .map(|v| ComplexMatrix::wrap(linalg::unvectorize(v, self.op_dim, self.op_dim)))
            .collect()
    }

    /// Distance from `v` to the subspace, `‖(I − QQ†) v‖`.
    pub fn distance(&self, v: &CVector) -> f64 {
        let mut r = v.clone();
        for q in &self.basis {
            let coeff = q.dotc(v);
            r -= q * coeff;
        }
        r.norm()
    }

    /// Largest distance of a basis vector of `other` from this subspace.
    pub fn containment_residual(&self, other: &SubspaceBasis) -> f64 {
        other.basis.iter().map(|v| self.distance(v)).fold(0.0, f64::max)
    }

    /// Largest deviation of `Q†Q` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dotc(b) - target).norm());
            }
        }
        worst
    }
}

#[derive(Serialize)]
struct SubspaceRepr {
    label: SubspaceLabel,
    ambient_dim: usize,
    dim: usize,
    tolerance: f64,
    operators: Vec<ComplexMatrix>,
}

impl Serialize for SubspaceBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceRepr {
            label: self.label,
            ambient_dim: self.ambient_dim(),
            dim: self.dim(),
            tolerance: self.tolerance,
            operators: self.operators(),
        }
        .serialize(s)
    }
}

fn shifted(m: &CMatrix, value: C64) -> CMatrix {
    let n = m.nrows();
    m - CMatrix::identity(n, n) * value
}

fn stationary_target(summary: &SpectralSummary) -> C64 {
    match summary.kind {
        spectra::SpectrumKind::Channel => C64::new(1.0, 0.0),
        spectra::SpectrumKind::Generator => C64::new(0.0, 0.0),
    }
}

fn stationary_space(
    m: &CMatrix,
    summary: &SpectralSummary,
    label: SubspaceLabel,
    op_dim: usize,
) -> Result<SubspaceBasis> {
    let cutoff = spectra::eigenspace_cutoff(summary);
    let target = stationary_target(summary);
    let basis = linalg::nullspace_abs(&shifted(m, target), cutoff);
    if basis.len() != summary.stationary {
        return Err(Error::ClusterMismatch {
            spectral: summary.stationary,
            nullspace: basis.len(),
        });
    }
    Ok(SubspaceBasis::new(label, op_dim, basis, cutoff))
}

/// `Fix(Φ)`, checked against the clustered multiplicity `ℓ0`.
pub fn fixed_space(channel: &QuantumChannel, tols: &SpectralTolerances) -> Result<SubspaceBasis> {
    let summary = spectra::summarize_channel(channel, tols)?;
    stationary_space(channel.superop(), &summary, SubspaceLabel::Fix, channel.dim())
}

/// `Ker(L)`, checked against the clustered multiplicity `m0`.
pub fn kernel(generator: &GklsGenerator, tols: &SpectralTolerances) -> Result<SubspaceBasis> {
    let summary = spectra::summarize_generator(generator, tols)?;
    stationary_space(generator.superop(), &summary, SubspaceLabel::Ker, generator.dim())
}

/// Dimension of `ker(M − target)` at the summary's eigenspace cutoff,
/// without cross-checking against the clustered multiplicity.
pub fn stationary_nullity(m: &CMatrix, summary: &SpectralSummary) -> usize {
    let target = stationary_target(summary);
    linalg::nullspace_abs(&shifted(m, target), spectra::eigenspace_cutoff(summary)).len()
}

/// Right eigenvectors of every peripheral cluster, one block per cluster.
fn peripheral_eigenvectors(m: &CMatrix, summary: &SpectralSummary) -> Result<Vec<CVector>> {
    let cutoff = spectra::eigenspace_cutoff(summary);
    let mut vectors = Vec::with_capacity(summary.peripheral);
    for e in summary.peripheral_eigenvalues() {
        let ns = linalg::nullspace_abs(&shifted(m, e.value), cutoff);
        if ns.len() != e.multiplicity {
            return Err(Error::PeripheralDefect {
                value: e.value,
                algebraic: e.multiplicity,
                geometric: ns.len(),
            });
        }
        vectors.extend(ns);
    }
    Ok(vectors)
}

/// `Attr(Φ)` or `Attr(L)`: the span of eigenvectors of peripheral
/// eigenvalues, orthonormalized.
pub fn attractor(subject: &Subject, tols: &SpectralTolerances) -> Result<SubspaceBasis> {
    let summary = summarize(subject, tols)?;
    attractor_from_summary(subject.superop(), &summary, subject.dim())
}

pub fn attractor_from_summary(m: &CMatrix, summary: &SpectralSummary, op_dim: usize) -> Result<SubspaceBasis> {
    let vectors = peripheral_eigenvectors(m, summary)?;
    let basis = linalg::orthonormal_span(&vectors, 1e-12);
    if basis.len() != summary.peripheral {
        return Err(Error::ClusterMismatch {
            spectral: summary.peripheral,
            nullspace: basis.len(),
        });
    }
    Ok(SubspaceBasis::new(
        SubspaceLabel::Attractor,
        op_dim,
        basis,
        spectra::eigenspace_cutoff(summary),
    ))
}

fn summarize(subject: &Subject, tols: &SpectralTolerances) -> Result<SpectralSummary> {
    match subject {
        Subject::Channel(c) => spectra::summarize_channel(c, tols),
        Subject::Generator(g) => spectra::summarize_generator(g, tols),
    }
}

/// Spectral projection onto the eigenspaces of `values` (each assumed
/// semisimple): `P = R (Y†R)⁻¹ Y†` with right eigenvectors `R` and left
/// eigenvectors `Y`.
pub fn spectral_projection(m: &CMatrix, values: &[(C64, usize)], cutoff: f64) -> Result<CMatrix> {
    let n = m.nrows();
    let mut right = Vec::new();
    let mut left = Vec::new();
    for &(value, multiplicity) in values {
        let r = linalg::nullspace_abs(&shifted(m, value), cutoff);
        let l = linalg::nullspace_abs(&shifted(&m.adjoint(), value.conj()), cutoff);
        if r.len() != multiplicity || l.len() != multiplicity {
            return Err(Error::PeripheralDefect {
                value,
                algebraic: multiplicity,
                geometric: r.len().min(l.len()),
            });
        }
        right.extend(r);
        left.extend(l);
    }
    if right.is_empty() {
        return Ok(CMatrix::zeros(n, n));
    }
    let r = CMatrix::from_columns(&right);
    let y = CMatrix::from_columns(&left);
    let overlap = y.adjoint() * &r;
    let min_singular = linalg::singular_values(&overlap)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min_singular < BIORTHOGONAL_MIN {
        return Err(Error::Biorthogonalization { min_singular });
    }
    let inv = overlap
        .try_inverse()
        .ok_or(Error::Biorthogonalization { min_singular })?;
    Ok(r * inv * y.adjoint())
}

/// The projection `𝒫_P` onto `Attr(Φ)` along the bulk eigenspaces.
pub fn peripheral_projection(channel: &QuantumChannel, tols: &SpectralTolerances) -> Result<ComplexMatrix> {
    let summary = spectra::summarize_channel(channel, tols)?;
    peripheral_projection_from_summary(channel.superop(), &summary).map(ComplexMatrix::wrap)
}

pub fn peripheral_projection_from_summary(m: &CMatrix, summary: &SpectralSummary) -> Result<CMatrix> {
    let values: Vec<(C64, usize)> = summary
        .peripheral_eigenvalues()
        .map(|e| (e.value, e.multiplicity))
        .collect();
    spectral_projection(m, &values, spectra::eigenspace_cutoff(summary))
}

/// The projection `𝒫` onto the stationary eigenspace (`Fix(Φ)` or
/// `Ker(L)`).
pub fn stationary_projection_from_summary(m: &CMatrix, summary: &SpectralSummary) -> Result<CMatrix> {
    let e = &summary.distinct[summary.stationary_index];
    spectral_projection(m, &[(e.value, e.multiplicity)], spectra::eigenspace_cutoff(summary))
}

pub fn fixed_projection(channel: &QuantumChannel, tols: &SpectralTolerances) -> Result<ComplexMatrix> {
    let summary = spectra::summarize_channel(channel, tols)?;
    stationary_projection_from_summary(channel.superop(), &summary).map(ComplexMatrix::wrap)
}

/// Cesàro mean `(1/N) Σ_{n<N} Mⁿ`, which converges to the projection onto
/// `Fix(Φ)`.
pub fn cesaro_mean(channel: &QuantumChannel, length: usize) -> CMatrix {
    let m = channel.superop();
    let n = m.nrows();
    let mut acc = CMatrix::zeros(n, n);
    let mut power = CMatrix::identity(n, n);
    for _ in 0..length {
        acc += &power;
        power = &power * &**m;
    }
    acc / C64::new(length as f64, 0.0)
}

/// First `n ≤ max_steps` at which `Φⁿ(ρ)` lies within `threshold` of the
/// attractor subspace.
pub fn attractor_convergence(
    channel: &QuantumChannel,
    rho: &CMatrix,
    attractor: &SubspaceBasis,
    threshold: f64,
    max_steps: usize,
) -> Option<usize> {
    let m = channel.superop();
    let mut v = linalg::vectorize(rho);
    for n in 0..=max_steps {
        if attractor.distance(&v) < threshold {
            return Some(n);
        }
        v = &**m * v;
    }
    None
}

/// A channel compressed to the support of its maximal-rank steady state.
#[derive(Clone, Debug)]
pub struct FaithfulReduction {
    pub support_dim: usize,
    /// `d × d₀` isometry whose columns span the support `H₀`.
    pub isometry: ComplexMatrix,
    pub reduced_channel: QuantumChannel,
    /// `𝒫(I)/d`, a steady state of maximal support.
    pub reference_state: ComplexMatrix,
    pub leakage: f64,
}

/// Restricts a channel to `H₀ = supp 𝒫(I)`, on which it is faithful.
pub fn faithful_reduce(channel: &QuantumChannel, tols: &AsymptoticTolerances) -> Result<FaithfulReduction> {
    let d = channel.dim();
    let summary = spectra::summarize_channel(channel, &tols.spectral)?;
    let projection = stationary_projection_from_summary(channel.superop(), &summary)?;
    let rho = reference_state(&projection, d);
    let (vals, vecs) = linalg::hermitian_eig(&rho);
    let top = vals.last().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::PositivityExtraction { min_eigenvalue: top });
    }
    let support: Vec<usize> = (0..d).filter(|&i| vals[i] > tols.support * top).collect();
    let v = CMatrix::from_columns(&support.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>());
    let complement = CMatrix::identity(d, d) - &v * v.adjoint();
    let mut leakage: f64 = 0.0;
    let mut reduced = Vec::with_capacity(channel.kraus().len());
    for b in channel.kraus() {
        let bv = &**b * &v;
        leakage = leakage.max((&complement * &bv).norm());
        reduced.push(ComplexMatrix::wrap(v.adjoint() * bv));
    }
    if leakage > tols.leakage {
        return Err(Error::SupportLeakage { residual: leakage });
    }
    let reduced_channel = QuantumChannel::from_kraus_with_tol(reduced, 1e-7)?;
    Ok(FaithfulReduction {
        support_dim: support.len(),
        isometry: ComplexMatrix::wrap(v),
        reduced_channel,
        reference_state: ComplexMatrix::wrap(rho),
        leakage,
    })
}

impl FaithfulReduction {
    /// The reference state compressed to `H₀`; invertible and fixed by the
    /// reduced channel when the reduction is valid.
    pub fn reduced_state(&self) -> CMatrix {
        let v = &*self.isometry;
        let r = v.adjoint() * &*self.reference_state * v;
        let tr = r.trace();
        r / tr
    }

    /// `(min eigenvalue, ‖φ₀₀(ρ₀) − ρ₀‖)` for the compressed reference state.
    pub fn faithfulness(&self) -> (f64, f64) {
        let r = self.reduced_state();
        let (vals, _) = linalg::hermitian_eig(&r);
        let residual = (self.reduced_channel.apply(&r) - &r).norm();
        (vals[0], residual)
    }
}

/// Hermitian, unit-trace `unvec(P vec(I))`.
fn reference_state(projection: &CMatrix, d: usize) -> CMatrix {
    let id = CMatrix::identity(d, d);
    let out = linalg::unvectorize(&(projection * linalg::vectorize(&id)), d, d);
    let out = linalg::hermitian_part(&out);
    let tr = out.trace().re;
    out / C64::new(tr, 0.0)
}

/// Density operators spanning `Fix(Φ)` or `Ker(L)`.
///
/// The first state is `𝒫(I)/Tr 𝒫(I)`, which has maximal support. Each
/// further state moves from it along a traceless Hermitian direction of the
/// stationary space until the boundary of the positive cone.
pub fn steady_states(subject: &Subject, tols: &SpectralTolerances) -> Result<Vec<ComplexMatrix>> {
    let d = subject.dim();
    let m = subject.superop();
    let summary = summarize(subject, tols)?;
    let label = match subject {
        Subject::Channel(_) => SubspaceLabel::Fix,
        Subject::Generator(_) => SubspaceLabel::Ker,
    };
    let space = stationary_space(m, &summary, label, d)?;
    let projection = stationary_projection_from_summary(m, &summary)?;
    let rho0 = reference_state(&projection, d);
    let (vals, vecs) = linalg::hermitian_eig(&rho0);
    if vals[0] < -1e-8 {
        return Err(Error::PositivityExtraction {
            min_eigenvalue: vals[0],
        });
    }
    let top = vals[d - 1];
    let support: Vec<CVector> = (0..d)
        .filter(|&i| vals[i] > DEFAULT_SUPPORT_TOL * top)
        .map(|i| vecs.column(i).into_owned())
        .collect();
    let v = CMatrix::from_columns(&support);
    let compressed = v.adjoint() * &rho0 * &v;
    let (cvals, cvecs) = linalg::hermitian_eig(&compressed);
    let inv_sqrt = &cvecs
        * CMatrix::from_diagonal(&CVector::from_iterator(
            cvals.len(),
            cvals.iter().map(|&x| C64::new(1.0 / x.sqrt(), 0.0)),
        ))
        * cvecs.adjoint();

    let directions = hermitian_directions(&space, &rho0);
    let mut states = vec![ComplexMatrix::wrap(rho0.clone())];
    for x in directions {
        let traceless = &x - &rho0 * x.trace();
        let norm = traceless.norm();
        if norm < 1e-12 {
            continue;
        }
        let traceless = traceless / C64::new(norm, 0.0);
        let y = &inv_sqrt * (v.adjoint() * &traceless * &v) * &inv_sqrt;
        let (yvals, _) = linalg::hermitian_eig(&y);
        let most_negative = -yvals[0];
        let step = if most_negative > 1e-14 {
            1.0 / most_negative
        } else {
            // Positive semidefinite traceless direction: numerically zero.
            continue;
        };
        let rho = linalg::hermitian_part(&(&rho0 + &traceless * C64::new(step, 0.0)));
        let tr = rho.trace();
        states.push(ComplexMatrix::wrap(rho / tr));
    }

    for s in &states {
        let residual = linalg::vectorize(s);
        let residual = (&**m * &residual
            - match subject {
                Subject::Channel(_) => residual.clone(),
                Subject::Generator(_) => CVector::zeros(d * d),
            })
        .norm();
        let (vals, _) = linalg::hermitian_eig(s);
        if residual > 1e-7 || vals[0] < -1e-8 {
            return Err(Error::PositivityExtraction {
                min_eigenvalue: vals[0],
            });
        }
    }
    Ok(states)
}

/// A real-linearly independent family of Hermitian elements of `space`
/// which together with `rho0` spans it over ℂ.
fn hermitian_directions(space: &SubspaceBasis, rho0: &CMatrix) -> Vec<CMatrix> {
    let i = C64::new(0.0, 1.0);
    let mut candidates = Vec::with_capacity(2 * space.dim());
    for x in space.operators() {
        let x = x.into_matrix();
        candidates.push(linalg::hermitian_part(&x));
        candidates.push((&x - x.adjoint()) * (-i * 0.5));
    }
    let real_vec = |h: &CMatrix| -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(2 * h.len(), h.iter().map(|z| z.re).chain(h.iter().map(|z| z.im)))
    };
    let mut accepted: Vec<nalgebra::DVector<f64>> = Vec::new();
    let push = |v: nalgebra::DVector<f64>, accepted: &mut Vec<nalgebra::DVector<f64>>| -> bool {
        let mut r = v.clone();
        for q in accepted.iter() {
            let c = q.dot(&r);
            r -= q * c;
        }
        let n = r.norm();
        if n > 1e-8 * v.norm().max(f64::MIN_POSITIVE) {
            accepted.push(r / n);
            true
        } else {
            false
        }
    };
    push(real_vec(rho0), &mut accepted);
    let mut out = Vec::new();
    for h in candidates {
        if out.len() + 1 >= space.dim() {
            break;
        }
        if push(real_vec(&h), &mut accepted) {
            out.push(h);
        }
    }
    out
}

/// Containment `B′ ⊆ Fix(Φ*)` for the operator system of a channel's
/// Kraus set (`{B_k, B_k†}`), with dimensions of both sides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualityCheck {
    pub commutant_dim: usize,
    pub dual_stationary_dim: usize,
    pub containment_residual: f64,
}

impl DualityCheck {
    pub fn dims_equal(&self) -> bool {
        self.commutant_dim == self.dual_stationary_dim
    }
}

fn dual_stationary_space(m: &CMatrix, summary: &SpectralSummary, label: SubspaceLabel, op_dim: usize) -> SubspaceBasis {
    let cutoff = spectra::eigenspace_cutoff(summary);
    let basis = linalg::nullspace_abs(&shifted(&m.adjoint(), stationary_target(summary)), cutoff);
    SubspaceBasis::new(label, op_dim, basis, cutoff)
}

/// `Fix(Φ*)`, the fixed space of the dual channel.
pub fn dual_fixed_space(channel: &QuantumChannel, tols: &SpectralTolerances) -> Result<SubspaceBasis> {
    let summary = spectra::summarize_channel(channel, tols)?;
    Ok(dual_stationary_space(
        channel.superop(),
        &summary,
        SubspaceLabel::DualFix,
        channel.dim(),
    ))
}

/// `Ker(L*)`.
pub fn dual_kernel(generator: &GklsGenerator, tols: &SpectralTolerances) -> Result<SubspaceBasis> {
    let summary = spectra::summarize_generator(generator, tols)?;
    Ok(dual_stationary_space(
        generator.superop(),
        &summary,
        SubspaceLabel::DualKer,
        generator.dim(),
    ))
}

pub fn channel_commutant_duality(channel: &QuantumChannel, tols: &SpectralTolerances) -> Result<DualityCheck> {
    let mut ops = Vec::new();
    for b in channel.kraus() {
        ops.push(b.clone());
        ops.push(b.dagger());
    }
    duality(&ops, dual_fixed_space(channel, tols)?)
}

pub fn generator_commutant_duality(generator: &GklsGenerator, tols: &SpectralTolerances) -> Result<DualityCheck> {
    duality(&generator.operator_set(), dual_kernel(generator, tols)?)
}

fn duality(ops: &[ComplexMatrix], dual: SubspaceBasis) -> Result<DualityCheck> {
    let comm = commutant::commutant(ops, commutant::DEFAULT_COMMUTANT_TOL)?;
    let basis = comm.basis.expect("commutant basis is always computed");
    Ok(DualityCheck {
        commutant_dim: comm.dimension,
        dual_stationary_dim: dual.dim(),
        containment_residual: dual.containment_residual(&basis),
    })
}
