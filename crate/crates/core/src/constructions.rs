//! Saturating constructions and seeded random samplers.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::commutant::{JordanGroup, JordanProfile};
use crate::error::{Error, Result};
use crate::gkls::{self, GklsGenerator};
use crate::linalg::{self, CMatrix, ComplexMatrix, C64};
use crate::subject::Subject;
use crate::superop::{self, QuantumChannel};

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    Ok(())
}

/// Projectors `P₁ = |e₁⟩⟨e₁|` and `P₂ = I − P₁`.
pub fn split_projectors(d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut p1 = vec![0.0; d];
    p1[0] = 1.0;
    let p2: Vec<f64> = p1.iter().map(|x| 1.0 - x).collect();
    (
        ComplexMatrix::from_real_diagonal(&p1),
        ComplexMatrix::from_real_diagonal(&p2),
    )
}

fn split_diagonal(d: usize, first: f64, rest: f64) -> Vec<f64> {
    let mut h = vec![rest; d];
    h[0] = first;
    h
}

/// `L = −i[H, ·]` with `H = h₁P₁ + h₂P₂`, so `m0 = d² − 2d + 2`, `mP = d²`.
pub fn saturating_hamiltonian_generator(d: usize, h1: f64, h2: f64) -> Result<GklsGenerator> {
    require_dim(d)?;
    if h1 == h2 || !h1.is_finite() || !h2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "h1 and h2 must be distinct and finite, got {h1} and {h2}"
        )));
    }
    gkls::build_generator(
        ComplexMatrix::from_real_diagonal(&split_diagonal(d, h1, h2)),
        Vec::new(),
    )
}

/// `Φ = e^{L}` for the Hamiltonian of [`saturating_hamiltonian_generator`]:
/// the unitary channel of `U = e^{−iH}`. Requires `h₁ − h₂ ∉ 2πℤ`.
pub fn saturating_unitary_channel(d: usize, h1: f64, h2: f64) -> Result<QuantumChannel> {
    require_dim(d)?;
    let turns = (h1 - h2) / (2.0 * PI);
    if !turns.is_finite() || (turns - turns.round()).abs() < 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "h1 - h2 = {} is a multiple of 2π; the channel would be trivial",
            h1 - h2
        )));
    }
    let u: Vec<C64> = split_diagonal(d, h1, h2)
        .into_iter()
        .map(|h| C64::from_polar(1.0, -h))
        .collect();
    QuantumChannel::unitary(ComplexMatrix::from_diagonal(&u))
}

/// Noise operators `A_k = λ₁P₁ + λ₂P₂`, no Hamiltonian. Unital, with
/// `m0 = mP = d² − 2d + 2`.
pub fn saturating_dissipative_generator(d: usize, eigenpairs: &[(C64, C64)]) -> Result<GklsGenerator> {
    require_dim(d)?;
    if eigenpairs.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one noise operator is required".into(),
        ));
    }
    let (p1, p2) = split_projectors(d);
    let mut ops = Vec::with_capacity(eigenpairs.len());
    for &(l1, l2) in eigenpairs {
        if (l1 - l2).norm() == 0.0 {
            return Err(Error::InvalidParameter(format!("degenerate eigenpair ({l1}, {l2})")));
        }
        ops.push(ComplexMatrix::wrap(&*p1 * l1 + &*p2 * l2));
    }
    gkls::build_generator(ComplexMatrix::zeros(d, d), ops)
}

/// `e^L` for the dephasing generator with noise set `{P₁, P₂}`: the blocks
/// coupling `e₁` to the rest are scaled by `e⁻¹`, everything else is fixed.
/// Built directly as a diagonal superoperator.
pub fn phase_damping_channel(d: usize) -> Result<QuantumChannel> {
    require_dim(d)?;
    let damp = (-1.0f64).exp();
    let mut diag = Vec::with_capacity(d * d);
    for b in 0..d {
        for a in 0..d {
            diag.push(C64::new(if (a == 0) == (b == 0) { 1.0 } else { damp }, 0.0));
        }
    }
    QuantumChannel::from_superop(ComplexMatrix::from_diagonal(&diag))
}

/// Qubit amplitude damping with Kraus operators
/// `{|0⟩⟨0| + √(1−γ)|1⟩⟨1|, √γ|0⟩⟨1|}`.
pub fn amplitude_damping_channel(gamma: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("damping {gamma} outside [0, 1]")));
    }
    let k0 = ComplexMatrix::from_real_diagonal(&[1.0, (1.0 - gamma).sqrt()]);
    let zero = C64::new(0.0, 0.0);
    let k1 = ComplexMatrix::from_row_major(2, 2, vec![zero, C64::new(gamma.sqrt(), 0.0), zero, zero])?;
    QuantumChannel::from_kraus(vec![k0, k1])
}

/// Pinching `X ↦ P₁XP₁ + P₂XP₂`.
pub fn pinching_channel(d: usize) -> Result<QuantumChannel> {
    require_dim(d)?;
    let (p1, p2) = split_projectors(d);
    QuantumChannel::from_kraus(vec![p1, p2])
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries
/// (`E|z|² = 1`).
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng) * s, normal(rng) * s))
}

/// GUE sample `(G + G†)/2`.
pub fn gue(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Haar isometry `ℂ^cols → ℂ^rows` from the QR decomposition of a Ginibre
/// matrix, with the phases of `diag(R)` absorbed into `Q`.
pub fn haar_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let qr = ginibre(rng, rows, cols).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..cols {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn haar_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    haar_isometry(rng, d, d)
}

/// Random density matrix `GG†/Tr(GG†)` (Hilbert–Schmidt measure).
pub fn random_density(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Stinespring channel: Haar isometry `V : ℂ^d → ℂ^d ⊗ ℂ^env`, traced over
/// the environment. Kraus operators are `B_k[i, j] = V[k·d + i, j]`.
pub fn random_stinespring_channel(rng: &mut impl Rng, d: usize, env: usize) -> Result<QuantumChannel> {
    require_dim(d)?;
    if env == 0 {
        return Err(Error::InvalidParameter("environment dimension must be positive".into()));
    }
    let v = haar_isometry(rng, d * env, d);
    let kraus = (0..env)
        .map(|k| ComplexMatrix::wrap(v.rows(k * d, d).into_owned()))
        .collect();
    QuantumChannel::from_kraus_with_tol(kraus, 1e-10)
}

fn scale_to_unit_radius(h: CMatrix, ops: Vec<CMatrix>) -> Result<GklsGenerator> {
    let ops: Vec<ComplexMatrix> = ops.into_iter().map(ComplexMatrix::wrap).collect();
    let raw = gkls::build_generator(ComplexMatrix::wrap(linalg::hermitian_part(&h)), ops.clone())?;
    let radius = linalg::spectral_radius(&linalg::eigenvalues(raw.superop())?);
    if !(radius > 0.0) {
        return Ok(raw);
    }
    let hs = linalg::hermitian_part(&h) / C64::new(radius, 0.0);
    let root = radius.sqrt();
    let ops = ops
        .into_iter()
        .map(|a| ComplexMatrix::wrap(a.into_matrix() / C64::new(root, 0.0)))
        .collect();
    gkls::build_generator(ComplexMatrix::wrap(hs), ops)
}

/// GUE Hamiltonian and `k` Ginibre noise operators, scaled so the spectral
/// radius of `L` is 1.
pub fn random_generic_generator(rng: &mut impl Rng, d: usize, k: usize) -> Result<GklsGenerator> {
    require_dim(d)?;
    let h = gue(rng, d);
    let ops = (0..k).map(|_| ginibre(rng, d, d)).collect();
    scale_to_unit_radius(h, ops)
}

/// As [`random_generic_generator`] with Hermitian (GUE) noise operators, so
/// that `L(I) = 0`.
pub fn random_unital_generator(rng: &mut impl Rng, d: usize, k: usize) -> Result<GklsGenerator> {
    require_dim(d)?;
    let h = gue(rng, d);
    let ops = (0..k).map(|_| gue(rng, d)).collect();
    scale_to_unit_radius(h, ops)
}

pub fn random_hamiltonian_generator(rng: &mut impl Rng, d: usize) -> Result<GklsGenerator> {
    require_dim(d)?;
    scale_to_unit_radius(gue(rng, d), Vec::new())
}

fn block_unitary(rng: &mut impl Rng, blocks: &[usize]) -> CMatrix {
    let d: usize = blocks.iter().sum();
    let mut u = CMatrix::zeros(d, d);
    let mut at = 0;
    for &n in blocks {
        u.view_mut((at, at), (n, n)).copy_from(&haar_unitary(rng, n));
        at += n;
    }
    u
}

fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.1).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn check_blocks(d: usize, blocks: &[usize], support: usize) -> Result<()> {
    if blocks.is_empty() || blocks.contains(&0) || support > d {
        return Err(Error::InvalidParameter(format!(
            "blocks {blocks:?} do not fit in dimension {d}"
        )));
    }
    Ok(())
}

/// Faithful unital channel `Σ_k p_k W U_k W† · W U_k† W†` with each `U_k`
/// block-diagonal (Haar on every block of `blocks`) and `W` Haar. Its fixed
/// space is generically the span of the block projectors.
pub fn random_block_unital_channel(
    rng: &mut impl Rng,
    d: usize,
    blocks: &[usize],
    kraus_count: usize,
) -> Result<QuantumChannel> {
    require_dim(d)?;
    check_blocks(d, blocks, blocks.iter().sum())?;
    if blocks.iter().sum::<usize>() != d || kraus_count == 0 {
        return Err(Error::InvalidParameter(format!(
            "blocks {blocks:?} must partition {d} and kraus_count must be positive"
        )));
    }
    let w = haar_unitary(rng, d);
    let weights = random_weights(rng, kraus_count);
    let kraus = weights
        .into_iter()
        .map(|p| {
            let u = block_unitary(rng, blocks);
            ComplexMatrix::wrap(&w * u * w.adjoint() * C64::new(p.sqrt(), 0.0))
        })
        .collect();
    QuantumChannel::from_kraus_with_tol(kraus, 1e-10)
}

/// Non-faithful channel: a block-unital channel on a support `H₀` of
/// dimension `Σ blocks`, while the complement partly stays (weight `1/2`,
/// Haar unitary) and partly decays uniformly into `H₀`. Rotated by a Haar
/// unitary.
pub fn random_nonfaithful_channel(
    rng: &mut impl Rng,
    d: usize,
    blocks: &[usize],
    kraus_count: usize,
) -> Result<QuantumChannel> {
    require_dim(d)?;
    let d0: usize = blocks.iter().sum();
    check_blocks(d, blocks, d0)?;
    if d0 >= d || kraus_count == 0 {
        return Err(Error::InvalidParameter(format!(
            "support {d0} must be smaller than {d} and kraus_count positive"
        )));
    }
    let d1 = d - d0;
    let w = haar_unitary(rng, d);
    let rotate = |k: CMatrix| ComplexMatrix::wrap(&w * k * w.adjoint());
    let mut kraus = Vec::new();
    for p in random_weights(rng, kraus_count) {
        let mut k = CMatrix::zeros(d, d);
        k.view_mut((0, 0), (d0, d0))
            .copy_from(&(block_unitary(rng, blocks) * C64::new(p.sqrt(), 0.0)));
        kraus.push(rotate(k));
    }
    let mut stay = CMatrix::zeros(d, d);
    stay.view_mut((d0, d0), (d1, d1))
        .copy_from(&(haar_unitary(rng, d1) * C64::new(0.5f64.sqrt(), 0.0)));
    kraus.push(rotate(stay));
    let amp = (0.5 / d0 as f64).sqrt();
    for a in 0..d0 {
        for m in 0..d1 {
            let mut k = CMatrix::zeros(d, d);
            k[(a, d0 + m)] = C64::new(amp, 0.0);
            kraus.push(rotate(k));
        }
    }
    QuantumChannel::from_kraus_with_tol(kraus, 1e-10)
}

/// Eigenvalue sites for planted Jordan matrices: the 3 × 3 grid
/// `{−4, 0, 4} + i{−4, 0, 4}`.
pub fn jordan_grid() -> Vec<C64> {
    let steps = [-4.0, 0.0, 4.0];
    steps
        .iter()
        .flat_map(|&re| steps.iter().map(move |&im| C64::new(re, im)))
        .collect()
}

/// Random Jordan profile of dimension `d`: blocks of size at most
/// `max_block`, assigned to distinct grid sites.
pub fn random_jordan_profile(rng: &mut impl Rng, d: usize, max_block: usize) -> Result<JordanProfile> {
    if d == 0 || max_block == 0 {
        return Err(Error::InvalidParameter(
            "dimension and block size must be positive".into(),
        ));
    }
    let mut blocks = Vec::new();
    let mut left = d;
    while left > 0 {
        let size = rng.random_range(1..=max_block.min(left));
        blocks.push(size);
        left -= size;
    }
    let mut sites = jordan_grid();
    sites.shuffle(rng);
    let distinct = rng.random_range(1..=blocks.len().min(sites.len()));
    let mut groups: Vec<JordanGroup> = sites[..distinct]
        .iter()
        .map(|&value| JordanGroup {
            value,
            block_sizes: Vec::new(),
        })
        .collect();
    // Every site receives at least one block.
    blocks.shuffle(rng);
    for (i, b) in blocks.into_iter().enumerate() {
        let g = if i < distinct { i } else { rng.random_range(0..distinct) };
        groups[g].block_sizes.push(b);
    }
    for g in &mut groups {
        g.block_sizes.sort_unstable_by(|a, b| b.cmp(a));
    }
    Ok(JordanProfile { eigenvalues: groups })
}

/// `A = S J S⁻¹` with `S = U·diag(s)`, `U` Haar and `s_i = c^{u_i}` for
/// uniform `u_i`, so `cond(S) ≤ max_cond`. Returns `A` and `cond(S)`.
pub fn planted_jordan_matrix(
    rng: &mut impl Rng,
    profile: &JordanProfile,
    max_cond: f64,
) -> Result<(ComplexMatrix, f64)> {
    profile.validate()?;
    if !(max_cond >= 1.0) {
        return Err(Error::InvalidParameter(format!("condition bound {max_cond} below 1")));
    }
    let d = profile.dim();
    let j = crate::commutant::jordan_matrix(profile);
    let u = haar_unitary(rng, d);
    let s: Vec<f64> = (0..d).map(|_| max_cond.powf(rng.random::<f64>())).collect();
    let smax = s.iter().copied().fold(f64::MIN, f64::max);
    let smin = s.iter().copied().fold(f64::MAX, f64::min);
    let diag = |f: &dyn Fn(f64) -> f64| {
        CMatrix::from_diagonal(&linalg::CVector::from_iterator(
            d,
            s.iter().map(|&x| C64::new(f(x), 0.0)),
        ))
    };
    let a = &u * diag(&|x| x) * j * diag(&|x| 1.0 / x) * u.adjoint();
    Ok((ComplexMatrix::wrap(a), smax / smin))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    HaarUnitary,
    CptpStinespring,
    GklsGeneric,
    GklsUnital,
    GklsHamiltonian,
}

impl Ensemble {
    pub const ALL: [Ensemble; 5] = [
        Ensemble::HaarUnitary,
        Ensemble::CptpStinespring,
        Ensemble::GklsGeneric,
        Ensemble::GklsUnital,
        Ensemble::GklsHamiltonian,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Ensemble::HaarUnitary => "haar-unitary",
            Ensemble::CptpStinespring => "cptp-stinespring",
            Ensemble::GklsGeneric => "gkls-generic",
            Ensemble::GklsUnital => "gkls-unital",
            Ensemble::GklsHamiltonian => "gkls-hamiltonian",
        }
    }

    fn code(&self) -> u64 {
        match self {
            Ensemble::HaarUnitary => 1,
            Ensemble::CptpStinespring => 2,
            Ensemble::GklsGeneric => 3,
            Ensemble::GklsUnital => 4,
            Ensemble::GklsHamiltonian => 5,
        }
    }

    pub fn is_generator(&self) -> bool {
        matches!(
            self,
            Ensemble::GklsGeneric | Ensemble::GklsUnital | Ensemble::GklsHamiltonian
        )
    }
}

impl std::fmt::Display for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ensemble::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown ensemble {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub dim: usize,
    pub ensemble: Ensemble,
    pub count: usize,
    /// Stinespring environment dimension, default `d²`.
    pub env_dim: Option<usize>,
    /// Number of GKLS noise operators, default `d`.
    pub noise_ops: Option<usize>,
}

impl SamplerConfig {
    pub fn new(seed: u64, dim: usize, ensemble: Ensemble, count: usize) -> Self {
        SamplerConfig {
            seed,
            dim,
            ensemble,
            count,
            env_dim: None,
            noise_ops: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_dim(self.dim)?;
        if self.count == 0 {
            return Err(Error::InvalidParameter("count must be at least 1".into()));
        }
        if self.dim >= 1 << 16 {
            return Err(Error::InvalidParameter(format!("dimension {} too large", self.dim)));
        }
        Ok(())
    }
}

/// Stream identifier `(ensemble << 48) | (d << 32) | index`.
pub fn stream_id(ensemble: Ensemble, dim: usize, index: usize) -> u64 {
    (ensemble.code() << 48) | ((dim as u64) << 32) | (index as u64 & 0xffff_ffff)
}

/// ChaCha8 seeded with `seed` on stream `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub ensemble: Ensemble,
    pub dim: usize,
    pub index: usize,
    pub stream: u64,
    /// Draws rejected as trivial (or unitary, for non-unitary ensembles)
    /// before this one was accepted.
    pub rejections: usize,
    pub subject: Subject,
}

const MAX_ATTEMPTS: usize = 64;
const REJECT_TOL: f64 = 1e-9;

fn draw(rng: &mut ChaCha8Rng, config: &SamplerConfig) -> Result<(Subject, bool)> {
    let d = config.dim;
    let k = config.noise_ops.unwrap_or(d);
    let n = d * d;
    Ok(match config.ensemble {
        Ensemble::HaarUnitary => {
            let ch = QuantumChannel::unitary(ComplexMatrix::wrap(haar_unitary(rng, d)))?;
            let trivial = (&**ch.superop() - CMatrix::identity(n, n)).norm() <= REJECT_TOL;
            (Subject::Channel(ch), !trivial)
        }
        Ensemble::CptpStinespring => {
            let ch = random_stinespring_channel(rng, d, config.env_dim.unwrap_or(n))?;
            let ok = !superop::is_unitary_channel(&ch, REJECT_TOL)?;
            (Subject::Channel(ch), ok)
        }
        Ensemble::GklsGeneric | Ensemble::GklsUnital => {
            let g = if config.ensemble == Ensemble::GklsGeneric {
                random_generic_generator(rng, d, k)?
            } else {
                random_unital_generator(rng, d, k)?
            };
            let ok = !gkls::is_hamiltonian(&g, REJECT_TOL)?;
            (Subject::Generator(g), ok)
        }
        Ensemble::GklsHamiltonian => {
            let g = random_hamiltonian_generator(rng, d)?;
            let ok = g.superop().norm() > REJECT_TOL;
            (Subject::Generator(g), ok)
        }
    })
}

/// The `index`-th draw of `config`, on its own stream.
pub fn sample_one(config: &SamplerConfig, index: usize) -> Result<Sample> {
    config.validate()?;
    let stream = stream_id(config.ensemble, config.dim, index);
    let mut rng = stream_rng(config.seed, stream);
    for rejections in 0..MAX_ATTEMPTS {
        let (subject, accepted) = draw(&mut rng, config)?;
        if accepted {
            return Ok(Sample {
                ensemble: config.ensemble,
                dim: config.dim,
                index,
                stream,
                rejections,
                subject,
            });
        }
        log::debug!("rejected draw {rejections} on stream {stream:#x}");
    }
    Err(Error::NoConvergence {
        iterations: MAX_ATTEMPTS,
    })
}

/// `config.count` samples, deterministic in `config`.
pub fn sample(config: &SamplerConfig) -> Result<Vec<Sample>> {
    config.validate()?;
    (0..config.count).map(|i| sample_one(config, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{self, SpectralTolerances};
    use crate::testutil::seeded;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tols() -> SpectralTolerances {
        SpectralTolerances::default()
    }

    #[test]
    fn hamiltonian_generator_counts() {
        for (d, m0) in [(2, 2), (3, 5)] {
            let g = saturating_hamiltonian_generator(d, 0.0, 1.0).unwrap();
            let s = spectra::summarize_generator(&g, &tols()).unwrap();
            assert_eq!((s.stationary, s.peripheral), (m0, d * d));
        }
        assert!(saturating_hamiltonian_generator(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn full_turn_phase_gives_trivial_channel() {
        let g = saturating_hamiltonian_generator(3, 2.0 * PI, 0.0).unwrap();
        let ch = gkls::exponentiate(&g, 1.0).unwrap();
        assert!((&**ch.superop() - CMatrix::identity(9, 9)).norm() < 1e-12);
        assert!(saturating_unitary_channel(3, 2.0 * PI, 0.0).is_err());
    }

    #[test]
    fn unitary_channel_counts() {
        let u = saturating_unitary_channel(4, 0.0, 1.0).unwrap();
        let s = spectra::summarize_channel(&u, &tols()).unwrap();
        assert_eq!((s.stationary, s.peripheral), (10, 16));

        let u = saturating_unitary_channel(2, 0.0, PI).unwrap();
        let s = spectra::summarize_channel(&u, &tols()).unwrap();
        assert_eq!(s.stationary, 2);
        let minus = s
            .distinct
            .iter()
            .find(|e| (e.value - c(-1.0, 0.0)).norm() < 1e-10)
            .unwrap();
        assert_eq!(minus.multiplicity, 2);
    }

    #[test]
    fn unitary_channel_matches_exponential_and_eigenvalue_products() {
        let ch = saturating_unitary_channel(3, 0.3, 1.1).unwrap();
        let g = saturating_hamiltonian_generator(3, 0.3, 1.1).unwrap();
        let e = gkls::exponentiate(&g, 1.0).unwrap();
        assert!((&**ch.superop() - &**e.superop()).norm() < 1e-12);
        let lam: Vec<C64> = [0.3, 1.1, 1.1].iter().map(|&h| C64::from_polar(1.0, -h)).collect();
        let products: Vec<C64> = lam.iter().flat_map(|a| lam.iter().map(move |b| a * b.conj())).collect();
        let eigs = linalg::eigenvalues(ch.superop()).unwrap();
        assert!(spectra::multiset_distance(&eigs, &products) < 1e-12);
    }

    #[test]
    fn dissipative_generator_counts() {
        for d in 2..=5 {
            let g = saturating_dissipative_generator(d, &[(c(1.0, 0.0), c(0.0, 0.0))]).unwrap();
            let s = spectra::summarize_generator(&g, &tols()).unwrap();
            assert_eq!((s.stationary, s.peripheral), (d * d - 2 * d + 2, d * d - 2 * d + 2));
            assert!(g.unitality_residual() < 1e-12);
        }
        let g =
            saturating_dissipative_generator(5, &[(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 1.0), c(0.0, -1.0))]).unwrap();
        let s = spectra::summarize_generator(&g, &tols()).unwrap();
        assert_eq!(s.stationary, 17);
        assert!(g.unitality_residual() < 1e-12);
        assert!(saturating_dissipative_generator(3, &[]).is_err());
        assert!(saturating_dissipative_generator(3, &[(c(1.0, 0.0), c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn phase_damping_spectrum() {
        let e = (-1.0f64).exp();
        for (d, ones, damped) in [(2, 2, 2), (3, 5, 4)] {
            let s = spectra::summarize_channel(&phase_damping_channel(d).unwrap(), &tols()).unwrap();
            let one = s
                .distinct
                .iter()
                .find(|x| (x.value - c(1.0, 0.0)).norm() < 1e-8)
                .unwrap();
            let low = s.distinct.iter().find(|x| (x.value - c(e, 0.0)).norm() < 1e-8).unwrap();
            assert_eq!((one.multiplicity, low.multiplicity), (ones, damped));
        }
    }

    #[test]
    fn phase_damping_matches_exponential() {
        for d in 2..=5 {
            let (p1, p2) = split_projectors(d);
            let g = gkls::build_generator(ComplexMatrix::zeros(d, d), vec![p1, p2]).unwrap();
            let e = gkls::exponentiate(&g, 1.0).unwrap();
            let pd = phase_damping_channel(d).unwrap();
            assert!((&**pd.superop() - &**e.superop()).norm() < 1e-12);
        }
    }

    #[test]
    fn samplers_are_deterministic() {
        for ensemble in Ensemble::ALL {
            let config = SamplerConfig::new(42, 3, ensemble, 3);
            let a = sample(&config).unwrap();
            let b = sample(&config).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.subject.superop(), y.subject.superop());
                assert_eq!(x.stream, y.stream);
            }
        }
    }

    #[test]
    fn streams_are_independent_of_count() {
        let a = sample(&SamplerConfig::new(9, 2, Ensemble::CptpStinespring, 2)).unwrap();
        let b = sample_one(&SamplerConfig::new(9, 2, Ensemble::CptpStinespring, 5), 1).unwrap();
        assert_eq!(a[1].subject.superop(), b.subject.superop());
    }

    #[test]
    fn stinespring_samples_are_valid_channels() {
        let mut rng = seeded(1);
        for _ in 0..200 {
            let ch = random_stinespring_channel(&mut rng, 3, 4).unwrap();
            assert!(superop::kraus_tp_residual(ch.kraus()) < 1e-12);
            assert!(superop::choi_is_cp(ch.choi(), 1e-10));
        }
    }

    #[test]
    fn unital_generators_are_unital() {
        let mut rng = seeded(2);
        for _ in 0..50 {
            let g = random_unital_generator(&mut rng, 3, 3).unwrap();
            assert!(g.unitality_residual() <= 1e-10);
            let radius = linalg::spectral_radius(&linalg::eigenvalues(g.superop()).unwrap());
            assert!((radius - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = seeded(3);
        let u = haar_unitary(&mut rng, 5);
        assert!((u.adjoint() * &u - CMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn planted_profiles_have_requested_dimension() {
        let mut rng = seeded(4);
        for d in 3..=8 {
            let p = random_jordan_profile(&mut rng, d, 4).unwrap();
            assert_eq!(p.dim(), d);
            let (a, cond) = planted_jordan_matrix(&mut rng, &p, 1e3).unwrap();
            assert!(cond <= 1e3 + 1e-9);
            assert_eq!(a.nrows(), d);
        }
    }

    #[test]
    fn ensemble_names_round_trip() {
        for e in Ensemble::ALL {
            assert_eq!(e.as_str().parse::<Ensemble>().unwrap(), e);
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{}\"", e.as_str()));
        }
        assert!("bogus".parse::<Ensemble>().is_err());
    }
}
