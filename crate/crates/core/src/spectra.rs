//! Eigenvalue clustering, peripheral classification and the multiplicity
//! counts `ℓ0, ℓP` (channels) and `m0, mP` (generators).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gkls::GklsGenerator;
use crate::linalg::{self, CMatrix, C64};
use crate::superop::QuantumChannel;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;
pub const DEFAULT_PERIPHERAL_TOL: f64 = 1e-7;

/// Tolerances for clustering and peripheral classification.
///
/// `cluster` is relative: the applied linkage distance is
/// `cluster · max(1, spectral radius)`. `peripheral` is absolute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralTolerances {
    pub cluster: f64,
    pub peripheral: f64,
}

impl Default for SpectralTolerances {
    fn default() -> Self {
        SpectralTolerances {
            cluster: DEFAULT_CLUSTER_TOL,
            peripheral: DEFAULT_PERIPHERAL_TOL,
        }
    }
}

impl SpectralTolerances {
    pub fn cluster_abs(&self, spectral_radius: f64) -> f64 {
        self.cluster * spectral_radius.max(1.0)
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        SpectralTolerances {
            cluster: self.cluster / factor,
            peripheral: self.peripheral / factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster > 0.0 && self.peripheral > 0.0 && self.cluster.is_finite() && self.peripheral.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "tolerances must be positive and finite (cluster {}, peripheral {})",
                self.cluster, self.peripheral
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Channel,
    Generator,
}

/// A group of numerically coincident eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: C64,
    pub multiplicity: usize,
}

/// Single-linkage clustering: eigenvalues joined by a chain of steps no
/// longer than `tol` share a cluster. Centers are member means.
///
/// The result does not depend on input order. Clusters are sorted by
/// descending modulus (quantized to `tol`), then by ascending argument.
pub fn cluster(eigs: &[C64], tol: f64) -> Vec<Cluster> {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let n = sorted.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // Sorted by real part: later entries only get further away.
            if sorted[j].re - sorted[i].re > tol {
                break;
            }
            if (sorted[i] - sorted[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<(usize, C64, usize)> = Vec::new();
    for (i, &z) in sorted.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == root) {
            Some(g) => {
                g.1 += z;
                g.2 += 1;
            }
            None => groups.push((root, z, 1)),
        }
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(_, sum, m)| Cluster {
            center: sum / m as f64,
            multiplicity: m,
        })
        .collect();
    sort_for_report(&mut clusters, |c| c.center, tol);
    clusters
}

fn sort_for_report<T>(items: &mut [T], value: impl Fn(&T) -> C64, tol: f64) {
    let quantum = if tol > 0.0 { tol } else { f64::EPSILON };
    items.sort_by(|a, b| {
        let (va, vb) = (value(a), value(b));
        let qa = (va.norm() / quantum).round();
        let qb = (vb.norm() / quantum).round();
        qb.total_cmp(&qa).then(va.arg().total_cmp(&vb.arg()))
    });
}

/// One distinct eigenvalue in a [`SpectralSummary`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinctEigenvalue {
    pub value: C64,
    pub multiplicity: usize,
    pub peripheral: bool,
    pub real_part: f64,
    /// Relaxation rate `−Re λ`, generators only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

/// Tolerances as applied to one spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppliedTolerances {
    pub cluster_rel: f64,
    pub cluster_abs: f64,
    pub peripheral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub kind: SpectrumKind,
    pub dim: usize,
    pub distinct: Vec<DistinctEigenvalue>,
    /// `ℓ0` for channels, `m0` for generators.
    #[serde(rename = "l0_or_m0")]
    pub stationary: usize,
    /// `ℓP` for channels, `mP` for generators.
    #[serde(rename = "lP_or_mP")]
    pub peripheral: usize,
    /// Total multiplicity of non-peripheral eigenvalues, `m_B`.
    pub bulk: usize,
    /// Index into `distinct` of the cluster holding 1 (channels) or 0
    /// (generators).
    pub stationary_index: usize,
    pub tolerances: AppliedTolerances,
    #[serde(skip)]
    pub eigenvalues: Vec<C64>,
}

impl SpectralSummary {
    pub fn spectral_radius(&self) -> f64 {
        linalg::spectral_radius(&self.eigenvalues)
    }

    pub fn stationary_value(&self) -> C64 {
        self.distinct[self.stationary_index].value
    }

    pub fn peripheral_eigenvalues(&self) -> impl Iterator<Item = &DistinctEigenvalue> {
        self.distinct.iter().filter(|e| e.peripheral)
    }
}

/// Builds a summary from raw eigenvalues (with repetition).
pub fn summarize_eigenvalues(
    kind: SpectrumKind,
    dim: usize,
    eigs: Vec<C64>,
    tols: &SpectralTolerances,
) -> Result<SpectralSummary> {
    tols.validate()?;
    if eigs.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: eigs.len(),
        });
    }
    let radius = linalg::spectral_radius(&eigs);
    let cluster_abs = tols.cluster_abs(radius);
    let clusters = cluster(&eigs, cluster_abs);
    let target = match kind {
        SpectrumKind::Channel => C64::new(1.0, 0.0),
        SpectrumKind::Generator => C64::new(0.0, 0.0),
    };
    let (stationary_index, distance) = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| (i, (c.center - target).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one eigenvalue");
    let reach = cluster_abs.max(tols.peripheral);
    if distance > reach {
        return Err(Error::MissingStationaryCluster {
            target,
            distance,
            tolerance: reach,
        });
    }
    let distinct: Vec<DistinctEigenvalue> = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let peripheral = i == stationary_index
                || match kind {
                    SpectrumKind::Channel => c.center.norm() >= 1.0 - tols.peripheral,
                    SpectrumKind::Generator => c.center.re.abs() <= tols.peripheral,
                };
            DistinctEigenvalue {
                value: c.center,
                multiplicity: c.multiplicity,
                peripheral,
                real_part: c.center.re,
                rate: (kind == SpectrumKind::Generator).then_some(-c.center.re),
            }
        })
        .collect();
    let peripheral: usize = distinct.iter().filter(|e| e.peripheral).map(|e| e.multiplicity).sum();
    Ok(SpectralSummary {
        kind,
        dim,
        stationary: distinct[stationary_index].multiplicity,
        peripheral,
        bulk: dim * dim - peripheral,
        stationary_index,
        distinct,
        tolerances: AppliedTolerances {
            cluster_rel: tols.cluster,
            cluster_abs,
            peripheral: tols.peripheral,
        },
        eigenvalues: eigs,
    })
}

pub fn summarize_channel(channel: &QuantumChannel, tols: &SpectralTolerances) -> Result<SpectralSummary> {
    let eigs = linalg::eigenvalues(channel.superop())?;
    summarize_eigenvalues(SpectrumKind::Channel, channel.dim(), eigs, tols)
}

pub fn summarize_generator(generator: &GklsGenerator, tols: &SpectralTolerances) -> Result<SpectralSummary> {
    let eigs = linalg::eigenvalues(generator.superop())?;
    summarize_eigenvalues(SpectrumKind::Generator, generator.dim(), eigs, tols)
}

/// Bottleneck distance between two eigenvalue multisets under greedy
/// nearest-neighbour matching. Infinite if the sizes differ.
///
/// Greedy matching never underestimates the optimal bottleneck distance,
/// so a small value certifies closeness.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut left = a.to_vec();
    left.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in left {
        let (j, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes match");
        used[j] = true;
        worst = worst.max(dist);
    }
    worst
}

/// Dimension of the eigenspace of `m` at `value`, with an absolute
/// singular-value cutoff.
pub fn geometric_multiplicity(m: &CMatrix, value: C64, cutoff: f64) -> usize {
    let n = m.nrows();
    let shifted = m - CMatrix::identity(n, n) * value;
    linalg::nullspace_abs(&shifted, cutoff).len()
}

/// Singular-value cutoff used when counting eigenvectors of a clustered
/// eigenvalue.
pub fn eigenspace_cutoff(summary: &SpectralSummary) -> f64 {
    10.0 * summary.tolerances.cluster_abs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeripheralDefect {
    pub value: C64,
    pub algebraic: usize,
    pub geometric: usize,
}

/// Peripheral eigenvalues whose geometric multiplicity falls short of the
/// algebraic one.
pub fn peripheral_defects(m: &CMatrix, summary: &SpectralSummary) -> Vec<PeripheralDefect> {
    let cutoff = eigenspace_cutoff(summary);
    summary
        .peripheral_eigenvalues()
        .filter_map(|e| {
            let geometric = geometric_multiplicity(m, e.value, cutoff);
            (geometric != e.multiplicity).then_some(PeripheralDefect {
                value: e.value,
                algebraic: e.multiplicity,
                geometric,
            })
        })
        .collect()
}

/// Tolerance for the structural spectrum checks below.
pub const PROPERTY_TOL: f64 = 1e-8;

/// Structural facts every channel spectrum must satisfy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpectrumChecks {
    pub max_modulus: f64,
    pub unit_distance: f64,
    pub conjugation_distance: f64,
    pub peripheral_defects: Vec<PeripheralDefect>,
}

impl ChannelSpectrumChecks {
    pub fn in_unit_disk(&self) -> bool {
        self.max_modulus <= 1.0 + PROPERTY_TOL
    }

    pub fn has_unit_eigenvalue(&self) -> bool {
        self.unit_distance <= PROPERTY_TOL
    }

    pub fn conjugation_symmetric(&self) -> bool {
        self.conjugation_distance <= PROPERTY_TOL
    }

    pub fn peripheral_semisimple(&self) -> bool {
        self.peripheral_defects.is_empty()
    }

    pub fn all_hold(&self) -> bool {
        self.in_unit_disk()
            && self.has_unit_eigenvalue()
            && self.conjugation_symmetric()
            && self.peripheral_semisimple()
    }
}

pub fn check_channel_spectrum(channel: &QuantumChannel, summary: &SpectralSummary) -> ChannelSpectrumChecks {
    let eigs = &summary.eigenvalues;
    let conj: Vec<C64> = eigs.iter().map(|z| z.conj()).collect();
    ChannelSpectrumChecks {
        max_modulus: linalg::spectral_radius(eigs),
        unit_distance: eigs.iter().map(|z| (z - 1.0).norm()).fold(f64::INFINITY, f64::min),
        conjugation_distance: multiset_distance(eigs, &conj),
        peripheral_defects: peripheral_defects(channel.superop(), summary),
    }
}

/// Structural facts every GKLS spectrum must satisfy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpectrumChecks {
    pub max_real_part: f64,
    pub zero_distance: f64,
    pub conjugation_distance: f64,
    pub peripheral_defects: Vec<PeripheralDefect>,
}

impl GeneratorSpectrumChecks {
    pub fn real_parts_nonpositive(&self) -> bool {
        self.max_real_part <= PROPERTY_TOL
    }

    pub fn has_zero_eigenvalue(&self) -> bool {
        self.zero_distance <= PROPERTY_TOL
    }

    pub fn conjugation_symmetric(&self) -> bool {
        self.conjugation_distance <= PROPERTY_TOL
    }

    pub fn peripheral_semisimple(&self) -> bool {
        self.peripheral_defects.is_empty()
    }

    pub fn all_hold(&self) -> bool {
        self.real_parts_nonpositive()
            && self.has_zero_eigenvalue()
            && self.conjugation_symmetric()
            && self.peripheral_semisimple()
    }
}

pub fn check_generator_spectrum(generator: &GklsGenerator, summary: &SpectralSummary) -> GeneratorSpectrumChecks {
    let eigs = &summary.eigenvalues;
    let conj: Vec<C64> = eigs.iter().map(|z| z.conj()).collect();
    GeneratorSpectrumChecks {
        max_real_part: eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
        zero_distance: eigs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min),
        conjugation_distance: multiset_distance(eigs, &conj),
        peripheral_defects: peripheral_defects(generator.superop(), summary),
    }
}
