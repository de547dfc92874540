//! The full pipeline for one subject: validation, spectra, subspaces,
//! bounds, with a single tightened re-analysis on inconsistency.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundReport, Classification};
use crate::commutant;
use crate::error::Result;
use crate::linalg::{self, CVector, ComplexMatrix, C64};
use crate::spectra::{self, ChannelSpectrumChecks, GeneratorSpectrumChecks, SpectralSummary, SpectralTolerances};
use crate::subject::Subject;
use crate::superop;

pub const SCHEMA: &str = "oqs/1";
/// Factor by which tolerances shrink on re-analysis.
pub const REANALYSIS_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub spectral: SpectralTolerances,
    pub trivial: f64,
    /// Relative commutant cutoff; `None` skips the commutant.
    pub commutant: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            spectral: SpectralTolerances::default(),
            trivial: bounds::TRIVIAL_TOL,
            commutant: Some(commutant::DEFAULT_COMMUTANT_TOL),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectMeta {
    pub kind: spectra::SpectrumKind,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_op_count: Option<usize>,
    /// `‖Σ B†B − I‖` or `‖L*(I)‖`.
    pub trace_residual: f64,
    /// `‖Φ(I) − I‖` or `‖L(I)‖`.
    pub unitality_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceDims {
    /// `dim Fix(Φ)` or `dim Ker(L)` from the nullspace.
    pub stationary: usize,
    /// `dim Attr` from peripheral eigenvectors.
    pub attractor: usize,
    /// `dim Fix(Φ*)` or `dim Ker(L*)`.
    pub dual_stationary: usize,
    /// Commutant of `{B_k, B_k†}` or `{H, A_k, A_k†}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commutant: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumChecks {
    Channel(ChannelSpectrumChecks),
    Generator(GeneratorSpectrumChecks),
}

impl SpectrumChecks {
    pub fn all_hold(&self) -> bool {
        match self {
            SpectrumChecks::Channel(c) => c.all_hold(),
            SpectrumChecks::Generator(g) => g.all_hold(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub spectra_ms: f64,
    pub subspaces_ms: f64,
    pub bounds_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub subject: SubjectMeta,
    pub classification: Classification,
    pub summary: SpectralSummary,
    pub subspaces: SubspaceDims,
    pub bounds: BoundReport,
    pub spectrum_checks: SpectrumChecks,
    pub options: AnalysisOptions,
    /// Set when spectral counts and subspace dimensions disagree, or a
    /// structural spectrum check fails, after re-analysis.
    pub discrepancy: bool,
    pub notes: Vec<String>,
    pub reanalyzed: bool,
    pub timings: Timings,
}

impl AnalysisReport {
    pub fn has_violation(&self) -> bool {
        self.bounds.has_violation()
    }

    /// Inconsistencies that warrant a tightened re-run.
    fn findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.subspaces.stationary != self.summary.stationary {
            out.push(format!(
                "stationary multiplicity {} but nullspace dimension {}",
                self.summary.stationary, self.subspaces.stationary
            ));
        }
        if self.subspaces.attractor != self.summary.peripheral {
            out.push(format!(
                "peripheral multiplicity {} but attractor dimension {}",
                self.summary.peripheral, self.subspaces.attractor
            ));
        }
        if !self.spectrum_checks.all_hold() {
            out.push("structural spectrum check failed".to_string());
        }
        for v in self.bounds.violations() {
            out.push(format!(
                "bound {} violated: observed {} > {}",
                v.name, v.observed, v.bound
            ));
        }
        out
    }
}

fn subject_meta(subject: &Subject) -> SubjectMeta {
    let d = subject.dim();
    let id = linalg::vectorize(&linalg::CMatrix::identity(d, d));
    let m = subject.superop();
    match subject {
        Subject::Channel(c) => SubjectMeta {
            kind: spectra::SpectrumKind::Channel,
            dim: d,
            kraus_count: c.has_explicit_kraus().then(|| c.kraus().len()),
            noise_op_count: None,
            trace_residual: superop::superop_tp_residual(m, d),
            unitality_residual: (&**m * &id - &id).norm(),
        },
        Subject::Generator(g) => SubjectMeta {
            kind: spectra::SpectrumKind::Generator,
            dim: d,
            kraus_count: None,
            noise_op_count: Some(g.noise_ops().len()),
            trace_residual: g.trace_preservation_residual(),
            unitality_residual: g.unitality_residual(),
        },
    }
}

fn operator_system(subject: &Subject) -> Vec<ComplexMatrix> {
    match subject {
        Subject::Channel(c) => c.kraus().iter().flat_map(|b| [b.clone(), b.dagger()]).collect(),
        Subject::Generator(g) => g.operator_set(),
    }
}

fn subspace_dims(subject: &Subject, summary: &SpectralSummary, options: &AnalysisOptions) -> Result<SubspaceDims> {
    let m = subject.superop();
    let n = m.nrows();
    let cutoff = spectra::eigenspace_cutoff(summary);
    let target = match summary.kind {
        spectra::SpectrumKind::Channel => C64::new(1.0, 0.0),
        spectra::SpectrumKind::Generator => C64::new(0.0, 0.0),
    };
    let shift = linalg::CMatrix::identity(n, n) * target;
    let stationary = linalg::nullspace_abs(&(&**m - &shift), cutoff).len();
    let dual_stationary = linalg::nullspace_abs(&(m.adjoint() - &shift), cutoff).len();
    let mut vectors: Vec<CVector> = Vec::new();
    for e in summary.peripheral_eigenvalues() {
        let shifted = &**m - linalg::CMatrix::identity(n, n) * e.value;
        vectors.extend(linalg::nullspace_abs(&shifted, cutoff));
    }
    let attractor = linalg::orthonormal_span(&vectors, 1e-10).len();
    let commutant = match options.commutant {
        Some(tol) => Some(commutant::commutant(&operator_system(subject), tol)?.dimension),
        None => None,
    };
    Ok(SubspaceDims {
        stationary,
        attractor,
        dual_stationary,
        commutant,
    })
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn analyze_once(subject: &Subject, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let start = Instant::now();
    let summary = match subject {
        Subject::Channel(c) => spectra::summarize_channel(c, &options.spectral)?,
        Subject::Generator(g) => spectra::summarize_generator(g, &options.spectral)?,
    };
    let (classification, spectrum_checks) = match subject {
        Subject::Channel(c) => (
            bounds::classify_channel(c, &summary, options.trivial),
            SpectrumChecks::Channel(spectra::check_channel_spectrum(c, &summary)),
        ),
        Subject::Generator(g) => (
            bounds::classify_generator(g, &summary, options.trivial),
            SpectrumChecks::Generator(spectra::check_generator_spectrum(g, &summary)),
        ),
    };
    let spectra_ms = ms(start);

    let t = Instant::now();
    let subspaces = subspace_dims(subject, &summary, options)?;
    let subspaces_ms = ms(t);

    let t = Instant::now();
    let bounds = match subject {
        Subject::Channel(_) => bounds::check_channel_bounds(&summary, classification),
        Subject::Generator(_) => bounds::check_generator_bounds(&summary, classification),
    };
    let bounds_ms = ms(t);

    Ok(AnalysisReport {
        schema: SCHEMA.to_string(),
        subject: subject_meta(subject),
        classification,
        summary,
        subspaces,
        bounds,
        spectrum_checks,
        options: *options,
        discrepancy: false,
        notes: Vec::new(),
        reanalyzed: false,
        timings: Timings {
            spectra_ms,
            subspaces_ms,
            bounds_ms,
            total_ms: ms(start),
        },
    })
}

/// Runs the pipeline. If the first pass finds a bound violation or an
/// inconsistency, the subject is analyzed once more with tolerances
/// tightened by [`REANALYSIS_FACTOR`] and that pass is reported.
pub fn analyze(subject: &Subject, options: &AnalysisOptions) -> Result<AnalysisReport> {
    options.spectral.validate()?;
    let first = analyze_once(subject, options);
    let findings = match &first {
        Ok(report) => report.findings(),
        Err(e) => vec![format!("first pass failed: {e}")],
    };
    if findings.is_empty() {
        return first;
    }
    log::info!("re-analyzing with tightened tolerances: {}", findings.join("; "));
    let tightened = AnalysisOptions {
        spectral: options.spectral.tightened(REANALYSIS_FACTOR),
        ..*options
    };
    let mut report = match analyze_once(subject, &tightened) {
        Ok(r) => r,
        Err(e) => {
            // Keep the looser pass if it produced a report at all.
            log::warn!("tightened pass failed: {e}");
            first?
        }
    };
    let remaining = report.findings();
    report.reanalyzed = true;
    report.discrepancy = !remaining.is_empty();
    report.notes = findings
        .into_iter()
        .map(|f| format!("initial: {f}"))
        .chain(remaining)
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions;
    use crate::superop::QuantumChannel;

    #[test]
    fn phase_damping_report() {
        let s = Subject::Channel(constructions::phase_damping_channel(3).unwrap());
        let r = analyze(&s, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.schema, "oqs/1");
        assert_eq!((r.summary.stationary, r.summary.peripheral), (5, 5));
        assert_eq!(r.subspaces.stationary, 5);
        assert_eq!(r.subspaces.attractor, 5);
        assert_eq!(r.subspaces.commutant, Some(5));
        assert!(!r.discrepancy && !r.reanalyzed && !r.has_violation());
        assert!(r
            .bounds
            .checks
            .iter()
            .filter(|c| c.kind == bounds::CheckKind::Theorem)
            .all(|c| c.margin == 0));
    }

    #[test]
    fn identity_report_is_skipped() {
        let s = Subject::Channel(QuantumChannel::identity(3));
        let r = analyze(&s, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.classification, Classification::Trivial);
        assert!(r.bounds.skipped);
        assert_eq!(r.subspaces.stationary, 9);
    }

    #[test]
    fn generic_generator_report() {
        let mut rng = crate::testutil::seeded(8);
        let g = crate::testutil::random_generator(&mut rng, 3, 3);
        let r = analyze(&Subject::Generator(g), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.summary.stationary, 1);
        assert_eq!(r.classification, Classification::NonHamiltonian);
        assert_eq!(r.bounds.ckks.len(), r.summary.distinct.len() - 1);
        assert!(r.subject.noise_op_count == Some(3));
    }

    #[test]
    fn report_round_trips_through_json() {
        let s = Subject::Generator(constructions::saturating_hamiltonian_generator(3, 0.0, 1.0).unwrap());
        let r = analyze(&s, &AnalysisOptions::default()).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["schema"], "oqs/1");
        assert_eq!(value["summary"]["l0_or_m0"], 5);
        assert_eq!(value["summary"]["lP_or_mP"], 9);
        assert_eq!(value["classification"], "hamiltonian");
    }
}
