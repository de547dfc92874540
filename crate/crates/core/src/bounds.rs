//! Bounds on `ℓ0, ℓP, m0, mP`, the gap and forbidden-value counts, and the
//! CKKS inequalities.

use serde::{Deserialize, Serialize};

use crate::gkls::GklsGenerator;
use crate::linalg::{CMatrix, C64};
use crate::spectra::{SpectralSummary, SpectrumKind};
use crate::superop::QuantumChannel;

/// Distance `‖M − I‖_F` (or `‖L‖_F`) below which a subject counts as trivial.
pub const TRIVIAL_TOL: f64 = 1e-9;
/// Relative slack for CKKS margins.
pub const CKKS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Trivial,
    Unitary,
    NonUnitary,
    Zero,
    Hamiltonian,
    NonHamiltonian,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Trivial => "trivial",
            Classification::Unitary => "unitary",
            Classification::NonUnitary => "non-unitary",
            Classification::Zero => "zero",
            Classification::Hamiltonian => "hamiltonian",
            Classification::NonHamiltonian => "non-hamiltonian",
        }
    }

    /// Trivial channels and the zero generator are outside the theorems.
    pub fn is_excluded(&self) -> bool {
        matches!(self, Classification::Trivial | Classification::Zero)
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn classify(distance_to_trivial: f64, summary: &SpectralSummary, trivial_tol: f64) -> Classification {
    let all_peripheral = summary.bulk == 0;
    match (summary.kind, distance_to_trivial <= trivial_tol, all_peripheral) {
        (SpectrumKind::Channel, true, _) => Classification::Trivial,
        (SpectrumKind::Channel, false, true) => Classification::Unitary,
        (SpectrumKind::Channel, false, false) => Classification::NonUnitary,
        (SpectrumKind::Generator, true, _) => Classification::Zero,
        (SpectrumKind::Generator, false, true) => Classification::Hamiltonian,
        (SpectrumKind::Generator, false, false) => Classification::NonHamiltonian,
    }
}

/// Trivial iff `‖M − I‖_F ≤ trivial_tol`; otherwise unitary iff the whole
/// spectrum is peripheral.
pub fn classify_channel(channel: &QuantumChannel, summary: &SpectralSummary, trivial_tol: f64) -> Classification {
    let n = channel.superop().nrows();
    let distance = (&**channel.superop() - CMatrix::identity(n, n)).norm();
    classify(distance, summary, trivial_tol)
}

/// Zero iff `‖L‖_F ≤ trivial_tol`; otherwise Hamiltonian iff the whole
/// spectrum is imaginary.
pub fn classify_generator(generator: &GklsGenerator, summary: &SpectralSummary, trivial_tol: f64) -> Classification {
    classify(generator.superop().norm(), summary, trivial_tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Theorem,
    Derived,
    Comparison,
}

/// One integer inequality `observed ≤ bound` (or equality).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub kind: CheckKind,
    pub bound: i64,
    pub observed: i64,
    pub satisfied: bool,
    pub margin: i64,
}

impl BoundCheck {
    pub fn upper(name: &str, kind: CheckKind, observed: usize, bound: usize) -> Self {
        let margin = bound as i64 - observed as i64;
        BoundCheck {
            name: name.to_string(),
            kind,
            bound: bound as i64,
            observed: observed as i64,
            satisfied: margin >= 0,
            margin,
        }
    }

    /// Equality; the margin is `−|observed − bound|`.
    pub fn equal(name: &str, kind: CheckKind, observed: usize, bound: usize) -> Self {
        let margin = -(bound as i64 - observed as i64).abs();
        BoundCheck {
            name: name.to_string(),
            kind,
            bound: bound as i64,
            observed: observed as i64,
            satisfied: margin == 0,
            margin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkksMargin {
    pub alpha: C64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: SpectrumKind,
    pub dim: usize,
    pub classification: Classification,
    pub stationary: usize,
    pub peripheral: usize,
    pub checks: Vec<BoundCheck>,
    pub gap: usize,
    pub forbidden: usize,
    pub ckks: Vec<CkksMargin>,
    /// Set for trivial channels and the zero generator.
    pub skipped: bool,
}

impl BoundReport {
    /// Failed theorem or derived checks. Comparison checks and CKKS margins
    /// are not violations.
    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks
            .iter()
            .filter(|c| !c.satisfied && c.kind != CheckKind::Comparison)
    }

    pub fn has_violation(&self) -> bool {
        self.violations().next().is_some()
    }

    pub fn ckks_min_margin(&self) -> Option<f64> {
        self.ckks.iter().map(|m| m.margin).min_by(f64::total_cmp)
    }

    pub fn ckks_holds(&self) -> bool {
        self.ckks.iter().all(|m| m.satisfied)
    }
}

/// `d² − 2d + 2`.
pub fn theorem_bound(d: usize) -> usize {
    d * d + 2 - 2 * d
}

/// `d² − d`.
pub fn ckks_bound(d: usize) -> usize {
    d * d - d
}

/// Gap `Δ = 2(d − 1)` between `d²` and the next admissible value.
pub fn gap(d: usize) -> usize {
    2 * (d - 1)
}

/// Number of forbidden values of `ℓP` or `mP`, `2(d − 1) − 1`.
pub fn forbidden_count(d: usize) -> usize {
    gap(d) - 1
}

/// Theorem checks for a channel summary. Trivial channels are skipped.
pub fn check_channel_bounds(summary: &SpectralSummary, classification: Classification) -> BoundReport {
    let d = summary.dim;
    let (l0, lp) = (summary.stationary, summary.peripheral);
    let mut checks = Vec::new();
    match classification {
        Classification::Unitary => {
            checks.push(BoundCheck::upper(
                "l0 <= d^2-2d+2",
                CheckKind::Theorem,
                l0,
                theorem_bound(d),
            ));
            checks.push(BoundCheck::equal("lP == d^2", CheckKind::Theorem, lp, d * d));
        }
        Classification::NonUnitary => {
            checks.push(BoundCheck::upper("l0 <= lP", CheckKind::Theorem, l0, lp));
            checks.push(BoundCheck::upper(
                "lP <= d^2-2d+2",
                CheckKind::Theorem,
                lp,
                theorem_bound(d),
            ));
        }
        _ => {}
    }
    let mut report = base_report(summary, classification, checks);
    if !report.skipped {
        report.checks.extend(ckks_derived_bounds(summary, classification));
        report.ckks = ckks_channel(summary);
    }
    report
}

/// Theorem checks for a generator summary. The zero generator is skipped.
pub fn check_generator_bounds(summary: &SpectralSummary, classification: Classification) -> BoundReport {
    let d = summary.dim;
    let (m0, mp) = (summary.stationary, summary.peripheral);
    let mut checks = Vec::new();
    match classification {
        Classification::Hamiltonian => {
            checks.push(BoundCheck::upper(
                "m0 <= d^2-2d+2",
                CheckKind::Theorem,
                m0,
                theorem_bound(d),
            ));
            checks.push(BoundCheck::equal("mP == d^2", CheckKind::Theorem, mp, d * d));
        }
        Classification::NonHamiltonian => {
            checks.push(BoundCheck::upper("m0 <= mP", CheckKind::Theorem, m0, mp));
            checks.push(BoundCheck::upper(
                "mP <= d^2-2d+2",
                CheckKind::Theorem,
                mp,
                theorem_bound(d),
            ));
        }
        _ => {}
    }
    let mut report = base_report(summary, classification, checks);
    if !report.skipped {
        report.checks.extend(ckks_derived_bounds(summary, classification));
        report.ckks = ckks_generator(summary);
    }
    report
}

fn base_report(summary: &SpectralSummary, classification: Classification, checks: Vec<BoundCheck>) -> BoundReport {
    BoundReport {
        kind: summary.kind,
        dim: summary.dim,
        classification,
        stationary: summary.stationary,
        peripheral: summary.peripheral,
        checks,
        gap: gap(summary.dim),
        forbidden: forbidden_count(summary.dim),
        ckks: Vec::new(),
        skipped: classification.is_excluded(),
    }
}

/// `Γ_α ≤ (1/d) Σ_{β≠0} m_β Γ_β` for every nonzero distinct eigenvalue `α`,
/// with `Γ = −Re λ`.
pub fn ckks_generator(summary: &SpectralSummary) -> Vec<CkksMargin> {
    let d = summary.dim as f64;
    let nonzero = summary
        .distinct
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != summary.stationary_index)
        .map(|(_, e)| e);
    let rhs: f64 = nonzero
        .clone()
        .map(|e| e.multiplicity as f64 * -e.real_part)
        .sum::<f64>()
        / d;
    let slack = CKKS_TOL * summary.spectral_radius().max(1.0);
    nonzero
        .map(|e| {
            let lhs = -e.real_part;
            let margin = rhs - lhs;
            CkksMargin {
                alpha: e.value,
                lhs,
                rhs,
                margin,
                satisfied: margin >= -slack,
            }
        })
        .collect()
}

/// `Σ_β ℓ_β x_β ≤ d(d−1) + d·x_α` for every distinct eigenvalue `α`, with
/// `x = Re μ`.
pub fn ckks_channel(summary: &SpectralSummary) -> Vec<CkksMargin> {
    let d = summary.dim as f64;
    let lhs: f64 = summary
        .distinct
        .iter()
        .map(|e| e.multiplicity as f64 * e.real_part)
        .sum();
    let slack = CKKS_TOL * d * d;
    summary
        .distinct
        .iter()
        .map(|e| {
            let rhs = d * (d - 1.0) + d * e.real_part;
            let margin = rhs - lhs;
            CkksMargin {
                alpha: e.value,
                lhs,
                rhs,
                margin,
                satisfied: margin >= -slack,
            }
        })
        .collect()
}

/// The `d² − d` consequences of the CKKS inequalities, plus the comparison
/// `d² − 2d + 2 ≤ d² − d` between the two bounds (margin `d − 2`).
pub fn ckks_derived_bounds(summary: &SpectralSummary, classification: Classification) -> Vec<BoundCheck> {
    let d = summary.dim;
    let (s, p) = (summary.stationary, summary.peripheral);
    let mut checks = Vec::new();
    match classification {
        Classification::Unitary => {
            checks.push(BoundCheck::upper("l0 <= d^2-d", CheckKind::Derived, s, ckks_bound(d)));
        }
        Classification::NonUnitary => {
            checks.push(BoundCheck::upper("l0 <= d^2-d", CheckKind::Derived, s, ckks_bound(d)));
            checks.push(BoundCheck::upper("lP <= d^2-d", CheckKind::Derived, p, ckks_bound(d)));
        }
        Classification::Hamiltonian => {
            checks.push(BoundCheck::upper("m0 <= d^2-d", CheckKind::Derived, s, ckks_bound(d)));
        }
        Classification::NonHamiltonian => {
            checks.push(BoundCheck::upper("m0 <= d^2-d", CheckKind::Derived, s, ckks_bound(d)));
            checks.push(BoundCheck::upper("mP <= d^2-d", CheckKind::Derived, p, ckks_bound(d)));
        }
        Classification::Trivial | Classification::Zero => return checks,
    }
    checks.push(BoundCheck::upper(
        "d^2-2d+2 <= d^2-d",
        CheckKind::Comparison,
        theorem_bound(d),
        ckks_bound(d),
    ));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions;
    use crate::spectra::{self, SpectralTolerances};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn channel_report(ch: &QuantumChannel) -> BoundReport {
        let s = spectra::summarize_channel(ch, &SpectralTolerances::default()).unwrap();
        check_channel_bounds(&s, classify_channel(ch, &s, TRIVIAL_TOL))
    }

    fn generator_report(g: &GklsGenerator) -> BoundReport {
        let s = spectra::summarize_generator(g, &SpectralTolerances::default()).unwrap();
        check_generator_bounds(&s, classify_generator(g, &s, TRIVIAL_TOL))
    }

    fn margin(report: &BoundReport, name: &str) -> i64 {
        report.checks.iter().find(|c| c.name == name).unwrap().margin
    }

    #[test]
    fn classification_examples() {
        let tols = SpectralTolerances::default();
        let id = QuantumChannel::identity(3);
        let s = spectra::summarize_channel(&id, &tols).unwrap();
        assert_eq!(classify_channel(&id, &s, TRIVIAL_TOL), Classification::Trivial);

        let u =
            QuantumChannel::unitary(ComplexMatrix::from_diagonal(&[c(1.0, 0.0), C64::from_polar(1.0, 1.0)])).unwrap();
        let s = spectra::summarize_channel(&u, &tols).unwrap();
        assert_eq!(classify_channel(&u, &s, TRIVIAL_TOL), Classification::Unitary);

        let ad = constructions::amplitude_damping_channel(0.5).unwrap();
        let s = spectra::summarize_channel(&ad, &tols).unwrap();
        assert_eq!(classify_channel(&ad, &s, TRIVIAL_TOL), Classification::NonUnitary);
    }

    use crate::linalg::ComplexMatrix;

    #[test]
    fn trivial_and_zero_are_skipped() {
        let r = channel_report(&QuantumChannel::identity(2));
        assert!(r.skipped && r.checks.is_empty() && r.ckks.is_empty());
        assert_eq!((r.stationary, r.peripheral), (4, 4));
        let zero = crate::gkls::build_generator(ComplexMatrix::zeros(3, 3), vec![]).unwrap();
        let r = generator_report(&zero);
        assert_eq!(r.classification, Classification::Zero);
        assert!(r.skipped && r.checks.is_empty());
    }

    #[test]
    fn channel_bound_examples() {
        let u = constructions::saturating_unitary_channel(4, 0.0, 1.0).unwrap();
        let r = channel_report(&u);
        assert_eq!(r.classification, Classification::Unitary);
        assert_eq!(margin(&r, "l0 <= d^2-2d+2"), 0);
        assert_eq!(margin(&r, "lP == d^2"), 0);
        assert!(!r.has_violation());

        let pd = constructions::phase_damping_channel(3).unwrap();
        let r = channel_report(&pd);
        assert_eq!(r.classification, Classification::NonUnitary);
        assert_eq!(margin(&r, "lP <= d^2-2d+2"), 0);
        assert_eq!(margin(&r, "l0 <= lP"), 0);
    }

    #[test]
    fn generic_channel_has_margin_four() {
        let mut rng = crate::testutil::seeded(12);
        let ch = crate::testutil::random_channel(&mut rng, 3, 9);
        let r = channel_report(&ch);
        assert_eq!(r.peripheral, 1);
        assert_eq!(margin(&r, "lP <= d^2-2d+2"), 4);
    }

    #[test]
    fn generator_bound_examples() {
        let h = constructions::saturating_hamiltonian_generator(3, 0.0, 1.0).unwrap();
        let r = generator_report(&h);
        assert_eq!(r.classification, Classification::Hamiltonian);
        assert_eq!((r.stationary, r.peripheral), (5, 9));
        assert_eq!(margin(&r, "m0 <= d^2-2d+2"), 0);
        assert_eq!(margin(&r, "mP == d^2"), 0);
        assert!(r.ckks.iter().all(|m| m.margin.abs() < 1e-12));

        let deph = constructions::saturating_dissipative_generator(3, &[(c(1.0, 0.0), c(0.0, 0.0))]).unwrap();
        let r = generator_report(&deph);
        assert_eq!(r.classification, Classification::NonHamiltonian);
        assert_eq!((r.stationary, r.peripheral), (5, 5));
        assert_eq!(margin(&r, "mP <= d^2-2d+2"), 0);
        assert_eq!((r.gap, r.forbidden), (4, 3));
    }

    #[test]
    fn gap_and_forbidden_count() {
        assert_eq!(gap(5), 8);
        assert_eq!(forbidden_count(5), 7);
    }

    #[test]
    fn ckks_generator_dephasing() {
        let p1 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]);
        let p2 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0]);
        let g = crate::gkls::build_generator(ComplexMatrix::zeros(3, 3), vec![p1, p2]).unwrap();
        let s = spectra::summarize_generator(&g, &SpectralTolerances::default()).unwrap();
        let m = ckks_generator(&s);
        assert_eq!(m.len(), 1);
        assert!((m[0].lhs - 1.0).abs() < 1e-10);
        assert!((m[0].rhs - 4.0 / 3.0).abs() < 1e-10);
        assert!((m[0].margin - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn ckks_channel_examples() {
        let s = spectra::summarize_channel(&QuantumChannel::identity(3), &SpectralTolerances::default()).unwrap();
        let m = ckks_channel(&s);
        assert_eq!(m.len(), 1);
        assert!((m[0].lhs - 9.0).abs() < 1e-12 && (m[0].rhs - 9.0).abs() < 1e-12);
        assert!(m[0].margin.abs() < 1e-12 && m[0].satisfied);

        let pd = constructions::phase_damping_channel(3).unwrap();
        let s = spectra::summarize_channel(&pd, &SpectralTolerances::default()).unwrap();
        let e = (-1.0f64).exp();
        let at = ckks_channel(&s)
            .into_iter()
            .find(|m| (m.alpha.re - e).abs() < 1e-8)
            .unwrap();
        assert!((at.lhs - (5.0 + 4.0 * e)).abs() < 1e-10);
        assert!((at.margin - (1.0 - e)).abs() < 1e-10);
    }

    #[test]
    fn derived_bounds_and_comparison() {
        assert_eq!(theorem_bound(2), ckks_bound(2));
        assert!(theorem_bound(3) < ckks_bound(3));
        let deph = constructions::saturating_dissipative_generator(4, &[(c(1.0, 0.0), c(0.0, 0.0))]).unwrap();
        let r = generator_report(&deph);
        let check = r.checks.iter().find(|c| c.name == "mP <= d^2-d").unwrap();
        assert_eq!((check.observed, check.bound, check.margin), (10, 12, 2));
        let cmp = r.checks.iter().find(|c| c.kind == CheckKind::Comparison).unwrap();
        assert_eq!(cmp.margin, 2);
    }
}
