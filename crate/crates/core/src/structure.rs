//! Big-isotropic structures as validated generator frames.
//!
//! A structure is stored as explicit generator lists for the isotropic
//! subbundle `E` and its g-orthogonal `E'` (with `E` inside `E'`), together
//! with rational sample points where the generator matrices must have full
//! rank. Membership of a section in either family is decided over the
//! rational-function field; see [`crate::linalg`].

use std::fmt;

use thiserror::Error;

use crate::big_tangent::{courant_bracket, pairing_g, BigSection};
use crate::chart::Chart;
use crate::exterior::{
    differential, flat, lie_derivative, poisson_check, sharp, KForm, KMultivector, VectorField,
};
use crate::linalg::{self, SpanOutcome};
use crate::scalar::{Rat, Scalar};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("isotropy violation: g(e{i}, e{j}) = {residual}")]
    IsotropyViolation { i: usize, j: usize, residual: Scalar },
    #[error("orthogonality violation: g(e{i}, f{a}) = {residual}")]
    OrthogonalityViolation { i: usize, a: usize, residual: Scalar },
    #[error("containment violation: e{i} is not in the span of the E' generators")]
    ContainmentViolation { i: usize },
    #[error("rank deficiency in {family} at sample point {point}: expected {expected}, got {got}")]
    RankDeficiency { family: &'static str, point: String, expected: usize, got: usize },
    #[error("annihilator mismatch: pairing of generator {form_index} with field {field_index} = {residual}")]
    AnnihilatorMismatch { form_index: usize, field_index: usize, residual: Scalar },
    #[error("the bivector does not satisfy the Jacobi identity")]
    NotPoisson,
    #[error("a rank-{rank} structure on an m = {m} chart needs {expected} E' generators, got {got}")]
    GeneratorCount { rank: usize, m: usize, expected: usize, got: usize },
}

/// Which generator family of a structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    E,
    EPrime,
}

/// A validated big-isotropic structure of rank `k` on a chart of `R^m`:
/// `k` generators of `E` and `2m - k` generators of `E'`.
#[derive(Clone)]
pub struct BigIsoStructure {
    chart: Chart,
    rank: usize,
    gens_e: Vec<BigSection>,
    gens_ep: Vec<BigSection>,
    sample_points: Vec<Vec<Rat>>,
}

impl BigIsoStructure {
    /// Validate generator frames: isotropy of `E`, g-orthogonality of `E'`
    /// against `E`, containment `E` in `E'`, and full rank of both frames at
    /// every sample point.
    pub fn validate(
        gens_e: Vec<BigSection>,
        gens_ep: Vec<BigSection>,
        sample_points: Vec<Vec<Rat>>,
    ) -> Result<Self, StructureError> {
        assert!(!gens_ep.is_empty() || gens_e.is_empty(), "E' generators required");
        let chart = if let Some(g) = gens_e.first().or(gens_ep.first()) {
            g.chart().clone()
        } else {
            panic!("empty structure needs at least one E' generator to fix the chart")
        };
        let m = chart.dim();
        let k = gens_e.len();
        if gens_ep.len() != 2 * m - k {
            return Err(StructureError::GeneratorCount {
                rank: k,
                m,
                expected: 2 * m - k,
                got: gens_ep.len(),
            });
        }

        for (i, a) in gens_e.iter().enumerate() {
            for (j, b) in gens_e.iter().enumerate().skip(i) {
                let g = pairing_g(a, b);
                if !g.is_zero() {
                    return Err(StructureError::IsotropyViolation { i, j, residual: g });
                }
            }
        }
        for (i, e) in gens_e.iter().enumerate() {
            for (a, f) in gens_ep.iter().enumerate() {
                let g = pairing_g(e, f);
                if !g.is_zero() {
                    return Err(StructureError::OrthogonalityViolation { i, a, residual: g });
                }
            }
        }
        let ep_slots: Vec<Vec<Scalar>> = gens_ep.iter().map(|g| g.slots()).collect();
        for (i, e) in gens_e.iter().enumerate() {
            match linalg::membership(&chart, &ep_slots, &e.slots()) {
                SpanOutcome::No => return Err(StructureError::ContainmentViolation { i }),
                _ => {}
            }
        }
        let e_slots: Vec<Vec<Scalar>> = gens_e.iter().map(|g| g.slots()).collect();
        for point in &sample_points {
            let got = linalg::rank_at_point(&chart, &e_slots, point);
            if got != k {
                return Err(StructureError::RankDeficiency {
                    family: "E",
                    point: format_point(&chart, point),
                    expected: k,
                    got,
                });
            }
            let got = linalg::rank_at_point(&chart, &ep_slots, point);
            if got != 2 * m - k {
                return Err(StructureError::RankDeficiency {
                    family: "E'",
                    point: format_point(&chart, point),
                    expected: 2 * m - k,
                    got,
                });
            }
        }
        Ok(BigIsoStructure { chart, rank: k, gens_e, gens_ep, sample_points })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gens_e(&self) -> &[BigSection] {
        &self.gens_e
    }

    pub fn gens_ep(&self) -> &[BigSection] {
        &self.gens_ep
    }

    pub fn gens(&self, family: Family) -> &[BigSection] {
        match family {
            Family::E => &self.gens_e,
            Family::EPrime => &self.gens_ep,
        }
    }

    pub fn sample_points(&self) -> &[Vec<Rat>] {
        &self.sample_points
    }

    /// Span membership of a section in the chosen generator family.
    pub fn in_span(&self, s: &BigSection, family: Family) -> SpanOutcome {
        let slots: Vec<Vec<Scalar>> = self.gens(family).iter().map(|g| g.slots()).collect();
        linalg::membership(&self.chart, &slots, &s.slots())
    }

    /// Assemble a section from frame coefficients over the chosen family.
    pub fn combine(&self, family: Family, coeffs: &[Scalar]) -> BigSection {
        let gens = self.gens(family);
        assert_eq!(coeffs.len(), gens.len());
        let mut out = BigSection::zero(&self.chart);
        for (c, g) in coeffs.iter().zip(gens) {
            out = &out + &g.scale(c);
        }
        out
    }
}

fn format_point(chart: &Chart, point: &[Rat]) -> String {
    let parts: Vec<String> =
        point.iter().enumerate().map(|(i, r)| format!("{}={}", chart.name(i), r)).collect();
    format!("({})", parts.join(", "))
}

/// A witness for a failed integrability check: the bracket that escaped and
/// the generator against which the g-pairing is nonzero.
#[derive(Clone, Debug)]
pub struct IntegrabilityWitness {
    /// Indices of the bracketed generators; the first is always in `E`,
    /// the second is in `E` or in `E'` according to `mixed`.
    pub i: usize,
    pub j: usize,
    /// False for an `[E,E]` bracket tested against `E'`, true for an
    /// `[E,E']` bracket tested against `E`.
    pub mixed: bool,
    /// Index of the generator that detected the escape.
    pub probe: usize,
    pub bracket: BigSection,
    pub residual: Scalar,
}

/// Result of [`check_integrable`].
#[derive(Clone, Debug)]
pub struct IntegrabilityReport {
    pub failures: Vec<IntegrabilityWitness>,
}

impl IntegrabilityReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Courant-closure test of a validated structure: `[E,E]` brackets must be
/// g-orthogonal to every `E'` generator (hence sections of `E`), and
/// `[E,E']` brackets g-orthogonal to every `E` generator (sections of `E'`).
pub fn check_integrable(s: &BigIsoStructure) -> IntegrabilityReport {
    let mut failures = Vec::new();
    for (i, a) in s.gens_e.iter().enumerate() {
        for (j, b) in s.gens_e.iter().enumerate().skip(i + 1) {
            let br = courant_bracket(a, b);
            for (probe, f) in s.gens_ep.iter().enumerate() {
                let residual = pairing_g(&br, f);
                if !residual.is_zero() {
                    failures.push(IntegrabilityWitness {
                        i,
                        j,
                        mixed: false,
                        probe,
                        bracket: br.clone(),
                        residual,
                    });
                }
            }
        }
    }
    for (i, a) in s.gens_e.iter().enumerate() {
        for (j, f) in s.gens_ep.iter().enumerate() {
            let br = courant_bracket(a, f);
            for (probe, e) in s.gens_e.iter().enumerate() {
                let residual = pairing_g(&br, e);
                if !residual.is_zero() {
                    failures.push(IntegrabilityWitness {
                        i,
                        j,
                        mixed: true,
                        probe,
                        bracket: br.clone(),
                        residual,
                    });
                }
            }
        }
    }
    IntegrabilityReport { failures }
}

/// Graph of a 2-form over a distribution: generators `(X, i(X)lambda)` for
/// `X` in `gens_s`, with orthogonal family `(d/dx^i, i(d/dx^i)lambda)` plus
/// the pure forms `(0, gamma)` over the annihilator of the distribution.
pub fn build_graph_two_form(
    lambda: &KForm,
    gens_s: &[VectorField],
    gens_ann_s: &[KForm],
    sample_points: Vec<Vec<Rat>>,
) -> Result<BigIsoStructure, StructureError> {
    assert_eq!(lambda.degree(), 2);
    let chart = lambda.chart().clone();
    let m = chart.dim();
    for (fi, gamma) in gens_ann_s.iter().enumerate() {
        for (xi, x) in gens_s.iter().enumerate() {
            let r = gamma.pair(x);
            if !r.is_zero() {
                return Err(StructureError::AnnihilatorMismatch {
                    form_index: fi,
                    field_index: xi,
                    residual: r,
                });
            }
        }
    }
    let s_slots: Vec<Vec<Scalar>> = gens_s.iter().map(|x| x.components().to_vec()).collect();
    let ann_slots: Vec<Vec<Scalar>> = gens_ann_s.iter().map(|g| g.dense1()).collect();
    for point in &sample_points {
        let rs = linalg::rank_at_point(&chart, &s_slots, point);
        let ra = linalg::rank_at_point(&chart, &ann_slots, point);
        if rs + ra != m {
            return Err(StructureError::RankDeficiency {
                family: "S + ann S",
                point: format_point(&chart, point),
                expected: m,
                got: rs + ra,
            });
        }
    }
    let gens_e: Vec<BigSection> =
        gens_s.iter().map(|x| BigSection::new(x.clone(), flat(lambda, x))).collect();
    let mut gens_ep: Vec<BigSection> = (0..m)
        .map(|i| {
            let di = VectorField::coordinate(&chart, i);
            BigSection::new(di.clone(), flat(lambda, &di))
        })
        .collect();
    gens_ep.extend(gens_ann_s.iter().map(BigSection::from_form));
    BigIsoStructure::validate(gens_e, gens_ep, sample_points)
}

/// Graph of a bivector over a cotangent subbundle: generators
/// `(i(sigma)P, sigma)` for `sigma` in `gens_sigma`, with orthogonal family
/// `(i(dx^i)P, dx^i)` plus the pure fields `(Z, 0)` over the annihilator.
pub fn build_graph_bivector(
    p: &KMultivector,
    gens_sigma: &[KForm],
    gens_ann_sigma: &[VectorField],
    sample_points: Vec<Vec<Rat>>,
) -> Result<BigIsoStructure, StructureError> {
    assert_eq!(p.degree(), 2);
    let chart = p.chart().clone();
    let m = chart.dim();
    for (fi, sigma) in gens_sigma.iter().enumerate() {
        for (zi, z) in gens_ann_sigma.iter().enumerate() {
            let r = sigma.pair(z);
            if !r.is_zero() {
                return Err(StructureError::AnnihilatorMismatch {
                    form_index: fi,
                    field_index: zi,
                    residual: r,
                });
            }
        }
    }
    let sig_slots: Vec<Vec<Scalar>> = gens_sigma.iter().map(|g| g.dense1()).collect();
    let ann_slots: Vec<Vec<Scalar>> =
        gens_ann_sigma.iter().map(|x| x.components().to_vec()).collect();
    for point in &sample_points {
        let rs = linalg::rank_at_point(&chart, &sig_slots, point);
        let ra = linalg::rank_at_point(&chart, &ann_slots, point);
        if rs + ra != m {
            return Err(StructureError::RankDeficiency {
                family: "Sigma + ann Sigma",
                point: format_point(&chart, point),
                expected: m,
                got: rs + ra,
            });
        }
    }
    let gens_e: Vec<BigSection> =
        gens_sigma.iter().map(|s| BigSection::new(sharp(p, s), s.clone())).collect();
    let mut gens_ep: Vec<BigSection> = (0..m)
        .map(|i| {
            let dxi = KForm::coordinate(&chart, i);
            BigSection::new(sharp(p, &dxi), dxi)
        })
        .collect();
    gens_ep.extend(gens_ann_sigma.iter().map(BigSection::from_vector));
    BigIsoStructure::validate(gens_e, gens_ep, sample_points)
}

/// Bracket of 1-forms attached to a bivector:
/// `{a,b}_P = L_{i(a)P} b - L_{i(b)P} a - d(P(a,b))`.
pub fn bracket_one_forms(p: &KMultivector, a: &KForm, b: &KForm) -> KForm {
    assert_eq!(p.degree(), 2);
    assert_eq!(a.degree(), 1);
    assert_eq!(b.degree(), 1);
    let xa = sharp(p, a);
    let xb = sharp(p, b);
    let pab = p.eval(&[a, b]).unwrap();
    &(&lie_derivative(&xa, b) - &lie_derivative(&xb, a)) - &differential(&pab)
}

/// Closure report for a family of 1-forms under the 1-form bracket.
#[derive(Clone, Debug)]
pub struct SigmaClosureReport {
    /// Pairs whose bracket left the span, with the membership outcome.
    pub failures: Vec<(usize, usize, SpanOutcome)>,
}

impl SigmaClosureReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check that a family of 1-forms is closed under the bracket `{.,.}_P`.
/// Requires `P` to pass the Jacobi test.
pub fn check_sigma_closed(
    p: &KMultivector,
    gens_sigma: &[KForm],
) -> Result<SigmaClosureReport, StructureError> {
    if !poisson_check(p) {
        return Err(StructureError::NotPoisson);
    }
    let chart = p.chart().clone();
    let slots: Vec<Vec<Scalar>> = gens_sigma.iter().map(|g| g.dense1()).collect();
    let mut failures = Vec::new();
    for (i, a) in gens_sigma.iter().enumerate() {
        for (j, b) in gens_sigma.iter().enumerate().skip(i + 1) {
            let br = bracket_one_forms(p, a, b);
            let out = linalg::membership(&chart, &slots, &br.dense1());
            if !out.is_yes() {
                failures.push((i, j, out));
            }
        }
    }
    Ok(SigmaClosureReport { failures })
}

impl fmt::Display for BigIsoStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structure of rank {} on ({})", self.rank, self.chart)?;
        for (i, g) in self.gens_e.iter().enumerate() {
            writeln!(f, "  e{i} = {g}")?;
        }
        for (a, g) in self.gens_ep.iter().enumerate() {
            writeln!(f, "  f{a} = {g}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BigIsoStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
