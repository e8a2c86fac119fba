//! Polarizations of an integrable big-isotropic structure: generator
//! families `P` inside `E` and `P'` inside `E'` subject to containment,
//! bracket-closure and vanishing-pairing conditions, the induced spaces of
//! polarized sections and functions, operator restriction, and the
//! leaf-wise bracket of the regular point-wise case.

use thiserror::Error;

use crate::big_tangent::{courant_bracket, pairing_omega, BigSection};
use crate::chart::Chart;
use crate::exterior::VectorField;
use crate::hamiltonian::{HamMode, HamiltonianPair};
use crate::linalg::{self, SpanOutcome};
use crate::prequant::{quantum_operator, GPData, LineSection};
use crate::scalar::{Rat, Scalar};
use crate::structure::{BigIsoStructure, Family};

#[derive(Debug, Error)]
pub enum PolarizationError {
    #[error("generator {index} of {list} must have zero form part")]
    NotVectorial { list: &'static str, index: usize },
    #[error("the chosen leaf is not a slice of the characteristic distribution: generator {gen} keeps a transverse component along {coord}")]
    NotOnLeaf { gen: usize, coord: String },
}

/// Generator data of a candidate polarization.
#[derive(Clone, Debug)]
pub struct PolarizationSpec {
    /// Generators of `P` (should lie in the span of the `E` generators).
    pub gens_p: Vec<BigSection>,
    /// Generators of `P'` (inside the span of the `E'` generators).
    pub gens_pp: Vec<BigSection>,
    /// Supplied generators of the pure-vector sections of `E`.
    pub tm_cap_e: Vec<VectorField>,
    /// Supplied generators of the pure-vector sections of `E'`.
    pub tm_cap_ep: Vec<VectorField>,
}

/// One failed condition of [`check_polarization`].
#[derive(Debug)]
pub enum PolarizationFailure {
    /// A `P` generator is outside the `P'` span.
    Containment { index: usize, outcome: SpanOutcome },
    /// A supplied pure-vector generator is outside `P` (resp. `P'`).
    VectorSections { prime: bool, index: usize, outcome: SpanOutcome },
    /// A supplied pure-vector generator is not even in `E` (resp. `E'`).
    VectorMembership { prime: bool, index: usize, outcome: SpanOutcome },
    /// `[P,P]` escaped `P`.
    ClosurePP { i: usize, j: usize, outcome: SpanOutcome },
    /// `[P,P']` escaped `P'`.
    ClosurePPp { i: usize, j: usize, outcome: SpanOutcome },
    /// The canonical pairing does not vanish on a generator pair.
    Omega { i: usize, j: usize, residual: Scalar },
}

#[derive(Debug, Default)]
pub struct PolarizationReport {
    pub failures: Vec<PolarizationFailure>,
}

impl PolarizationReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

fn big_membership(chart: &Chart, gens: &[BigSection], target: &BigSection) -> SpanOutcome {
    let cols: Vec<Vec<Scalar>> = gens.iter().map(|g| g.slots()).collect();
    linalg::membership(chart, &cols, &target.slots())
}

/// Verify all polarization conditions for the spec against a validated
/// integrable structure.
pub fn check_polarization(s: &BigIsoStructure, p: &PolarizationSpec) -> PolarizationReport {
    let chart = s.chart().clone();
    let mut failures = Vec::new();
    // P inside P'
    for (index, g) in p.gens_p.iter().enumerate() {
        let outcome = big_membership(&chart, &p.gens_pp, g);
        if !outcome.is_yes() {
            failures.push(PolarizationFailure::Containment { index, outcome });
        }
    }
    // supplied pure-vector sections: memberships in E/E' and in P/P'
    for (index, z) in p.tm_cap_e.iter().enumerate() {
        let sec = BigSection::from_vector(z);
        let outcome = s.in_span(&sec, Family::E);
        if !outcome.is_yes() {
            failures.push(PolarizationFailure::VectorMembership { prime: false, index, outcome });
        }
        let outcome = big_membership(&chart, &p.gens_p, &sec);
        if !outcome.is_yes() {
            failures.push(PolarizationFailure::VectorSections { prime: false, index, outcome });
        }
    }
    for (index, z) in p.tm_cap_ep.iter().enumerate() {
        let sec = BigSection::from_vector(z);
        let outcome = s.in_span(&sec, Family::EPrime);
        if !outcome.is_yes() {
            failures.push(PolarizationFailure::VectorMembership { prime: true, index, outcome });
        }
        let outcome = big_membership(&chart, &p.gens_pp, &sec);
        if !outcome.is_yes() {
            failures.push(PolarizationFailure::VectorSections { prime: true, index, outcome });
        }
    }
    // bracket closures
    for i in 0..p.gens_p.len() {
        for j in (i + 1)..p.gens_p.len() {
            let br = courant_bracket(&p.gens_p[i], &p.gens_p[j]);
            let outcome = big_membership(&chart, &p.gens_p, &br);
            if !outcome.is_yes() {
                failures.push(PolarizationFailure::ClosurePP { i, j, outcome });
            }
        }
    }
    for (i, a) in p.gens_p.iter().enumerate() {
        for (j, b) in p.gens_pp.iter().enumerate() {
            let br = courant_bracket(a, b);
            let outcome = big_membership(&chart, &p.gens_pp, &br);
            if !outcome.is_yes() {
                failures.push(PolarizationFailure::ClosurePPp { i, j, outcome });
            }
        }
    }
    // vanishing pairing on P x P'
    for (i, a) in p.gens_p.iter().enumerate() {
        for (j, b) in p.gens_pp.iter().enumerate() {
            let r = pairing_omega(a, b);
            if !r.is_zero() {
                failures.push(PolarizationFailure::Omega { i, j, residual: r });
            }
        }
    }
    failures.into_iter().fold(PolarizationReport::default(), |mut rep, f| {
        rep.failures.push(f);
        rep
    })
}

/// Which family of the polarization a section condition runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolFamily {
    P,
    PPrime,
}

/// One failing generator of the polarized-section condition, with the
/// residual of `Y(phi) + c varpi(Y) phi + c theta(Y,b) phi`.
#[derive(Debug)]
pub struct SectionWitness {
    pub index: usize,
    pub residual: Scalar,
}

#[derive(Debug, Default)]
pub struct SectionReport {
    pub failures: Vec<SectionWitness>,
}

impl SectionReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check that `s = phi * 1` is covariantly flat along the chosen family in
/// the cochain-twisted sense: `Y(phi) + c varpi(Y) phi = -c theta(y) phi`
/// for every generator `y = (Y, b)`.
pub fn check_polarized_section(
    g: &GPData,
    p: &PolarizationSpec,
    section: &LineSection,
    family: PolFamily,
) -> SectionReport {
    let chart = g.chart().clone();
    let c = Scalar::formal_c(&chart);
    let gens = match family {
        PolFamily::P => &p.gens_p,
        PolFamily::PPrime => &p.gens_pp,
    };
    let mut failures = Vec::new();
    for (index, y) in gens.iter().enumerate() {
        let covariant = &y.vf.apply(&section.phi)
            + &(&(&c * &g.varpi().pair(&y.vf)) * &section.phi);
        let twist = &(&c * &g.theta_eval(y)) * &section.phi;
        let residual = &covariant + &twist;
        if !residual.is_zero() {
            failures.push(SectionWitness { index, residual });
        }
    }
    SectionReport { failures }
}

/// One failing generator of the polarized-function condition.
#[derive(Debug)]
pub struct FunctionWitness {
    pub index: usize,
    pub outcome: SpanOutcome,
}

#[derive(Debug, Default)]
pub struct FunctionReport {
    pub failures: Vec<FunctionWitness>,
}

impl FunctionReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A Hamiltonian pair is polarized when `[(X_f,df), (Z,z)]` stays in `P'`
/// for every `P'` generator; a weak-Hamiltonian pair when
/// `[(Y,b), (X_h,dh)]` stays in `P'` for every `P` generator.
pub fn check_polarized_function(
    _s: &BigIsoStructure,
    p: &PolarizationSpec,
    pair: &HamiltonianPair,
) -> FunctionReport {
    let chart = pair.section().chart().clone();
    let sec = pair.section();
    let mut failures = Vec::new();
    match pair.mode() {
        HamMode::Ham => {
            for (index, z) in p.gens_pp.iter().enumerate() {
                let br = courant_bracket(&sec, z);
                let outcome = big_membership(&chart, &p.gens_pp, &br);
                if !outcome.is_yes() {
                    failures.push(FunctionWitness { index, outcome });
                }
            }
        }
        HamMode::WHam => {
            for (index, y) in p.gens_p.iter().enumerate() {
                let br = courant_bracket(y, &sec);
                let outcome = big_membership(&chart, &p.gens_pp, &br);
                if !outcome.is_yes() {
                    failures.push(FunctionWitness { index, outcome });
                }
            }
        }
    }
    FunctionReport { failures }
}

/// Result of [`check_operator_restriction`].
#[derive(Debug)]
pub struct RestrictionReport {
    /// The function must be polarized.
    pub function: FunctionReport,
    /// The input section must satisfy the `P'` conditions.
    pub input: SectionReport,
    /// The output section must satisfy the target-family conditions.
    pub output: SectionReport,
    /// Residuals of the output under ambiguity shifts of the field.
    pub ambiguity_defects: Vec<(usize, Scalar)>,
}

impl RestrictionReport {
    pub fn is_pass(&self) -> bool {
        self.function.is_pass()
            && self.input.is_pass()
            && self.output.is_pass()
            && self.ambiguity_defects.is_empty()
    }
}

/// Check that the quantum operator of a polarized pair maps polarized
/// sections where it should: into the `P`-flat space for a weak-Hamiltonian
/// pair, into the `P'`-flat space for a Hamiltonian pair; and that the
/// output is unchanged under every supplied ambiguity shift of the field.
pub fn check_operator_restriction(
    g: &GPData,
    s: &BigIsoStructure,
    p: &PolarizationSpec,
    pair: &HamiltonianPair,
    section: &LineSection,
) -> RestrictionReport {
    let function = check_polarized_function(s, p, pair);
    let input = check_polarized_section(g, p, section, PolFamily::PPrime);
    let op = quantum_operator(g, pair);
    let out = op.apply(section);
    let target = match pair.mode() {
        HamMode::WHam => PolFamily::P,
        HamMode::Ham => PolFamily::PPrime,
    };
    let output = check_polarized_section(g, p, &out, target);
    let shifts = match pair.mode() {
        HamMode::WHam => &p.tm_cap_ep,
        HamMode::Ham => &p.tm_cap_e,
    };
    let mut ambiguity_defects = Vec::new();
    for (i, z) in shifts.iter().enumerate() {
        if let Ok(shifted) = pair.shifted(s, z) {
            let out2 = quantum_operator(g, &shifted).apply(section);
            let defect = &out2.phi - &out.phi;
            if !defect.is_zero() {
                ambiguity_defects.push((i, defect));
            }
        }
    }
    RestrictionReport { function, input, output, ambiguity_defects }
}

/// For candidate data violating the vanishing-pairing condition, a nonzero
/// section satisfying the `P'` conditions forces the products
/// `omega(y, z) * phi` to vanish; the returned witnesses are the nonzero
/// products, which certify that no such section exists.
pub fn omega_necessity_witnesses(
    g: &GPData,
    p: &PolarizationSpec,
    section: &LineSection,
) -> Vec<(usize, usize, Scalar)> {
    let _ = g;
    let mut out = Vec::new();
    for (i, a) in p.gens_p.iter().enumerate() {
        for (j, b) in p.gens_pp.iter().enumerate() {
            let w = pairing_omega(a, b);
            let prod = &w * &section.phi;
            if !prod.is_zero() {
                out.push((i, j, prod));
            }
        }
    }
    out
}

/// A coordinate slice: the listed coordinates are frozen at rational values.
#[derive(Clone, Debug)]
pub struct LeafSpec {
    pub fixed: Vec<(usize, Rat)>,
}

impl LeafSpec {
    pub fn whole_chart() -> Self {
        LeafSpec { fixed: vec![] }
    }

    fn restrict_scalar(&self, chart: &Chart, s: &Scalar) -> Scalar {
        let mut out = s.clone();
        for (i, v) in &self.fixed {
            out = out.substitute(*i, &Scalar::rational(chart, v.clone()));
        }
        out
    }

    pub fn restrict_section(&self, x: &BigSection) -> BigSection {
        let chart = x.chart().clone();
        let mut out = x.clone();
        for (i, v) in &self.fixed {
            out = out.substitute(*i, &Scalar::rational(&chart, v.clone()));
        }
        out
    }
}

/// Leaf-wise bracket: bracket the global extensions, then restrict to the
/// slice. Well defined because the slice is tangent to the characteristic
/// distribution; that tangency is verified on the `E` generators and the
/// first argument.
pub fn leaf_bracket(
    s: &BigIsoStructure,
    a: &BigSection,
    b: &BigSection,
    leaf: &LeafSpec,
) -> Result<BigSection, PolarizationError> {
    let chart = s.chart().clone();
    for (gen, e) in s.gens_e().iter().enumerate() {
        for (i, _) in &leaf.fixed {
            let comp = leaf.restrict_scalar(&chart, e.vf.component(*i));
            if !comp.is_zero() {
                return Err(PolarizationError::NotOnLeaf {
                    gen,
                    coord: chart.name(*i).to_string(),
                });
            }
        }
    }
    for (i, _) in &leaf.fixed {
        let comp = leaf.restrict_scalar(&chart, a.vf.component(*i));
        if !comp.is_zero() {
            return Err(PolarizationError::NotOnLeaf {
                gen: usize::MAX,
                coord: chart.name(*i).to_string(),
            });
        }
    }
    Ok(leaf.restrict_section(&courant_bracket(a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::KForm;
    use crate::hamiltonian::hamiltonian_representative;
    use crate::scalar::rat_int;
    use crate::structure::build_graph_two_form;

    /// Presymplectic slice chart (q, p, w) with the 2-form dq^dp over
    /// S = span{Dq, Dp}; transverse direction w.
    fn slice_structure() -> BigIsoStructure {
        let ch = Chart::new(&["q", "p", "w"]).unwrap();
        let lam = KForm::coordinate(&ch, 0).wedge(&KForm::coordinate(&ch, 1));
        build_graph_two_form(
            &lam,
            &[VectorField::coordinate(&ch, 0), VectorField::coordinate(&ch, 1)],
            &[KForm::coordinate(&ch, 2)],
            vec![
                vec![rat_int(1), rat_int(2), rat_int(0)],
                vec![rat_int(-1), rat_int(1), rat_int(2)],
            ],
        )
        .unwrap()
    }

    fn slice_polarization(s: &BigIsoStructure) -> PolarizationSpec {
        let ch = s.chart().clone();
        // P = span{(Dp, -dq)}, P' = P + span{(Dw, 0)} + span{(0, dw)}
        let p_gen = BigSection::new(VectorField::coordinate(&ch, 1), -&KForm::coordinate(&ch, 0));
        PolarizationSpec {
            gens_p: vec![p_gen.clone()],
            gens_pp: vec![
                p_gen,
                BigSection::from_vector(&VectorField::coordinate(&ch, 2)),
                BigSection::from_form(&KForm::coordinate(&ch, 2)),
            ],
            tm_cap_e: vec![],
            tm_cap_ep: vec![VectorField::coordinate(&ch, 2)],
        }
    }

    fn slice_gp(ch: &Chart) -> GPData {
        // varpi = -p dq has d varpi = dq^dp and annihilates Dp and Dw
        let varpi = -&KForm::coordinate(ch, 0).scale(&Scalar::coord(ch, 1));
        GPData::new(varpi, VectorField::zero(ch), KForm::zero(ch, 1)).unwrap()
    }

    #[test]
    fn coordinate_polarization_passes() {
        let s = slice_structure();
        let p = slice_polarization(&s);
        let report = check_polarization(&s, &p);
        assert!(report.is_pass(), "{:?}", report.failures);
    }

    #[test]
    fn trivial_polarization_passes() {
        let s = slice_structure();
        let ch = s.chart().clone();
        // P = pure-vector sections of E (none), P' = span{(Dw,0)}
        let p = PolarizationSpec {
            gens_p: vec![],
            gens_pp: vec![BigSection::from_vector(&VectorField::coordinate(&ch, 2))],
            tm_cap_e: vec![],
            tm_cap_ep: vec![VectorField::coordinate(&ch, 2)],
        };
        assert!(check_polarization(&s, &p).is_pass());
    }

    #[test]
    fn omega_condition_violation_detected() {
        let s = slice_structure();
        let ch = s.chart().clone();
        let mut p = slice_polarization(&s);
        // enlarge P' by (Dq, dp): pairing with (Dp, -dq) is -1
        p.gens_pp.push(BigSection::new(
            VectorField::coordinate(&ch, 0),
            KForm::coordinate(&ch, 1),
        ));
        let report = check_polarization(&s, &p);
        assert!(report
            .failures
            .iter()
            .any(|f| matches!(f, PolarizationFailure::Omega { .. })));
        // and the necessity witnesses are nonzero for any nonzero section
        let g = slice_gp(&ch);
        let phi = LineSection::new(Scalar::coord(&ch, 0));
        assert!(!omega_necessity_witnesses(&g, &p, &phi).is_empty());
    }

    #[test]
    fn polarized_sections() {
        let s = slice_structure();
        let ch = s.chart().clone();
        let g = slice_gp(&ch);
        let p = slice_polarization(&s);
        // phi(q) is flat along P'
        let phi = LineSection::new(&Scalar::coord(&ch, 0) * &Scalar::coord(&ch, 0));
        assert!(check_polarized_section(&g, &p, &phi, PolFamily::PPrime).is_pass());
        // phi = p fails with residual 1 on the first generator
        let bad = LineSection::new(Scalar::coord(&ch, 1));
        let report = check_polarized_section(&g, &p, &bad, PolFamily::P);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].residual, Scalar::one(&ch));
        // the zero section is vacuously flat
        let zero = LineSection::new(Scalar::zero(&ch));
        assert!(check_polarized_section(&g, &p, &zero, PolFamily::PPrime).is_pass());
    }

    #[test]
    fn polarized_functions_and_restriction() {
        let s = slice_structure();
        let ch = s.chart().clone();
        let g = slice_gp(&ch);
        let p = slice_polarization(&s);
        let q_coord = Scalar::coord(&ch, 0);
        let qp = &q_coord * &Scalar::coord(&ch, 1);
        for f in [q_coord.clone(), &q_coord * &q_coord, qp] {
            let rep = hamiltonian_representative(&s, &f, HamMode::WHam).unwrap();
            assert!(check_polarized_function(&s, &p, &rep.pair).is_pass());
            let phi = LineSection::new(&q_coord * &q_coord);
            let report = check_operator_restriction(&g, &s, &p, &rep.pair, &phi);
            assert!(report.is_pass(), "{report:?}");
        }
        // p^2 is not polarized: the bracket with (Dp,-dq) escapes P'.
        let bad = hamiltonian_representative(
            &s,
            &(&Scalar::coord(&ch, 1) * &Scalar::coord(&ch, 1)),
            HamMode::WHam,
        )
        .unwrap();
        assert!(!check_polarized_function(&s, &p, &bad.pair).is_pass());
    }

    #[test]
    fn leaf_bracket_extension_independence() {
        let s = slice_structure();
        let ch = s.chart().clone();
        // leaf w = 0
        let leaf = LeafSpec { fixed: vec![(2, rat_int(0))] };
        let a = s.gens_e()[0].clone();
        let b = s.gens_ep()[0].clone();
        let base = leaf_bracket(&s, &a, &b, &leaf).unwrap();
        // extend b by w * (another E' generator)
        let w = Scalar::coord(&ch, 2);
        let b2 = &b + &s.gens_ep()[1].scale(&w);
        let shifted = leaf_bracket(&s, &a, &b2, &leaf).unwrap();
        assert_eq!(base, shifted);
        // whole-chart leaf equals the plain bracket
        let whole = leaf_bracket(&s, &a, &b, &LeafSpec::whole_chart()).unwrap();
        assert_eq!(whole, courant_bracket(&a, &b));
    }

    #[test]
    fn leaf_bracket_rejects_transverse_slices() {
        let s = slice_structure();
        // freezing q is not allowed: E has generators with Dq components
        let leaf = LeafSpec { fixed: vec![(0, rat_int(0))] };
        let a = s.gens_e()[0].clone();
        let b = s.gens_ep()[0].clone();
        assert!(matches!(
            leaf_bracket(&s, &a, &b, &leaf),
            Err(PolarizationError::NotOnLeaf { .. })
        ));
    }
}
