//! Check dispatch and report emission.
//!
//! Every check request produces exactly one report with a status and, on
//! failure or indeterminacy, a rendered witness. Reports come out in
//! request order; the JSON stream is byte-identical across runs for the
//! same input and flags (wall-clock timing is reported in the text format
//! only and normalized to zero in JSON).

use std::fmt;
use std::time::Instant;

use bigiso::big_tangent::BigSection;
use bigiso::chart::Chart;
use bigiso::cochain::{check_complex, d_tr_eval, eval_sections, TruncCochain};
use bigiso::exterior::{exterior_derivative, KForm, VectorField};
use bigiso::foliation::{
    check_relations, d_s, decompose, graded_differential, poincare_solve_ds, recompose,
    FoliationChart, GradedPiece, PoincareSolution, STruncForm,
};
use bigiso::hamiltonian::{
    check_leibniz, hamiltonian_representative, verify_hamiltonian, HamMode,
};
use bigiso::linalg::SpanOutcome;
use bigiso::polarization::{
    check_operator_restriction, check_polarization, check_polarized_function,
    check_polarized_section, leaf_bracket, LeafSpec, PolFamily,
};
use bigiso::preq_space::{
    check_curvature_relation, check_lift_properties, lift_structure, psi_graph,
    pullback_two_form_graph, stable_span_equality, big_span_equality, LiftMode, LiftedStructure,
    QContext,
};
use bigiso::prequant::{
    check_gp_condition, check_integrality, commutator_check, quantum_operator, GPData,
    IntegralityVariant, LineSection,
};
use bigiso::scalar::{rat, Rat, Scalar};
use bigiso::structure::{
    build_graph_bivector, build_graph_two_form, check_integrable, check_sigma_closed,
    BigIsoStructure, Family,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::session::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => write!(f, "pass"),
            Status::Fail => write!(f, "fail"),
            Status::Indeterminate => write!(f, "indeterminate"),
            Status::Error => write!(f, "error"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub witness: Option<String>,
    pub millis: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct RunnerConfig {
    pub seed: u64,
    pub sample_points: usize,
}

impl Default for RunnerConfig {
    fn default() -> Self {
        RunnerConfig { seed: 2026, sample_points: 5 }
    }
}

struct Outcome {
    status: Status,
    witness: Option<String>,
}

impl Outcome {
    fn pass() -> Self {
        Outcome { status: Status::Pass, witness: None }
    }

    fn fail(witness: impl Into<String>) -> Self {
        Outcome { status: Status::Fail, witness: Some(witness.into()) }
    }

    fn indeterminate(witness: impl Into<String>) -> Self {
        Outcome { status: Status::Indeterminate, witness: Some(witness.into()) }
    }

    fn error(witness: impl Into<String>) -> Self {
        Outcome { status: Status::Error, witness: Some(witness.into()) }
    }

    fn of_pass(pass: bool, witness: impl Into<String>) -> Self {
        if pass {
            Outcome::pass()
        } else {
            Outcome::fail(witness)
        }
    }
}

fn random_points(cfg: &RunnerConfig, chart: &Chart) -> Vec<Vec<Rat>> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    (0..cfg.sample_points.max(1))
        .map(|_| {
            (0..chart.dim())
                .map(|_| rat(rng.gen_range(-5i64..=5), rng.gen_range(1i64..=3)))
                .collect()
        })
        .collect()
}

fn random_coeffs(rng: &mut ChaCha20Rng, chart: &Chart, n: usize) -> Vec<Scalar> {
    (0..n)
        .map(|_| {
            let c = Scalar::rational(chart, rat(rng.gen_range(-3i64..=3), 1));
            if rng.gen_bool(0.5) {
                let i = rng.gen_range(0..chart.dim());
                &c + &Scalar::coord(chart, i)
            } else {
                c
            }
        })
        .collect()
}

/// Validate a structure declaration against runner sample points.
fn build_structure(
    session: &Session,
    cfg: &RunnerConfig,
    name: &str,
) -> Result<BigIsoStructure, String> {
    let decl = &session.structures[name];
    let pts = random_points(cfg, &session.chart);
    match decl {
        StructureDecl::Explicit { gens_e, gens_ep } => {
            BigIsoStructure::validate(gens_e.clone(), gens_ep.clone(), pts)
                .map_err(|e| e.to_string())
        }
        StructureDecl::GraphTwoForm { lambda, gens_s, ann } => {
            build_graph_two_form(lambda, gens_s, ann, pts).map_err(|e| e.to_string())
        }
        StructureDecl::GraphBivector { p, sigma, ann } => {
            build_graph_bivector(p, sigma, ann, pts).map_err(|e| e.to_string())
        }
    }
}

fn build_gp(session: &Session, name: &str) -> Result<GPData, String> {
    let d = &session.gpdatas[name];
    GPData::new(d.varpi.clone(), d.u.clone(), d.nu.clone()).map_err(|e| e.to_string())
}

fn scalar_of(session: &Session, name: &str) -> Scalar {
    match &session.values[name] {
        Value::Scalar(s) => s.clone(),
        _ => unreachable!("resolved at parse time"),
    }
}

fn field_of(session: &Session, name: &str) -> VectorField {
    match &session.values[name] {
        Value::Field(x) => x.clone(),
        _ => unreachable!("resolved at parse time"),
    }
}

fn form_of(session: &Session, name: &str) -> KForm {
    match &session.values[name] {
        Value::Form(w) => w.clone(),
        _ => unreachable!("resolved at parse time"),
    }
}

fn section_of(session: &Session, name: &str) -> BigSection {
    match &session.values[name] {
        Value::Section(s) => s.clone(),
        _ => unreachable!("resolved at parse time"),
    }
}

fn bivector_of(session: &Session, name: &str) -> bigiso::exterior::KMultivector {
    match &session.values[name] {
        Value::Multivector(p) => p.clone(),
        _ => unreachable!("resolved at parse time"),
    }
}

fn ham_mode(m: ModeArg) -> HamMode {
    match m {
        ModeArg::Ham => HamMode::Ham,
        ModeArg::WHam => HamMode::WHam,
    }
}

fn representative_pair(
    session: &Session,
    s: &BigIsoStructure,
    f: &str,
    mode: HamMode,
) -> Result<bigiso::hamiltonian::HamiltonianPair, Outcome> {
    hamiltonian_representative(s, &scalar_of(session, f), mode)
        .map(|r| r.pair)
        .map_err(|e| Outcome::error(format!("no representative for `{f}`: {e}")))
}

fn span_outcome(outcome: &SpanOutcome, what: impl fmt::Display) -> Outcome {
    match outcome {
        SpanOutcome::Yes(_) => Outcome::pass(),
        SpanOutcome::No => Outcome::fail(format!("{what}: not in the span")),
        SpanOutcome::Indeterminate { locus, .. } => {
            Outcome::indeterminate(format!("{what}: denominator locus {locus}"))
        }
    }
}

fn run_one(session: &Session, cfg: &RunnerConfig, req: &CheckRequest) -> Outcome {
    match req {
        CheckRequest::Structure { structure } => match build_structure(session, cfg, structure) {
            Ok(_) => Outcome::pass(),
            Err(e) => Outcome::fail(e),
        },
        CheckRequest::Integrable { structure } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let report = check_integrable(&s);
            if report.is_pass() {
                Outcome::pass()
            } else {
                let w = &report.failures[0];
                Outcome::fail(format!(
                    "bracket of generators {} and {} escapes: {} (pairing {} with probe {})",
                    w.i, w.j, w.bracket, w.residual, w.probe
                ))
            }
        }
        CheckRequest::Member { structure, family, section, label } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let fam = match family {
                FamilyArg::E => Family::E,
                FamilyArg::EPrime => Family::EPrime,
            };
            span_outcome(&s.in_span(section, fam), label)
        }
        CheckRequest::Poisson { bivector } => {
            let p = bivector_of(session, bivector);
            Outcome::of_pass(
                bigiso::exterior::poisson_check(&p),
                "the Jacobi test fails on a coordinate triple",
            )
        }
        CheckRequest::SigmaClosed { bivector, forms } => {
            let p = bivector_of(session, bivector);
            let gens: Vec<KForm> = forms.iter().map(|f| form_of(session, f)).collect();
            match check_sigma_closed(&p, &gens) {
                Err(e) => Outcome::error(e.to_string()),
                Ok(report) if report.is_pass() => Outcome::pass(),
                Ok(report) => {
                    let (i, j, out) = &report.failures[0];
                    Outcome::fail(format!(
                        "bracket of {} and {} leaves the span ({out:?})",
                        forms[*i], forms[*j]
                    ))
                }
            }
        }
        CheckRequest::Hamiltonian { structure, mode, f, xf } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            match verify_hamiltonian(
                &s,
                &scalar_of(session, f),
                &field_of(session, xf),
                ham_mode(*mode),
            ) {
                Ok(_) => Outcome::pass(),
                Err(e) => Outcome::fail(e.to_string()),
            }
        }
        CheckRequest::Representative { structure, mode, f } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            match hamiltonian_representative(&s, &scalar_of(session, f), ham_mode(*mode)) {
                Ok(rep) => {
                    let amb: Vec<String> =
                        rep.ambiguity.iter().map(|z| format!("{z}")).collect();
                    Outcome {
                        status: Status::Pass,
                        witness: Some(format!(
                            "X = {}; ambiguity: [{}]",
                            rep.pair.field(),
                            amb.join(", ")
                        )),
                    }
                }
                Err(bigiso::hamiltonian::HamiltonianError::Unsolvable) => {
                    Outcome::fail("the differential is not attainable in the family")
                }
                Err(bigiso::hamiltonian::HamiltonianError::Indeterminate { locus }) => {
                    Outcome::indeterminate(format!("denominator locus {locus}"))
                }
                Err(e) => Outcome::error(e.to_string()),
            }
        }
        CheckRequest::Leibniz { structure, l, f, h } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let lp = match representative_pair(session, &s, l, HamMode::Ham) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let fp = match representative_pair(session, &s, f, HamMode::Ham) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let hp = match representative_pair(session, &s, h, HamMode::WHam) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let residual = check_leibniz(&lp, &fp, &hp);
            Outcome::of_pass(residual.is_zero(), format!("residual {residual}"))
        }
        CheckRequest::DtrComplex { structure } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let chart = s.chart().clone();
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x5eed);
            let mut table = bigiso::cochain::FrameTable::new();
            for a in 0..s.gens_ep().len() {
                table.insert(vec![], a as u8, random_coeffs(&mut rng, &chart, 1).pop().unwrap());
            }
            let t = TruncCochain::FrameTable { degree: 1, table };
            let mut tuples = Vec::new();
            let mut omega_tuples = Vec::new();
            for _ in 0..cfg.sample_points.max(1) {
                let e1 = s.combine(Family::E, &random_coeffs(&mut rng, &chart, s.gens_e().len()));
                let e2 = s.combine(Family::E, &random_coeffs(&mut rng, &chart, s.gens_e().len()));
                let y =
                    s.combine(Family::EPrime, &random_coeffs(&mut rng, &chart, s.gens_ep().len()));
                tuples.push((vec![e1.clone(), e2.clone()], y.clone()));
                omega_tuples.push((vec![e1, e2], y));
            }
            match check_complex(&s, &t, &tuples, &omega_tuples) {
                Err(e) => Outcome::error(e.to_string()),
                Ok(report) if report.is_pass() => Outcome::pass(),
                Ok(report) => {
                    let w = report
                        .d_squared_failures
                        .first()
                        .or(report.omega_failures.first())
                        .unwrap();
                    Outcome::fail(format!(
                        "tuple {}: residual {}",
                        w.tuple_index, w.residual
                    ))
                }
            }
        }
        CheckRequest::JMorphism { structure, form } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let chart = s.chart().clone();
            let w = form_of(session, form);
            let j = TruncCochain::j_map(&w);
            let jd = TruncCochain::j_map(&exterior_derivative(&w));
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x0031);
            for _ in 0..cfg.sample_points.max(1) {
                let need = w.degree();
                let e_args: Vec<BigSection> = (0..need.saturating_sub(0))
                    .map(|_| {
                        s.combine(Family::E, &random_coeffs(&mut rng, &chart, s.gens_e().len()))
                    })
                    .collect();
                let y =
                    s.combine(Family::EPrime, &random_coeffs(&mut rng, &chart, s.gens_ep().len()));
                let lhs = match d_tr_eval(&s, &j, &e_args, &y) {
                    Ok(v) => v,
                    Err(e) => return Outcome::error(e.to_string()),
                };
                let rhs = match eval_sections(&s, &jd, &e_args, &y) {
                    Ok(v) => v,
                    Err(e) => return Outcome::error(e.to_string()),
                };
                if lhs != rhs {
                    return Outcome::fail(format!("mismatch: {lhs} vs {rhs}"));
                }
            }
            Outcome::pass()
        }
        CheckRequest::GpCondition { gp, structure } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            match check_gp_condition(&g, &s) {
                Err(e) => Outcome::error(e.to_string()),
                Ok(report) if report.is_pass() => Outcome::pass(),
                Ok(report) => {
                    let w = &report.failures[0];
                    Outcome::fail(format!(
                        "pair (e{}, f{}): residual {}",
                        w.e_index, w.ep_index, w.residual
                    ))
                }
            }
        }
        CheckRequest::Integrality { structure, u, xi, variant } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let variants: &[IntegralityVariant] = match variant {
                VariantArg::Direct => &[IntegralityVariant::Direct],
                VariantArg::Lie => &[IntegralityVariant::Lie],
                VariantArg::Both => &[IntegralityVariant::Direct, IntegralityVariant::Lie],
            };
            match check_integrality(&s, &field_of(session, u), &form_of(session, xi), variants) {
                Err(e) => Outcome::fail(e.to_string()),
                Ok(report) if report.is_pass() => Outcome::pass(),
                Ok(report) => {
                    let w = &report.failures[0];
                    Outcome::fail(format!(
                        "pair (e{}, f{}) [{:?}]: residual {}",
                        w.e_index, w.ep_index, w.variant, w.residual
                    ))
                }
            }
        }
        CheckRequest::Commutator { gp, structure, f, h } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            let fp = match representative_pair(session, &s, f, HamMode::Ham) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let hp = match representative_pair(session, &s, h, HamMode::WHam) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let report = commutator_check(&g, &fp, &hp);
            Outcome::of_pass(report.is_pass(), format!("defect {}", report.defect))
        }
        CheckRequest::GaugeInvariance { gp, structure, nu, f, h } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            let shifted = match g.gauge_shift(&form_of(session, nu)) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e.to_string()),
            };
            for (name, mode) in [(f, HamMode::Ham), (h, HamMode::WHam)] {
                let pair = match representative_pair(session, &s, name, mode) {
                    Ok(p) => p,
                    Err(o) => return o,
                };
                let a = quantum_operator(&g, &pair);
                let b = quantum_operator(&shifted, &pair);
                if a.vector != b.vector || a.multiplier != b.multiplier {
                    return Outcome::fail(format!(
                        "operator of `{name}` changed: {} vs {}",
                        a, b
                    ));
                }
            }
            Outcome::pass()
        }
        CheckRequest::CurvatureRelation { gp } => {
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            let q = QContext::new(g);
            let report = check_curvature_relation(&q);
            if report.is_pass() {
                Outcome::pass()
            } else if let Some(w) = report.relation_failures.first() {
                Outcome::fail(format!(
                    "coordinates ({}, {}): residual {}",
                    w.i, w.j, w.residual
                ))
            } else {
                Outcome::fail(format!(
                    "lifted coordinate {} does not commute with the vertical field",
                    report.vertical_failures[0]
                ))
            }
        }
        CheckRequest::Comutant { gp, structure, f, h } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            let q = QContext::new(g);
            let fp = match representative_pair(session, &s, f, HamMode::Ham) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let hp = match representative_pair(session, &s, h, HamMode::WHam) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let residual = bigiso::preq_space::comutant_residual(&q, &fp, &hp);
            Outcome::of_pass(residual.is_zero(), format!("residual field {residual}"))
        }
        CheckRequest::Lift { gp, structure } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            let q = QContext::new(g);
            // invariance triples from the stable generators themselves
            let LiftedStructure::Stable { gens, .. } = lift_structure(&q, &s, LiftMode::Stable)
            else {
                unreachable!()
            };
            let mut triples = Vec::new();
            for x in gens.iter().take(3) {
                for y in gens.iter().take(3) {
                    for z in gens.iter().take(3) {
                        triples.push((x.clone(), y.clone(), z.clone()));
                    }
                }
            }
            let report = check_lift_properties(&q, &s, &triples);
            if report.is_pass() {
                Outcome::pass()
            } else {
                Outcome::fail(format!("{:?}", report.failures[0]))
            }
        }
        CheckRequest::LiftGraph { gp, structure } => {
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let q = QContext::new(g);
            match &session.structures[structure] {
                StructureDecl::GraphTwoForm { lambda, gens_s, .. } => {
                    let LiftedStructure::Pullback(pb) =
                        lift_structure(&q, &s, LiftMode::Pullback)
                    else {
                        unreachable!()
                    };
                    let graph = pullback_two_form_graph(&q, lambda, gens_s);
                    let eq = big_span_equality(q.total(), &pb, &graph);
                    Outcome::of_pass(eq.is_pass(), "pull-back differs from the graph")
                }
                StructureDecl::GraphBivector { p, sigma, .. } => {
                    let LiftedStructure::Stable { gens, .. } =
                        lift_structure(&q, &s, LiftMode::Stable)
                    else {
                        unreachable!()
                    };
                    let graph = psi_graph(&q, p, sigma);
                    let eq = stable_span_equality(q.total(), &gens, &graph);
                    Outcome::of_pass(eq.is_pass(), "stable lift differs from the graph")
                }
                StructureDecl::Explicit { .. } => Outcome::error(
                    "lift-graph needs a structure declared through graph2 or graphP",
                ),
            }
        }
        CheckRequest::Polarization { structure, pol } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let report = check_polarization(&s, &session.polarizations[pol]);
            if report.is_pass() {
                Outcome::pass()
            } else {
                Outcome::fail(format!("{:?}", report.failures[0]))
            }
        }
        CheckRequest::PolarizedSection { gp, pol, family, phi } => {
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            let fam = match family {
                PolFamilyArg::P => PolFamily::P,
                PolFamilyArg::PPrime => PolFamily::PPrime,
            };
            let report = check_polarized_section(
                &g,
                &session.polarizations[pol],
                &LineSection::new(scalar_of(session, phi)),
                fam,
            );
            if report.is_pass() {
                Outcome::pass()
            } else {
                let w = &report.failures[0];
                Outcome::fail(format!("generator {}: residual {}", w.index, w.residual))
            }
        }
        CheckRequest::PolarizedFunction { structure, pol, mode, f } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let pair = match representative_pair(session, &s, f, ham_mode(*mode)) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let report = check_polarized_function(&s, &session.polarizations[pol], &pair);
            if report.is_pass() {
                Outcome::pass()
            } else {
                let w = &report.failures[0];
                Outcome::fail(format!("generator {}: {:?}", w.index, w.outcome))
            }
        }
        CheckRequest::OperatorRestriction { gp, structure, pol, f, phi } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let g = match build_gp(session, gp) {
                Ok(g) => g,
                Err(e) => return Outcome::error(e),
            };
            let pair = match representative_pair(session, &s, f, HamMode::WHam) {
                Ok(p) => p,
                Err(o) => return o,
            };
            let report = check_operator_restriction(
                &g,
                &s,
                &session.polarizations[pol],
                &pair,
                &LineSection::new(scalar_of(session, phi)),
            );
            Outcome::of_pass(report.is_pass(), format!("{report:?}"))
        }
        CheckRequest::LeafBracket { structure, a, b, fixed } => {
            let s = match build_structure(session, cfg, structure) {
                Ok(s) => s,
                Err(e) => return Outcome::error(e),
            };
            let leaf = LeafSpec { fixed: fixed.clone() };
            let sa = section_of(session, a);
            let sb = section_of(session, b);
            match leaf_bracket(&s, &sa, &sb, &leaf) {
                Err(e) => Outcome::fail(e.to_string()),
                Ok(base) => {
                    // extension independence: shift the second argument by a
                    // vanishing multiple of each orthogonal generator
                    for (i, _) in fixed {
                        let chart = s.chart().clone();
                        let vanishing = Scalar::coord(&chart, *i);
                        for gen in s.gens_ep() {
                            let shifted = &sb + &gen.scale(&vanishing);
                            match leaf_bracket(&s, &sa, &shifted, &leaf) {
                                Err(e) => return Outcome::error(e.to_string()),
                                Ok(other) => {
                                    if other != base {
                                        return Outcome::fail(
                                            "restriction depends on the extension",
                                        );
                                    }
                                }
                            }
                        }
                    }
                    Outcome {
                        status: Status::Pass,
                        witness: Some(format!("restricted bracket ( {} , {} )", base.vf, base.form)),
                    }
                }
            }
        }
        CheckRequest::FoliationRelations { foliation } => {
            let decl = &session.foliations[foliation];
            let fc = match FoliationChart::from_frame(&session.chart, decl.leaf_dim, &decl.frames)
            {
                Ok(fc) => fc,
                Err(e) => return Outcome::error(e.to_string()),
            };
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0xf01d);
            let mut samples = Vec::new();
            for _ in 0..cfg.sample_points.max(1) {
                for degree in 1..=2usize.min(session.chart.dim()) {
                    let mut w = KForm::zero(&session.chart, degree);
                    for i in 0..session.chart.dim() {
                        let j = (i + 1) % session.chart.dim();
                        if degree == 1 {
                            w = &w
                                + &KForm::coordinate(&session.chart, i)
                                    .scale(&random_coeffs(&mut rng, &session.chart, 1)[0]);
                        } else if i < j {
                            w = &w
                                + &KForm::coordinate(&session.chart, i)
                                    .wedge(&KForm::coordinate(&session.chart, j))
                                    .scale(&random_coeffs(&mut rng, &session.chart, 1)[0]);
                        }
                    }
                    samples.push(decompose(&fc, &w));
                }
            }
            let report = check_relations(&fc, &samples);
            Outcome::of_pass(report.is_pass(), format!("{report:?}"))
        }
        CheckRequest::DsSquared { foliation, s } => {
            let decl = &session.foliations[foliation];
            let fc = match FoliationChart::from_frame(&session.chart, decl.leaf_dim, &decl.frames)
            {
                Ok(fc) => fc,
                Err(e) => return Outcome::error(e.to_string()),
            };
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0xd5d5);
            for _ in 0..cfg.sample_points.max(1) {
                for degree in 1..=2usize.min(session.chart.dim()) {
                    let mut w = KForm::zero(&session.chart, degree);
                    for i in 0..session.chart.dim().saturating_sub(degree - 1) {
                        let mut part = KForm::coordinate(&session.chart, i);
                        if degree == 2 {
                            part = part.wedge(&KForm::coordinate(
                                &session.chart,
                                (i + 1) % session.chart.dim(),
                            ));
                        }
                        w = &w + &part.scale(&random_coeffs(&mut rng, &session.chart, 1)[0]);
                    }
                    let t = STruncForm::new(*s, degree, decompose(&fc, &w).truncate(*s));
                    let once = d_s(&fc, &t);
                    if !d_s(&fc, &once).is_zero() {
                        return Outcome::fail(format!("degree {degree} sample fails"));
                    }
                }
            }
            Outcome::pass()
        }
        CheckRequest::Poincare { foliation, s, form } => {
            let decl = &session.foliations[foliation];
            let fc = match FoliationChart::from_frame(&session.chart, decl.leaf_dim, &decl.frames)
            {
                Ok(fc) => fc,
                Err(e) => return Outcome::error(e.to_string()),
            };
            let w = form_of(session, form);
            let mu0 = STruncForm::new(*s, w.degree(), decompose(&fc, &w).truncate(*s));
            let lam = d_s(&fc, &mu0);
            match poincare_solve_ds(&fc, &lam) {
                Err(e) => Outcome::error(e.to_string()),
                Ok(PoincareSolution::Primitive(mu)) => Outcome::of_pass(
                    d_s(&fc, &mu).form == lam.form,
                    "primitive does not re-substitute",
                ),
                Ok(PoincareSolution::WithBasic { mu, nu }) => {
                    let basic_ok =
                        graded_differential(&fc, &nu, GradedPiece::DDouble).is_zero();
                    let lhs = recompose(&fc, &lam.form);
                    let rhs = &exterior_derivative(&recompose(&fc, &mu.form))
                        + &recompose(&fc, &nu);
                    Outcome::of_pass(basic_ok && lhs == rhs, "splitting does not re-substitute")
                }
            }
        }
        CheckRequest::Decompose { foliation, form } => {
            let decl = &session.foliations[foliation];
            let fc = match FoliationChart::from_frame(&session.chart, decl.leaf_dim, &decl.frames)
            {
                Ok(fc) => fc,
                Err(e) => return Outcome::error(e.to_string()),
            };
            let w = form_of(session, form);
            let back = recompose(&fc, &decompose(&fc, &w));
            Outcome::of_pass(back == w, format!("recomposition differs: {back}"))
        }
    }
}

/// Run every requested check, optionally filtered by check name.
pub fn run_checks(
    session: &Session,
    cfg: &RunnerConfig,
    only: Option<&str>,
) -> Vec<CheckReport> {
    let mut out = Vec::new();
    for req in &session.checks {
        if let Some(filter) = only {
            if req.name() != filter {
                continue;
            }
        }
        let start = Instant::now();
        let outcome = run_one(session, cfg, req);
        let millis = start.elapsed().as_millis() as u64;
        out.push(CheckReport {
            check: req.name().to_string(),
            status: outcome.status,
            witness: outcome.witness,
            millis,
        });
    }
    out
}

/// Exit code per report list: 2 for any indeterminate/error, else 1 for any
/// failure, else 0.
pub fn exit_code(reports: &[CheckReport]) -> i32 {
    if reports
        .iter()
        .any(|r| matches!(r.status, Status::Indeterminate | Status::Error))
    {
        2
    } else if reports.iter().any(|r| r.status == Status::Fail) {
        1
    } else {
        0
    }
}

/// JSON lines, deterministic: timing is normalized to zero.
pub fn emit_json(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let normalized = CheckReport { millis: 0, ..r.clone() };
        out.push_str(&serde_json::to_string(&normalized).expect("serializable"));
        out.push('\n');
    }
    out
}

/// Human-readable aligned table with wall-clock timings.
pub fn emit_text(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    let name_w = reports.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
    out.push_str(&format!("{:<name_w$}  {:<13}  {:>7}  witness\n", "check", "status", "millis"));
    for r in reports {
        out.push_str(&format!(
            "{:<name_w$}  {:<13}  {:>7}  {}\n",
            r.check,
            r.status.to_string(),
            r.millis,
            r.witness.as_deref().unwrap_or("-")
        ));
    }
    out
}
