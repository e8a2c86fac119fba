//! The session model: one chart, named objects, and an ordered list of
//! check requests. Pretty-printing emits canonical source that parses back
//! to an equivalent model.

use std::collections::BTreeMap;
use std::fmt;

use bigiso::big_tangent::BigSection;
use bigiso::chart::Chart;
use bigiso::exterior::{KForm, KMultivector, VectorField};
use bigiso::polarization::PolarizationSpec;
use bigiso::scalar::{Rat, Scalar};

/// A named value of any algebraic kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(Scalar),
    Form(KForm),
    Multivector(KMultivector),
    Field(VectorField),
    Section(BigSection),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Form(_) => "form",
            Value::Multivector(_) => "bivector",
            Value::Field(_) => "vfield",
            Value::Section(_) => "section",
        }
    }
}

/// Raw structure declaration; validation happens at check time with the
/// runner's sample points.
#[derive(Clone, Debug, PartialEq)]
pub enum StructureDecl {
    Explicit { gens_e: Vec<BigSection>, gens_ep: Vec<BigSection> },
    GraphTwoForm { lambda: KForm, gens_s: Vec<VectorField>, ann: Vec<KForm> },
    GraphBivector { p: KMultivector, sigma: Vec<KForm>, ann: Vec<VectorField> },
}

/// Raw foliation declaration: leaf dimension and complement frame fields.
#[derive(Clone, Debug, PartialEq)]
pub struct FoliationDecl {
    pub leaf_dim: usize,
    pub frames: Vec<VectorField>,
}

/// Raw prequantization data.
#[derive(Clone, Debug, PartialEq)]
pub struct GpDecl {
    pub varpi: KForm,
    pub u: VectorField,
    pub nu: KForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyArg {
    E,
    EPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Ham,
    WHam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    Direct,
    Lie,
    Both,
}

/// One check request, with resolved names.
#[derive(Clone, Debug, PartialEq)]
pub enum CheckRequest {
    Structure { structure: String },
    Integrable { structure: String },
    Member { structure: String, family: FamilyArg, section: BigSection, label: String },
    Poisson { bivector: String },
    SigmaClosed { bivector: String, forms: Vec<String> },
    Hamiltonian { structure: String, mode: ModeArg, f: String, xf: String },
    Representative { structure: String, mode: ModeArg, f: String },
    Leibniz { structure: String, l: String, f: String, h: String },
    DtrComplex { structure: String },
    JMorphism { structure: String, form: String },
    GpCondition { gp: String, structure: String },
    Integrality { structure: String, u: String, xi: String, variant: VariantArg },
    Commutator { gp: String, structure: String, f: String, h: String },
    GaugeInvariance { gp: String, structure: String, nu: String, f: String, h: String },
    CurvatureRelation { gp: String },
    Comutant { gp: String, structure: String, f: String, h: String },
    Lift { gp: String, structure: String },
    LiftGraph { gp: String, structure: String },
    Polarization { structure: String, pol: String },
    PolarizedSection { gp: String, pol: String, family: PolFamilyArg, phi: String },
    PolarizedFunction { structure: String, pol: String, mode: ModeArg, f: String },
    OperatorRestriction { gp: String, structure: String, pol: String, f: String, phi: String },
    LeafBracket { structure: String, a: String, b: String, fixed: Vec<(usize, Rat)> },
    FoliationRelations { foliation: String },
    DsSquared { foliation: String, s: usize },
    Poincare { foliation: String, s: usize, form: String },
    Decompose { foliation: String, form: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolFamilyArg {
    P,
    PPrime,
}

impl CheckRequest {
    /// The check name used for reports and `--only` filtering.
    pub fn name(&self) -> &'static str {
        match self {
            CheckRequest::Structure { .. } => "structure",
            CheckRequest::Integrable { .. } => "integrable",
            CheckRequest::Member { .. } => "member",
            CheckRequest::Poisson { .. } => "poisson",
            CheckRequest::SigmaClosed { .. } => "sigma-closed",
            CheckRequest::Hamiltonian { .. } => "hamiltonian",
            CheckRequest::Representative { .. } => "representative",
            CheckRequest::Leibniz { .. } => "leibniz",
            CheckRequest::DtrComplex { .. } => "dtr-complex",
            CheckRequest::JMorphism { .. } => "j-morphism",
            CheckRequest::GpCondition { .. } => "gp-condition",
            CheckRequest::Integrality { .. } => "integrality",
            CheckRequest::Commutator { .. } => "commutator",
            CheckRequest::GaugeInvariance { .. } => "gauge-invariance",
            CheckRequest::CurvatureRelation { .. } => "curvature-relation",
            CheckRequest::Comutant { .. } => "comutant",
            CheckRequest::Lift { .. } => "lift",
            CheckRequest::LiftGraph { .. } => "lift-graph",
            CheckRequest::Polarization { .. } => "polarization",
            CheckRequest::PolarizedSection { .. } => "polarized-section",
            CheckRequest::PolarizedFunction { .. } => "polarized-function",
            CheckRequest::OperatorRestriction { .. } => "operator-restriction",
            CheckRequest::LeafBracket { .. } => "leaf-bracket",
            CheckRequest::FoliationRelations { .. } => "foliation-relations",
            CheckRequest::DsSquared { .. } => "ds-squared",
            CheckRequest::Poincare { .. } => "poincare",
            CheckRequest::Decompose { .. } => "decompose",
        }
    }
}

/// A fully resolved session.
#[derive(Clone, Debug)]
pub struct Session {
    pub manifold_name: String,
    pub chart: Chart,
    /// Declaration order preserved for deterministic output.
    pub order: Vec<(String, DeclKind)>,
    pub values: BTreeMap<String, Value>,
    pub structures: BTreeMap<String, StructureDecl>,
    pub gpdatas: BTreeMap<String, GpDecl>,
    pub polarizations: BTreeMap<String, PolarizationSpec>,
    pub foliations: BTreeMap<String, FoliationDecl>,
    pub checks: Vec<CheckRequest>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Value,
    Structure,
    Gp,
    Polarization,
    Foliation,
}

impl Session {
    pub fn equivalent(&self, other: &Session) -> bool {
        self.chart == other.chart
            && self.values == other.values
            && self.structures == other.structures
            && self.gpdatas == other.gpdatas
            && self.polarizations.len() == other.polarizations.len()
            && self
                .polarizations
                .iter()
                .zip(&other.polarizations)
                .all(|((na, a), (nb, b))| {
                    na == nb
                        && a.gens_p == b.gens_p
                        && a.gens_pp == b.gens_pp
                        && a.tm_cap_e == b.tm_cap_e
                        && a.tm_cap_ep == b.tm_cap_ep
                })
            && self.foliations == other.foliations
            && self.checks == other.checks
    }
}

fn write_sections(f: &mut fmt::Formatter<'_>, gens: &[BigSection]) -> fmt::Result {
    let mut first = true;
    for g in gens {
        if !first {
            write!(f, ", ")?;
        }
        first = false;
        write!(f, "( {} , {} )", g.vf, g.form)?;
    }
    Ok(())
}

fn write_fields(f: &mut fmt::Formatter<'_>, gens: &[VectorField]) -> fmt::Result {
    let mut first = true;
    for g in gens {
        if !first {
            write!(f, ", ")?;
        }
        first = false;
        write!(f, "{g}")?;
    }
    Ok(())
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "manifold {} dim {} coords", self.manifold_name, self.chart.dim())?;
        for name in self.chart.names() {
            write!(f, " {name}")?;
        }
        writeln!(f)?;
        for (name, kind) in &self.order {
            match kind {
                DeclKind::Value => {
                    let v = &self.values[name];
                    match v {
                        Value::Scalar(s) => writeln!(f, "scalar {name} = {s}")?,
                        Value::Form(w) => writeln!(f, "form {name} = {w}")?,
                        Value::Multivector(p) => writeln!(f, "bivector {name} = {p}")?,
                        Value::Field(x) => writeln!(f, "vfield {name} = {x}")?,
                        Value::Section(s) => {
                            writeln!(f, "section {name} = ( {} , {} )", s.vf, s.form)?
                        }
                    }
                }
                DeclKind::Structure => match &self.structures[name] {
                    StructureDecl::Explicit { gens_e, gens_ep } => {
                        write!(f, "structure {name} {{ E: ")?;
                        write_sections(f, gens_e)?;
                        write!(f, " E': ")?;
                        write_sections(f, gens_ep)?;
                        writeln!(f, " }}")?;
                    }
                    StructureDecl::GraphTwoForm { lambda, gens_s, ann } => {
                        write!(f, "structure {name} {{ graph2: {lambda} ; S: ")?;
                        write_fields(f, gens_s)?;
                        write!(f, " ; annS: ")?;
                        let mut first = true;
                        for g in ann {
                            if !first {
                                write!(f, ", ")?;
                            }
                            first = false;
                            write!(f, "{g}")?;
                        }
                        writeln!(f, " }}")?;
                    }
                    StructureDecl::GraphBivector { p, sigma, ann } => {
                        write!(f, "structure {name} {{ graphP: {p} ; Sigma: ")?;
                        let mut first = true;
                        for g in sigma {
                            if !first {
                                write!(f, ", ")?;
                            }
                            first = false;
                            write!(f, "{g}")?;
                        }
                        write!(f, " ; annSigma: ")?;
                        write_fields(f, ann)?;
                        writeln!(f, " }}")?;
                    }
                },
                DeclKind::Gp => {
                    let g = &self.gpdatas[name];
                    writeln!(
                        f,
                        "gpdata {name} {{ varpi = {} ; U = {} ; nu = {} }}",
                        g.varpi, g.u, g.nu
                    )?;
                }
                DeclKind::Polarization => {
                    let p = &self.polarizations[name];
                    write!(f, "polarization {name} {{ P: ")?;
                    write_sections(f, &p.gens_p)?;
                    write!(f, " P': ")?;
                    write_sections(f, &p.gens_pp)?;
                    write!(f, " TME: ")?;
                    write_fields(f, &p.tm_cap_e)?;
                    write!(f, " TME': ")?;
                    write_fields(f, &p.tm_cap_ep)?;
                    writeln!(f, " }}")?;
                }
                DeclKind::Foliation => {
                    let fol = &self.foliations[name];
                    write!(f, "foliation {name} {{ dimF {} ; Qframe: ", fol.leaf_dim)?;
                    write_fields(f, &fol.frames)?;
                    writeln!(f, " }}")?;
                }
            }
        }
        for c in &self.checks {
            writeln!(f, "{}", render_check(self, c))?;
        }
        Ok(())
    }
}

fn rat_str(r: &Rat) -> String {
    use num_traits::One;
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn render_check(s: &Session, c: &CheckRequest) -> String {
    match c {
        CheckRequest::Structure { structure } => format!("check structure {structure}"),
        CheckRequest::Integrable { structure } => format!("check integrable {structure}"),
        CheckRequest::Member { structure, family, section, label: _ } => {
            let fam = match family {
                FamilyArg::E => "E",
                FamilyArg::EPrime => "E'",
            };
            format!("check member {structure} {fam} ( {} , {} )", section.vf, section.form)
        }
        CheckRequest::Poisson { bivector } => format!("check poisson {bivector}"),
        CheckRequest::SigmaClosed { bivector, forms } => {
            format!("check sigma-closed {bivector} {}", forms.join(", "))
        }
        CheckRequest::Hamiltonian { structure, mode, f, xf } => {
            format!("check hamiltonian {structure} {} {f} {xf}", mode_str(*mode))
        }
        CheckRequest::Representative { structure, mode, f } => {
            format!("check representative {structure} {} {f}", mode_str(*mode))
        }
        CheckRequest::Leibniz { structure, l, f, h } => {
            format!("check leibniz {structure} {l} {f} {h}")
        }
        CheckRequest::DtrComplex { structure } => format!("check dtr-complex {structure}"),
        CheckRequest::JMorphism { structure, form } => {
            format!("check j-morphism {structure} {form}")
        }
        CheckRequest::GpCondition { gp, structure } => {
            format!("check gp-condition {gp} {structure}")
        }
        CheckRequest::Integrality { structure, u, xi, variant } => {
            let v = match variant {
                VariantArg::Direct => "direct",
                VariantArg::Lie => "lie",
                VariantArg::Both => "both",
            };
            format!("check integrality {structure} {u} {xi} {v}")
        }
        CheckRequest::Commutator { gp, structure, f, h } => {
            format!("check commutator {gp} {structure} {f} {h}")
        }
        CheckRequest::GaugeInvariance { gp, structure, nu, f, h } => {
            format!("check gauge-invariance {gp} {structure} {nu} {f} {h}")
        }
        CheckRequest::CurvatureRelation { gp } => format!("check curvature-relation {gp}"),
        CheckRequest::Comutant { gp, structure, f, h } => {
            format!("check comutant {gp} {structure} {f} {h}")
        }
        CheckRequest::Lift { gp, structure } => format!("check lift {gp} {structure}"),
        CheckRequest::LiftGraph { gp, structure } => format!("check lift-graph {gp} {structure}"),
        CheckRequest::Polarization { structure, pol } => {
            format!("check polarization {structure} {pol}")
        }
        CheckRequest::PolarizedSection { gp, pol, family, phi } => {
            let fam = match family {
                PolFamilyArg::P => "P",
                PolFamilyArg::PPrime => "P'",
            };
            format!("check polarized-section {gp} {pol} {fam} {phi}")
        }
        CheckRequest::PolarizedFunction { structure, pol, mode, f } => {
            format!("check polarized-function {structure} {pol} {} {f}", mode_str(*mode))
        }
        CheckRequest::OperatorRestriction { gp, structure, pol, f, phi } => {
            format!("check operator-restriction {gp} {structure} {pol} {f} {phi}")
        }
        CheckRequest::LeafBracket { structure, a, b, fixed } => {
            let mut out = format!("check leaf-bracket {structure} {a} {b}");
            for (i, v) in fixed {
                out.push_str(&format!(" {}={}", s.chart.name(*i), rat_str(v)));
            }
            out
        }
        CheckRequest::FoliationRelations { foliation } => {
            format!("check foliation-relations {foliation}")
        }
        CheckRequest::DsSquared { foliation, s } => format!("check ds-squared {foliation} {s}"),
        CheckRequest::Poincare { foliation, s, form } => {
            format!("check poincare {foliation} {s} {form}")
        }
        CheckRequest::Decompose { foliation, form } => {
            format!("check decompose {foliation} {form}")
        }
    }
}

fn mode_str(m: ModeArg) -> &'static str {
    match m {
        ModeArg::Ham => "ham",
        ModeArg::WHam => "wham",
    }
}
