//! Geometric prequantization data on a trivialized Hermitian line bundle.
//!
//! The bundle has a global unitary basis `1`, the connection acts by
//! `D 1 = c * varpi * 1` with `varpi` a real 1-form and `c` the formal
//! central constant, and the cochain part is a pair `(U, nu)` read as the
//! truncated 1-cochain `theta(Y,b) = nu(Y) + b(U)`.
//!
//! The quantum operator of a certified pair `(h, X_h)` is first order,
//! `phi -> X_h(phi) + c (varpi(X_h) + theta(X_h,dh) + h) phi`; operator
//! identities are decided on the symbol `(vector part, multiplier)`, which
//! is exact and complete for first-order operators.

use std::fmt;

use thiserror::Error;

use crate::big_tangent::{pairing_g, pairing_omega, BigSection};
use crate::chart::Chart;
use crate::cochain::{d_tr_eval, CochainError, TruncCochain};
use crate::exterior::{
    exterior_derivative, lie_bracket, lie_derivative, KForm, VectorField,
};
use crate::hamiltonian::{bracket_pair, HamiltonianPair, HamMode};
use crate::scalar::Scalar;
use crate::structure::BigIsoStructure;

#[derive(Debug, Error)]
pub enum PrequantError {
    #[error("connection form must be real (no imaginary unit, no formal constant)")]
    NonRealConnection,
    #[error("gauge shift by a non-real 1-form would break the Hermitian connection")]
    NonRealShift,
    #[error("the 2-form is not closed")]
    NotClosed,
    #[error(transparent)]
    Cochain(#[from] CochainError),
}

/// Connection form plus cochain pair on the trivialized line bundle.
#[derive(Clone)]
pub struct GPData {
    varpi: KForm,
    u: VectorField,
    nu: KForm,
}

impl GPData {
    pub fn new(varpi: KForm, u: VectorField, nu: KForm) -> Result<Self, PrequantError> {
        assert_eq!(varpi.degree(), 1);
        assert_eq!(nu.degree(), 1);
        if !varpi.is_real() {
            return Err(PrequantError::NonRealConnection);
        }
        Ok(GPData { varpi, u, nu })
    }

    pub fn varpi(&self) -> &KForm {
        &self.varpi
    }

    pub fn u(&self) -> &VectorField {
        &self.u
    }

    pub fn nu(&self) -> &KForm {
        &self.nu
    }

    pub fn chart(&self) -> &Chart {
        self.varpi.chart()
    }

    /// The cochain `theta` as a pair-backed truncated 1-cochain.
    pub fn theta_cochain(&self) -> TruncCochain {
        TruncCochain::PairBacked { u: self.u.clone(), nu: self.nu.clone() }
    }

    /// `theta(Y, b) = nu(Y) + b(U)`.
    pub fn theta_eval(&self, y: &BigSection) -> Scalar {
        &self.nu.pair(&y.vf) + &y.form.pair(&self.u)
    }

    /// Curvature 2-form of the connection divided by `c`.
    pub fn curvature(&self) -> KForm {
        exterior_derivative(&self.varpi)
    }

    /// Gauge shift: the connection form becomes `varpi + nu - nu_tilde`, the
    /// vector part is unchanged and the new form part is `nu_tilde`; quantum
    /// operators are unchanged.
    pub fn gauge_shift(&self, nu_tilde: &KForm) -> Result<GPData, PrequantError> {
        assert_eq!(nu_tilde.degree(), 1);
        let shift = &self.nu - nu_tilde;
        if !shift.is_real() {
            return Err(PrequantError::NonRealShift);
        }
        Ok(GPData {
            varpi: &self.varpi + &shift,
            u: self.u.clone(),
            nu: nu_tilde.clone(),
        })
    }

    /// The vectorial-cochain gauge of the same data: `nu = 0`.
    pub fn vectorial_gauge(&self) -> Result<GPData, PrequantError> {
        self.gauge_shift(&KForm::zero(self.chart(), 1))
    }
}

/// A section `phi * 1` of the trivialized bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineSection {
    pub phi: Scalar,
}

impl LineSection {
    pub fn new(phi: Scalar) -> Self {
        LineSection { phi }
    }
}

/// Symbol of a first-order operator `phi -> V(phi) + m * phi`.
#[derive(Clone, PartialEq, Eq)]
pub struct QuantumOp {
    pub vector: VectorField,
    pub multiplier: Scalar,
}

impl QuantumOp {
    pub fn apply(&self, s: &LineSection) -> LineSection {
        LineSection { phi: &self.vector.apply(&s.phi) + &(&self.multiplier * &s.phi) }
    }

    /// Symbol of the commutator of two first-order operators:
    /// `([V,W], V(m_b) - W(m_a))`.
    pub fn commutator(&self, other: &QuantumOp) -> QuantumOp {
        QuantumOp {
            vector: lie_bracket(&self.vector, &other.vector),
            multiplier: &self.vector.apply(&other.multiplier)
                - &other.vector.apply(&self.multiplier),
        }
    }
}

impl fmt::Display for QuantumOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi -> ({})(phi) + ({})*phi", self.vector, self.multiplier)
    }
}

impl fmt::Debug for QuantumOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The quantum operator of a certified pair:
/// `phi -> X_h(phi) + c (varpi(X_h) + theta(X_h, dh) + h) phi`.
pub fn quantum_operator(g: &GPData, hp: &HamiltonianPair) -> QuantumOp {
    let chart = g.chart();
    let c = Scalar::formal_c(chart);
    let theta = g.theta_eval(&hp.section());
    let mult = &c * &(&(&g.varpi().pair(hp.field()) + &theta) + &hp.function());
    QuantumOp { vector: hp.field().clone(), multiplier: mult }
}

/// One failing generator pair of the curvature condition.
#[derive(Clone, Debug)]
pub struct GpWitness {
    pub e_index: usize,
    pub ep_index: usize,
    pub residual: Scalar,
}

/// Report of [`check_gp_condition`].
#[derive(Clone, Debug, Default)]
pub struct GpReport {
    pub failures: Vec<GpWitness>,
}

impl GpReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Residual of the curvature condition on a single pair of sections:
/// `d varpi(X,Y) - omega(x,y) + d_tr theta(x,y)`; the data system is
/// admissible exactly when this vanishes for all `x` in `E`, `y` in `E'`.
pub fn gp_residual(
    g: &GPData,
    s: &BigIsoStructure,
    x: &BigSection,
    y: &BigSection,
) -> Result<Scalar, PrequantError> {
    let dvarpi = g.curvature();
    let curv = dvarpi.eval(&[&x.vf, &y.vf]).expect("degree 2");
    let omega = pairing_omega(x, y);
    let dtheta = d_tr_eval(s, &g.theta_cochain(), std::slice::from_ref(x), y)?;
    let dtheta = dtheta
        .as_polynomial()
        .expect("pair-backed coboundary is polynomial on sections")
        .clone();
    Ok(&(&curv - &omega) + &dtheta)
}

/// Verify the curvature condition on every generator pair.
pub fn check_gp_condition(g: &GPData, s: &BigIsoStructure) -> Result<GpReport, PrequantError> {
    let mut failures = Vec::new();
    for (i, e) in s.gens_e().iter().enumerate() {
        for (a, f) in s.gens_ep().iter().enumerate() {
            let residual = gp_residual(g, s, e, f)?;
            if !residual.is_zero() {
                failures.push(GpWitness { e_index: i, ep_index: a, residual });
            }
        }
    }
    Ok(GpReport { failures })
}

/// Which form of the integrality condition to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegralityVariant {
    /// `b(X) + (L_U b)(X) - a([Y,U]) = Xi(X,Y)`.
    Direct,
    /// `omega(y,x) + 2 g(x, L_U y) = Xi(X,Y)` with `L_U (Y,b) = ([U,Y], L_U b)`.
    Lie,
}

/// One failing pair of the integrality condition.
#[derive(Clone, Debug)]
pub struct IntegralityWitness {
    pub e_index: usize,
    pub ep_index: usize,
    pub variant: IntegralityVariant,
    pub residual: Scalar,
}

#[derive(Clone, Debug, Default)]
pub struct IntegralityReport {
    pub failures: Vec<IntegralityWitness>,
}

impl IntegralityReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

fn integrality_lhs(
    variant: IntegralityVariant,
    u: &VectorField,
    x: &BigSection,
    y: &BigSection,
) -> Scalar {
    match variant {
        IntegralityVariant::Direct => {
            let bx = y.form.pair(&x.vf);
            let lub_x = lie_derivative(u, &y.form).pair(&x.vf);
            let a_yu = x.form.pair(&lie_bracket(&y.vf, u));
            &(&bx + &lub_x) - &a_yu
        }
        IntegralityVariant::Lie => {
            let lu_y = BigSection::new(lie_bracket(u, &y.vf), lie_derivative(u, &y.form));
            let two = Scalar::int(x.chart(), 2);
            &pairing_omega(y, x) + &(&two * &pairing_g(x, &lu_y))
        }
    }
}

/// Check the integrality condition for `(U, Xi)` on all generator pairs in
/// the requested variants. `Xi` must be closed.
pub fn check_integrality(
    s: &BigIsoStructure,
    u: &VectorField,
    xi: &KForm,
    variants: &[IntegralityVariant],
) -> Result<IntegralityReport, PrequantError> {
    assert_eq!(xi.degree(), 2);
    if !exterior_derivative(xi).is_zero() {
        return Err(PrequantError::NotClosed);
    }
    let mut failures = Vec::new();
    for (i, e) in s.gens_e().iter().enumerate() {
        for (a, f) in s.gens_ep().iter().enumerate() {
            let rhs = xi.eval(&[&e.vf, &f.vf]).expect("degree 2");
            for &variant in variants {
                let lhs = integrality_lhs(variant, u, e, f);
                let residual = &lhs - &rhs;
                if !residual.is_zero() {
                    failures.push(IntegralityWitness {
                        e_index: i,
                        ep_index: a,
                        variant,
                        residual,
                    });
                }
            }
        }
    }
    Ok(IntegralityReport { failures })
}

/// Result of comparing `[f^,h^]` with the operator of the Poisson bracket.
#[derive(Clone, Debug)]
pub struct CommutatorReport {
    /// Always zero by construction of the bracket representative.
    pub vector_defect: VectorField,
    /// `widehat{f,h} - [f^,h^]` multiplier part.
    pub defect: Scalar,
}

impl CommutatorReport {
    pub fn is_pass(&self) -> bool {
        self.vector_defect.is_zero() && self.defect.is_zero()
    }
}

/// Compare the operator commutator `[f^, h^]` with the quantum operator of
/// `{f,h}` built on the representative `[X_f, X_h]`. The defect is reported
/// as `widehat{f,h} - [f^,h^]` and is `-c` times the curvature residual on
/// the pair `((X_f,df),(X_h,dh))`.
pub fn commutator_check(
    g: &GPData,
    fp: &HamiltonianPair,
    hp: &HamiltonianPair,
) -> CommutatorReport {
    assert_eq!(fp.mode(), HamMode::Ham);
    let f_hat = quantum_operator(g, fp);
    let h_hat = quantum_operator(g, hp);
    let comm = f_hat.commutator(&h_hat);

    let (fh, xfh) = bracket_pair(fp, hp);
    let chart = g.chart();
    let c = Scalar::formal_c(chart);
    let theta = g.theta_eval(&BigSection::hamiltonian_pair(&xfh, &fh));
    let mult = &c * &(&(&g.varpi().pair(&xfh) + &theta) + &fh);
    let bracket_op = QuantumOp { vector: xfh, multiplier: mult };

    CommutatorReport {
        vector_defect: &bracket_op.vector - &comm.vector,
        defect: &bracket_op.multiplier - &comm.multiplier,
    }
}
