//! Cartan calculus with polynomial coefficients: vector fields, differential
//! forms, multivector fields, and the standard operators `d`, `L_X`, `i(X)`.
//!
//! Antisymmetric objects store only strictly increasing index tuples, so
//! antisymmetry is representational and equality is exact.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

use crate::chart::Chart;
use crate::scalar::{Rat, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CalcError {
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("cannot contract a vector into a degree-0 object")]
    ContractDegreeZero,
}

/// Shared storage for antisymmetric tables (forms and multivectors):
/// map from strictly increasing coordinate-index tuples to scalars.
#[derive(Clone, PartialEq, Eq)]
pub struct AltTable {
    chart: Chart,
    degree: usize,
    comps: BTreeMap<Vec<u8>, Scalar>,
}

/// Sort an index tuple, returning `None` on a repeated index, otherwise the
/// increasing tuple together with the sign of the sorting permutation.
pub fn sort_indices(idx: &[u8]) -> Option<(Vec<u8>, i8)> {
    let mut v = idx.to_vec();
    let mut sign = 1i8;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, sign))
}

impl AltTable {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        AltTable { chart: chart.clone(), degree, comps: BTreeMap::new() }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn comps(&self) -> impl Iterator<Item = (&Vec<u8>, &Scalar)> {
        self.comps.iter()
    }

    /// Add `v` to the component of the (not necessarily sorted) tuple `idx`.
    pub fn add_term(&mut self, idx: &[u8], v: Scalar) {
        debug_assert_eq!(idx.len(), self.degree);
        if v.is_zero() {
            return;
        }
        let Some((key, sign)) = sort_indices(idx) else {
            return;
        };
        let v = if sign < 0 { -&v } else { v };
        match self.comps.get_mut(&key) {
            Some(old) => {
                let sum = &*old + &v;
                if sum.is_zero() {
                    self.comps.remove(&key);
                } else {
                    *old = sum;
                }
            }
            None => {
                self.comps.insert(key, v);
            }
        }
    }

    pub fn component(&self, idx: &[u8]) -> Scalar {
        match sort_indices(idx) {
            None => Scalar::zero(&self.chart),
            Some((key, sign)) => match self.comps.get(&key) {
                None => Scalar::zero(&self.chart),
                Some(v) => {
                    if sign < 0 {
                        -v
                    } else {
                        v.clone()
                    }
                }
            },
        }
    }

    fn assert_compat(&self, other: &AltTable) {
        assert!(self.chart == other.chart, "chart mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch");
    }

    pub fn add(&self, other: &AltTable) -> AltTable {
        self.assert_compat(other);
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.add_term(k, v.clone());
        }
        out
    }

    pub fn neg(&self) -> AltTable {
        let mut out = AltTable::zero(&self.chart, self.degree);
        for (k, v) in &self.comps {
            out.comps.insert(k.clone(), -v);
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> AltTable {
        let mut out = AltTable::zero(&self.chart, self.degree);
        for (k, v) in &self.comps {
            out.add_term(k, s * v);
        }
        out
    }

    pub fn wedge(&self, other: &AltTable) -> AltTable {
        assert!(self.chart == other.chart, "chart mismatch");
        let mut out = AltTable::zero(&self.chart, self.degree + other.degree);
        for (ka, va) in &self.comps {
            for (kb, vb) in &other.comps {
                let mut idx = ka.clone();
                idx.extend_from_slice(kb);
                out.add_term(&idx, va * vb);
            }
        }
        out
    }

    /// Contract a dense degree-1 slot vector into the first argument.
    /// For a form `w` and vector `X` this is `i(X)w`; for a multivector `P`
    /// and 1-form `s` (as component vector) it is `i(s)P`.
    pub fn contract_first(&self, slot: &[Scalar]) -> Result<AltTable, CalcError> {
        if self.degree == 0 {
            return Err(CalcError::ContractDegreeZero);
        }
        let mut out = AltTable::zero(&self.chart, self.degree - 1);
        for (k, v) in &self.comps {
            for (pos, &j) in k.iter().enumerate() {
                let rest: Vec<u8> =
                    k.iter().enumerate().filter(|(p, _)| *p != pos).map(|(_, &x)| x).collect();
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                let coef = &slot[j as usize] * v;
                out.add_term(&rest, if sign < 0 { -&coef } else { coef });
            }
        }
        Ok(out)
    }

    /// Trivial lift onto the fibre-extended chart.
    pub fn lift_to(&self, total: &Chart) -> AltTable {
        let mut out = AltTable::zero(total, self.degree);
        for (k, v) in &self.comps {
            out.comps.insert(k.clone(), v.lift_to(total));
        }
        out
    }

    pub fn substitute(&self, i: usize, value: &Scalar) -> AltTable {
        let mut out = AltTable::zero(&self.chart, self.degree);
        for (k, v) in &self.comps {
            out.add_term(k, v.substitute(i, value));
        }
        out
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, basis: &str) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in &self.comps {
            let factor: Vec<String> =
                k.iter().map(|&i| format!("{basis}[{}]", self.chart.name(i as usize))).collect();
            let needs_paren = v.terms().count() > 1;
            let coef = if v == &Scalar::one(&self.chart) && !factor.is_empty() {
                factor.join("^")
            } else if factor.is_empty() {
                format!("{v}")
            } else if needs_paren {
                format!("({})*{}", v, factor.join("^"))
            } else {
                format!("{}*{}", v, factor.join("^"))
            };
            if first {
                write!(f, "{coef}")?;
                first = false;
            } else if let Some(rest) = coef.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {coef}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial vector field in the coordinate frame.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Scalar>,
}

impl VectorField {
    pub fn zero(chart: &Chart) -> Self {
        VectorField { chart: chart.clone(), comps: vec![Scalar::zero(chart); chart.dim()] }
    }

    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut v = VectorField::zero(chart);
        v.comps[i] = Scalar::one(chart);
        v
    }

    pub fn from_components(chart: &Chart, comps: Vec<Scalar>) -> Self {
        assert_eq!(comps.len(), chart.dim());
        VectorField { chart: chart.clone(), comps }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn component(&self, i: usize) -> &Scalar {
        &self.comps[i]
    }

    pub fn components(&self) -> &[Scalar] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|s| s.is_zero())
    }

    pub fn scale(&self, s: &Scalar) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|v| s * v).collect(),
        }
    }

    /// Apply the vector field to a function: `X(f)`.
    pub fn apply(&self, f: &Scalar) -> Scalar {
        let mut out = Scalar::zero(&self.chart);
        for (i, xi) in self.comps.iter().enumerate() {
            out = &out + &(xi * &f.partial(i));
        }
        out
    }

    pub fn lift_to(&self, total: &Chart) -> VectorField {
        let mut comps: Vec<Scalar> = self.comps.iter().map(|s| s.lift_to(total)).collect();
        comps.push(Scalar::zero(total));
        VectorField { chart: total.clone(), comps }
    }

    pub fn substitute(&self, i: usize, value: &Scalar) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|s| s.substitute(i, value)).collect(),
        }
    }

    pub fn eval_point(&self, point: &[Rat]) -> Vec<Scalar> {
        self.comps.iter().map(|s| s.eval_point(point)).collect()
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        assert!(self.chart == rhs.chart, "chart mismatch");
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self + &(-rhs)
    }
}

impl Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        VectorField { chart: self.chart.clone(), comps: self.comps.iter().map(|s| -s).collect() }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let table = self.as_table();
        table.fmt_with(f, "D")
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl VectorField {
    fn as_table(&self) -> AltTable {
        let mut t = AltTable::zero(&self.chart, 1);
        for (i, s) in self.comps.iter().enumerate() {
            t.add_term(&[i as u8], s.clone());
        }
        t
    }
}

/// A differential form of fixed degree.
#[derive(Clone, PartialEq, Eq)]
pub struct KForm(pub(crate) AltTable);

/// A multivector field of fixed degree.
#[derive(Clone, PartialEq, Eq)]
pub struct KMultivector(pub(crate) AltTable);

impl KForm {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        KForm(AltTable::zero(chart, degree))
    }

    /// The coordinate 1-form `dx^i`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut t = AltTable::zero(chart, 1);
        t.add_term(&[i as u8], Scalar::one(chart));
        KForm(t)
    }

    /// A degree-0 form holding a single scalar.
    pub fn from_scalar(s: &Scalar) -> Self {
        let mut t = AltTable::zero(s.chart(), 0);
        t.add_term(&[], s.clone());
        KForm(t)
    }

    pub fn from_table(t: AltTable) -> Self {
        KForm(t)
    }

    pub fn chart(&self) -> &Chart {
        self.0.chart()
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn component(&self, idx: &[u8]) -> Scalar {
        self.0.component(idx)
    }

    pub fn table(&self) -> &AltTable {
        &self.0
    }

    pub fn scale(&self, s: &Scalar) -> KForm {
        KForm(self.0.scale(s))
    }

    pub fn wedge(&self, other: &KForm) -> KForm {
        KForm(self.0.wedge(&other.0))
    }

    /// Dense component vector of a 1-form.
    pub fn dense1(&self) -> Vec<Scalar> {
        assert_eq!(self.degree(), 1);
        (0..self.chart().dim()).map(|i| self.component(&[i as u8])).collect()
    }

    /// Interior product `i(X)w`, the vector in the first slot.
    pub fn contract(&self, x: &VectorField) -> Result<KForm, CalcError> {
        Ok(KForm(self.0.contract_first(x.components())?))
    }

    /// Evaluate on `degree` vector fields.
    pub fn eval(&self, args: &[&VectorField]) -> Result<Scalar, CalcError> {
        if args.len() != self.degree() {
            return Err(CalcError::DegreeMismatch { expected: self.degree(), got: args.len() });
        }
        let mut cur = self.0.clone();
        for x in args {
            cur = cur.contract_first(x.components())?;
        }
        Ok(cur.component(&[]))
    }

    /// Pairing of a 1-form with a vector field.
    pub fn pair(&self, x: &VectorField) -> Scalar {
        assert_eq!(self.degree(), 1);
        self.eval(&[x]).unwrap()
    }

    pub fn lift_to(&self, total: &Chart) -> KForm {
        KForm(self.0.lift_to(total))
    }

    pub fn substitute(&self, i: usize, value: &Scalar) -> KForm {
        KForm(self.0.substitute(i, value))
    }

    pub fn is_real(&self) -> bool {
        self.0.comps.values().all(|s| s.is_real() && s.is_c_free())
    }
}

impl Add for &KForm {
    type Output = KForm;
    fn add(self, rhs: &KForm) -> KForm {
        KForm(self.0.add(&rhs.0))
    }
}

impl Sub for &KForm {
    type Output = KForm;
    fn sub(self, rhs: &KForm) -> KForm {
        KForm(self.0.add(&rhs.0.neg()))
    }
}

impl Neg for &KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        KForm(self.0.neg())
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, "d")
    }
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl KMultivector {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        KMultivector(AltTable::zero(chart, degree))
    }

    pub fn from_table(t: AltTable) -> Self {
        KMultivector(t)
    }

    pub fn from_vector(x: &VectorField) -> Self {
        KMultivector(x.as_table())
    }

    pub fn chart(&self) -> &Chart {
        self.0.chart()
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn component(&self, idx: &[u8]) -> Scalar {
        self.0.component(idx)
    }

    pub fn table(&self) -> &AltTable {
        &self.0
    }

    pub fn scale(&self, s: &Scalar) -> KMultivector {
        KMultivector(self.0.scale(s))
    }

    pub fn wedge(&self, other: &KMultivector) -> KMultivector {
        KMultivector(self.0.wedge(&other.0))
    }

    /// Interior product `i(s)P` of a 1-form into the first slot.
    pub fn contract(&self, s: &KForm) -> Result<KMultivector, CalcError> {
        if s.degree() != 1 {
            return Err(CalcError::DegreeMismatch { expected: 1, got: s.degree() });
        }
        Ok(KMultivector(self.0.contract_first(&s.dense1())?))
    }

    /// Evaluate on `degree` 1-forms.
    pub fn eval(&self, args: &[&KForm]) -> Result<Scalar, CalcError> {
        if args.len() != self.degree() {
            return Err(CalcError::DegreeMismatch { expected: self.degree(), got: args.len() });
        }
        let mut cur = self.0.clone();
        for s in args {
            if s.degree() != 1 {
                return Err(CalcError::DegreeMismatch { expected: 1, got: s.degree() });
            }
            cur = cur.contract_first(&s.dense1())?;
        }
        Ok(cur.component(&[]))
    }

    /// A degree-1 multivector as a vector field.
    pub fn as_vector(&self) -> VectorField {
        assert_eq!(self.degree(), 1);
        let chart = self.chart().clone();
        let comps = (0..chart.dim()).map(|i| self.component(&[i as u8])).collect();
        VectorField::from_components(&chart, comps)
    }

    pub fn lift_to(&self, total: &Chart) -> KMultivector {
        KMultivector(self.0.lift_to(total))
    }
}

impl Add for &KMultivector {
    type Output = KMultivector;
    fn add(self, rhs: &KMultivector) -> KMultivector {
        KMultivector(self.0.add(&rhs.0))
    }
}

impl Neg for &KMultivector {
    type Output = KMultivector;
    fn neg(self) -> KMultivector {
        KMultivector(self.0.neg())
    }
}

impl fmt::Display for KMultivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, "D")
    }
}

impl fmt::Debug for KMultivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exterior derivative.
pub fn exterior_derivative(w: &KForm) -> KForm {
    let chart = w.chart().clone();
    let mut out = AltTable::zero(&chart, w.degree() + 1);
    for (k, v) in w.0.comps() {
        for j in 0..chart.dim() as u8 {
            if k.contains(&j) {
                continue;
            }
            let dv = v.partial(j as usize);
            if dv.is_zero() {
                continue;
            }
            let mut idx = vec![j];
            idx.extend_from_slice(k);
            out.add_term(&idx, dv);
        }
    }
    KForm(out)
}

/// Differential of a function as a 1-form.
pub fn differential(f: &Scalar) -> KForm {
    exterior_derivative(&KForm::from_scalar(f))
}

/// Lie bracket of vector fields: `[X,Y]^i = X(Y^i) - Y(X^i)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    assert!(x.chart() == y.chart(), "chart mismatch");
    let comps = (0..x.chart().dim())
        .map(|i| &x.apply(y.component(i)) - &y.apply(x.component(i)))
        .collect();
    VectorField::from_components(x.chart(), comps)
}

/// Lie derivative of a form by the Cartan formula `L_X = i(X) d + d i(X)`.
pub fn lie_derivative(x: &VectorField, w: &KForm) -> KForm {
    if w.degree() == 0 {
        return KForm::from_scalar(&x.apply(&w.component(&[])));
    }
    let idw = exterior_derivative(w).contract(x).expect("degree > 0");
    let diw = exterior_derivative(&w.contract(x).expect("degree > 0"));
    &idw + &diw
}

/// `i(X)w` for a 2-form `w`: the musical map with `(i(X)w)(Y) = w(X,Y)`.
pub fn flat(two_form: &KForm, x: &VectorField) -> KForm {
    assert_eq!(two_form.degree(), 2);
    two_form.contract(x).expect("degree 2")
}

/// `i(s)P` for a bivector `P`: the musical map with `b(i(s)P) = P(s,b)`.
pub fn sharp(bivector: &KMultivector, s: &KForm) -> VectorField {
    assert_eq!(bivector.degree(), 2);
    bivector.contract(s).expect("degree 2").as_vector()
}

/// Jacobi test for a bivector: all cyclic sums
/// `{x^i,{x^j,x^k}} + {x^j,{x^k,x^i}} + {x^k,{x^i,x^j}}` vanish, where
/// `{f,h} = P(df,dh)`.
pub fn poisson_check(p: &KMultivector) -> bool {
    assert_eq!(p.degree(), 2);
    let chart = p.chart().clone();
    let m = chart.dim();
    let bracket = |f: &Scalar, h: &Scalar| -> Scalar {
        p.eval(&[&differential(f), &differential(h)]).unwrap()
    };
    for i in 0..m {
        let xi = Scalar::coord(&chart, i);
        for j in (i + 1)..m {
            let xj = Scalar::coord(&chart, j);
            for k in (j + 1)..m {
                let xk = Scalar::coord(&chart, k);
                let jac = &(&bracket(&xi, &bracket(&xj, &xk)) + &bracket(&xj, &bracket(&xk, &xi)))
                    + &bracket(&xk, &bracket(&xi, &xj));
                if !jac.is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// Convenience constructors used across the crate and in the guide.
pub fn wedge1(a: &KForm, b: &KForm) -> KForm {
    a.wedge(b)
}

pub fn coordinate_bivector(chart: &Chart, i: usize, j: usize) -> KMultivector {
    let mut t = AltTable::zero(chart, 2);
    t.add_term(&[i as u8, j as u8], Scalar::one(chart));
    KMultivector(t)
}
