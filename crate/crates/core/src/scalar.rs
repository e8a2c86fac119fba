//! Exact scalars: multivariate polynomials over the Gaussian rationals,
//! with one extra formal central constant `c`.
//!
//! A [`Scalar`] is kept in canonical form at all times: a sorted map from
//! monomials to nonzero coefficients. Equality and the zero test are exact.
//! The constant `c` behaves like an indeterminate that is never inverted and
//! satisfies no relations; `i^2 = -1` is folded into the coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::chart::Chart;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// A Gaussian rational `re + im*i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::zero() }
    }

    pub fn one() -> Self {
        GaussRat { re: Rat::one(), im: Rat::zero() }
    }

    pub fn i() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::one() }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat { re: rat_int(n), im: Rat::zero() }
    }

    pub fn from_rat(r: Rat) -> Self {
        GaussRat { re: r, im: Rat::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn inv(&self) -> GaussRat {
        let n = &self.re * &self.re + &self.im * &self.im;
        assert!(!n.is_zero(), "division by zero Gaussian rational");
        GaussRat { re: &self.re / &n, im: -&self.im / &n }
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -&self.re, im: -&self.im }
    }
}

fn fmt_rat(r: &Rat, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            fmt_rat(&self.re, f)
        } else if self.re.is_zero() {
            if self.im.is_one() {
                write!(f, "i")
            } else if (-&self.im).is_one() {
                write!(f, "-i")
            } else {
                fmt_rat(&self.im, f)?;
                write!(f, "*i")
            }
        } else {
            write!(f, "(")?;
            fmt_rat(&self.re, f)?;
            if self.im.is_positive() {
                write!(f, " + ")?;
                fmt_rat(&self.im, f)?;
            } else {
                write!(f, " - ")?;
                fmt_rat(&(-&self.im), f)?;
            }
            write!(f, "*i)")
        }
    }
}

/// Power product over the chart coordinates plus the formal constant `c`.
///
/// Ordered lexicographically (coordinates first, then the `c`-power); the
/// order is compatible with monomial multiplication.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Mono {
    pub exps: Vec<u16>,
    pub c: u16,
}

impl Mono {
    pub fn unit(dim: usize) -> Self {
        Mono { exps: vec![0; dim], c: 0 }
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut exps = vec![0; dim];
        exps[i] = 1;
        Mono { exps, c: 0 }
    }

    pub fn is_unit(&self) -> bool {
        self.c == 0 && self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
            c: self.c + other.c,
        }
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.c <= other.c && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    pub fn div(&self, other: &Mono) -> Mono {
        Mono {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a - b).collect(),
            c: self.c - other.c,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum::<u32>() + self.c as u32
    }
}

/// Canonical multivariate polynomial over the Gaussian rationals in the
/// chart coordinates and the formal constant `c`.
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar {
    chart: Chart,
    terms: BTreeMap<Mono, GaussRat>,
}

impl Scalar {
    pub fn zero(chart: &Chart) -> Self {
        Scalar { chart: chart.clone(), terms: BTreeMap::new() }
    }

    pub fn one(chart: &Chart) -> Self {
        Scalar::constant(chart, GaussRat::one())
    }

    pub fn constant(chart: &Chart, v: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !v.is_zero() {
            terms.insert(Mono::unit(chart.dim()), v);
        }
        Scalar { chart: chart.clone(), terms }
    }

    pub fn int(chart: &Chart, n: i64) -> Self {
        Scalar::constant(chart, GaussRat::from_int(n))
    }

    pub fn rational(chart: &Chart, r: Rat) -> Self {
        Scalar::constant(chart, GaussRat::from_rat(r))
    }

    /// The imaginary unit as a scalar.
    pub fn imag(chart: &Chart) -> Self {
        Scalar::constant(chart, GaussRat::i())
    }

    /// The coordinate `x^i` as a scalar.
    pub fn coord(chart: &Chart, i: usize) -> Self {
        assert!(i < chart.dim());
        let mut terms = BTreeMap::new();
        terms.insert(Mono::var(chart.dim(), i), GaussRat::one());
        Scalar { chart: chart.clone(), terms }
    }

    /// The formal central constant `c`.
    pub fn formal_c(chart: &Chart) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono { exps: vec![0; chart.dim()], c: 1 }, GaussRat::one());
        Scalar { chart: chart.clone(), terms }
    }

    pub fn from_terms(chart: &Chart, terms: impl IntoIterator<Item = (Mono, GaussRat)>) -> Self {
        let mut s = Scalar::zero(chart);
        for (m, v) in terms {
            debug_assert_eq!(m.exps.len(), chart.dim());
            s.add_term(m, v);
        }
        s
    }

    fn add_term(&mut self, m: Mono, v: GaussRat) {
        if v.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let sum = &*old + &v;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *old = sum;
                }
            }
            None => {
                self.terms.insert(m, v);
            }
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &GaussRat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(v)` iff the scalar is a constant (possibly zero), with no
    /// coordinate or `c` dependence.
    pub fn as_constant(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => {
                let (m, v) = self.terms.iter().next().unwrap();
                m.is_unit().then(|| v.clone())
            }
            _ => None,
        }
    }

    /// All coefficients free of the imaginary unit.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|v| v.is_real())
    }

    /// No occurrence of the formal constant `c`.
    pub fn is_c_free(&self) -> bool {
        self.terms.keys().all(|m| m.c == 0)
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.exps[i] > 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    fn assert_chart(&self, other: &Scalar) {
        assert!(
            self.chart == other.chart,
            "chart mismatch: {:?} vs {:?}",
            self.chart,
            other.chart
        );
    }

    pub fn scale(&self, v: &GaussRat) -> Scalar {
        let mut out = Scalar::zero(&self.chart);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * v);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut out = Scalar::one(&self.chart);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Partial derivative along the `i`-th coordinate; `c` is constant.
    pub fn partial(&self, i: usize) -> Scalar {
        let mut out = Scalar::zero(&self.chart);
        for (m, v) in &self.terms {
            let e = m.exps[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.exps[i] = e - 1;
            out.add_term(m2, &v.clone() * &GaussRat::from_int(e as i64));
        }
        out
    }

    /// Substitute the scalar `value` (same chart) for the `i`-th coordinate.
    pub fn substitute(&self, i: usize, value: &Scalar) -> Scalar {
        self.assert_chart(value);
        let mut out = Scalar::zero(&self.chart);
        for (m, v) in &self.terms {
            let mut m2 = m.clone();
            let e = m2.exps[i];
            m2.exps[i] = 0;
            let base = Scalar::from_terms(&self.chart, [(m2, v.clone())]);
            out = &out + &(&base * &value.pow(e as u32));
        }
        out
    }

    /// Evaluate at a rational chart point. The result may still contain `c`.
    pub fn eval_point(&self, point: &[Rat]) -> Scalar {
        assert_eq!(point.len(), self.chart.dim());
        let mut out = Scalar::zero(&self.chart);
        for (m, v) in &self.terms {
            let mut coef = v.clone();
            for (i, &e) in m.exps.iter().enumerate() {
                for _ in 0..e {
                    coef = &coef * &GaussRat::from_rat(point[i].clone());
                }
            }
            let mono = Mono { exps: vec![0; self.chart.dim()], c: m.c };
            out.add_term(mono, coef);
        }
        out
    }

    /// Re-interpret on the fibre-extended chart (trivial pull-back).
    pub fn lift_to(&self, total: &Chart) -> Scalar {
        assert_eq!(total.dim(), self.chart.dim() + 1);
        let mut out = Scalar::zero(total);
        for (m, v) in &self.terms {
            let mut exps = m.exps.clone();
            exps.push(0);
            out.add_term(Mono { exps, c: m.c }, v.clone());
        }
        out
    }

    /// Leading (maximal-monomial) term under the canonical order.
    pub fn leading(&self) -> Option<(&Mono, &GaussRat)> {
        self.terms.iter().next_back()
    }

    /// Check internal canonical-form invariants; used by tests.
    pub fn debug_validate(&self) {
        for (m, v) in &self.terms {
            assert_eq!(m.exps.len(), self.chart.dim());
            assert!(!v.is_zero(), "stored zero coefficient");
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.assert_chart(rhs);
        let mut out = self.clone();
        for (m, v) in &rhs.terms {
            out.add_term(m.clone(), v.clone());
        }
        out
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        let mut out = Scalar::zero(&self.chart);
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), -v);
        }
        out
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.assert_chart(rhs);
        let mut out = Scalar::zero(&self.chart);
        for (ma, va) in &self.terms {
            for (mb, vb) in &rhs.terms {
                out.add_term(ma.mul(mb), va * vb);
            }
        }
        out
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, v) in self.terms.iter().rev() {
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 1 {
                    factors.push(self.chart.name(i).to_string());
                } else if e > 1 {
                    factors.push(format!("{}^{}", self.chart.name(i), e));
                }
            }
            if m.c == 1 {
                factors.push("c".to_string());
            } else if m.c > 1 {
                factors.push(format!("c^{}", m.c));
            }
            let coef = if factors.is_empty() {
                format!("{v}")
            } else if v.is_one() {
                factors.join("*")
            } else if (-v).is_one() {
                format!("-{}", factors.join("*"))
            } else {
                format!("{}*{}", v, factors.join("*"))
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

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart_qp() -> Chart {
        Chart::new(&["q", "p"]).unwrap()
    }

    #[test]
    fn i_squared_is_minus_one() {
        let ch = chart_qp();
        let i = Scalar::imag(&ch);
        assert_eq!(&i * &i, Scalar::int(&ch, -1));
    }

    #[test]
    fn c_is_formal() {
        let ch = chart_qp();
        let c = Scalar::formal_c(&ch);
        let c2 = &c * &c;
        assert!(!c2.is_zero());
        assert!(c2.as_constant().is_none());
        assert!(c.partial(0).is_zero());
    }

    #[test]
    fn arithmetic_and_canonical_form() {
        let ch = chart_qp();
        let q = Scalar::coord(&ch, 0);
        let p = Scalar::coord(&ch, 1);
        let a = &(&q + &p) * &(&q - &p);
        let b = &(&q * &q) - &(&p * &p);
        assert_eq!(a, b);
        let z = &a - &b;
        assert!(z.is_zero());
        a.debug_validate();
    }

    #[test]
    fn partial_derivative() {
        let ch = chart_qp();
        let q = Scalar::coord(&ch, 0);
        let p = Scalar::coord(&ch, 1);
        let f = &(&q * &q) * &p; // q^2 p
        assert_eq!(f.partial(0), &Scalar::int(&ch, 2) * &(&q * &p));
        assert_eq!(f.partial(1), &q * &q);
    }

    #[test]
    fn substitution_and_eval() {
        let ch = chart_qp();
        let q = Scalar::coord(&ch, 0);
        let p = Scalar::coord(&ch, 1);
        let f = &(&q * &p) + &Scalar::int(&ch, 3);
        let g = f.substitute(0, &Scalar::int(&ch, 2));
        assert_eq!(g, &(&Scalar::int(&ch, 2) * &p) + &Scalar::int(&ch, 3));
        let v = f.eval_point(&[rat_int(2), rat_int(5)]);
        assert_eq!(v.as_constant(), Some(GaussRat::from_int(13)));
    }

    #[test]
    fn display_roundtrip_shape() {
        let ch = chart_qp();
        let q = Scalar::coord(&ch, 0);
        let c = Scalar::formal_c(&ch);
        let half_i = Scalar::constant(&ch, GaussRat::new(rat(0, 1), rat(1, 2)));
        let s = &(&q * &c) + &half_i;
        assert_eq!(format!("{s}"), "q*c + 1/2*i");
    }
}
