//! The fraction field of [`Scalar`]: rational functions with GCD-reduced,
//! monic-denominator canonical form.
//!
//! The GCD is computed by a primitive pseudo-remainder sequence, treating the
//! formal constant `c` as one more variable. Degrees stay small in this
//! crate, so no subresultant bookkeeping is needed.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::chart::Chart;
use crate::scalar::{GaussRat, Mono, Scalar};

/// Variable slots for GCD purposes: chart coordinates then `c`.
fn var_count(s: &Scalar) -> usize {
    s.chart().dim() + 1
}

fn mono_exp(m: &Mono, v: usize, dim: usize) -> u16 {
    if v < dim {
        m.exps[v]
    } else {
        m.c
    }
}

fn deg_in(s: &Scalar, v: usize) -> Option<u16> {
    let dim = s.chart().dim();
    s.terms().map(|(m, _)| mono_exp(m, v, dim)).max()
}

/// View a polynomial as univariate in `v`: coefficients by exponent.
fn univariate(s: &Scalar, v: usize) -> Vec<Scalar> {
    let dim = s.chart().dim();
    let deg = deg_in(s, v).unwrap_or(0) as usize;
    let mut coeffs = vec![Scalar::zero(s.chart()); deg + 1];
    for (m, coef) in s.terms() {
        let e = mono_exp(m, v, dim) as usize;
        let mut m2 = m.clone();
        if v < dim {
            m2.exps[v] = 0;
        } else {
            m2.c = 0;
        }
        coeffs[e] = &coeffs[e] + &Scalar::from_terms(s.chart(), [(m2, coef.clone())]);
    }
    coeffs
}

fn var_monomial(chart: &Chart, v: usize, e: u16) -> Scalar {
    let dim = chart.dim();
    let mut mono = Mono::unit(dim);
    if v < dim {
        mono.exps[v] = e;
    } else {
        mono.c = e;
    }
    Scalar::from_terms(chart, [(mono, GaussRat::one())])
}

/// Exact multivariate division; `None` when `b` does not divide `a`.
pub fn div_exact(a: &Scalar, b: &Scalar) -> Option<Scalar> {
    assert!(!b.is_zero(), "division by zero polynomial");
    let chart = a.chart().clone();
    let mut r = a.clone();
    let mut q = Scalar::zero(&chart);
    let (bm, bc) = {
        let (m, c) = b.leading().unwrap();
        (m.clone(), c.clone())
    };
    let bc_inv = bc.inv();
    while !r.is_zero() {
        let (rm, rc) = {
            let (m, c) = r.leading().unwrap();
            (m.clone(), c.clone())
        };
        if !bm.divides(&rm) {
            return None;
        }
        let t = Scalar::from_terms(&chart, [(rm.div(&bm), &rc * &bc_inv)]);
        q = &q + &t;
        r = &r - &(&t * b);
    }
    Some(q)
}

/// Pseudo-remainder of `a` by `b` in the variable `v` (deg_v a >= deg_v b).
fn prem(a: &Scalar, b: &Scalar, v: usize) -> Scalar {
    let chart = a.chart().clone();
    let db = deg_in(b, v).expect("b nonzero in v") as i64;
    let b_uni = univariate(b, v);
    let lb = b_uni[db as usize].clone();
    let mut r = a.clone();
    loop {
        if r.is_zero() {
            return r;
        }
        let dr = deg_in(&r, v).unwrap_or(0) as i64;
        if dr < db || (dr == 0 && db == 0) {
            if db == 0 {
                return Scalar::zero(&chart);
            }
            return r;
        }
        let r_uni = univariate(&r, v);
        let lr = r_uni[dr as usize].clone();
        let shift = var_monomial(&chart, v, (dr - db) as u16);
        r = &(&lb * &r) - &(&(&lr * &shift) * b);
    }
}

/// Content of `a` as a univariate polynomial in `v`: GCD of coefficients.
fn content(a: &Scalar, v: usize) -> Scalar {
    let coeffs = univariate(a, v);
    let mut g = Scalar::zero(a.chart());
    for c in coeffs {
        if !c.is_zero() {
            g = gcd(&g, &c);
        }
    }
    g
}

/// Scale to leading coefficient 1 under the canonical monomial order.
pub fn monic(a: &Scalar) -> Scalar {
    match a.leading() {
        None => a.clone(),
        Some((_, c)) => a.scale(&c.inv()),
    }
}

/// GCD of two polynomials, normalized monic. `gcd(0,0) = 0`.
pub fn gcd(a: &Scalar, b: &Scalar) -> Scalar {
    if a.is_zero() {
        return monic(b);
    }
    if b.is_zero() {
        return monic(a);
    }
    // Highest variable occurring in either.
    let n = var_count(a);
    let v = (0..n).rev().find(|&v| {
        deg_in(a, v).map_or(false, |d| d > 0) || deg_in(b, v).map_or(false, |d| d > 0)
    });
    let Some(v) = v else {
        return Scalar::one(a.chart());
    };
    let ca = content(a, v);
    let cb = content(b, v);
    let cg = gcd(&ca, &cb);
    let pa = div_exact(a, &ca).expect("content divides");
    let pb = div_exact(b, &cb).expect("content divides");
    let (mut f, mut s) = if deg_in(&pa, v) >= deg_in(&pb, v) { (pa, pb) } else { (pb, pa) };
    loop {
        let r = prem(&f, &s, v);
        if r.is_zero() {
            break;
        }
        let rc = content(&r, v);
        f = s;
        s = div_exact(&r, &rc).expect("content divides");
    }
    monic(&(&cg * &div_exact(&s, &content(&s, v)).expect("content divides")))
}

/// A rational function `num/den` in canonical form: `gcd(num,den) = 1` and
/// `den` monic; constant denominators are folded into the numerator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFn {
    num: Scalar,
    den: Scalar,
}

impl RatFn {
    pub fn new(num: Scalar, den: Scalar) -> RatFn {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            let chart = num.chart().clone();
            return RatFn { num, den: Scalar::one(&chart) };
        }
        if let Some(cst) = den.as_constant() {
            return RatFn {
                num: num.scale(&cst.inv()),
                den: Scalar::one(num.chart()),
            };
        }
        // Cheap path: the quotient is usually polynomial.
        if let Some(q) = div_exact(&num, &den) {
            let chart = q.chart().clone();
            return RatFn { num: q, den: Scalar::one(&chart) };
        }
        let g = gcd(&num, &den);
        let num = div_exact(&num, &g).expect("gcd divides");
        let den = div_exact(&den, &g).expect("gcd divides");
        let lc = den.leading().expect("nonzero").1.clone();
        if let Some(cst) = den.as_constant() {
            RatFn { num: num.scale(&cst.inv()), den: Scalar::one(num.chart()) }
        } else {
            RatFn { num: num.scale(&lc.inv()), den: den.scale(&lc.inv()) }
        }
    }

    pub fn from_scalar(s: &Scalar) -> RatFn {
        RatFn { num: s.clone(), den: Scalar::one(s.chart()) }
    }

    pub fn zero(chart: &Chart) -> RatFn {
        RatFn::from_scalar(&Scalar::zero(chart))
    }

    pub fn one(chart: &Chart) -> RatFn {
        RatFn::from_scalar(&Scalar::one(chart))
    }

    pub fn num(&self) -> &Scalar {
        &self.num
    }

    pub fn den(&self) -> &Scalar {
        &self.den
    }

    pub fn chart(&self) -> &Chart {
        self.num.chart()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Some(num)` when the denominator is trivial.
    pub fn as_polynomial(&self) -> Option<&Scalar> {
        self.den.as_constant().map(|_| &self.num)
    }

    pub fn inv(&self) -> RatFn {
        assert!(!self.is_zero(), "division by zero rational function");
        RatFn::new(self.den.clone(), self.num.clone())
    }

    /// Derivative along a polynomial vector field, by the quotient rule.
    pub fn apply_vf(&self, x: &crate::exterior::VectorField) -> RatFn {
        let dn = x.apply(&self.num);
        let dd = x.apply(&self.den);
        RatFn::new(&(&dn * &self.den) - &(&self.num * &dd), &self.den * &self.den)
    }
}

impl Add for &RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        RatFn::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RatFn {
    type Output = RatFn;
    fn sub(self, rhs: &RatFn) -> RatFn {
        self + &(-rhs)
    }
}

impl Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        RatFn::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &RatFn {
    type Output = RatFn;
    fn div(self, rhs: &RatFn) -> RatFn {
        self * &rhs.inv()
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().is_some() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
