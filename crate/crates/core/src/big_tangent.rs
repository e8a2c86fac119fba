//! The big tangent bundle `TM (+) T*M` and its stable extension
//! `(TM x R) (+) (T*M x R)`: neutral metric, canonical 2-form, Courant
//! bracket and Wade bracket.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::chart::Chart;
use crate::exterior::{differential, lie_bracket, lie_derivative, KForm, VectorField};
use crate::scalar::{GaussRat, Scalar};

/// A section of the big tangent bundle: a vector field paired with a 1-form.
#[derive(Clone, PartialEq, Eq)]
pub struct BigSection {
    pub vf: VectorField,
    pub form: KForm,
}

impl BigSection {
    pub fn new(vf: VectorField, form: KForm) -> Self {
        assert!(vf.chart() == form.chart(), "chart mismatch");
        assert_eq!(form.degree(), 1, "form part must be a 1-form");
        BigSection { vf, form }
    }

    pub fn zero(chart: &Chart) -> Self {
        BigSection { vf: VectorField::zero(chart), form: KForm::zero(chart, 1) }
    }

    pub fn from_vector(x: &VectorField) -> Self {
        BigSection { vf: x.clone(), form: KForm::zero(x.chart(), 1) }
    }

    pub fn from_form(a: &KForm) -> Self {
        assert_eq!(a.degree(), 1);
        BigSection { vf: VectorField::zero(a.chart()), form: a.clone() }
    }

    /// The pair `(X_f, df)` attached to a function and a candidate field.
    pub fn hamiltonian_pair(xf: &VectorField, f: &Scalar) -> Self {
        BigSection { vf: xf.clone(), form: differential(f) }
    }

    pub fn chart(&self) -> &Chart {
        self.vf.chart()
    }

    pub fn is_zero(&self) -> bool {
        self.vf.is_zero() && self.form.is_zero()
    }

    pub fn scale(&self, s: &Scalar) -> BigSection {
        BigSection { vf: self.vf.scale(s), form: self.form.scale(s) }
    }

    /// Slot vector (vector components then form components), the coordinates
    /// used by span computations.
    pub fn slots(&self) -> Vec<Scalar> {
        let m = self.chart().dim();
        let mut out = Vec::with_capacity(2 * m);
        out.extend(self.vf.components().iter().cloned());
        for i in 0..m {
            out.push(self.form.component(&[i as u8]));
        }
        out
    }

    pub fn from_slots(chart: &Chart, slots: &[Scalar]) -> BigSection {
        let m = chart.dim();
        assert_eq!(slots.len(), 2 * m);
        let vf = VectorField::from_components(chart, slots[..m].to_vec());
        let mut form = KForm::zero(chart, 1);
        for i in 0..m {
            form = &form + &KForm::coordinate(chart, i).scale(&slots[m + i]);
        }
        BigSection { vf, form }
    }

    pub fn substitute(&self, i: usize, value: &Scalar) -> BigSection {
        BigSection { vf: self.vf.substitute(i, value), form: self.form.substitute(i, value) }
    }
}

impl Add for &BigSection {
    type Output = BigSection;
    fn add(self, rhs: &BigSection) -> BigSection {
        BigSection { vf: &self.vf + &rhs.vf, form: &self.form + &rhs.form }
    }
}

impl Sub for &BigSection {
    type Output = BigSection;
    fn sub(self, rhs: &BigSection) -> BigSection {
        self + &(-rhs)
    }
}

impl Neg for &BigSection {
    type Output = BigSection;
    fn neg(self) -> BigSection {
        BigSection { vf: -&self.vf, form: -&self.form }
    }
}

impl fmt::Display for BigSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "( {} , {} )", self.vf, self.form)
    }
}

impl fmt::Debug for BigSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Neutral metric `g((X,a),(Y,b)) = (a(Y) + b(X)) / 2`.
pub fn pairing_g(a: &BigSection, b: &BigSection) -> Scalar {
    let half = Scalar::constant(a.chart(), GaussRat::new(crate::scalar::rat(1, 2), crate::scalar::rat(0, 1)));
    &half * &(&a.form.pair(&b.vf) + &b.form.pair(&a.vf))
}

/// Canonical 2-form `w((X,a),(Y,b)) = (a(Y) - b(X)) / 2`.
pub fn pairing_omega(a: &BigSection, b: &BigSection) -> Scalar {
    let half = Scalar::constant(a.chart(), GaussRat::new(crate::scalar::rat(1, 2), crate::scalar::rat(0, 1)));
    &half * &(&a.form.pair(&b.vf) - &b.form.pair(&a.vf))
}

/// Courant bracket
/// `[(X,a),(Y,b)] = ([X,Y], L_X b - L_Y a + d(a(Y) - b(X))/2)`.
pub fn courant_bracket(a: &BigSection, b: &BigSection) -> BigSection {
    let chart = a.chart().clone();
    let vf = lie_bracket(&a.vf, &b.vf);
    let half = Scalar::constant(&chart, GaussRat::new(crate::scalar::rat(1, 2), crate::scalar::rat(0, 1)));
    let mixed = &a.form.pair(&b.vf) - &b.form.pair(&a.vf);
    let form = &(&lie_derivative(&a.vf, &b.form) - &lie_derivative(&b.vf, &a.form))
        + &differential(&(&half * &mixed));
    BigSection { vf, form }
}

/// A section of the stable big tangent bundle:
/// `({X,u},{a,v})` with two extra scalar slots.
#[derive(Clone, PartialEq, Eq)]
pub struct StableSection {
    pub vf: VectorField,
    pub u: Scalar,
    pub form: KForm,
    pub v: Scalar,
}

impl StableSection {
    pub fn new(vf: VectorField, u: Scalar, form: KForm, v: Scalar) -> Self {
        assert!(vf.chart() == form.chart(), "chart mismatch");
        assert_eq!(form.degree(), 1);
        StableSection { vf, u, form, v }
    }

    pub fn zero(chart: &Chart) -> Self {
        StableSection {
            vf: VectorField::zero(chart),
            u: Scalar::zero(chart),
            form: KForm::zero(chart, 1),
            v: Scalar::zero(chart),
        }
    }

    /// Embed a plain big-tangent section with zero stable slots.
    pub fn from_big(a: &BigSection) -> Self {
        StableSection {
            vf: a.vf.clone(),
            u: Scalar::zero(a.chart()),
            form: a.form.clone(),
            v: Scalar::zero(a.chart()),
        }
    }

    pub fn chart(&self) -> &Chart {
        self.vf.chart()
    }

    pub fn is_zero(&self) -> bool {
        self.vf.is_zero() && self.u.is_zero() && self.form.is_zero() && self.v.is_zero()
    }

    pub fn scale(&self, s: &Scalar) -> StableSection {
        StableSection {
            vf: self.vf.scale(s),
            u: s * &self.u,
            form: self.form.scale(s),
            v: s * &self.v,
        }
    }

    /// Slot vector: vector components, u, form components, v.
    pub fn slots(&self) -> Vec<Scalar> {
        let m = self.chart().dim();
        let mut out = Vec::with_capacity(2 * m + 2);
        out.extend(self.vf.components().iter().cloned());
        out.push(self.u.clone());
        for i in 0..m {
            out.push(self.form.component(&[i as u8]));
        }
        out.push(self.v.clone());
        out
    }
}

impl Add for &StableSection {
    type Output = StableSection;
    fn add(self, rhs: &StableSection) -> StableSection {
        StableSection {
            vf: &self.vf + &rhs.vf,
            u: &self.u + &rhs.u,
            form: &self.form + &rhs.form,
            v: &self.v + &rhs.v,
        }
    }
}

impl Sub for &StableSection {
    type Output = StableSection;
    fn sub(self, rhs: &StableSection) -> StableSection {
        self + &(-rhs)
    }
}

impl Neg for &StableSection {
    type Output = StableSection;
    fn neg(self) -> StableSection {
        StableSection { vf: -&self.vf, u: -&self.u, form: -&self.form, v: -&self.v }
    }
}

impl fmt::Display for StableSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "( {{ {} , {} }} , {{ {} , {} }} )", self.vf, self.u, self.form, self.v)
    }
}

impl fmt::Debug for StableSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn half(chart: &Chart) -> Scalar {
    Scalar::constant(chart, GaussRat::new(crate::scalar::rat(1, 2), crate::scalar::rat(0, 1)))
}

/// Stable neutral metric
/// `g(X1,X2) = (a1(X2) + a2(X1) + u1 v2 + u2 v1) / 2`.
pub fn stable_pairing_g(a: &StableSection, b: &StableSection) -> Scalar {
    let s = &(&a.form.pair(&b.vf) + &b.form.pair(&a.vf))
        + &(&(&a.u * &b.v) + &(&b.u * &a.v));
    &half(a.chart()) * &s
}

/// Stable 2-form `w(X1,X2) = (a1(X2) - a2(X1) + u1 v2 - u2 v1) / 2`.
pub fn stable_pairing_omega(a: &StableSection, b: &StableSection) -> Scalar {
    let s = &(&a.form.pair(&b.vf) - &b.form.pair(&a.vf))
        + &(&(&a.u * &b.v) - &(&b.u * &a.v));
    &half(a.chart()) * &s
}

/// Wade bracket on stable sections.
///
/// Component conventions, with `X1 = ({X1,u1},{a1,v1})` etc.:
///
/// * vector: `[X1,X2]`
/// * first slot: `X1 u2 - X2 u1`
/// * form: `L_{X1} a2 - L_{X2} a1 + d(a1(X2) - a2(X1))/2 + u1 a2 - u2 a1
///          + (v2 du1 - v1 du2 - u1 dv2 + u2 dv1)/2`
/// * second slot: `X1 v2 - X2 v1 + (a2(X1) - a1(X2) + u2 v1 - u1 v2)/2`
///
/// The last group is oriented so that the stable lift of an integrable
/// structure closes under this bracket exactly when the prequantization
/// curvature condition holds; on a pair of g-isotropic sections with zero
/// stable slots it restricts to the Courant bracket plus the tail
/// `({0,0},{0,a2(X1)})`.
pub fn wade_bracket(a: &StableSection, b: &StableSection) -> StableSection {
    let chart = a.chart().clone();
    let h = half(&chart);

    let vf = lie_bracket(&a.vf, &b.vf);
    let u = &a.vf.apply(&b.u) - &b.vf.apply(&a.u);

    let a1x2 = a.form.pair(&b.vf);
    let a2x1 = b.form.pair(&a.vf);

    let mut form = &lie_derivative(&a.vf, &b.form) - &lie_derivative(&b.vf, &a.form);
    form = &form + &differential(&(&h * &(&a1x2 - &a2x1)));
    form = &form + &(&b.form.scale(&a.u) - &a.form.scale(&b.u));
    let du1 = differential(&a.u);
    let du2 = differential(&b.u);
    let dv1 = differential(&a.v);
    let dv2 = differential(&b.v);
    let mixed = &(&du1.scale(&b.v) - &du2.scale(&a.v)) - &(&dv2.scale(&a.u) - &dv1.scale(&b.u));
    form = &form + &mixed.scale(&h);

    let mut v = &a.vf.apply(&b.v) - &b.vf.apply(&a.v);
    let grp = &(&a2x1 - &a1x2) + &(&(&b.u * &a.v) - &(&a.u * &b.v));
    v = &v + &(&h * &grp);

    StableSection { vf, u, form, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::KForm;

    fn chart_qp() -> Chart {
        Chart::new(&["q", "p"]).unwrap()
    }

    fn chart_xy() -> Chart {
        Chart::new(&["x", "y"]).unwrap()
    }

    #[test]
    fn metric_examples() {
        let ch = chart_xy();
        let dx = VectorField::coordinate(&ch, 0);
        let a = BigSection::new(dx.clone(), KForm::coordinate(&ch, 0));
        assert_eq!(pairing_g(&a, &a), Scalar::one(&ch));
        let x = BigSection::from_vector(&dx);
        let y = BigSection::from_vector(&VectorField::coordinate(&ch, 1));
        assert!(pairing_g(&x, &y).is_zero());
    }

    #[test]
    fn omega_examples() {
        let ch = chart_qp();
        let a = BigSection::new(VectorField::coordinate(&ch, 0), KForm::coordinate(&ch, 1));
        let b = BigSection::from_vector(&VectorField::coordinate(&ch, 1));
        // w((Dq,dp),(Dp,0)) = 1/2
        assert_eq!(
            pairing_omega(&a, &b),
            Scalar::constant(&ch, GaussRat::new(crate::scalar::rat(1, 2), crate::scalar::rat(0, 1)))
        );
        assert!(pairing_omega(&a, &a).is_zero());
        let x = BigSection::from_vector(&VectorField::coordinate(&ch, 0));
        assert!(pairing_omega(&x, &b).is_zero());
    }

    #[test]
    fn courant_examples() {
        let ch = chart_xy();
        let dx = BigSection::from_vector(&VectorField::coordinate(&ch, 0));
        let dy = BigSection::from_vector(&VectorField::coordinate(&ch, 1));
        assert!(courant_bracket(&dx, &dy).is_zero());

        // [(x Dy, dy), (Dx, 0)] = (-Dy, 0)
        let a = BigSection::new(
            VectorField::coordinate(&ch, 1).scale(&Scalar::coord(&ch, 0)),
            KForm::coordinate(&ch, 1),
        );
        let b = BigSection::from_vector(&VectorField::coordinate(&ch, 0));
        let br = courant_bracket(&a, &b);
        assert_eq!(br.vf, -&VectorField::coordinate(&ch, 1));
        assert!(br.form.is_zero());

        assert!(courant_bracket(&a, &a).is_zero());
    }

    #[test]
    fn wade_antisymmetry_and_tail() {
        let ch = chart_qp();
        let q = Scalar::coord(&ch, 0);
        let a = StableSection::new(
            VectorField::coordinate(&ch, 1).scale(&q),
            Scalar::coord(&ch, 1),
            KForm::coordinate(&ch, 0),
            Scalar::int(&ch, 2),
        );
        let b = StableSection::new(
            VectorField::coordinate(&ch, 0),
            q.clone(),
            KForm::coordinate(&ch, 1).scale(&q),
            Scalar::coord(&ch, 1),
        );
        let ab = wade_bracket(&a, &b);
        let ba = wade_bracket(&b, &a);
        assert_eq!(ab, -&ba);
        assert!(wade_bracket(&a, &a).is_zero());

        // On zero stable slots and g-isotropic sections:
        // [ (X1,0,0), (X2,0,0) ] = [X1,X2]_C + ({0,0},{0,a2(X1)}).
        let e1 = BigSection::new(VectorField::coordinate(&ch, 1), -&KForm::coordinate(&ch, 0));
        let e2 = BigSection::new(VectorField::coordinate(&ch, 0), KForm::coordinate(&ch, 1));
        assert!(pairing_g(&e1, &e2).is_zero());
        let w = wade_bracket(&StableSection::from_big(&e1), &StableSection::from_big(&e2));
        let c = courant_bracket(&e1, &e2);
        assert_eq!(w.vf, c.vf);
        assert_eq!(w.form, c.form);
        assert!(w.u.is_zero());
        assert_eq!(w.v, e2.form.pair(&e1.vf));
    }

    #[test]
    fn stable_metric_on_vertical_generator() {
        let ch = chart_qp().with_fibre();
        let t = ch.fibre_index().unwrap();
        let v = StableSection::new(
            VectorField::coordinate(&ch, t),
            Scalar::zero(&ch),
            KForm::zero(&ch, 1),
            Scalar::one(&ch),
        );
        assert!(stable_pairing_g(&v, &v).is_zero());
    }
}
