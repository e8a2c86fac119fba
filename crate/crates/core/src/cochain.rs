//! Truncated cochains on a big-isotropic structure and their coboundary.
//!
//! A truncated `s`-cochain takes `s-1` arguments in `E` and one in `E'`,
//! and is antisymmetric whenever all arguments land in `E`. Backings:
//!
//! * the image `j(w)` of an ordinary form under evaluation of vector parts;
//! * a pair `(U, nu)` seen as the 1-cochain `theta(Y,b) = nu(Y) + b(U)`;
//! * the fundamental 2-cochain `omega_E`, the restriction of the canonical
//!   2-form;
//! * a table of values on frame tuples;
//! * the formal coboundary of another cochain.
//!
//! The coboundary is the Lie-algebroid style alternating sum with Courant
//! brackets; at `s = 1` it evaluates to `X(t(Y)) - Y(t(X)) - t([X,Y])`.
//! Frame tables are re-expanded through span membership, so evaluation can
//! hit a denominator locus and reports it instead of guessing.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::big_tangent::{courant_bracket, pairing_omega, BigSection};
use crate::exterior::{KForm, VectorField};
use crate::linalg::SpanOutcome;
use crate::ratfn::RatFn;
use crate::scalar::Scalar;
use crate::structure::{BigIsoStructure, Family};

#[derive(Debug, Error)]
pub enum CochainError {
    #[error("frame re-expansion hit the denominator locus {locus}")]
    IndeterminateExpansion { locus: Scalar },
    #[error("a section needed by frame re-expansion lies outside the {family:?} span")]
    OutsideFrame { family: Family },
    #[error("cochain of degree {expected} evaluated with {got} arguments in E")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("the result has a nonconstant denominator {locus}")]
    NonPolynomialResult { locus: Scalar },
}

/// Values on structure-frame tuples: key = strictly increasing tuple of
/// `E`-generator indices (length `s-1`) plus one `E'`-generator index.
#[derive(Clone, Debug, Default)]
pub struct FrameTable {
    values: BTreeMap<(Vec<u8>, u8), Scalar>,
}

impl FrameTable {
    pub fn new() -> Self {
        FrameTable { values: BTreeMap::new() }
    }

    /// Insert a value on a frame tuple; the E-part must be strictly
    /// increasing.
    pub fn insert(&mut self, e_indices: Vec<u8>, ep_index: u8, value: Scalar) {
        assert!(e_indices.windows(2).all(|w| w[0] < w[1]), "E-tuple must be increasing");
        if value.is_zero() {
            self.values.remove(&(e_indices, ep_index));
        } else {
            self.values.insert((e_indices, ep_index), value);
        }
    }

    fn lookup(&self, chart: &crate::chart::Chart, e_indices: &[u8], ep_index: u8) -> Scalar {
        match crate::exterior::sort_indices(e_indices) {
            None => Scalar::zero(chart),
            Some((key, sign)) => match self.values.get(&(key, ep_index)) {
                None => Scalar::zero(chart),
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
}

/// A truncated cochain of degree `s`.
#[derive(Clone, Debug)]
pub enum TruncCochain {
    /// `j(w)`: evaluation of an ordinary degree-`s` form on the vector parts.
    FormBacked(KForm),
    /// `s = 1`: `theta(Y,b) = nu(Y) + b(U)`.
    PairBacked { u: VectorField, nu: KForm },
    /// `s = 2`: the restriction of the canonical 2-form.
    OmegaE,
    /// Values on structure-frame tuples.
    FrameTable { degree: usize, table: FrameTable },
    /// The coboundary of another cochain.
    Dtr(Box<TruncCochain>),
}

impl TruncCochain {
    pub fn degree(&self) -> usize {
        match self {
            TruncCochain::FormBacked(w) => w.degree(),
            TruncCochain::PairBacked { .. } => 1,
            TruncCochain::OmegaE => 2,
            TruncCochain::FrameTable { degree, .. } => *degree,
            TruncCochain::Dtr(inner) => inner.degree() + 1,
        }
    }

    /// The morphism from ordinary forms.
    pub fn j_map(w: &KForm) -> TruncCochain {
        TruncCochain::FormBacked(w.clone())
    }

    pub fn dtr(self) -> TruncCochain {
        TruncCochain::Dtr(Box::new(self))
    }
}

/// Expand a section in frame coefficients of the requested family.
fn frame_coeffs(
    s: &BigIsoStructure,
    family: Family,
    x: &BigSection,
) -> Result<Vec<RatFn>, CochainError> {
    match s.in_span(x, family) {
        SpanOutcome::Yes(c) => Ok(c.iter().map(RatFn::from_scalar).collect()),
        SpanOutcome::Indeterminate { coeffs, .. } => Ok(coeffs),
        SpanOutcome::No => Err(CochainError::OutsideFrame { family }),
    }
}

/// Evaluate a cochain on actual sections: `e_args` in `E` (or combinations
/// thereof), `ep_arg` in `E'`. Internal arithmetic runs in the rational
/// function field.
pub fn eval_sections(
    s: &BigIsoStructure,
    t: &TruncCochain,
    e_args: &[BigSection],
    ep_arg: &BigSection,
) -> Result<RatFn, CochainError> {
    let chart = s.chart();
    if e_args.len() + 1 != t.degree() {
        return Err(CochainError::DegreeMismatch { expected: t.degree(), got: e_args.len() + 1 });
    }
    match t {
        TruncCochain::FormBacked(w) => {
            let mut vfs: Vec<&VectorField> = e_args.iter().map(|a| &a.vf).collect();
            vfs.push(&ep_arg.vf);
            Ok(RatFn::from_scalar(&w.eval(&vfs).expect("degree checked")))
        }
        TruncCochain::PairBacked { u, nu } => {
            let v = &nu.pair(&ep_arg.vf) + &ep_arg.form.pair(u);
            Ok(RatFn::from_scalar(&v))
        }
        TruncCochain::OmegaE => {
            Ok(RatFn::from_scalar(&pairing_omega(&e_args[0], ep_arg)))
        }
        TruncCochain::FrameTable { degree, table } => {
            let mut e_coeffs = Vec::new();
            for a in e_args {
                e_coeffs.push(frame_coeffs(s, Family::E, a)?);
            }
            let ep_coeffs = frame_coeffs(s, Family::EPrime, ep_arg)?;
            let k = s.gens_e().len();
            let kp = s.gens_ep().len();
            if *degree > 1 && k == 0 {
                return Ok(RatFn::zero(chart));
            }
            let mut total = RatFn::zero(chart);
            let mut idx = vec![0usize; degree - 1];
            loop {
                // product over the chosen frame tuple
                for a in 0..kp {
                    let cp = &ep_coeffs[a];
                    if cp.is_zero() {
                        continue;
                    }
                    let mut coef = cp.clone();
                    for (pos, &i) in idx.iter().enumerate() {
                        coef = &coef * &e_coeffs[pos][i];
                        if coef.is_zero() {
                            break;
                        }
                    }
                    if coef.is_zero() {
                        continue;
                    }
                    let key: Vec<u8> = idx.iter().map(|&i| i as u8).collect();
                    let val = table.lookup(chart, &key, a as u8);
                    if !val.is_zero() {
                        total = &total + &(&coef * &RatFn::from_scalar(&val));
                    }
                }
                // advance the multi-index
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        return Ok(total);
                    }
                    idx[pos] += 1;
                    if idx[pos] < k {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if k == 0 {
                    return Ok(total);
                }
            }
        }
        TruncCochain::Dtr(inner) => {
            let n = e_args.len(); // inner degree is n
            let mut total = RatFn::zero(chart);
            // +/- X_a (inner(.. without a .., Y))
            for a in 0..n {
                let rest: Vec<BigSection> = e_args
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != a)
                    .map(|(_, x)| x.clone())
                    .collect();
                let val = eval_sections(s, inner, &rest, ep_arg)?;
                let term = val.apply_vf(&e_args[a].vf);
                total = if a % 2 == 0 { &total + &term } else { &total - &term };
            }
            // (-1)^n Y(inner(X_1..X_n)) needs at least one E argument to
            // move into the E' slot.
            if n >= 1 {
                let val = eval_sections(s, inner, &e_args[..n - 1], &e_args[n - 1])?;
                let term = val.apply_vf(&ep_arg.vf);
                total = if n % 2 == 0 { &total + &term } else { &total - &term };
            }
            // (-1)^{a+b} inner([X_a,X_b], .., Y) with 1-based a < b, which is
            // +1 exactly when the 0-based index sum is even.
            for a in 0..n {
                for b in (a + 1)..n {
                    let br = courant_bracket(&e_args[a], &e_args[b]);
                    let mut rest = vec![br];
                    for (i, x) in e_args.iter().enumerate() {
                        if i != a && i != b {
                            rest.push(x.clone());
                        }
                    }
                    let val = eval_sections(s, inner, &rest, ep_arg)?;
                    total = if (a + b) % 2 == 0 { &total + &val } else { &total - &val };
                }
            }
            // (-1)^{a} inner(.. without a .., [X_a, Y]) with 1-based a;
            // this is the sign that restores `- t([X,Y])` at degree one.
            for a in 0..n {
                let rest: Vec<BigSection> = e_args
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != a)
                    .map(|(_, x)| x.clone())
                    .collect();
                let br = courant_bracket(&e_args[a], ep_arg);
                let val = eval_sections(s, inner, &rest, &br)?;
                total = if a % 2 == 1 { &total + &val } else { &total - &val };
            }
            Ok(total)
        }
    }
}

/// Evaluate on frame-coefficient arguments and demand an exact polynomial.
pub fn eval_cochain(
    s: &BigIsoStructure,
    t: &TruncCochain,
    e_coeffs: &[Vec<Scalar>],
    ep_coeffs: &[Scalar],
) -> Result<Scalar, CochainError> {
    let e_args: Vec<BigSection> = e_coeffs.iter().map(|c| s.combine(Family::E, c)).collect();
    let ep_arg = s.combine(Family::EPrime, ep_coeffs);
    let v = eval_sections(s, t, &e_args, &ep_arg)?;
    match v.as_polynomial() {
        Some(p) => Ok(p.clone()),
        None => Err(CochainError::NonPolynomialResult { locus: v.den().clone() }),
    }
}

/// Evaluate the coboundary of `t` on actual sections.
pub fn d_tr_eval(
    s: &BigIsoStructure,
    t: &TruncCochain,
    e_args: &[BigSection],
    ep_arg: &BigSection,
) -> Result<RatFn, CochainError> {
    eval_sections(s, &TruncCochain::Dtr(Box::new(t.clone())), e_args, ep_arg)
}

/// A failed complex identity: which tuple and the residual value.
#[derive(Debug)]
pub struct ComplexWitness {
    pub tuple_index: usize,
    pub residual: RatFn,
}

/// Report for [`check_complex`].
#[derive(Debug, Default)]
pub struct ComplexReport {
    pub d_squared_failures: Vec<ComplexWitness>,
    pub omega_failures: Vec<ComplexWitness>,
}

impl ComplexReport {
    pub fn is_pass(&self) -> bool {
        self.d_squared_failures.is_empty() && self.omega_failures.is_empty()
    }
}

/// Check `d_tr(d_tr t) = 0` on the supplied `(deg t + 2)`-tuples and
/// `d_tr omega_E = 0` on the supplied 3-tuples. Each tuple is a list of
/// sections whose last entry feeds the `E'` slot.
pub fn check_complex(
    s: &BigIsoStructure,
    t: &TruncCochain,
    tuples: &[(Vec<BigSection>, BigSection)],
    omega_tuples: &[(Vec<BigSection>, BigSection)],
) -> Result<ComplexReport, CochainError> {
    let dd = TruncCochain::Dtr(Box::new(TruncCochain::Dtr(Box::new(t.clone()))));
    let mut report = ComplexReport::default();
    for (i, (e_args, ep)) in tuples.iter().enumerate() {
        let v = eval_sections(s, &dd, e_args, ep)?;
        if !v.is_zero() {
            report.d_squared_failures.push(ComplexWitness { tuple_index: i, residual: v });
        }
    }
    let dw = TruncCochain::Dtr(Box::new(TruncCochain::OmegaE));
    for (i, (e_args, ep)) in omega_tuples.iter().enumerate() {
        let v = eval_sections(s, &dw, e_args, ep)?;
        if !v.is_zero() {
            report.omega_failures.push(ComplexWitness { tuple_index: i, residual: v });
        }
    }
    Ok(report)
}

impl fmt::Display for TruncCochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncCochain::FormBacked(w) => write!(f, "j({w})"),
            TruncCochain::PairBacked { u, nu } => write!(f, "theta(U = {u}, nu = {nu})"),
            TruncCochain::OmegaE => write!(f, "omega_E"),
            TruncCochain::FrameTable { degree, .. } => write!(f, "frame table (degree {degree})"),
            TruncCochain::Dtr(inner) => write!(f, "d_tr({inner})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::exterior::{coordinate_bivector, KForm};
    use crate::scalar::{rat_int, Rat};
    use crate::structure::build_graph_bivector;

    fn symplectic_plane() -> BigIsoStructure {
        let ch = Chart::new(&["q", "p"]).unwrap();
        let p = coordinate_bivector(&ch, 0, 1);
        let pts: Vec<Vec<Rat>> =
            vec![vec![rat_int(1), rat_int(2)], vec![rat_int(-1), rat_int(1)]];
        build_graph_bivector(
            &p,
            &[KForm::coordinate(&ch, 0), KForm::coordinate(&ch, 1)],
            &[],
            pts,
        )
        .unwrap()
    }

    #[test]
    fn j_map_evaluation() {
        let s = symplectic_plane();
        let ch = s.chart().clone();
        let w = KForm::coordinate(&ch, 0).wedge(&KForm::coordinate(&ch, 1));
        let j = TruncCochain::j_map(&w);
        // on ((Dp,-dq),(Dq, - )): w(Dp, Dq) = -1
        let x = BigSection::new(
            crate::exterior::VectorField::coordinate(&ch, 1),
            -&KForm::coordinate(&ch, 0),
        );
        let y = s.gens_ep()[1].clone(); // (-Dq, dp)
        let v = eval_sections(&s, &j, &[x.clone()], &y).unwrap();
        // w(Dp, -Dq) = +1
        assert_eq!(v, RatFn::from_scalar(&Scalar::one(&ch)));
        // zero form gives the zero cochain
        let z = TruncCochain::j_map(&KForm::zero(&ch, 2));
        assert!(eval_sections(&s, &z, &[x], &y).unwrap().is_zero());
    }

    #[test]
    fn pair_backed_evaluation() {
        let s = symplectic_plane();
        let ch = s.chart().clone();
        let theta = TruncCochain::PairBacked {
            u: crate::exterior::VectorField::coordinate(&ch, 0),
            nu: KForm::zero(&ch, 1),
        };
        // theta(Dp, dq) = dq(Dq) = 1
        let y = BigSection::new(
            crate::exterior::VectorField::coordinate(&ch, 1),
            KForm::coordinate(&ch, 0),
        );
        assert_eq!(
            eval_sections(&s, &theta, &[], &y).unwrap(),
            RatFn::from_scalar(&Scalar::one(&ch))
        );
        let theta2 = TruncCochain::PairBacked {
            u: crate::exterior::VectorField::zero(&ch),
            nu: KForm::coordinate(&ch, 1),
        };
        let y2 = BigSection::from_vector(&crate::exterior::VectorField::coordinate(&ch, 1));
        assert_eq!(
            eval_sections(&s, &theta2, &[], &y2).unwrap(),
            RatFn::from_scalar(&Scalar::one(&ch))
        );
    }

    #[test]
    fn dtr_at_degree_one_matches_formula() {
        let s = symplectic_plane();
        let ch = s.chart().clone();
        let p_coord = Scalar::coord(&ch, 1);
        // nu = p dq
        let nu = KForm::coordinate(&ch, 0).scale(&p_coord);
        let theta = TruncCochain::PairBacked {
            u: crate::exterior::VectorField::zero(&ch),
            nu: nu.clone(),
        };
        let x = s.gens_e()[0].clone(); // (Dp, dq)
        let y = s.gens_ep()[1].clone(); // (-Dq, dp)
        let got = d_tr_eval(&s, &theta, &[x.clone()], &y).unwrap();
        // X(nu(Y)) - Y(nu(X)) - nu([X,Y])
        let nx = nu.pair(&y.vf);
        let ny = nu.pair(&x.vf);
        let br = courant_bracket(&x, &y);
        let expect = &(&x.vf.apply(&nx) - &y.vf.apply(&ny)) - &nu.pair(&br.vf);
        assert_eq!(got, RatFn::from_scalar(&expect));
    }

    #[test]
    fn dtr_of_zero_and_omega_closure() {
        let s = symplectic_plane();
        let ch = s.chart().clone();
        let zero = TruncCochain::PairBacked {
            u: crate::exterior::VectorField::zero(&ch),
            nu: KForm::zero(&ch, 1),
        };
        let x = s.gens_e()[0].clone();
        let y = s.gens_ep()[1].clone();
        assert!(d_tr_eval(&s, &zero, &[x.clone()], &y).unwrap().is_zero());

        // omega_E evaluates via the canonical pairing
        let w = TruncCochain::OmegaE;
        let v = eval_sections(&s, &w, &[x.clone()], &y).unwrap();
        assert_eq!(v, RatFn::from_scalar(&pairing_omega(&x, &y)));
    }

    #[test]
    fn frame_table_roundtrip() {
        let s = symplectic_plane();
        let ch = s.chart().clone();
        let mut table = FrameTable::new();
        let q = Scalar::coord(&ch, 0);
        table.insert(vec![], 0, q.clone());
        let t = TruncCochain::FrameTable { degree: 1, table };
        // On the frame element f0 itself the stored value comes back.
        let v = eval_sections(&s, &t, &[], &s.gens_ep()[0]).unwrap();
        assert_eq!(v, RatFn::from_scalar(&q));
        // And it is linear over scalars.
        let p = Scalar::coord(&ch, 1);
        let arg = s.gens_ep()[0].scale(&p);
        let v = eval_sections(&s, &t, &[], &arg).unwrap();
        assert_eq!(v, RatFn::from_scalar(&(&q * &p)));
    }
}
