//! Property tests for the operator identities of the calculus and the
//! bracket conventions.

mod common;

use bigiso::big_tangent::{
    courant_bracket, pairing_g, pairing_omega, wade_bracket, BigSection, StableSection,
};
use bigiso::chart::Chart;
use bigiso::cochain::{d_tr_eval, eval_sections, TruncCochain};
use bigiso::exterior::{
    differential, exterior_derivative, lie_bracket, lie_derivative, poisson_check,
    coordinate_bivector, KForm, KMultivector, VectorField,
};
use bigiso::hamiltonian::{hamiltonian_representative, HamMode};
use bigiso::preq_space::QContext;
use bigiso::scalar::{GaussRat, Mono, Scalar};
use bigiso::structure::Family;
use common::*;
use proptest::prelude::*;

/// Raw term data for a scalar: exponents (clipped to the chart), numerator,
/// denominator, imaginary numerator.
type RawTerms = Vec<(Vec<u16>, i8, u8, i8)>;

fn arb_terms(m: usize, max_deg: u16, terms: usize) -> impl Strategy<Value = RawTerms> {
    prop::collection::vec(
        (
            prop::collection::vec(0u16..=max_deg.min(2), m),
            -4i8..=4,
            1u8..=3,
            -2i8..=2,
        ),
        0..=terms,
    )
}

fn build_scalar(chart: &Chart, raw: &RawTerms, max_deg: u16) -> Scalar {
    let mut acc = Vec::new();
    for (exps, n, d, im) in raw {
        let mut exps = exps.clone();
        exps.resize(chart.dim(), 0);
        // clip total degree
        let mut budget = max_deg;
        for e in exps.iter_mut() {
            if *e > budget {
                *e = budget;
            }
            budget -= *e;
        }
        acc.push((
            Mono { exps, c: 0 },
            GaussRat::new(
                bigiso::scalar::rat(*n as i64, *d as i64),
                bigiso::scalar::rat(*im as i64, 1),
            ),
        ));
    }
    Scalar::from_terms(chart, acc)
}

fn chart_of_dim(m: usize) -> Chart {
    let names: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Chart::new(&refs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normalization_is_canonical(
        m in 2usize..=4,
        ra in arb_terms(4, 3, 4),
        rb in arb_terms(4, 3, 4),
        rc in arb_terms(4, 3, 4),
    ) {
        let ch = chart_of_dim(m);
        let a = build_scalar(&ch, &ra, 3);
        let b = build_scalar(&ch, &rb, 3);
        let c = build_scalar(&ch, &rc, 3);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        a.debug_validate();
        (&a * &b).debug_validate();
    }

    #[test]
    fn d_squared_is_zero(
        m in 2usize..=5,
        degree in 0usize..=3,
        seed in 0u64..1000,
    ) {
        let ch = chart_of_dim(m);
        let degree = degree.min(m);
        let mut r = rng(seed);
        let w = random_kform(&mut r, &ch, degree, 3);
        let ddw = exterior_derivative(&exterior_derivative(&w));
        prop_assert!(ddw.is_zero());
    }

    #[test]
    fn cartan_formula_matches_direct_lie_derivative(
        m in 2usize..=4,
        degree in 1usize..=2,
        seed in 0u64..1000,
    ) {
        let ch = chart_of_dim(m);
        let degree = degree.min(m);
        let mut r = rng(seed);
        let x = random_vf(&mut r, &ch, 2);
        let w = random_kform(&mut r, &ch, degree, 2);
        let lhs = lie_derivative(&x, &w);
        // independent route: (L_X w)(Y_1..Y_k) =
        // X(w(Y_1..)) - sum_i w(.., [X, Y_i], ..) on coordinate fields
        let coords: Vec<VectorField> =
            (0..m).map(|i| VectorField::coordinate(&ch, i)).collect();
        let mut tuple = vec![0usize; degree];
        loop {
            if tuple.windows(2).all(|w| w[0] < w[1]) {
                let args: Vec<&VectorField> = tuple.iter().map(|&i| &coords[i]).collect();
                let mut expect = x.apply(&w.eval(&args).unwrap());
                for pos in 0..degree {
                    let br = lie_bracket(&x, &coords[tuple[pos]]);
                    let mut args2: Vec<&VectorField> = args.clone();
                    args2[pos] = &br;
                    expect = &expect - &w.eval(&args2).unwrap();
                }
                let key: Vec<u8> = tuple.iter().map(|&i| i as u8).collect();
                prop_assert_eq!(lhs.component(&key), expect);
            }
            // next tuple
            let mut pos = 0;
            loop {
                if pos == degree {
                    break;
                }
                tuple[pos] += 1;
                if tuple[pos] < m {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
            }
            if pos == degree {
                break;
            }
        }
    }

    #[test]
    fn lie_derivatives_represent_brackets(
        m in 2usize..=3,
        seed in 0u64..1000,
    ) {
        let ch = chart_of_dim(m);
        let mut r = rng(seed);
        let x = random_vf(&mut r, &ch, 2);
        let y = random_vf(&mut r, &ch, 2);
        let w = random_kform(&mut r, &ch, 1, 2);
        let lhs = lie_derivative(&x, &lie_derivative(&y, &w));
        let lhs = &lhs - &lie_derivative(&y, &lie_derivative(&x, &w));
        let rhs = lie_derivative(&lie_bracket(&x, &y), &w);
        prop_assert_eq!(lhs, rhs);
        // and L_X d = d L_X
        let a = exterior_derivative(&lie_derivative(&x, &w));
        let b = lie_derivative(&x, &exterior_derivative(&w));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn courant_bracket_function_expansion(
        m in 2usize..=3,
        seed in 0u64..1000,
    ) {
        // [a, f b] = f [a,b] + (X_a f) b - g(a,b) (0, df)
        let ch = chart_of_dim(m);
        let mut r = rng(seed);
        let a = BigSection::new(random_vf(&mut r, &ch, 1), random_one_form(&mut r, &ch, 1));
        let b = BigSection::new(random_vf(&mut r, &ch, 1), random_one_form(&mut r, &ch, 1));
        let f = random_scalar(&mut r, &ch, 2, 3);
        let lhs = courant_bracket(&a, &b.scale(&f));
        let mut rhs = courant_bracket(&a, &b).scale(&f);
        rhs = &rhs + &b.scale(&a.vf.apply(&f));
        rhs = &rhs - &BigSection::from_form(&differential(&f)).scale(&pairing_g(&a, &b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pairings_are_bilinear_and_brackets_antisymmetric(
        m in 2usize..=3,
        seed in 0u64..1000,
    ) {
        let ch = chart_of_dim(m);
        let mut r = rng(seed);
        let a = BigSection::new(random_vf(&mut r, &ch, 1), random_one_form(&mut r, &ch, 1));
        let b = BigSection::new(random_vf(&mut r, &ch, 1), random_one_form(&mut r, &ch, 1));
        let f = random_scalar(&mut r, &ch, 2, 2);
        prop_assert_eq!(pairing_g(&a.scale(&f), &b), &f * &pairing_g(&a, &b));
        prop_assert_eq!(pairing_omega(&a, &b.scale(&f)), &f * &pairing_omega(&a, &b));
        prop_assert_eq!(pairing_omega(&a, &b), -&pairing_omega(&b, &a));
        prop_assert_eq!(courant_bracket(&a, &b), -&courant_bracket(&b, &a));
        prop_assert!(courant_bracket(&a, &a).is_zero());

        let sa = StableSection::new(
            random_vf(&mut r, &ch, 1),
            random_scalar(&mut r, &ch, 1, 2),
            random_one_form(&mut r, &ch, 1),
            random_scalar(&mut r, &ch, 1, 2),
        );
        let sb = StableSection::new(
            random_vf(&mut r, &ch, 1),
            random_scalar(&mut r, &ch, 1, 2),
            random_one_form(&mut r, &ch, 1),
            random_scalar(&mut r, &ch, 1, 2),
        );
        prop_assert_eq!(wade_bracket(&sa, &sb), -&wade_bracket(&sb, &sa));
        prop_assert!(wade_bracket(&sa, &sa).is_zero());
    }

    #[test]
    fn poisson_check_matches_component_oracle(
        seed in 0u64..2000,
    ) {
        let ch = chart_of_dim(3);
        let mut r = rng(seed);
        // random bivector with linear coefficients
        let mut p = KMultivector::zero(&ch, 2);
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            p = &p + &coordinate_bivector(&ch, i, j).scale(&random_scalar(&mut r, &ch, 1, 2));
        }
        prop_assert_eq!(poisson_check(&p), schouten_self_bracket_vanishes(&p));
    }
}

#[test]
fn courant_jacobi_fails_off_structure() {
    // A pairwise g-orthogonal triple whose Jacobi sum is nonzero; the
    // bracket is a Lie-algebroid bracket only on the sections of an
    // integrable isotropic structure and its orthogonal.
    let ch = Chart::new(&["x", "y", "z"]).unwrap();
    let xz = &Scalar::coord(&ch, 0) * &Scalar::coord(&ch, 2);
    let a = BigSection::new(
        VectorField::coordinate(&ch, 0),
        KForm::coordinate(&ch, 1).scale(&xz),
    );
    let b = BigSection::new(
        VectorField::coordinate(&ch, 1),
        -&KForm::coordinate(&ch, 0).scale(&xz),
    );
    let c = BigSection::from_vector(&VectorField::coordinate(&ch, 2));
    assert!(pairing_g(&a, &b).is_zero());
    assert!(pairing_g(&a, &c).is_zero());
    assert!(pairing_g(&b, &c).is_zero());
    let jac = &(&courant_bracket(&courant_bracket(&a, &b), &c)
        + &courant_bracket(&courant_bracket(&b, &c), &a))
        + &courant_bracket(&courant_bracket(&c, &a), &b);
    assert!(!jac.is_zero());
}

#[test]
fn cochain_tensoriality_and_j_morphism() {
    let mut r = rng(7);
    for inst in [lambda_family(&mut r, 3, 1), bivector_family(&mut r, 4, 2)] {
        let s = &inst.structure;
        let ch = s.chart().clone();
        for round in 0..6 {
            let mut r2 = rng(round);
            // j is a cochain map: d_tr(j w) = j(dw) on sampled tuples
            let w = random_kform(&mut r2, &ch, 1, 2);
            let j = TruncCochain::j_map(&w);
            let jd = TruncCochain::j_map(&exterior_derivative(&w));
            let x = random_section_of(&mut r2, s, Family::E, 1);
            let y = random_section_of(&mut r2, s, Family::EPrime, 1);
            let lhs = d_tr_eval(s, &j, std::slice::from_ref(&x), &y).unwrap();
            let rhs = eval_sections(s, &jd, std::slice::from_ref(&x), &y).unwrap();
            assert_eq!(lhs, rhs);

            // tensoriality of the coboundary value of a pair cochain
            let theta = TruncCochain::PairBacked {
                u: random_vf(&mut r2, &ch, 1),
                nu: random_one_form(&mut r2, &ch, 1),
            };
            let f = random_scalar(&mut r2, &ch, 1, 2);
            let base = d_tr_eval(s, &theta, std::slice::from_ref(&x), &y).unwrap();
            let scaled = d_tr_eval(s, &theta, &[x.scale(&f)], &y).unwrap();
            assert_eq!(
                scaled,
                &bigiso::ratfn::RatFn::from_scalar(&f) * &base
            );
        }
    }
}

#[test]
fn lifted_fields_annihilate_sigma_and_match_jets() {
    let mut r = rng(11);
    let inst = bivector_family(&mut r, 2, 1);
    let s = &inst.structure;
    let q = QContext::new(passing_gp(&inst));
    let base = q.base().clone();
    for seed in 0..8 {
        let mut r2 = rng(seed);
        let x = random_vf(&mut r2, &base, 2);
        let xh = q.horizontal_lift(&x);
        assert!(q.sigma().pair(&xh).is_zero());
        // the projection discards only the vertical component
        for i in 0..base.dim() {
            assert_eq!(xh.component(i), &x.component(i).lift_to(q.total()));
        }
    }
    // every lifted generator is the value of (xbar_h, d(h o p)) for an
    // observable with matching one-jet: constants vanish at the base point,
    // so pick h with dh doing the matching.
    let h = Scalar::coord(&base, 0); // dh = dx0 matches the first generator's form part
    let rep = hamiltonian_representative(s, &h, HamMode::WHam).unwrap();
    let lifted = q.lift_section(&s.gens_e()[0]);
    let xbar = q.xbar_field(&rep.pair);
    // (xbar_h + (h o p) V, p* dh) agrees with the lift of (X_h, dh)
    let vertical_corrected = &xbar + &q.vertical().scale(&h.lift_to(q.total()));
    assert_eq!(vertical_corrected, lifted.vf);
    assert_eq!(differential(&h).lift_to(q.total()), lifted.form);
}

#[test]
fn truncated_forms_square_to_zero_on_random_data() {
    use bigiso::foliation::*;
    let ch = Chart::new(&["z", "x", "y"]).unwrap();
    let qx = &VectorField::coordinate(&ch, 1)
        + &VectorField::coordinate(&ch, 0).scale(&Scalar::coord(&ch, 2));
    let qy = VectorField::coordinate(&ch, 2);
    let fc = FoliationChart::from_frame(&ch, 1, &[qx, qy]).unwrap();
    let mut r = rng(23);
    for degree in 1..=2usize {
        for s in 0..=3usize {
            for _ in 0..4 {
                let w = random_kform(&mut r, &ch, degree, 2);
                let t = STruncForm::new(s, degree, decompose(&fc, &w).truncate(s));
                let d1 = d_s(&fc, &t);
                assert!(d_s(&fc, &d1).is_zero(), "s={s} degree={degree}");
                // the two evaluation routes agree
                let alt = d_s_subtraction_route(&fc, &t);
                assert_eq!(d1.form, alt.form);
            }
        }
    }
}
