//! Shared helpers for the integration suites: seeded random data on small
//! charts, structure builders for the two graph families, and an
//! independent point-evaluation membership oracle.

#![allow(dead_code)]

use bigiso::big_tangent::BigSection;
use bigiso::chart::Chart;
use bigiso::exterior::{
    coordinate_bivector, KForm, KMultivector, VectorField,
};
use bigiso::prequant::GPData;
use bigiso::scalar::{rat, rat_int, GaussRat, Mono, Rat, Scalar};
use bigiso::structure::{build_graph_bivector, build_graph_two_form, BigIsoStructure};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_rat(rng: &mut ChaCha20Rng) -> Rat {
    let n = rng.gen_range(-5i64..=5);
    let d = rng.gen_range(1i64..=3);
    rat(n, d)
}

pub fn random_point(rng: &mut ChaCha20Rng, chart: &Chart) -> Vec<Rat> {
    (0..chart.dim()).map(|_| random_rat(rng)).collect()
}

/// Random polynomial with real rational coefficients, bounded degree.
pub fn random_scalar(rng: &mut ChaCha20Rng, chart: &Chart, max_deg: u16, terms: usize) -> Scalar {
    let m = chart.dim();
    let mut list = Vec::new();
    for _ in 0..terms {
        let mut exps = vec![0u16; m];
        let mut budget = max_deg;
        for e in exps.iter_mut() {
            if budget == 0 {
                break;
            }
            *e = rng.gen_range(0..=budget.min(2));
            budget -= *e;
        }
        let coef = GaussRat::from_rat(random_rat(rng));
        list.push((Mono { exps, c: 0 }, coef));
    }
    Scalar::from_terms(chart, list)
}

pub fn random_vf(rng: &mut ChaCha20Rng, chart: &Chart, max_deg: u16) -> VectorField {
    let comps = (0..chart.dim()).map(|_| random_scalar(rng, chart, max_deg, 2)).collect();
    VectorField::from_components(chart, comps)
}

pub fn random_one_form(rng: &mut ChaCha20Rng, chart: &Chart, max_deg: u16) -> KForm {
    let mut out = KForm::zero(chart, 1);
    for i in 0..chart.dim() {
        out = &out + &KForm::coordinate(chart, i).scale(&random_scalar(rng, chart, max_deg, 2));
    }
    out
}

pub fn random_closed_two_form(rng: &mut ChaCha20Rng, chart: &Chart, max_deg: u16) -> KForm {
    bigiso::exterior::exterior_derivative(&random_one_form(rng, chart, max_deg))
}

pub fn random_kform(rng: &mut ChaCha20Rng, chart: &Chart, degree: usize, max_deg: u16) -> KForm {
    fn tuples(m: usize, k: usize) -> Vec<Vec<u8>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..m {
                cur.push(i as u8);
                rec(i + 1, m, k, cur, out);
                cur.pop();
            }
        }
        rec(0, m, k, &mut Vec::new(), &mut out);
        out
    }
    let mut table = bigiso::exterior::AltTable::zero(chart, degree);
    for t in tuples(chart.dim(), degree) {
        if rng.gen_bool(0.7) {
            table.add_term(&t, random_scalar(rng, chart, max_deg, 2));
        }
    }
    KForm::from_table(table)
}

/// One of the two graph families, with the data needed to build certified
/// pairs and a prequantization connection.
pub struct Instance {
    pub structure: BigIsoStructure,
    /// Connection 1-form satisfying the curvature condition with `theta = 0`.
    pub passing_varpi: KForm,
    /// Coordinates whose polynomials are Hamiltonian-admissible.
    pub ham_coords: Vec<usize>,
}

/// Symplectic-block 2-form graph on `m` coordinates: the 2-form
/// `dx^1^dx^2 + ...` over the distribution spanned by the first `2r`
/// coordinates. Hamiltonian functions are polynomials in those coordinates.
pub fn lambda_family(rng: &mut ChaCha20Rng, m: usize, r: usize) -> Instance {
    assert!(2 * r <= m);
    let names: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let chart = Chart::new(&refs).unwrap();
    let mut lambda = KForm::zero(&chart, 2);
    let mut varpi = KForm::zero(&chart, 1);
    for b in 0..r {
        let i = 2 * b;
        let j = 2 * b + 1;
        lambda = &lambda + &KForm::coordinate(&chart, i).wedge(&KForm::coordinate(&chart, j));
        // d(x^i dx^j) = dx^i ^ dx^j
        varpi = &varpi + &KForm::coordinate(&chart, j).scale(&Scalar::coord(&chart, i));
    }
    let gens_s: Vec<VectorField> =
        (0..2 * r).map(|i| VectorField::coordinate(&chart, i)).collect();
    let ann: Vec<KForm> = (2 * r..m).map(|i| KForm::coordinate(&chart, i)).collect();
    let pts = vec![random_point(rng, &chart), random_point(rng, &chart)];
    let structure = build_graph_two_form(&lambda, &gens_s, &ann, pts).unwrap();
    Instance { structure, passing_varpi: varpi, ham_coords: (0..2 * r).collect() }
}

/// Symplectic-block bivector graph on `m` coordinates over the cotangent
/// span of the first `2r` differentials.
pub fn bivector_family(rng: &mut ChaCha20Rng, m: usize, r: usize) -> Instance {
    assert!(2 * r <= m);
    let names: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let chart = Chart::new(&refs).unwrap();
    let mut p = KMultivector::zero(&chart, 2);
    let mut varpi = KForm::zero(&chart, 1);
    for b in 0..r {
        let i = 2 * b;
        let j = 2 * b + 1;
        p = &p + &coordinate_bivector(&chart, i, j);
        // the canonical connection: x^j dx^i has d = dx^j ^ dx^i
        varpi = &varpi + &KForm::coordinate(&chart, i).scale(&Scalar::coord(&chart, j));
    }
    let sigma: Vec<KForm> = (0..2 * r).map(|i| KForm::coordinate(&chart, i)).collect();
    let ann: Vec<VectorField> =
        (2 * r..m).map(|i| VectorField::coordinate(&chart, i)).collect();
    let pts = vec![random_point(rng, &chart), random_point(rng, &chart)];
    let structure = build_graph_bivector(&p, &sigma, &ann, pts).unwrap();
    Instance { structure, passing_varpi: varpi, ham_coords: (0..2 * r).collect() }
}

/// Random polynomial in the admissible coordinates of an instance.
pub fn random_ham_function(rng: &mut ChaCha20Rng, inst: &Instance, max_deg: u16) -> Scalar {
    let chart = inst.structure.chart().clone();
    let mut out = Scalar::zero(&chart);
    for _ in 0..3 {
        let mut term = Scalar::constant(&chart, GaussRat::from_rat(random_rat(rng)));
        let mut budget = max_deg;
        for &i in &inst.ham_coords {
            if budget == 0 {
                break;
            }
            let e = rng.gen_range(0..=budget.min(2));
            budget -= e;
            term = &term * &Scalar::coord(&chart, i).pow(e as u32);
        }
        out = &out + &term;
    }
    out
}

/// GP data with `theta = 0` and the passing connection.
pub fn passing_gp(inst: &Instance) -> GPData {
    let chart = inst.structure.chart();
    GPData::new(inst.passing_varpi.clone(), VectorField::zero(chart), KForm::zero(chart, 1))
        .unwrap()
}

/// Independent membership oracle: evaluate all sections at a rational point
/// and decide solvability of the resulting numeric linear system by plain
/// Gaussian elimination over the Gaussian rationals.
pub fn point_membership(
    gens: &[BigSection],
    target: &BigSection,
    point: &[Rat],
) -> bool {
    let cols: Vec<Vec<GaussRat>> = gens
        .iter()
        .map(|g| {
            g.slots()
                .iter()
                .map(|s| {
                    s.eval_point(point)
                        .as_constant()
                        .expect("c-free test data evaluates to a constant")
                })
                .collect()
        })
        .collect();
    let rhs: Vec<GaussRat> = target
        .slots()
        .iter()
        .map(|s| {
            s.eval_point(point)
                .as_constant()
                .expect("c-free test data evaluates to a constant")
        })
        .collect();
    solve_numeric(&cols, &rhs)
}

fn solve_numeric(cols: &[Vec<GaussRat>], rhs: &[GaussRat]) -> bool {
    let rows = rhs.len();
    let k = cols.len();
    let mut mat: Vec<Vec<GaussRat>> = (0..rows)
        .map(|r| {
            let mut row: Vec<GaussRat> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    let mut r = 0usize;
    for j in 0..k {
        let Some(pivot) = (r..rows).find(|&i| !mat[i][j].is_zero()) else {
            continue;
        };
        mat.swap(r, pivot);
        let inv = mat[r][j].inv();
        for x in mat[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !mat[i][j].is_zero() {
                let f = mat[i][j].clone();
                let row_r = mat[r].clone();
                for (x, y) in mat[i].iter_mut().zip(&row_r) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    // consistent iff no all-zero row has nonzero last entry
    for row in &mat {
        if row[..k].iter().all(|x| x.is_zero()) && !row[k].is_zero() {
            return false;
        }
    }
    true
}

/// Independent Jacobi oracle for a bivector via the component formula of
/// the self-bracket: for each `i<j<k`,
/// `sum_l (P^{li} d_l P^{jk} + P^{lj} d_l P^{ki} + P^{lk} d_l P^{ij}) = 0`.
pub fn schouten_self_bracket_vanishes(p: &KMultivector) -> bool {
    let chart = p.chart().clone();
    let m = chart.dim();
    let comp = |i: usize, j: usize| -> Scalar { p.component(&[i as u8, j as u8]) };
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                let mut total = Scalar::zero(&chart);
                for l in 0..m {
                    let t1 = &comp(l, i) * &comp(j, k).partial(l);
                    let t2 = &comp(l, j) * &comp(k, i).partial(l);
                    let t3 = &comp(l, k) * &comp(i, j).partial(l);
                    total = &(&(&total + &t1) + &t2) + &t3;
                }
                if !total.is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// A random section of the chosen family with polynomial coefficients.
pub fn random_section_of(
    rng: &mut ChaCha20Rng,
    s: &BigIsoStructure,
    family: bigiso::structure::Family,
    max_deg: u16,
) -> BigSection {
    let chart = s.chart().clone();
    let gens = s.gens(family);
    let coeffs: Vec<Scalar> =
        gens.iter().map(|_| random_scalar(rng, &chart, max_deg, 2)).collect();
    s.combine(family, &coeffs)
}

pub fn two_form_component(i: usize, j: usize, chart: &Chart) -> KForm {
    KForm::coordinate(chart, i).wedge(&KForm::coordinate(chart, j))
}

pub fn simple_points(m: usize) -> Vec<Vec<Rat>> {
    vec![
        (0..m).map(|i| rat_int(i as i64 + 1)).collect(),
        (0..m).map(|i| rat_int(-(i as i64) - 2)).collect(),
    ]
}
