//! Linear algebra over the rational-function field: span membership with
//! generic-point semantics, kernels, and ranks at sample points.
//!
//! Forward elimination is fraction-free (Bareiss): every intermediate entry
//! is a minor of the input matrix, divisions are exact over the polynomial
//! ring, and rational functions appear only during back-substitution. When
//! the generic solution needs a nonconstant denominator the outcome is
//! `Indeterminate` and carries the vanishing locus; it is never silently
//! promoted to `Yes`.

use crate::chart::Chart;
use crate::ratfn::{div_exact, gcd, RatFn};
use crate::scalar::{Rat, Scalar};

/// Outcome of a span-membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanOutcome {
    /// Member, with polynomial (constant-denominator) coefficients.
    Yes(Vec<Scalar>),
    /// Not in the span over the rational-function field.
    No,
    /// Member generically; the coefficient denominators vanish on `locus`.
    Indeterminate { locus: Scalar, coeffs: Vec<RatFn> },
}

impl SpanOutcome {
    pub fn is_yes(&self) -> bool {
        matches!(self, SpanOutcome::Yes(_))
    }
}

/// Fraction-free Gauss-Jordan form. Pivots are searched in the first
/// `pivot_cols` columns; the remaining columns ride along. Every update is
/// the two-by-two determinant rule divided exactly by the previous pivot,
/// so entries stay minors of the input and each solved coefficient needs a
/// single division at the end.
struct Echelon {
    mat: Vec<Vec<Scalar>>,
    pivots: Vec<(usize, usize)>,
}

fn echelon(chart: &Chart, mut mat: Vec<Vec<Scalar>>, pivot_cols: usize) -> Echelon {
    let rows = mat.len();
    let width = mat.first().map(|r| r.len()).unwrap_or(0);
    let mut prev = Scalar::one(chart);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        for i in 0..rows {
            if i == r {
                continue;
            }
            for j in 0..width {
                if j == c {
                    continue;
                }
                let num = &(&mat[r][c] * &mat[i][j]) - &(&mat[i][c] * &mat[r][j]);
                mat[i][j] = if num.is_zero() {
                    num
                } else {
                    div_exact(&num, &prev).expect("fraction-free division is exact")
                };
            }
            mat[i][c] = Scalar::zero(chart);
        }
        prev = mat[r][c].clone();
        pivots.push((r, c));
        r += 1;
    }
    Echelon { mat, pivots }
}

/// Decide whether `target` is a coefficient combination of the columns
/// `gens` (each a slot vector of equal length).
pub fn membership(chart: &Chart, gens: &[Vec<Scalar>], target: &[Scalar]) -> SpanOutcome {
    let k = gens.len();
    if k == 0 {
        return if target.iter().all(|s| s.is_zero()) {
            SpanOutcome::Yes(vec![])
        } else {
            SpanOutcome::No
        };
    }
    let rows = target.len();
    let mat: Vec<Vec<Scalar>> = (0..rows)
        .map(|r| {
            let mut row: Vec<Scalar> = gens.iter().map(|g| g[r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let ech = echelon(chart, mat, k);
    // Inconsistent iff some row is zero on the generators but not the target.
    for row in &ech.mat {
        if row[..k].iter().all(|x| x.is_zero()) && !row[k].is_zero() {
            return SpanOutcome::No;
        }
    }
    // Free variables are zero, so each pivot coefficient is one division.
    let mut coeffs = vec![RatFn::zero(chart); k];
    for &(r, c) in &ech.pivots {
        coeffs[c] = RatFn::new(ech.mat[r][k].clone(), ech.mat[r][c].clone());
    }
    let mut locus = Scalar::one(chart);
    let mut seen: Vec<Scalar> = Vec::new();
    for c in &coeffs {
        if c.as_polynomial().is_none() {
            let d = c.den().clone();
            if !seen.contains(&d) {
                locus = &locus * &d;
                seen.push(d);
            }
        }
    }
    if seen.is_empty() {
        SpanOutcome::Yes(coeffs.into_iter().map(|c| c.as_polynomial().unwrap().clone()).collect())
    } else {
        SpanOutcome::Indeterminate { locus, coeffs }
    }
}

/// Basis of the kernel of the column map, with denominators cleared so every
/// vector is polynomial.
pub fn kernel(chart: &Chart, gens: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let k = gens.len();
    if k == 0 {
        return vec![];
    }
    let rows = gens[0].len();
    let mat: Vec<Vec<Scalar>> =
        (0..rows).map(|r| gens.iter().map(|g| g[r].clone()).collect()).collect();
    let ech = echelon(chart, mat, k);
    let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in 0..k {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![RatFn::zero(chart); k];
        v[free] = RatFn::one(chart);
        for &(r, c) in &ech.pivots {
            if !ech.mat[r][free].is_zero() {
                v[c] = RatFn::new(-&ech.mat[r][free], ech.mat[r][c].clone());
            }
        }
        // Clear denominators and divide out the common polynomial factor.
        let mut den = Scalar::one(chart);
        for x in &v {
            if x.as_polynomial().is_none() {
                den = &den * x.den();
            }
        }
        let mut poly: Vec<Scalar> = v
            .iter()
            .map(|x| {
                let scaled = x * &RatFn::from_scalar(&den);
                scaled.as_polynomial().expect("denominator cleared").clone()
            })
            .collect();
        let mut g = Scalar::zero(chart);
        for x in &poly {
            g = gcd(&g, x);
        }
        if !g.is_zero() && g.as_constant().is_none() {
            poly = poly.iter().map(|x| div_exact(x, &g).expect("gcd divides")).collect();
        }
        basis.push(poly);
    }
    basis
}

/// Rank of the generator matrix with all chart coordinates evaluated at a
/// rational point (entries may still involve the formal constant `c`).
pub fn rank_at_point(chart: &Chart, gens: &[Vec<Scalar>], point: &[Rat]) -> usize {
    if gens.is_empty() {
        return 0;
    }
    let rows = gens[0].len();
    let mat: Vec<Vec<Scalar>> =
        (0..rows).map(|r| gens.iter().map(|g| g[r].eval_point(point)).collect()).collect();
    echelon(chart, mat, gens.len()).pivots.len()
}

/// Rank of the slot-vector family as sections (over the function field).
pub fn generic_rank(gens: &[Vec<Scalar>]) -> usize {
    if gens.is_empty() {
        return 0;
    }
    let chart = gens[0][0].chart().clone();
    let rows = gens[0].len();
    let mat: Vec<Vec<Scalar>> =
        (0..rows).map(|r| gens.iter().map(|g| g[r].clone()).collect()).collect();
    echelon(&chart, mat, gens.len()).pivots.len()
}
