//! Hamiltonian and weak-Hamiltonian functions: certification of candidate
//! vector fields, representative solving, Poisson bracket and Leibniz rule.
//!
//! A function `f` is Hamiltonian when `(X_f, df)` is a section of `E`,
//! weak-Hamiltonian when it is a section of `E'`. Certification is decided
//! by exact g-orthogonality: membership in `E` means orthogonality to every
//! `E'` generator and vice versa, since each bundle is the g-orthogonal of
//! the other.

use thiserror::Error;

use crate::big_tangent::{pairing_g, BigSection};
use crate::exterior::{differential, lie_bracket, VectorField};
use crate::linalg::{self, SpanOutcome};
use crate::scalar::Scalar;
use crate::structure::{BigIsoStructure, Family};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamMode {
    /// `(X_f, df)` is a section of `E`.
    Ham,
    /// `(X_f, df)` is a section of `E'`.
    WHam,
}

impl HamMode {
    /// The family the pair must live in.
    pub fn family(self) -> Family {
        match self {
            HamMode::Ham => Family::E,
            HamMode::WHam => Family::EPrime,
        }
    }

    /// The family whose generators certify membership by g-orthogonality.
    pub fn probe_family(self) -> Family {
        match self {
            HamMode::Ham => Family::EPrime,
            HamMode::WHam => Family::E,
        }
    }
}

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("(X_f, df) is not a section of the required bundle: g-pairing with generator {probe} = {residual}")]
    NotInBundle { probe: usize, residual: Scalar },
    #[error("df is not attainable in the chosen family")]
    Unsolvable,
    #[error("representative exists only away from the locus {locus}")]
    Indeterminate { locus: Scalar },
}

/// A certified (weak-)Hamiltonian pair. Constructed only through
/// [`verify_hamiltonian`] or [`hamiltonian_representative`], so any consumer
/// holding one may rely on the membership certificate.
#[derive(Clone, Debug)]
pub struct HamiltonianPair {
    f: Scalar,
    xf: VectorField,
    mode: HamMode,
}

impl HamiltonianPair {
    pub fn function(&self) -> &Scalar {
        &self.f
    }

    pub fn field(&self) -> &VectorField {
        &self.xf
    }

    pub fn mode(&self) -> HamMode {
        self.mode
    }

    /// The big-tangent pair `(X_f, df)`.
    pub fn section(&self) -> BigSection {
        BigSection::hamiltonian_pair(&self.xf, &self.f)
    }

    /// The same function with the field shifted by an ambiguity direction;
    /// the shift is re-certified against the structure.
    pub fn shifted(
        &self,
        s: &BigIsoStructure,
        z: &VectorField,
    ) -> Result<HamiltonianPair, HamiltonianError> {
        verify_hamiltonian(s, &self.f, &(&self.xf + z), self.mode)
    }
}

/// Certify that `xf` is a (weak-)Hamiltonian vector field of `f`.
pub fn verify_hamiltonian(
    s: &BigIsoStructure,
    f: &Scalar,
    xf: &VectorField,
    mode: HamMode,
) -> Result<HamiltonianPair, HamiltonianError> {
    let pair = BigSection::hamiltonian_pair(xf, f);
    for (probe, gen) in s.gens(mode.probe_family()).iter().enumerate() {
        let residual = pairing_g(&pair, gen);
        if !residual.is_zero() {
            return Err(HamiltonianError::NotInBundle { probe, residual });
        }
    }
    Ok(HamiltonianPair { f: f.clone(), xf: xf.clone(), mode })
}

/// A solved representative together with the generators of the vector-field
/// ambiguity: the pure-vector sections of the family, i.e. the kernel of the
/// form-part map pushed through the vector parts.
#[derive(Clone, Debug)]
pub struct Representative {
    pub pair: HamiltonianPair,
    pub ambiguity: Vec<VectorField>,
}

/// Solve for a (weak-)Hamiltonian vector field of `f` over the rational
/// function field, requiring a polynomial solution.
pub fn hamiltonian_representative(
    s: &BigIsoStructure,
    f: &Scalar,
    mode: HamMode,
) -> Result<Representative, HamiltonianError> {
    let chart = s.chart().clone();
    let gens = s.gens(mode.family());
    let df = differential(f);
    // Solve sum_i c_i form_i = df; the vector part then follows.
    let form_cols: Vec<Vec<Scalar>> = gens.iter().map(|g| g.form.dense1()).collect();
    let coeffs = match linalg::membership(&chart, &form_cols, &df.dense1()) {
        SpanOutcome::Yes(c) => c,
        SpanOutcome::No => return Err(HamiltonianError::Unsolvable),
        SpanOutcome::Indeterminate { locus, .. } => {
            return Err(HamiltonianError::Indeterminate { locus })
        }
    };
    let mut xf = VectorField::zero(&chart);
    for (c, g) in coeffs.iter().zip(gens) {
        xf = &xf + &g.vf.scale(c);
    }
    let ambiguity: Vec<VectorField> = linalg::kernel(&chart, &form_cols)
        .into_iter()
        .map(|ker| {
            let mut z = VectorField::zero(&chart);
            for (c, g) in ker.iter().zip(gens) {
                z = &z + &g.vf.scale(c);
            }
            z
        })
        .filter(|z| !z.is_zero())
        .collect();
    let pair = verify_hamiltonian(s, f, &xf, mode)?;
    Ok(Representative { pair, ambiguity })
}

/// Poisson bracket `{f,h} = X_f h` of a Hamiltonian pair with a
/// (weak-)Hamiltonian pair.
pub fn poisson_bracket(fp: &HamiltonianPair, hp: &HamiltonianPair) -> Scalar {
    assert_eq!(fp.mode(), HamMode::Ham, "first argument must be Hamiltonian");
    fp.xf.apply(&hp.f)
}

/// The bracket pair `({f,h}, [X_f, X_h])`, the canonical representative of
/// the Poisson bracket.
pub fn bracket_pair(fp: &HamiltonianPair, hp: &HamiltonianPair) -> (Scalar, VectorField) {
    (poisson_bracket(fp, hp), lie_bracket(&fp.xf, &hp.xf))
}

/// Leibniz check:
/// `{l,{f,h}} - {{l,f},h} - {f,{l,h}}` with all inner brackets represented
/// by the Lie bracket of the chosen fields. Returns the residual.
pub fn check_leibniz(
    lp: &HamiltonianPair,
    fp: &HamiltonianPair,
    hp: &HamiltonianPair,
) -> Scalar {
    assert_eq!(lp.mode(), HamMode::Ham);
    assert_eq!(fp.mode(), HamMode::Ham);
    let fh = poisson_bracket(fp, hp);
    let term1 = lp.xf.apply(&fh);
    // {l,f} has representative [X_l, X_f]
    let term2 = lie_bracket(&lp.xf, &fp.xf).apply(&hp.f);
    let lh = lp.xf.apply(&hp.f);
    let term3 = fp.xf.apply(&lh);
    &(&term1 - &term2) - &term3
}
