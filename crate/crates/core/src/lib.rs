//! Exact symbolic calculus for big-isotropic structures on a polynomial
//! coordinate chart: Courant and Wade brackets, geometric prequantization
//! data systems, quantum operators, polarizations and foliated cohomology,
//! all with decidable, exact identity checking.

pub mod big_tangent;
pub mod chart;
pub mod cochain;
pub mod exterior;
pub mod foliation;
pub mod hamiltonian;
pub mod linalg;
pub mod polarization;
pub mod preq_space;
pub mod prequant;
pub mod ratfn;
pub mod scalar;
pub mod structure;

/// Code blocks from the guide run with the crate's doctests, so the book
/// cannot drift from the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(scalars, "../../../book/src/scalars.md");
    chapter!(calculus, "../../../book/src/calculus.md");
    chapter!(big_tangent, "../../../book/src/big-tangent.md");
    chapter!(structures, "../../../book/src/structures.md");
    chapter!(hamiltonian, "../../../book/src/hamiltonian.md");
    chapter!(cochains, "../../../book/src/cochains.md");
    chapter!(prequantization, "../../../book/src/prequantization.md");
    chapter!(circle_bundle, "../../../book/src/circle-bundle.md");
    chapter!(polarizations, "../../../book/src/polarizations.md");
    chapter!(foliations, "../../../book/src/foliations.md");
}
