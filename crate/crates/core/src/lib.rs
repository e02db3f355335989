//! Carleson constants and sparse witnesses for finite set systems over
//! discrete measures.
//!
//! A [`SetSystem`] is a finite list of atom sets over a [`DiscreteMeasure`].
//! Given one nonnegative coefficient per set, the Carleson constant is the
//! largest ratio `Σ_{S∈A} λ_S / μ(∪A)` over nonempty subcollections `A`.
//! A sparse witness picks pairwise disjoint `E_S ⊆ S` with `λ_S ≤ C·μ(E_S)`.
//! For divisible measures the least such `C` equals the Carleson constant,
//! and both are computed here by min cuts.
//!
//! ```
//! use carleson_sparse::{carleson_constant, CoefficientFamily, DiscreteMeasure, Mode, SetSystem};
//!
//! let measure = DiscreteMeasure::from_masses(Mode::Divisible, &[1.0]).unwrap();
//! let system = SetSystem::from_lists(measure, &[("S1", &["a0"]), ("S2", &["a0"])]).unwrap();
//! let lambda = CoefficientFamily::by_mass(&system);
//! let (constant, cert) = carleson_constant(&system, &lambda).unwrap();
//! assert_eq!(constant, 2.0);
//! assert_eq!(cert.subcollection.ids(&system), ["S1", "S2"]);
//! ```

pub mod carleson;
pub mod cli;
pub mod dyadic;
pub mod error;
pub mod flow;
pub mod instance;
pub mod measure;
pub mod numeric;
pub mod set_system;
pub mod sparse;

pub use carleson::{
    carleson_constant, carleson_constant_exact, carleson_constant_search,
    carleson_constant_via_unions, carleson_ratio, check_carleson, CarlesonCheck, CertificateDoc,
    CertificateKind, CoefficientFamily, CutCertificate, RatioSearch, TestFamily,
};
pub use dyadic::{gen_dyadic_cubes, gen_dyadic_rectangles};
pub use error::{Error, Result};
pub use instance::{load_instance, load_instance_file, Instance};
pub use measure::{Atom, DiscreteMeasure, Mode, StepFunction};
pub use set_system::{SetEntry, SetSystem, Subcollection};
pub use sparse::{
    minimal_sparse_constant, minimal_sparse_witness, sparse_witness_fractional,
    sparse_witness_integral, verify_witness, FractionalOutcome, IntegralOutcome, SparseWitness,
    WitnessMode, WitnessReport,
};

#[cfg(doctest)]
mod book {
    macro_rules! chapters {
        ($($name:ident => $file:literal),* $(,)?) => {
            $(
                #[doc = include_str!(concat!("../../../book/src/", $file))]
                mod $name {}
            )*
        };
    }

    chapters! {
        introduction => "introduction.md",
        measures => "measures.md",
        set_systems => "set-systems.md",
        carleson => "carleson.md",
        duality => "duality.md",
        sparse => "sparse.md",
        flow => "flow.md",
        cli => "cli.md",
    }
}
