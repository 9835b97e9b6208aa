//! Exact counting and verification kernels for the two-variable expander
//! `f(x, y) = g(x)(h(x) + y)` over prime fields.
//!
//! The crate covers field arithmetic ([`field`]), canonical subsets and their
//! sum/product sets ([`sets`]), function tables and fiber multiplicity
//! ([`functions`]), level counts and energies ([`energy`]), point/plane
//! configurations and incidences ([`incidence`]), bound evaluators and the
//! end-to-end verification chain ([`theorems`]), and the experiment harness
//! behind the `fp-expander` binary ([`cli`]).

pub mod cli;
pub mod energy;
pub mod error;
pub mod field;
pub mod functions;
pub mod incidence;
pub mod sets;
pub mod theorems;

pub use energy::Variant;
pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField};
pub use functions::{ExpanderSpec, FunctionFamily, FunctionTable};
pub use incidence::Budgets;
pub use sets::{FSet, SetFamily};
