pub mod anisotropy;
pub mod contour;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod maxflow;
pub mod numeric;
pub mod runner;
pub mod stepper;
pub mod symmetry;

pub use error::{Error, Result};

// The guide's code blocks run as doc-tests through these modules.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/flow.md")]
    mod flow {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/symmetry.md")]
    mod symmetry {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
