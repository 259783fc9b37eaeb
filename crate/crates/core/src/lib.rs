//! Decision engine for non-singular extensions of Morse germs.
//!
//! Given the signed Reeb diagram of a Morse function germ along a closed
//! surface, decide whether it extends without critical points to some compact
//! 3-manifold bounded by the surface, or to the solid Klein bottle, and build
//! the labelled Reeb diagram of such an extension when it exists.

pub mod diagram;
pub mod extension;
pub mod oracle;
pub mod par;
pub mod search;
pub mod surface;
pub mod sweep;
pub mod trace;
pub mod witness;

pub use diagram::{parse_germ, serialize_germ, validate_germ, validate_klein_germ, GermDiagram};
pub use extension::{
    build_extension_diagram, check_klein_conditions, ExtensionDiagram, KleinCondition,
};
pub use search::{
    decide, decide_general, decide_klein, enumerate_witnesses, Mode, SearchConfig, Verdict,
};
pub use surface::SurfaceClass;
pub use sweep::{check_trace, Trace, TransitionChoice};
