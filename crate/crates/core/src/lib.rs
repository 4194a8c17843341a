//! One-triangle aperiodic tiling: exact arithmetic, rule sets, substitution,
//! derivation, reshaping, verification and rendering.

pub mod engine;
pub mod exact;
pub mod geom;
pub mod model;
pub mod ruledsl;
pub mod derive;
pub mod reshape;
pub mod verify;
pub mod render;
