//! Exact algebra and experiment harness for smooth complete intersections
//! over finite fields.
//!
//! * [`gf`]: finite fields `F_{p^s}` and embeddings between them.
//! * [`mpoly`]: homogeneous forms, sampling, enumeration, derivatives.
//! * [`groebner`]: Buchberger's algorithm, used to decide `1 ∈ I`.
//! * [`smoothness`]: Jacobian-criterion oracles and point counting.
//! * [`predict`]: exact-rational local factors, Euler products, point-count model.
//! * [`experiment`]: reproducible exhaustive and Monte Carlo runs.
//! * [`verify`]: the built-in invariant suite.

pub mod experiment;
pub mod gf;
pub mod groebner;
pub mod mpoly;
pub mod predict;
pub mod smoothness;
pub mod verify;

pub use gf::{Embedding, FieldDesc, FieldElem, GfError};
pub use groebner::{GroebnerConfig, GroebnerError, IdealBasis};
pub use mpoly::{AffinePoly, Form, FormTuple, PolyError};
pub use predict::{PredictionReport, Rational};
pub use smoothness::{ProjPoint, SmoothnessVerdict, VarietyDesc};


