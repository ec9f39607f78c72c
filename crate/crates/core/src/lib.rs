//! Entanglement verdicts for two-photon polarization states.
//!
//! The crate reconstructs a two-qubit density matrix from coincidence
//! counts ([`tomography`]), reads off the real X-form parameters
//! ([`states`]) and decides separability with the partial-transpose test and
//! an explicit product-state decomposition ([`entanglement`]).

pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod simulate;
pub mod states;
pub mod tomography;

pub use entanglement::{PptReport, SeparableDecomposition, Verdict};
pub use error::{Error, Result};
pub use linalg::{Complex, ComplexMatrix};
pub use states::{BlochVector, DensityMatrix, XStateParams};
pub use tomography::{CoincidenceRecord, MeasurementSetting, Projector};
