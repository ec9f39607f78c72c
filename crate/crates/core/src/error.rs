use thiserror::Error;

use crate::tomography::MeasurementSetting;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace deviates from 1 by {0:e}")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue -{0:e})")]
    NotPsd(f64),

    #[error(
        "state is outside the X family: residual {residual:e} exceeds noise floor {noise_floor:e}"
    )]
    ResidualAboveFloor { residual: f64, noise_floor: f64 },

    #[error("parameters are not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("not separable by the eight-term construction: weight {weight} = {value}")]
    NotSeparableByConstruction { weight: &'static str, value: f64 },

    #[error("incomplete measurement settings, missing {}", display_settings(.0))]
    IncompleteSettings(Vec<MeasurementSetting>),

    #[error("duplicate measurement setting {0}")]
    DuplicateSetting(MeasurementSetting),

    #[error("singular tomography system (condition number {0:e})")]
    SingularSystem(f64),

    #[error("total coincidence count is zero")]
    ZeroCounts,
}

fn display_settings(settings: &[MeasurementSetting]) -> String {
    settings
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
