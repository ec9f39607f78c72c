//! Validated two-qubit states, the real X-form family and Bloch-vector
//! qubit states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, Complex, ComplexMatrix};

/// Tolerance applied to every state-level invariant.
pub const STATE_TOL: f64 = 1e-9;

/// Default noise floor for accepting an X-form fit (1% of the trace).
pub const DEFAULT_NOISE_FLOOR: f64 = 0.01;

/// A 4×4 matrix that is Hermitian, unit trace and positive semidefinite
/// within tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// The maximally mixed state `𝕀₄/4`.
    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(4).expect("dim 4").scale(0.25))
    }

    /// `(|HH> + |VV>)/√2` projector.
    pub fn phi_plus() -> Self {
        x_state_to_density(&XStateParams::BELL_PHI_PLUS).expect("Bell parameters are valid")
    }

    /// `Σ w_k ρ_k` for weights summing to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let mut acc = ComplexMatrix::zeros(4)?;
        for (w, rho) in parts {
            acc = acc.try_add(&rho.0.scale(*w))?;
        }
        validate_density(&acc, STATE_TOL)
    }
}

/// Checks Hermiticity, unit trace and positivity at tolerance `tol`.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if m.dim() != 4 {
        return Err(Error::InvalidArgument(format!(
            "density matrix must be 4x4, got {}x{}",
            m.dim(),
            m.dim()
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidArgument("non-finite matrix entry".into()));
    }
    let dev = m.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let tr = m.trace();
    let trace_err = (tr - Complex::new(1.0, 0.0)).norm();
    if trace_err > tol {
        return Err(Error::BadTrace(trace_err));
    }
    // Hermitian within tol but possibly above the eigensolver's own bound.
    let sym = m.map_indices(|i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let min = hermitian_eigen(&sym)?.min();
    if min < -tol {
        return Err(Error::NotPsd(-min));
    }
    Ok(DensityMatrix(m.clone()))
}

/// Parameters of the real X-form state
///
/// ```text
/// [ α   0   0   γ  ]
/// [ 0   β   0   0  ]
/// [ 0   0   β′  0  ]
/// [ γ   0   0   α′ ]
/// ```
///
/// in the `HH, HV, VH, VV` basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XStateParams {
    pub alpha: f64,
    pub beta: f64,
    pub beta_prime: f64,
    pub gamma: f64,
    pub alpha_prime: f64,
}

impl XStateParams {
    pub const BELL_PHI_PLUS: Self = Self::new(0.5, 0.0, 0.0, 0.5, 0.5);
    pub const MAXIMALLY_MIXED: Self = Self::new(0.25, 0.25, 0.25, 0.0, 0.25);

    /// Argument order follows the matrix layout: `(α, β, β′, γ, α′)`.
    pub const fn new(alpha: f64, beta: f64, beta_prime: f64, gamma: f64, alpha_prime: f64) -> Self {
        Self {
            alpha,
            beta,
            beta_prime,
            gamma,
            alpha_prime,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            alpha,
            beta,
            beta_prime,
            gamma,
            alpha_prime,
        } = *self;
        let all = [alpha, beta, beta_prime, gamma, alpha_prime];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite X-state parameter".into(),
            ));
        }
        if [alpha, beta, beta_prime, alpha_prime]
            .iter()
            .any(|&x| x < -STATE_TOL)
        {
            return Err(Error::InvalidArgument(format!(
                "negative population in {self:?}"
            )));
        }
        let total = alpha + beta + beta_prime + alpha_prime;
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "populations sum to {total}, expected 1"
            )));
        }
        if gamma * gamma > alpha * alpha_prime + STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "coherence {gamma} exceeds sqrt(alpha * alpha') = {}",
                (alpha * alpha_prime).max(0.0).sqrt()
            )));
        }
        Ok(())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    /// `max(|α − α′|, |β − β′|)`.
    pub fn asymmetry(&self) -> f64 {
        (self.alpha - self.alpha_prime)
            .abs()
            .max((self.beta - self.beta_prime).abs())
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m =
            ComplexMatrix::from_diag(&[self.alpha, self.beta, self.beta_prime, self.alpha_prime])
                .expect("finite diagonal");
        m[(0, 3)] = Complex::new(self.gamma, 0.0);
        m[(3, 0)] = Complex::new(self.gamma, 0.0);
        m
    }
}

pub fn x_state_to_density(p: &XStateParams) -> Result<DensityMatrix> {
    p.validate()?;
    validate_density(&p.to_matrix(), STATE_TOL)
}

/// X-form parameters read off a density matrix, with the fit residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XFit {
    pub params: XStateParams,
    /// Largest structurally-zero entry or imaginary corner part.
    pub residual: f64,
    /// Complex corner entry after renormalization; its modulus is `γ`.
    pub corner: Complex,
}

/// Reads X-form parameters from any density matrix, without judging the
/// residual.
///
/// Populations come from the diagonal and `γ = |ρ[0][3]|`. The diagonal is
/// rescaled to sum to one and `γ` is scaled by the same factor.
pub fn extract_x_params(rho: &DensityMatrix) -> XFit {
    let m = rho.matrix();
    let mut residual: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let corner = (i, j) == (0, 3) || (i, j) == (3, 0);
            if i != j && !corner {
                residual = residual.max(m[(i, j)].norm());
            }
        }
    }
    let corner = m[(0, 3)];
    residual = residual.max(corner.im.abs());

    let diag = [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re];
    let scale = 1.0 / diag.iter().sum::<f64>();
    let corner = corner * scale;
    XFit {
        params: XStateParams::new(
            diag[0] * scale,
            diag[1] * scale,
            diag[2] * scale,
            corner.norm(),
            diag[3] * scale,
        ),
        residual,
        corner,
    }
}

/// Fits the X form, rejecting states whose structurally-zero entries exceed
/// `noise_floor`.
pub fn fit_x_state(rho: &DensityMatrix, noise_floor: f64) -> Result<(XStateParams, f64)> {
    if noise_floor.is_nan() || noise_floor < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise floor must be nonnegative, got {noise_floor}"
        )));
    }
    let fit = extract_x_params(rho);
    if fit.residual > noise_floor {
        return Err(Error::ResidualAboveFloor {
            residual: fit.residual,
            noise_floor,
        });
    }
    Ok((fit.params, fit.residual))
}

/// Unit vector on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector {
    nx: f64,
    ny: f64,
    nz: f64,
}

const BLOCH_TOL: f64 = 1e-12;

impl BlochVector {
    pub const PLUS_X: Self = Self::axis(1.0, 0.0, 0.0);
    pub const MINUS_X: Self = Self::axis(-1.0, 0.0, 0.0);
    pub const PLUS_Y: Self = Self::axis(0.0, 1.0, 0.0);
    pub const MINUS_Y: Self = Self::axis(0.0, -1.0, 0.0);
    pub const PLUS_Z: Self = Self::axis(0.0, 0.0, 1.0);
    pub const MINUS_Z: Self = Self::axis(0.0, 0.0, -1.0);

    const fn axis(nx: f64, ny: f64, nz: f64) -> Self {
        Self { nx, ny, nz }
    }

    pub fn new(nx: f64, ny: f64, nz: f64) -> Result<Self> {
        let norm = (nx * nx + ny * ny + nz * nz).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > BLOCH_TOL {
            return Err(Error::InvalidArgument(format!(
                "Bloch vector ({nx}, {ny}, {nz}) has norm {norm}, expected 1"
            )));
        }
        Ok(Self { nx, ny, nz })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.nx, self.ny, self.nz]
    }
}

impl std::ops::Neg for BlochVector {
    type Output = Self;

    fn neg(self) -> Self {
        Self::axis(-self.nx, -self.ny, -self.nz)
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;

    fn try_from([x, y, z]: [f64; 3]) -> Result<Self> {
        Self::new(x, y, z)
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(n: BlochVector) -> Self {
        n.components()
    }
}

/// `(𝕀 + n̂·σ)/2`.
pub fn bloch_state(n: &BlochVector) -> ComplexMatrix {
    let [x, y, z] = n.components();
    let half = |re: f64, im: f64| Complex::new(0.5 * re, 0.5 * im);
    let rows = vec![
        vec![half(1.0 + z, 0.0), half(x, -y)],
        vec![half(x, y), half(1.0 - z, 0.0)],
    ];
    ComplexMatrix::from_rows(&rows).expect("2x2 with finite entries")
}
