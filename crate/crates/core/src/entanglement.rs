//! Partial transpose, the PPT verdict and the explicit eight-term separable
//! decomposition of symmetric X-form states.
//!
//! For two qubits a state is entangled exactly when its partial transpose
//! has a negative eigenvalue, so [`ppt_verdict`] is definitive. For the
//! X-form family the same test collapses to `|γ| > √(β β′)`
//! ([`x_entanglement_condition`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron, max_entry_distance, ComplexMatrix};
use crate::states::{bloch_state, BlochVector, DensityMatrix, XStateParams, STATE_TOL};

/// Default band around zero inside which a partial-transpose eigenvalue is
/// not taken as evidence of entanglement.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Entangled,
    Separable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PptReport {
    pub verdict: Verdict,
    pub min_eigenvalue: f64,
    pub negativity: f64,
    /// Partial-transpose spectrum, ascending.
    pub eigenvalues: [f64; 4],
    /// Set when `|min_eigenvalue| <= boundary_tol`; the verdict is then
    /// `Separable`.
    pub boundary: bool,
}

/// Transposes the indices of one tensor factor.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: Subsystem) -> ComplexMatrix {
    partial_transpose_matrix(rho.matrix(), subsystem)
}

pub(crate) fn partial_transpose_matrix(m: &ComplexMatrix, subsystem: Subsystem) -> ComplexMatrix {
    debug_assert_eq!(m.dim(), 4);
    m.map_indices(|row, col| {
        let (i, j) = (row / 2, row % 2);
        let (k, l) = (col / 2, col % 2);
        match subsystem {
            Subsystem::Second => m[(2 * i + l, 2 * k + j)],
            Subsystem::First => m[(2 * k + j, 2 * i + l)],
        }
    })
}

/// Peres test on the second photon.
pub fn ppt_verdict(rho: &DensityMatrix, boundary_tol: f64) -> Result<PptReport> {
    ppt_verdict_on(rho, Subsystem::Second, boundary_tol)
}

pub fn ppt_verdict_on(
    rho: &DensityMatrix,
    subsystem: Subsystem,
    boundary_tol: f64,
) -> Result<PptReport> {
    if boundary_tol.is_nan() || boundary_tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "boundary tolerance must be nonnegative, got {boundary_tol}"
        )));
    }
    let eig = hermitian_eigen(&partial_transpose(rho, subsystem))?;
    let eigenvalues: [f64; 4] = eig
        .values
        .as_slice()
        .try_into()
        .expect("partial transpose is 4x4");
    let min_eigenvalue = eigenvalues[0];
    let negativity = negativity_of(&eigenvalues);
    let verdict = if min_eigenvalue < -boundary_tol {
        Verdict::Entangled
    } else {
        Verdict::Separable
    };
    Ok(PptReport {
        verdict,
        min_eigenvalue,
        negativity,
        eigenvalues,
        boundary: min_eigenvalue.abs() <= boundary_tol,
    })
}

fn negativity_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|&l| (-l).max(0.0)).sum()
}

/// Sum of the magnitudes of the negative partial-transpose eigenvalues.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let eig = hermitian_eigen(&partial_transpose(rho, Subsystem::Second))?;
    Ok(negativity_of(&eig.values))
}

/// Closed-form entanglement test for the X family.
///
/// Returns `(entangled, margin)` with `margin = |γ| − √(β β′)`; the central
/// partial-transpose block `[[β, γ], [γ, β′]]` has a negative eigenvalue
/// exactly when the margin is positive.
pub fn x_entanglement_condition(p: &XStateParams) -> (bool, f64) {
    let margin = p.gamma.abs() - (p.beta * p.beta_prime).max(0.0).sqrt();
    (margin > 0.0, margin)
}

/// Concurrence of an X-form state, `2 max(0, |γ| − √(β β′))`.
pub fn concurrence_x(p: &XStateParams) -> f64 {
    2.0 * x_entanglement_condition(p).1.max(0.0)
}

/// One product term `weight · ρ_a ⊗ ρ_b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub weight: f64,
    pub n_a: BlochVector,
    pub n_b: BlochVector,
}

impl ProductTerm {
    pub fn state(&self) -> ComplexMatrix {
        kron(&bloch_state(&self.n_a), &bloch_state(&self.n_b))
            .expect("Bloch states are 2x2")
            .scale(self.weight)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableDecomposition {
    pub terms: Vec<ProductTerm>,
}

impl SeparableDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.terms
            .iter()
            .fold(ComplexMatrix::zeros(4).expect("dim 4"), |acc, t| {
                &acc + &t.state()
            })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.weight).collect()
    }
}

/// Writes a symmetric X-form state as a convex sum of eight product states:
///
/// ```text
/// (α − γ) (ρ_z ⊗ ρ_z + ρ_−z ⊗ ρ_−z) + (β − γ) (ρ_z ⊗ ρ_−z + ρ_−z ⊗ ρ_z)
///   + γ (ρ_x ⊗ ρ_x + ρ_−x ⊗ ρ_−x + ρ_−y ⊗ ρ_y + ρ_y ⊗ ρ_−y)
/// ```
///
/// Requires `α = α′`, `β = β′` (within `1e-9`) and `0 <= γ <= min(α, β)`.
/// Zero-weight terms are kept so the output always has eight terms.
pub fn separable_decomposition(p: &XStateParams) -> Result<SeparableDecomposition> {
    p.validate()?;
    let asymmetry = p.asymmetry();
    if asymmetry > STATE_TOL {
        return Err(Error::NotSymmetric(asymmetry));
    }
    // Symmetrize away sub-tolerance asymmetry so the weights sum to one.
    let alpha = 0.5 * (p.alpha + p.alpha_prime);
    let beta = 0.5 * (p.beta + p.beta_prime);
    let gamma = p.gamma;

    let diag_weight = alpha - gamma;
    let anti_weight = beta - gamma;
    for (weight, value) in [
        ("beta - gamma", anti_weight),
        ("alpha - gamma", diag_weight),
        ("gamma", gamma),
    ] {
        if value < 0.0 {
            return Err(Error::NotSeparableByConstruction { weight, value });
        }
    }

    use BlochVector as B;
    let term = |weight, n_a, n_b| ProductTerm { weight, n_a, n_b };
    Ok(SeparableDecomposition {
        terms: vec![
            term(diag_weight, B::PLUS_Z, B::PLUS_Z),
            term(diag_weight, B::MINUS_Z, B::MINUS_Z),
            term(anti_weight, B::PLUS_Z, B::MINUS_Z),
            term(anti_weight, B::MINUS_Z, B::PLUS_Z),
            term(gamma, B::PLUS_X, B::PLUS_X),
            term(gamma, B::MINUS_X, B::MINUS_X),
            term(gamma, B::MINUS_Y, B::PLUS_Y),
            term(gamma, B::PLUS_Y, B::MINUS_Y),
        ],
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionCheck {
    pub ok: bool,
    /// Max-entry distance between the rebuilt sum and the target.
    pub max_error: f64,
}

/// Rebuilds `Σ w_k ρ_a ⊗ ρ_b` and compares it to `rho`.
///
/// `ok` also requires nonnegative weights summing to one within `tol`.
pub fn verify_decomposition(
    d: &SeparableDecomposition,
    rho: &DensityMatrix,
    tol: f64,
) -> Result<DecompositionCheck> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let max_error = max_entry_distance(&d.reconstruct(), rho.matrix())?;
    let weights_ok = d.terms.iter().all(|t| t.weight >= 0.0)
        && (d.terms.iter().map(|t| t.weight).sum::<f64>() - 1.0).abs() <= tol;
    Ok(DecompositionCheck {
        ok: weights_ok && max_error <= tol,
        max_error,
    })
}
