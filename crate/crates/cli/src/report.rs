//! The analysis pipeline and its JSON report.
//!
//! `analyze` runs tomography (for counts), the X-form fit, the closed-form
//! condition, the eight-term decomposition and the PPT test, then checks
//! that the two entanglement tests agree. A disagreement larger than the
//! perturbation bound of the fit is a bug and is reported as an error, never
//! reconciled.

use entangle_core::entanglement::{
    concurrence_x, ppt_verdict, separable_decomposition, verify_decomposition,
    x_entanglement_condition, ProductTerm, DEFAULT_BOUNDARY_TOL,
};
use entangle_core::linalg::hermitian_eigen;
use entangle_core::states::{
    extract_x_params, validate_density, XFit, DEFAULT_NOISE_FLOOR, STATE_TOL,
};
use entangle_core::tomography::{linear_reconstruct, project_to_physical};
use entangle_core::{ComplexMatrix, DensityMatrix, MeasurementSetting, Verdict, XStateParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::input::{InputDocument, Payload};

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeOptions {
    pub noise_floor: f64,
    pub boundary_tol: f64,
    /// Settings the counts must cover; `None` accepts any complete set.
    pub settings: Option<Vec<MeasurementSetting>>,
    /// Test hook: flips the closed-form result before the consistency check.
    pub inject_contradiction: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            noise_floor: DEFAULT_NOISE_FLOOR,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
            settings: None,
            inject_contradiction: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XFitReport {
    pub alpha: f64,
    pub beta: f64,
    pub beta_prime: f64,
    pub gamma: f64,
    pub alpha_prime: f64,
    pub residual: f64,
    pub accepted: bool,
}

impl XFitReport {
    pub fn params(&self) -> XStateParams {
        XStateParams::new(
            self.alpha,
            self.beta,
            self.beta_prime,
            self.gamma,
            self.alpha_prime,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionReport {
    pub terms: Vec<ProductTerm>,
    pub verified: bool,
    pub max_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictReport {
    pub input_id: String,
    pub verdict: Verdict,
    pub min_ppt_eigenvalue: f64,
    /// Partial-transpose spectrum, ascending.
    pub ppt_eigenvalues: [f64; 4],
    pub negativity: f64,
    pub concurrence: Option<f64>,
    pub x_fit: XFitReport,
    pub condition_margin: Option<f64>,
    pub decomposition: Option<DecompositionReport>,
    pub decomposition_absent_reason: Option<String>,
    pub flags: Vec<String>,
}

/// Reconstructs and projects counts, or validates a matrix.
pub fn state_from_input(
    input: &InputDocument,
    options: &AnalyzeOptions,
    flags: &mut Vec<String>,
) -> Result<DensityMatrix> {
    match &input.payload {
        Payload::Matrix(m) => Ok(validate_density(m, STATE_TOL)?),
        Payload::Counts(records) => {
            if let Some(required) = &options.settings {
                let missing: Vec<_> = required
                    .iter()
                    .filter(|s| !records.iter().any(|r| r.setting == **s))
                    .copied()
                    .collect();
                if !missing.is_empty() {
                    return Err(entangle_core::Error::IncompleteSettings(missing).into());
                }
            }
            let raw = linear_reconstruct(records)?;
            flags.push("reconstructed".into());
            if hermitian_eigen(&raw)?.min() < 0.0 {
                flags.push("clipped-negative-eigenvalues".into());
            }
            Ok(project_to_physical(&raw)?)
        }
    }
}

/// Smallest partial-transpose eigenvalue of the fitted X-form matrix:
/// `min(α, α′, (β + β′)/2 − √(((β − β′)/2)² + γ²))`.
fn x_form_min_ppt_eigenvalue(p: &XStateParams) -> f64 {
    let mean = 0.5 * (p.beta + p.beta_prime);
    let half_gap = 0.5 * (p.beta - p.beta_prime);
    let central = mean - (half_gap * half_gap + p.gamma * p.gamma).sqrt();
    central.min(p.alpha).min(p.alpha_prime)
}

/// Frobenius distance between `rho` and its X-form fit (with the complex
/// corner kept). Bounds the shift of every partial-transpose eigenvalue.
fn fit_distance(rho: &DensityMatrix, fit: &XFit) -> f64 {
    let mut x = fit.params.to_matrix();
    x[(0, 3)] = fit.corner;
    x[(3, 0)] = fit.corner.conj();
    (rho.matrix() - &x).frobenius_norm()
}

pub fn analyze(input: &InputDocument, options: &AnalyzeOptions) -> Result<VerdictReport> {
    let mut flags = Vec::new();
    let rho = state_from_input(input, options, &mut flags)?;
    analyze_state(&input.id, &rho, options, flags)
}

pub fn analyze_state(
    input_id: &str,
    rho: &DensityMatrix,
    options: &AnalyzeOptions,
    mut flags: Vec<String>,
) -> Result<VerdictReport> {
    let ppt = ppt_verdict(rho, options.boundary_tol)?;
    if ppt.boundary {
        flags.push("boundary".into());
    }

    let fit = extract_x_params(rho);
    let params = fit.params;
    let accepted = fit.residual <= options.noise_floor;
    let x_fit = XFitReport {
        alpha: params.alpha,
        beta: params.beta,
        beta_prime: params.beta_prime,
        gamma: params.gamma,
        alpha_prime: params.alpha_prime,
        residual: fit.residual,
        accepted,
    };
    if (params.alpha - params.alpha_prime).abs() > STATE_TOL {
        flags.push("asymmetric-alpha".into());
    }
    if (params.beta - params.beta_prime).abs() > STATE_TOL {
        flags.push("asymmetric-beta".into());
    }

    let mut report = VerdictReport {
        input_id: input_id.to_string(),
        verdict: ppt.verdict,
        min_ppt_eigenvalue: ppt.min_eigenvalue,
        ppt_eigenvalues: ppt.eigenvalues,
        negativity: ppt.negativity,
        concurrence: None,
        x_fit,
        condition_margin: None,
        decomposition: None,
        decomposition_absent_reason: None,
        flags,
    };

    if !accepted {
        report.flags.push("fit-rejected".into());
        report.decomposition_absent_reason = Some(format!(
            "X-form fit rejected: residual {:e} above noise floor {:e}",
            fit.residual, options.noise_floor
        ));
        return Ok(report);
    }

    let (mut entangled, margin) = x_entanglement_condition(&params);
    if options.inject_contradiction {
        entangled = !entangled;
    }
    report.condition_margin = Some(margin);
    report.concurrence = Some(concurrence_x(&params));

    let x_min = x_form_min_ppt_eigenvalue(&params);
    let band = options.boundary_tol + fit_distance(rho, &fit);
    let ppt_entangled = ppt.verdict == Verdict::Entangled;
    if ppt_entangled != entangled && x_min.abs() > band {
        return Err(CliError::InternalInconsistency(format!(
            "PPT verdict {:?} (min eigenvalue {:e}) contradicts closed-form margin {:e} \
             outside the band {:e}",
            ppt.verdict, ppt.min_eigenvalue, margin, band
        )));
    }

    match separable_decomposition(&params) {
        Ok(_) if ppt_entangled => {
            report.decomposition_absent_reason =
                Some("PPT test reports entanglement within the fit noise band".into());
        }
        Ok(d) => {
            let tol = fit.residual + STATE_TOL;
            let check = verify_decomposition(&d, rho, tol)?;
            report.decomposition = Some(DecompositionReport {
                terms: d.terms,
                verified: check.ok,
                max_error: check.max_error,
            });
        }
        Err(e) => report.decomposition_absent_reason = Some(e.to_string()),
    }
    Ok(report)
}

/// Decomposes X-form parameters and verifies the sum against their matrix.
pub fn decompose(params: &XStateParams) -> Result<DecompositionReport> {
    let d = separable_decomposition(params)?;
    let rho = entangle_core::states::x_state_to_density(params)?;
    let check = verify_decomposition(&d, &rho, 1e-12)?;
    Ok(DecompositionReport {
        terms: d.terms,
        verified: check.ok,
        max_error: check.max_error,
    })
}

/// Counts to a density matrix; `project` clips to the physical set.
pub fn tomography(input: &InputDocument, project: bool) -> Result<ComplexMatrix> {
    let Payload::Counts(records) = &input.payload else {
        return Err(CliError::MalformedCsv("tomo expects a counts CSV".into()));
    };
    let raw = linear_reconstruct(records)?;
    if project {
        Ok(project_to_physical(&raw)?.into_matrix())
    } else {
        Ok(raw)
    }
}
