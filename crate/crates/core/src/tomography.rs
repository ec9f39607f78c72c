//! Two-photon polarization tomography: measurement settings, Born-rule
//! probabilities, linear-inversion reconstruction and projection onto the
//! physical state space.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron, Complex, ComplexMatrix};
use crate::states::{validate_density, DensityMatrix, STATE_TOL};

/// Condition number above which the tomography system is treated as
/// singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Polarization analyzer setting for a single photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Projector {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Projector {
    pub const ALL: [Projector; 6] = [Self::H, Self::V, Self::D, Self::A, Self::R, Self::L];

    pub fn ket(self) -> [Complex; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let re = |x: f64| Complex::new(x, 0.0);
        match self {
            Self::H => [re(1.0), re(0.0)],
            Self::V => [re(0.0), re(1.0)],
            Self::D => [re(s), re(s)],
            Self::A => [re(s), re(-s)],
            Self::R => [re(s), Complex::new(0.0, s)],
            Self::L => [re(s), Complex::new(0.0, -s)],
        }
    }

    /// The orthogonal letter in the same basis.
    pub fn complement(self) -> Self {
        match self {
            Self::H => Self::V,
            Self::V => Self::H,
            Self::D => Self::A,
            Self::A => Self::D,
            Self::R => Self::L,
            Self::L => Self::R,
        }
    }

    pub fn projector(self) -> ComplexMatrix {
        let k = self.ket();
        ComplexMatrix::outer(&k, &k).expect("2-component ket")
    }

    /// Expansion coefficients `(1, n_x, n_y, n_z)` of `2|k><k|` in the
    /// Pauli basis.
    fn pauli_coefficients(self) -> [f64; 4] {
        match self {
            Self::H => [1.0, 0.0, 0.0, 1.0],
            Self::V => [1.0, 0.0, 0.0, -1.0],
            Self::D => [1.0, 1.0, 0.0, 0.0],
            Self::A => [1.0, -1.0, 0.0, 0.0],
            Self::R => [1.0, 0.0, 1.0, 0.0],
            Self::L => [1.0, 0.0, -1.0, 0.0],
        }
    }

    pub fn letter(self) -> char {
        match self {
            Self::H => 'H',
            Self::V => 'V',
            Self::D => 'D',
            Self::A => 'A',
            Self::R => 'R',
            Self::L => 'L',
        }
    }
}

impl fmt::Display for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Projector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(Self::H),
            "V" => Ok(Self::V),
            "D" => Ok(Self::D),
            "A" => Ok(Self::A),
            "R" => Ok(Self::R),
            "L" => Ok(Self::L),
            other => Err(Error::InvalidArgument(format!(
                "unknown polarization label {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub first: Projector,
    pub second: Projector,
}

impl MeasurementSetting {
    pub const fn new(first: Projector, second: Projector) -> Self {
        Self { first, second }
    }

    /// `|a><a| ⊗ |b><b|`.
    pub fn operator(&self) -> ComplexMatrix {
        kron(&self.first.projector(), &self.second.projector()).expect("2x2 factors")
    }

    /// The four settings sharing this setting's analyzer bases.
    fn quadruple(&self) -> [MeasurementSetting; 4] {
        let (a, b) = (self.first, self.second);
        let (ac, bc) = (a.complement(), b.complement());
        [
            Self::new(a, b),
            Self::new(a, bc),
            Self::new(ac, b),
            Self::new(ac, bc),
        ]
    }

    fn canonical_quadruple(&self) -> [MeasurementSetting; 4] {
        let mut q = self.quadruple();
        q.sort();
        q
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceRecord {
    pub setting: MeasurementSetting,
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_tag: Option<String>,
}

impl CoincidenceRecord {
    pub fn new(setting: MeasurementSetting, count: u64) -> Self {
        Self {
            setting,
            count,
            duration_tag: None,
        }
    }
}

/// `{H, V, D, R} × {H, V, D, R}` in row-major order.
pub fn standard_settings_16() -> Vec<MeasurementSetting> {
    use Projector::*;
    let letters = [H, V, D, R];
    letters
        .iter()
        .flat_map(|&a| letters.iter().map(move |&b| MeasurementSetting::new(a, b)))
        .collect()
}

/// Born-rule probability `tr(ρ Π_a ⊗ Π_b)`, clamped to `[0, 1]`.
pub fn predicted_probability(rho: &DensityMatrix, s: &MeasurementSetting) -> f64 {
    let a = s.first.ket();
    let b = s.second.ket();
    let psi: Vec<Complex> = a
        .iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect();
    let m = rho.matrix();
    let mut p = Complex::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            p += psi[i].conj() * m[(i, j)] * psi[j];
        }
    }
    p.re.clamp(0.0, 1.0)
}

/// Linear-inversion reconstruction from integer coincidence counts.
///
/// Counts become probabilities by dividing by the total of the setting's
/// basis quadruple (`ab, ab̄, āb, āb̄`) when all four are present, and by the
/// mean of the complete quadruple totals otherwise.
pub fn linear_reconstruct(records: &[CoincidenceRecord]) -> Result<ComplexMatrix> {
    let weighted: Vec<(MeasurementSetting, f64)> = records
        .iter()
        .map(|r| (r.setting, r.count as f64))
        .collect();
    linear_reconstruct_weighted(&weighted)
}

/// As [`linear_reconstruct`], for real-valued (e.g. expected) counts.
pub fn linear_reconstruct_weighted(counts: &[(MeasurementSetting, f64)]) -> Result<ComplexMatrix> {
    let mut by_setting: HashMap<MeasurementSetting, f64> = HashMap::with_capacity(counts.len());
    for &(setting, n) in counts {
        if !n.is_finite() || n < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "count {n} for setting {setting} is not a nonnegative number"
            )));
        }
        if by_setting.insert(setting, n).is_some() {
            return Err(Error::DuplicateSetting(setting));
        }
    }
    if by_setting.len() < 16 {
        let missing: Vec<_> = standard_settings_16()
            .into_iter()
            .filter(|s| !by_setting.contains_key(s))
            .collect();
        return Err(Error::IncompleteSettings(missing));
    }
    if by_setting.values().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroCounts);
    }

    let probabilities = normalize_counts(counts, &by_setting)?;

    // Unknowns r[μν] in ρ = ¼ Σ r[μν] σ_μ ⊗ σ_ν, μ, ν ∈ {I, X, Y, Z}.
    // tr(ρ Π_a ⊗ Π_b) = ¼ Σ r[μν] c_a[μ] c_b[ν] with c the Pauli coefficients
    // of the projectors (each projector is ½ Σ c[μ] σ_μ).
    let rows = counts.len();
    let design = DMatrix::from_fn(rows, 16, |k, col| {
        let s = counts[k].0;
        let ca = s.first.pauli_coefficients();
        let cb = s.second.pauli_coefficients();
        0.25 * ca[col / 4] * cb[col % 4]
    });
    let svd = design
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition > MAX_CONDITION {
        return Err(Error::SingularSystem(condition));
    }
    let rhs = DVector::from_vec(probabilities);
    let coeffs = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;

    let paulis = [
        ComplexMatrix::identity(2)?,
        ComplexMatrix::pauli_x(),
        ComplexMatrix::pauli_y(),
        ComplexMatrix::pauli_z(),
    ];
    let mut rho = ComplexMatrix::zeros(4)?;
    for mu in 0..4 {
        for nu in 0..4 {
            let term = kron(&paulis[mu], &paulis[nu])?.scale(0.25 * coeffs[mu * 4 + nu]);
            rho = &rho + &term;
        }
    }
    let trace = rho.trace().re;
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "reconstructed trace {trace} is not positive"
        )));
    }
    Ok(rho.scale(1.0 / trace))
}

fn normalize_counts(
    counts: &[(MeasurementSetting, f64)],
    by_setting: &HashMap<MeasurementSetting, f64>,
) -> Result<Vec<f64>> {
    let quadruple_total = |s: &MeasurementSetting| -> Option<f64> {
        s.quadruple()
            .iter()
            .map(|q| by_setting.get(q).copied())
            .sum::<Option<f64>>()
    };
    let complete: BTreeSet<[MeasurementSetting; 4]> = counts
        .iter()
        .filter(|(s, _)| quadruple_total(s).is_some())
        .map(|(s, _)| s.canonical_quadruple())
        .collect();
    let totals: Vec<f64> = complete
        .iter()
        .map(|q| q.iter().map(|s| by_setting[s]).sum())
        .filter(|&t: &f64| t > 0.0)
        .collect();
    // Without any complete quadruple the overall scale is fixed by the trace
    // normalization after inversion.
    let fallback = if totals.is_empty() {
        1.0
    } else {
        totals.iter().sum::<f64>() / totals.len() as f64
    };
    Ok(counts
        .iter()
        .map(|(s, n)| match quadruple_total(s) {
            Some(total) if total > 0.0 => n / total,
            _ => n / fallback,
        })
        .collect())
}

/// Clips negative eigenvalues to zero and renormalizes the trace.
///
/// Already positive semidefinite input is returned as `raw / tr(raw)`.
pub fn project_to_physical(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    if raw.dim() != 4 {
        return Err(Error::InvalidArgument(format!(
            "expected a 4x4 matrix, got {}x{}",
            raw.dim(),
            raw.dim()
        )));
    }
    let trace = raw.trace().re;
    if (trace - 1.0).abs() > 0.1 {
        return Err(Error::InvalidArgument(format!(
            "trace {trace} too far from 1 for projection"
        )));
    }
    let eig = hermitian_eigen(raw)?;
    let out = if eig.min() >= 0.0 {
        let sym = raw.map_indices(|i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5);
        sym.scale(1.0 / trace)
    } else {
        let kept: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
        if kept.is_nan() || kept <= 0.0 {
            return Err(Error::NumericalFailure(
                "no positive eigenvalues to project onto".into(),
            ));
        }
        eig.rebuild_with(|l| l.max(0.0) / kept)
    };
    match validate_density(&out, STATE_TOL) {
        Ok(rho) => Ok(rho),
        Err(e) => Err(Error::NumericalFailure(format!(
            "projection produced an invalid state: {e}"
        ))),
    }
}
