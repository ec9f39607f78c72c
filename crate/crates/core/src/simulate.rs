//! Synthetic coincidence data and random state families.
//!
//! All randomness comes from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). The generator is portable and
//! bit-reproducible across platforms. Setting `k` of a plan draws from the
//! base stream advanced by `k` jumps of 2^128 steps, so settings never share
//! random numbers. Tasks run in parallel should use `seed ^ task_index`.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Poisson, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix};
use crate::states::{validate_density, DensityMatrix, XStateParams, STATE_TOL};
use crate::tomography::{predicted_probability, CoincidenceRecord, MeasurementSetting};

const MAX_RESAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Seed for the `index`-th independent task derived from this one.
    pub fn for_task(self, index: u64) -> Self {
        Self(self.0 ^ index)
    }

    fn rng(self) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(self.0)
    }
}

#[derive(Clone, Debug)]
pub struct SimulationPlan {
    pub state: DensityMatrix,
    pub settings: Vec<MeasurementSetting>,
    pub counts_per_setting: u64,
    pub seed: RngSeed,
}

impl SimulationPlan {
    pub fn new(
        state: DensityMatrix,
        settings: Vec<MeasurementSetting>,
        counts_per_setting: u64,
        seed: RngSeed,
    ) -> Result<Self> {
        if counts_per_setting == 0 {
            return Err(Error::InvalidArgument(
                "counts per setting must be at least 1".into(),
            ));
        }
        Ok(Self {
            state,
            settings,
            counts_per_setting,
            seed,
        })
    }

    fn means(&self) -> impl Iterator<Item = (MeasurementSetting, f64)> + '_ {
        self.settings.iter().map(|s| {
            (
                *s,
                self.counts_per_setting as f64 * predicted_probability(&self.state, s),
            )
        })
    }
}

/// Unrounded expected counts `N · p_k`.
pub fn expected_counts(plan: &SimulationPlan) -> Vec<(MeasurementSetting, f64)> {
    plan.means().collect()
}

/// Expected counts rounded to the nearest integer.
pub fn ideal_counts(plan: &SimulationPlan) -> Vec<CoincidenceRecord> {
    plan.means()
        .map(|(s, mean)| CoincidenceRecord::new(s, mean.round() as u64))
        .collect()
}

/// Independent Poisson counts with mean `N · p_k` for each setting.
pub fn sample_counts(plan: &SimulationPlan) -> Vec<CoincidenceRecord> {
    let mut stream = plan.seed.rng();
    plan.means()
        .map(|(s, mean)| {
            let mut rng = stream.clone();
            stream.jump();
            let count = if mean > 0.0 {
                let poisson = Poisson::new(mean).expect("positive finite mean");
                poisson.sample(&mut rng) as u64
            } else {
                0
            };
            CoincidenceRecord::new(s, count)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Separable,
    Entangled,
    Boundary,
    Any,
}

/// Flat sample of `(α, β, β′, α′)` on the probability simplex via spacings
/// of sorted uniforms.
fn simplex4(rng: &mut impl Rng) -> [f64; 4] {
    let mut cuts = [
        rng.random::<f64>(),
        rng.random::<f64>(),
        rng.random::<f64>(),
    ];
    cuts.sort_by(f64::total_cmp);
    [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], 1.0 - cuts[2]]
}

/// Uniform draw from `(lo, hi]`.
fn open_closed(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    hi - rng.random::<f64>() * (hi - lo)
}

fn gamma_for(rng: &mut impl Rng, regime: Regime, pops: [f64; 4]) -> Option<f64> {
    let [alpha, beta, beta_prime, alpha_prime] = pops;
    let inner = (beta * beta_prime).sqrt();
    let outer = (alpha * alpha_prime).sqrt();
    match regime {
        Regime::Separable => Some(rng.random::<f64>() * inner.min(outer)),
        Regime::Entangled => (outer > inner).then(|| open_closed(rng, inner, outer)),
        Regime::Boundary => (inner <= outer).then_some(inner),
        Regime::Any => Some(rng.random::<f64>() * outer),
    }
}

fn fallback(regime: Regime) -> XStateParams {
    match regime {
        Regime::Entangled => XStateParams::BELL_PHI_PLUS,
        // gamma = beta = 0.25 sits exactly on the boundary.
        Regime::Boundary => XStateParams::new(0.25, 0.25, 0.25, 0.25, 0.25),
        Regime::Separable | Regime::Any => XStateParams::MAXIMALLY_MIXED,
    }
}

fn sample_x_state(
    seed: RngSeed,
    regime: Regime,
    populations: impl Fn(&mut Xoshiro256PlusPlus) -> [f64; 4],
) -> XStateParams {
    let mut rng = seed.rng();
    for _ in 0..MAX_RESAMPLES {
        let pops = populations(&mut rng);
        if let Some(gamma) = gamma_for(&mut rng, regime, pops) {
            let p = XStateParams::new(pops[0], pops[1], pops[2], gamma, pops[3]);
            if p.validate().is_ok() {
                return p;
            }
        }
    }
    fallback(regime)
}

/// Random X-form parameters with populations flat on the simplex and `γ`
/// uniform in the regime's interval.
pub fn random_x_state(seed: RngSeed, regime: Regime) -> XStateParams {
    sample_x_state(seed, regime, simplex4)
}

/// Random symmetric X-form parameters (`α = α′`, `β = β′`, `β` uniform on
/// `[0, ½]`).
pub fn random_symmetric_x_state(seed: RngSeed, regime: Regime) -> XStateParams {
    sample_x_state(seed, regime, |rng| {
        let beta = 0.5 * rng.random::<f64>();
        let alpha = 0.5 - beta;
        [alpha, beta, beta, alpha]
    })
}

/// `G G† / tr(G G†)` for `G` with i.i.d. standard complex Gaussian entries.
pub fn random_density_matrix(seed: RngSeed) -> DensityMatrix {
    let mut rng = seed.rng();
    let mut g = ComplexMatrix::zeros(4).expect("dim 4");
    for i in 0..4 {
        for j in 0..4 {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            g[(i, j)] = Complex::new(re, im);
        }
    }
    let ggh = &g * &g.adjoint();
    let m = ggh.scale(1.0 / ggh.trace().re);
    // Exactly Hermitian by symmetrization; PSD by construction.
    let m = m.map_indices(|i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    validate_density(&m, STATE_TOL).expect("Gram matrices are valid states")
}

/// Random Hermitian 4×4 matrix with entries uniform in `[-1, 1]`.
pub fn random_hermitian(seed: RngSeed) -> ComplexMatrix {
    let mut rng = seed.rng();
    let mut m = ComplexMatrix::zeros(4).expect("dim 4");
    for i in 0..4 {
        m[(i, i)] = Complex::new(rng.random_range(-1.0..=1.0), 0.0);
        for j in i + 1..4 {
            let z = Complex::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}
