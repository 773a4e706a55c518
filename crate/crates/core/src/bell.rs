//! CHSH Bell-test layer: measurement settings on the ion qubits, analytic
//! correlators, seeded Monte Carlo trials and the fluorescence readout model.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{Basis, DensityMatrix};
use crate::error::{Error, Result};

/// The four maximally entangled two-qubit states, written over the ion basis
/// `s1s1, s1s2, s2s1, s2s2`: ψ± = (|s1s2⟩ ± |s2s1⟩)/√2,
/// φ± = (|s1s1⟩ ± |s2s2⟩)/√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellState {
    PsiMinus,
    PsiPlus,
    PhiPlus,
    PhiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PsiMinus,
        BellState::PsiPlus,
        BellState::PhiPlus,
        BellState::PhiMinus,
    ];

    pub fn ion_vector(self) -> [Complex64; 4] {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            BellState::PsiMinus => [Complex64::ZERO, s, -s, Complex64::ZERO],
            BellState::PsiPlus => [Complex64::ZERO, s, s, Complex64::ZERO],
            BellState::PhiPlus => [s, Complex64::ZERO, Complex64::ZERO, s],
            BellState::PhiMinus => [s, Complex64::ZERO, Complex64::ZERO, -s],
        }
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::from_pure(Basis::IonPair, &self.ion_vector()).expect("4-dim basis")
    }
}

/// A ±1-valued qubit measurement direction on the Bloch sphere, realized in
/// hardware by single-qubit rotation pulses before fluorescence readout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    /// Polar angle from the z axis, radians.
    pub theta: f64,
    /// Azimuth in the x-y plane, radians.
    pub phi: f64,
}

impl MeasurementSetting {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Setting in the equatorial (x-y) plane at the given azimuth.
    pub fn equatorial(phi: f64) -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_2,
            phi,
        }
    }

    /// σ·n̂ = sinθcosφ X + sinθsinφ Y + cosθ Z, eigenvalues ±1.
    pub fn operator(&self) -> Matrix2<Complex64> {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        Matrix2::new(
            Complex64::new(ct, 0.0),
            Complex64::from_polar(st, -self.phi),
            Complex64::from_polar(st, self.phi),
            Complex64::new(-ct, 0.0),
        )
    }
}

/// The four CHSH settings: (a, a′) on side A, (b, b′) on side B.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: MeasurementSetting,
    pub a_prime: MeasurementSetting,
    pub b: MeasurementSetting,
    pub b_prime: MeasurementSetting,
}

impl ChshSettings {
    /// Canonical settings maximizing |S| for ψ⁻, all in the equatorial
    /// plane: a = 0, a′ = π/2, b = π/4, b′ = 3π/4. The paper does not fix
    /// settings; these are the textbook optimum, and the equatorial choice
    /// makes the incoherent `s1s2/s2s1` background contribute zero.
    pub fn canonical_psi_minus() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Self {
            a: MeasurementSetting::equatorial(0.0),
            a_prime: MeasurementSetting::equatorial(FRAC_PI_2),
            b: MeasurementSetting::equatorial(FRAC_PI_4),
            b_prime: MeasurementSetting::equatorial(3.0 * FRAC_PI_4),
        }
    }

    pub fn pairs(&self) -> [(MeasurementSetting, MeasurementSetting); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

/// Full configuration of a finite-statistics CHSH run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshConfig {
    pub settings: ChshSettings,
    pub trials: u64,
    pub rng_seed: u64,
}

fn check_ion_state(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    Ok(())
}

/// E(a, b) = Tr[ρ (σ_a ⊗ σ_b)] for a two-qubit state ρ.
pub fn correlator(
    rho: &DensityMatrix,
    a: &MeasurementSetting,
    b: &MeasurementSetting,
) -> Result<f64> {
    check_ion_state(rho)?;
    let op = a.operator().kronecker(&b.operator());
    let mut value = Complex64::ZERO;
    for i in 0..4 {
        for j in 0..4 {
            value += rho.element(i, j) * op[(j, i)];
        }
    }
    debug_assert!(value.im.abs() < 1e-12);
    Ok(value.re)
}

/// S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′).
///
/// The sign convention puts the minus on the (a, b′) term; for ψ⁻ with the
/// canonical settings S = −2√2.
pub fn chsh_value(rho: &DensityMatrix, settings: &ChshSettings) -> Result<f64> {
    let e = |x: &MeasurementSetting, y: &MeasurementSetting| correlator(rho, x, y);
    Ok(
        e(&settings.a, &settings.b)? - e(&settings.a, &settings.b_prime)?
            + e(&settings.a_prime, &settings.b)?
            + e(&settings.a_prime, &settings.b_prime)?,
    )
}

/// Joint outcome probabilities P(o_a, o_b) for one setting pair, indexed
/// `(o_a << 1) | o_b` with bit 0 = outcome +1, bit 1 = outcome −1.
fn outcome_probabilities(
    rho: &DensityMatrix,
    a: &MeasurementSetting,
    b: &MeasurementSetting,
) -> [f64; 4] {
    let id = Matrix2::identity();
    let proj = |op: &Matrix2<Complex64>, sign: f64| -> Matrix2<Complex64> {
        (id + op.scale(sign)).scale(0.5)
    };
    let (op_a, op_b) = (a.operator(), b.operator());
    let mut probs = [0.0; 4];
    for (idx, (sa, sb)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .enumerate()
    {
        let pi = proj(&op_a, *sa).kronecker(&proj(&op_b, *sb));
        let mut p = Complex64::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                p += rho.element(i, j) * pi[(j, i)];
            }
        }
        probs[idx] = p.re.max(0.0);
    }
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    probs
}

/// Per-trial outcome counts: `counts[pair][outcome]` with pair order
/// (a,b), (a,b′), (a′,b), (a′,b′) and outcome order ++, +−, −+, −−.
pub type ChshCounts = [[u64; 4]; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub s_estimate: f64,
    pub std_error: f64,
    pub counts: ChshCounts,
    pub trials: u64,
    pub rng_seed: u64,
}

/// Samples `trials` CHSH rounds with settings chosen uniformly at random and
/// outcomes drawn from the Born distribution.
///
/// Each trial derives its own ChaCha stream from the master seed and the
/// trial index, so parallel and serial execution produce bit-identical
/// counts.
pub fn monte_carlo_chsh(rho: &DensityMatrix, config: &ChshConfig) -> Result<MonteCarloReport> {
    check_ion_state(rho)?;
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let pairs = config.settings.pairs();
    let mut tables = [[0.0; 4]; 4];
    for (k, (a, b)) in pairs.iter().enumerate() {
        tables[k] = outcome_probabilities(rho, a, b);
    }
    let seed = config.rng_seed;

    let counts: ChshCounts = (0..config.trials)
        .into_par_iter()
        .fold(
            || [[0u64; 4]; 4],
            |mut acc, trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                let pair = (rng.next_u32() & 3) as usize;
                let u: f64 = rng.gen();
                let mut cum = 0.0;
                let mut outcome = 3;
                for (o, p) in tables[pair].iter().enumerate() {
                    cum += p;
                    if u < cum {
                        outcome = o;
                        break;
                    }
                }
                acc[pair][outcome] += 1;
                acc
            },
        )
        .reduce(
            || [[0u64; 4]; 4],
            |mut a, b| {
                for i in 0..4 {
                    for j in 0..4 {
                        a[i][j] += b[i][j];
                    }
                }
                a
            },
        );

    let mut s = 0.0;
    let mut variance = 0.0;
    let signs = [1.0, -1.0, 1.0, 1.0];
    for (k, row) in counts.iter().enumerate() {
        let n: u64 = row.iter().sum();
        if n == 0 {
            return Err(Error::InsufficientData(format!(
                "no trials landed on setting pair {k}"
            )));
        }
        let n = n as f64;
        let e = (row[0] as f64 - row[1] as f64 - row[2] as f64 + row[3] as f64) / n;
        s += signs[k] * e;
        variance += (1.0 - e * e) / n;
    }

    Ok(MonteCarloReport {
        s_estimate: s,
        std_error: variance.sqrt(),
        counts,
        trials: config.trials,
        rng_seed: seed,
    })
}

/// ρ → (1−p)ρ + p·I/4 on each heralded pair; stand-in for rotation-pulse
/// imperfections, which the source material does not quantify.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_ion_state(rho)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "depolarization probability {p} outside [0,1]"
        )));
    }
    let mixed = DensityMatrix::maximally_mixed(rho.basis().clone());
    DensityMatrix::mix(&[(1.0 - p, rho), (p, &mixed)])
}

/// Fluorescence readout on the cycling transition, modeled as Poisson photon
/// counting against a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    /// Scattering rate of the cycling transition, 1/s.
    pub cycling_rate: f64,
    /// Fraction of scattered photons that are detected.
    pub collection_efficiency: f64,
    /// Detection window, seconds.
    pub window: f64,
    /// Minimum count declaring the bright state.
    pub threshold: u32,
    /// Background count rate, 1/s. Defaults to zero.
    pub dark_rate: f64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self {
            cycling_rate: 1.3e8,
            collection_efficiency: 0.01,
            window: 23e-6,
            threshold: 1,
            dark_rate: 0.0,
        }
    }
}

fn poisson_cdf_below(lambda: f64, k: u32) -> f64 {
    // P(X < k) for X ~ Poisson(lambda).
    let mut term = (-lambda).exp();
    let mut sum = 0.0;
    for j in 0..k {
        if j > 0 {
            term *= lambda / j as f64;
        }
        sum += term;
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCounts {
    pub expected_counts: f64,
    pub discrimination_error: f64,
}

/// Expected bright-state counts and the discrimination error
/// P(bright reads dark) + P(dark reads bright).
pub fn readout_counts(model: &ReadoutModel) -> Result<ReadoutCounts> {
    if model.window < 0.0 || model.cycling_rate < 0.0 || model.collection_efficiency < 0.0 {
        return Err(Error::InvalidParameter(
            "readout model parameters must be non-negative".into(),
        ));
    }
    if model.threshold == 0 {
        return Err(Error::InvalidParameter(
            "threshold must be at least 1".into(),
        ));
    }
    let bright = model.cycling_rate * model.collection_efficiency * model.window;
    let dark = model.dark_rate * model.window;
    let error = poisson_cdf_below(bright, model.threshold)
        + (1.0 - poisson_cdf_below(dark, model.threshold));
    Ok(ReadoutCounts {
        expected_counts: bright,
        discrimination_error: error,
    })
}
