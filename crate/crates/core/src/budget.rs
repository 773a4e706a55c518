//! Closed-form rate budget: the product of attempt rate, cavity emission,
//! fiber coupling, transmission, heralding fraction and detection
//! efficiency. This is the closed form of the exact attempt simulation and
//! the tests hold the two against each other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All multiplicative factors of the pair-generation rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetConfig {
    /// Attempt rate, 1/s. One excitation every 30 µs by default.
    pub repetition_rate: f64,
    /// Per-ion probability of emitting into the cavity mode.
    pub p_cav: f64,
    /// Cavity-to-fiber coupling per photon; close to 1.
    pub fiber_coupling: f64,
    /// Ion-to-ion distance; each photon travels half of it.
    pub distance_km: f64,
    pub attenuation_db_per_km: f64,
    /// Photon detection efficiency η.
    pub detector_eta: f64,
    /// Fraction of coincidences the analyzer resolves into usable Bell
    /// states; 1/2 when both ψ⁻ and ψ⁺ are kept.
    pub herald_fraction: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            repetition_rate: 33_333.0,
            p_cav: 0.01,
            fiber_coupling: 1.0,
            distance_km: 10.0,
            attenuation_db_per_km: 1.0,
            detector_eta: 0.7,
            herald_fraction: 0.5,
        }
    }
}

impl BudgetConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.repetition_rate.is_finite() || self.repetition_rate <= 0.0 {
            return Err(Error::InvalidParameter(
                "repetition rate must be positive".into(),
            ));
        }
        for (name, v) in [
            ("p_cav", self.p_cav),
            ("fiber_coupling", self.fiber_coupling),
            ("detector_eta", self.detector_eta),
            ("herald_fraction", self.herald_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside [0,1]"
                )));
            }
        }
        if self.distance_km < 0.0 || self.attenuation_db_per_km < 0.0 {
            return Err(Error::InvalidParameter(
                "distance and attenuation must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Per-photon fiber survival over one arm (half the distance).
    pub fn arm_survival(&self) -> f64 {
        fiber_survival(self.distance_km / 2.0, self.attenuation_db_per_km)
    }
}

/// Per-photon survival 10^(−dB/km · km / 10).
pub fn fiber_survival(distance_km: f64, db_per_km: f64) -> f64 {
    10f64.powf(-db_per_km * distance_km / 10.0)
}

/// Entangled pairs per second:
/// rate · p_cav² · coupling² · survival² · herald_fraction · η².
pub fn pair_rate(config: &BudgetConfig) -> Result<f64> {
    config.validate()?;
    let s = config.arm_survival();
    Ok(config.repetition_rate
        * config.p_cav.powi(2)
        * config.fiber_coupling.powi(2)
        * s.powi(2)
        * config.herald_fraction
        * config.detector_eta.powi(2))
}

/// Seconds to accumulate `n_pairs` heralded pairs.
pub fn time_to_pairs(config: &BudgetConfig, n_pairs: u64) -> Result<f64> {
    if n_pairs == 0 {
        return Ok(0.0);
    }
    let rate = pair_rate(config)?;
    if rate <= 0.0 {
        return Err(Error::Infeasible(format!(
            "pair rate is zero; {n_pairs} pairs will never accumulate"
        )));
    }
    Ok(n_pairs as f64 / rate)
}
