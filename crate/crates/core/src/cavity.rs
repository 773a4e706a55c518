//! Cavity-enhanced emission probability and the optimal-finesse analysis.
//!
//! The emission probability into the cavity mode after excitation is
//!
//! ```text
//! p_cav = 4γΩ² / ((γ + Γ)(γΓ + 4Ω²))
//! ```
//!
//! with γ the cavity decay rate, Γ the non-cavity loss rate and Ω the
//! transition-cavity coupling. All rates are 1/s, all quantities SI.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, PLANCK, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};

/// Rates of the Ca⁺ Λ system feeding the analyzer photons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IonConstants {
    /// Non-cavity loss rate Γ (dominated by the decay back to the ground
    /// state), 1/s.
    pub loss_rate: f64,
    /// Free-space decay rate of the cavity-coupled transition, 1/s.
    pub transition_rate: f64,
    /// Wavelength of the cavity-coupled transition, m.
    pub wavelength: f64,
}

impl Default for IonConstants {
    fn default() -> Self {
        Self {
            loss_rate: 1.47e8,
            transition_rate: 0.5e7,
            wavelength: 854e-9,
        }
    }
}

impl IonConstants {
    pub fn validate(&self) -> Result<()> {
        if self.loss_rate <= 0.0 || self.transition_rate <= 0.0 || self.wavelength <= 0.0 {
            return Err(Error::InvalidParameter(
                "ion constants must be positive".into(),
            ));
        }
        if self.loss_rate <= self.transition_rate {
            return Err(Error::InvalidParameter(
                "the cavity-coupled transition must be the weak branch (Γ > A)".into(),
            ));
        }
        Ok(())
    }
}

/// Cavity length, finesse and mode volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub length: f64,
    pub finesse: f64,
    /// Mode volume; `None` selects the confocal minimum L²λ/4.
    pub mode_volume: Option<f64>,
}

impl CavityGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.length <= 0.0 || self.finesse <= 1.0 {
            return Err(Error::InvalidParameter(
                "cavity length must be positive and finesse > 1".into(),
            ));
        }
        if matches!(self.mode_volume, Some(v) if v <= 0.0) {
            return Err(Error::InvalidParameter(
                "mode volume must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Smallest mode volume of a confocal cavity, L²λ/4.
pub fn confocal_mode_volume(length: f64, wavelength: f64) -> f64 {
    length * length * wavelength / 4.0
}

/// Dipole matrix element recovered from the free-space decay rate by
/// inverting A = ω³D²/(3πε₀ħc³) with ω = 2πc/λ. Returns C·m.
pub fn dipole_from_decay(transition_rate: f64, wavelength: f64) -> Result<f64> {
    if transition_rate <= 0.0 || wavelength <= 0.0 {
        return Err(Error::InvalidParameter(
            "decay rate and wavelength must be positive".into(),
        ));
    }
    let omega = std::f64::consts::TAU * SPEED_OF_LIGHT / wavelength;
    let d_sq = 3.0
        * std::f64::consts::PI
        * VACUUM_PERMITTIVITY
        * HBAR
        * SPEED_OF_LIGHT.powi(3)
        * transition_rate
        / omega.powi(3);
    Ok(d_sq.sqrt())
}

/// Transition-cavity coupling Ω = (D/ħ)√(hc/(2ε₀λV)), rad/s. With the
/// confocal volume V = L²λ/4 this scales as 1/L.
pub fn coupling_constant(dipole: f64, wavelength: f64, mode_volume: f64) -> Result<f64> {
    if dipole <= 0.0 || wavelength <= 0.0 || mode_volume <= 0.0 {
        return Err(Error::InvalidParameter(
            "coupling inputs must be positive".into(),
        ));
    }
    Ok(dipole / HBAR
        * (PLANCK * SPEED_OF_LIGHT / (2.0 * VACUUM_PERMITTIVITY * wavelength * mode_volume)).sqrt())
}

/// Probability that the excited ion emits into the cavity mode.
pub fn p_cav(gamma: f64, loss_rate: f64, coupling: f64) -> Result<f64> {
    if gamma <= 0.0 || loss_rate <= 0.0 || coupling <= 0.0 {
        return Err(Error::InvalidParameter("rates must be positive".into()));
    }
    let num = 4.0 * gamma * coupling * coupling;
    let den = (gamma + loss_rate) * (gamma * loss_rate + 4.0 * coupling * coupling);
    Ok(num / den)
}

/// The cavity decay rate maximizing `p_cav` at fixed coupling: γ = 2Ω.
pub fn optimal_gamma(coupling: f64) -> f64 {
    2.0 * coupling
}

/// `p_cav` at the optimum γ = 2Ω in closed form: (2Ω/(2Ω+Γ))².
pub fn p_cav_at_optimum(loss_rate: f64, coupling: f64) -> f64 {
    let x = 2.0 * coupling / (2.0 * coupling + loss_rate);
    x * x
}

/// Relation between the cavity decay rate and the finesse, F = k·c/(γL).
///
/// The standard linewidth prefactor is π: γ = πc/FL follows from the free
/// spectral range c/2L divided by F, taken as an angular rate. It is the
/// default and reproduces the optimal finesse of 19000; the 4π variant
/// appears in some treatments and stays selectable for cross-checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinesseConvention {
    #[default]
    PrefactorPi,
    Prefactor4Pi,
}

impl FinesseConvention {
    pub fn prefactor(self) -> f64 {
        match self {
            FinesseConvention::PrefactorPi => std::f64::consts::PI,
            FinesseConvention::Prefactor4Pi => 4.0 * std::f64::consts::PI,
        }
    }
}

pub fn finesse_from_gamma(gamma: f64, length: f64, convention: FinesseConvention) -> Result<f64> {
    if gamma <= 0.0 || length <= 0.0 {
        return Err(Error::InvalidParameter(
            "gamma and length must be positive".into(),
        ));
    }
    Ok(convention.prefactor() * SPEED_OF_LIGHT / (gamma * length))
}

/// Duration of the emitted photon wavepacket, 1/γ.
pub fn wavepacket_duration(gamma: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    Ok(1.0 / gamma)
}

/// All derived quantities for one cavity length at the γ = 2Ω optimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityScanRow {
    pub length_m: f64,
    pub coupling: f64,
    pub gamma_opt: f64,
    pub finesse_pi: f64,
    pub finesse_4pi: f64,
    pub p_cav: f64,
    pub wavepacket_s: f64,
}

/// Evaluates the optimal-cavity figures for one length using only the ion
/// constants and the confocal mode volume.
pub fn scan_length(ion: &IonConstants, length: f64) -> Result<CavityScanRow> {
    ion.validate()?;
    if length <= 0.0 {
        return Err(Error::InvalidParameter("length must be positive".into()));
    }
    let dipole = dipole_from_decay(ion.transition_rate, ion.wavelength)?;
    let volume = confocal_mode_volume(length, ion.wavelength);
    let coupling = coupling_constant(dipole, ion.wavelength, volume)?;
    let gamma = optimal_gamma(coupling);
    Ok(CavityScanRow {
        length_m: length,
        coupling,
        gamma_opt: gamma,
        finesse_pi: finesse_from_gamma(gamma, length, FinesseConvention::PrefactorPi)?,
        finesse_4pi: finesse_from_gamma(gamma, length, FinesseConvention::Prefactor4Pi)?,
        p_cav: p_cav(gamma, ion.loss_rate, coupling)?,
        wavepacket_s: wavepacket_duration(gamma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const ION: IonConstants = IonConstants {
        loss_rate: 1.47e8,
        transition_rate: 0.5e7,
        wavelength: 854e-9,
    };

    #[test]
    fn dipole_matches_hand_computation() {
        // Independent evaluation of √(3πε₀ħc³A/ω³) gives 1.0511e-29 C·m.
        let d = dipole_from_decay(ION.transition_rate, ION.wavelength).unwrap();
        assert_relative_eq!(d, 1.0511e-29, max_relative = 1e-4);
    }

    #[test]
    fn dipole_scaling_laws() {
        let d = dipole_from_decay(5e6, 854e-9).unwrap();
        let d4 = dipole_from_decay(4.0 * 5e6, 854e-9).unwrap();
        assert_relative_eq!(d4, 2.0 * d, max_relative = 1e-12);
        let d_2l = dipole_from_decay(5e6, 2.0 * 854e-9).unwrap();
        assert_relative_eq!(d_2l, d * 2.0f64.powf(1.5), max_relative = 1e-12);
    }

    #[test]
    fn coupling_at_one_millimeter() {
        let row = scan_length(&ION, 1e-3).unwrap();
        assert_relative_eq!(row.coupling, 2.4723e7, max_relative = 1e-4);
        // Consistency with the quoted p_cav = 0.06.
        assert_relative_eq!(row.p_cav, 0.06, max_relative = 0.15);
    }

    #[test]
    fn coupling_at_three_millimeters() {
        let row = scan_length(&ION, 3e-3).unwrap();
        assert_relative_eq!(row.coupling, 8.241e6, max_relative = 1e-3);
        assert_relative_eq!(row.p_cav, 0.01, max_relative = 0.15);
    }

    #[test]
    fn coupling_volume_scaling() {
        let d = dipole_from_decay(ION.transition_rate, ION.wavelength).unwrap();
        let v = confocal_mode_volume(1e-3, ION.wavelength);
        let o1 = coupling_constant(d, ION.wavelength, v).unwrap();
        let o2 = coupling_constant(d, ION.wavelength, 4.0 * v).unwrap();
        assert_relative_eq!(o2, o1 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn published_p_cav_values_from_first_principles() {
        for (length, expected) in [(3e-3, 0.01), (1e-3, 0.06), (1e-2, 0.001)] {
            let row = scan_length(&ION, length).unwrap();
            assert!(
                (row.p_cav - expected).abs() / expected < 0.15,
                "L = {length}: p_cav = {} vs {expected}",
                row.p_cav
            );
        }
    }

    #[test]
    fn optimal_finesse_is_length_independent() {
        let mut last = None;
        for length in [1e-3, 3e-3, 1e-2, 2e-2] {
            let row = scan_length(&ION, length).unwrap();
            assert_relative_eq!(row.finesse_pi, 19000.0, max_relative = 0.10);
            assert_relative_eq!(row.finesse_4pi, 4.0 * row.finesse_pi, max_relative = 1e-12);
            if let Some(prev) = last {
                assert_relative_eq!(row.finesse_pi, prev, max_relative = 1e-9);
            }
            last = Some(row.finesse_pi);
        }
    }

    #[test]
    fn finesse_inverse_in_gamma() {
        let f1 = finesse_from_gamma(1e7, 3e-3, FinesseConvention::PrefactorPi).unwrap();
        let f2 = finesse_from_gamma(2e7, 3e-3, FinesseConvention::PrefactorPi).unwrap();
        assert_relative_eq!(f1, 2.0 * f2, max_relative = 1e-12);
    }

    #[test]
    fn optimal_gamma_brute_force_scan() {
        // Argmax over 10⁴ log-spaced γ lands on 2Ω within grid resolution.
        let row = scan_length(&ION, 3e-3).unwrap();
        let omega = row.coupling;
        let (mut best_gamma, mut best_p) = (0.0, 0.0);
        let n = 10_000;
        for i in 0..n {
            let gamma = 10f64.powf(4.0 + 8.0 * i as f64 / (n - 1) as f64);
            let p = p_cav(gamma, ION.loss_rate, omega).unwrap();
            if p > best_p {
                best_p = p;
                best_gamma = gamma;
            }
        }
        let grid_step = 10f64.powf(8.0 / (n - 1) as f64);
        assert!(
            (best_gamma / optimal_gamma(omega)).ln().abs() <= grid_step.ln() * 1.5,
            "scan argmax {best_gamma} vs 2Ω = {}",
            optimal_gamma(omega)
        );
        assert!(best_p <= p_cav(optimal_gamma(omega), ION.loss_rate, omega).unwrap() + 1e-15);
    }

    #[test]
    fn optimal_gamma_golden_section() {
        let omega = 8.2e6;
        let (mut lo, mut hi): (f64, f64) = (1e4, 1e12);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        // Golden-section on log γ.
        let (mut llo, mut lhi) = (lo.ln(), hi.ln());
        for _ in 0..200 {
            let m1 = lhi - phi * (lhi - llo);
            let m2 = llo + phi * (lhi - llo);
            let p1 = p_cav(m1.exp(), ION.loss_rate, omega).unwrap();
            let p2 = p_cav(m2.exp(), ION.loss_rate, omega).unwrap();
            if p1 < p2 {
                llo = m1;
            } else {
                lhi = m2;
            }
        }
        lo = llo.exp();
        hi = lhi.exp();
        let found = (lo * hi).sqrt();
        assert!(
            ((found - optimal_gamma(omega)) / optimal_gamma(omega)).abs() < 1e-3,
            "golden section found {found}"
        );
        assert_abs_diff_eq!(optimal_gamma(8.2e6), 1.64e7, epsilon = 1e4);
    }

    #[test]
    fn closed_form_maximum_matches() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..1000 {
            let omega = 10f64.powf(rng.gen_range(4.0..9.0));
            let gamma_big = 10f64.powf(rng.gen_range(6.0..9.0));
            let p = p_cav(optimal_gamma(omega), gamma_big, omega).unwrap();
            assert!((p - p_cav_at_optimum(gamma_big, omega)).abs() < 1e-12);
        }
    }

    #[test]
    fn p_cav_bounded_and_vanishing_at_extremes() {
        let omega = 8.2e6;
        for i in 0..=120 {
            let gamma = 10f64.powf(i as f64 / 10.0);
            let p = p_cav(gamma, ION.loss_rate, omega).unwrap();
            assert!(p > 0.0 && p < 1.0, "gamma = {gamma}: p = {p}");
        }
        assert!(p_cav(1e0, ION.loss_rate, omega).unwrap() < 1e-6);
        assert!(p_cav(1e16, ION.loss_rate, omega).unwrap() < 1e-6);
    }

    #[test]
    fn doubling_length_halves_coupling() {
        let r1 = scan_length(&ION, 2e-3).unwrap();
        let r2 = scan_length(&ION, 4e-3).unwrap();
        assert_relative_eq!(r2.coupling, r1.coupling / 2.0, max_relative = 1e-12);
        assert_relative_eq!(
            r2.p_cav,
            p_cav_at_optimum(ION.loss_rate, r1.coupling / 2.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn wavepacket_duration_examples() {
        // γ = 9.9e6/s is the printed cavity rate; 1/γ ≈ 101 ns.
        assert_relative_eq!(
            wavepacket_duration(9.9e6).unwrap(),
            101e-9,
            max_relative = 1e-2
        );
        assert_abs_diff_eq!(wavepacket_duration(1e9).unwrap(), 1e-9, epsilon = 1e-18);
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let gamma = 10f64.powf(rng.gen_range(3.0..10.0));
            assert_relative_eq!(
                wavepacket_duration(gamma).unwrap() * gamma,
                1.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(p_cav(0.0, 1.0, 1.0).is_err());
        assert!(dipole_from_decay(-1.0, 854e-9).is_err());
        assert!(IonConstants {
            loss_rate: 1e6,
            transition_rate: 1e7,
            wavelength: 854e-9,
        }
        .validate()
        .is_err());
    }
}
