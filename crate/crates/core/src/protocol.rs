//! End-to-end simulation of one entanglement-generation attempt: photon-pair
//! emission, fiber channels with phases, loss and wavepacket mismatch, the
//! Bell analyzer, and the heralded ion states. Also the single-photon
//! reference scheme used to contrast phase sensitivity.
//!
//! Everything is exact enumeration; Monte Carlo sampling lives in the Bell
//! test layer.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::BellState;
use crate::density::{Basis, DensityMatrix};
use crate::error::{Error, Result};
use crate::fock::{
    FockState, IonLevel, IonPair, JointState, ModeLabel, ModeRegister, Polarization, Site,
};
use crate::optics::{
    apply_loss, apply_loss_on_site, bell_analyzer, measure, DetectorBank, Ensemble, HeraldClass,
    MeasurementOutcome,
};

/// Default photon wavenumber 2π/λ for the 854 nm transition, rad/m.
pub const DEFAULT_WAVENUMBER_RAD_PER_M: f64 = std::f64::consts::TAU / 854e-9;

/// Temporal bins are limited to {0, 1, 2}: the shared bin plus one
/// side-unique bin per emitter. Any nonzero offset is fully distinguishable,
/// so more bins add nothing.
pub const MAX_TEMPORAL_BIN: u8 = 2;

/// Emission branch amplitudes of the Λ system.
///
/// `amplitude_asymmetry` is the s₁:s₂ amplitude ratio ε. With compensation
/// enabled the stronger polarization is attenuated back to balance, at the
/// cost of attempt-level loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmissionModel {
    pub amplitude_asymmetry: f64,
    pub compensate: bool,
}

impl Default for EmissionModel {
    fn default() -> Self {
        Self {
            amplitude_asymmetry: 1.0,
            compensate: true,
        }
    }
}

impl EmissionModel {
    pub fn validate(&self) -> Result<()> {
        if !self.amplitude_asymmetry.is_finite() || self.amplitude_asymmetry <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "amplitude asymmetry {} must be positive",
                self.amplitude_asymmetry
            )));
        }
        Ok(())
    }

    /// Normalized (s₁, s₂) branch amplitudes.
    pub fn branch_amplitudes(&self) -> (f64, f64) {
        let eps = self.amplitude_asymmetry;
        let norm = (1.0 + eps * eps).sqrt();
        (eps / norm, 1.0 / norm)
    }

    /// Survival probability of the compensating attenuator on the stronger
    /// polarization, per side.
    pub fn compensation_survival(&self) -> f64 {
        let eps = self.amplitude_asymmetry;
        if !self.compensate || eps == 1.0 {
            1.0
        } else if eps > 1.0 {
            1.0 / (eps * eps)
        } else {
            eps * eps
        }
    }

    /// Which polarization the compensator attenuates, if any.
    fn attenuated_polarization(&self) -> Option<Polarization> {
        let eps = self.amplitude_asymmetry;
        if !self.compensate || eps == 1.0 {
            None
        } else if eps > 1.0 {
            Some(Polarization::P1)
        } else {
            Some(Polarization::P2)
        }
    }
}

/// One fiber channel from an emitter to the analyzer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelModel {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    pub wavenumber_rad_per_m: f64,
    /// Optical path length entering the propagation phase; defaults to
    /// `length_km` in meters. Only the product k·L matters.
    pub path_length_m: Option<f64>,
    /// Arrival-time mismatch in whole bins; any nonzero value makes the
    /// photon fully distinguishable from a bin-0 partner.
    pub temporal_offset_bins: u8,
    /// Fractional wavepacket overlap μ ∈ [0, 1] with the nominal bin-0
    /// envelope. The photon is split coherently between bin 0 (amplitude √μ)
    /// and a side-unique bin (amplitude √(1−μ)), so that two photons sent
    /// through overlap-μ channels have wavepacket overlap ⟨ψ_A|ψ_B⟩ = μ.
    /// `None` means perfect overlap.
    pub overlap: Option<f64>,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            length_km: 0.0,
            attenuation_db_per_km: 1.0,
            wavenumber_rad_per_m: DEFAULT_WAVENUMBER_RAD_PER_M,
            path_length_m: None,
            temporal_offset_bins: 0,
            overlap: None,
        }
    }
}

impl ChannelModel {
    pub fn lossless(length_km: f64) -> Self {
        Self {
            length_km,
            attenuation_db_per_km: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length_km < 0.0 || self.attenuation_db_per_km < 0.0 {
            return Err(Error::InvalidParameter(
                "channel length and attenuation must be non-negative".into(),
            ));
        }
        if self.temporal_offset_bins > MAX_TEMPORAL_BIN {
            return Err(Error::InvalidParameter(format!(
                "temporal offset {} exceeds the bin range 0..={MAX_TEMPORAL_BIN}",
                self.temporal_offset_bins
            )));
        }
        if let Some(mu) = self.overlap {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::InvalidParameter(format!(
                    "overlap {mu} outside [0,1]"
                )));
            }
            if self.temporal_offset_bins != 0 {
                return Err(Error::InvalidParameter(
                    "temporal offset and fractional overlap cannot be combined".into(),
                ));
            }
        }
        Ok(())
    }

    /// Per-photon survival probability 10^(−attenuation·length/10).
    pub fn survival(&self) -> f64 {
        10f64.powf(-self.attenuation_db_per_km * self.length_km / 10.0)
    }

    /// Propagation phase k·L modulo 2π.
    pub fn phase(&self) -> f64 {
        let length = self.path_length_m.unwrap_or(self.length_km * 1000.0);
        (self.wavenumber_rad_per_m * length).rem_euclid(std::f64::consts::TAU)
    }
}

/// Probability and conditional ion state for one herald class.
#[derive(Clone, Debug)]
pub struct HeraldedResult {
    pub class: HeraldClass,
    pub probability: f64,
    pub ion_state: DensityMatrix,
    pub fidelity_to_target: Option<f64>,
}

fn emission_register() -> ModeRegister {
    ModeRegister::new(vec![
        ModeLabel::bin0(Site::A, Polarization::P1),
        ModeLabel::bin0(Site::A, Polarization::P2),
        ModeLabel::bin0(Site::B, Polarization::P1),
        ModeLabel::bin0(Site::B, Polarization::P2),
    ])
    .expect("static register")
}

/// The post-emission state
/// (1/2)\[|s₁⟩_A a₁† + |s₂⟩_A a₂†\]\[|s₁⟩_B b₁† + |s₂⟩_B b₂†\]|0⟩,
/// with branch amplitudes reweighted by the asymmetry ε.
pub fn emit_pair(model: &EmissionModel) -> JointState {
    let register = emission_register();
    let (amp1, amp2) = model.branch_amplitudes();
    let amp = |level: IonLevel| match level {
        IonLevel::S1 => amp1,
        IonLevel::S2 => amp2,
    };
    let pol = |level: IonLevel| match level {
        IonLevel::S1 => Polarization::P1,
        IonLevel::S2 => Polarization::P2,
    };
    let mut terms = Vec::with_capacity(4);
    for la in IonLevel::BOTH {
        for lb in IonLevel::BOTH {
            let fock = FockState::with_photons(
                4,
                &[
                    (
                        register
                            .index_of(&ModeLabel::bin0(Site::A, pol(la)))
                            .unwrap(),
                        1,
                    ),
                    (
                        register
                            .index_of(&ModeLabel::bin0(Site::B, pol(lb)))
                            .unwrap(),
                        1,
                    ),
                ],
            );
            terms.push((
                IonPair::new(la, lb),
                fock,
                Complex64::new(amp(la) * amp(lb), 0.0),
            ));
        }
    }
    JointState::from_terms(register, &terms).expect("two photons")
}

/// Applies the asymmetry-compensating attenuator on the stronger
/// polarization of both sides. The no-loss branch carries the balanced
/// state; the lost weight ends up heralding nothing.
pub fn apply_compensation(state: &JointState, model: &EmissionModel) -> Result<Ensemble> {
    let Some(pol) = model.attenuated_polarization() else {
        return Ok(Ensemble::pure(state.clone()));
    };
    let survival = model.compensation_survival();
    let mut ens = apply_loss(state, &ModeLabel::bin0(Site::A, pol), survival)?;
    let mut members = Vec::new();
    for m in ens.members() {
        members.extend(
            apply_loss(m, &ModeLabel::bin0(Site::B, pol), survival)?
                .members()
                .to_vec(),
        );
    }
    ens = Ensemble::from_members(members);
    Ok(ens)
}

/// Amplitudes over temporal bins for one photon: (bin, amplitude) pairs.
type BinAmplitudes = Vec<(u8, f64)>;

fn bin_map(side: Site, channel: &ChannelModel) -> (Vec<u8>, BinAmplitudes) {
    // Returns (bins used by this side, amplitude map applied to bin-0 modes).
    let unique_bin = match side {
        Site::A => 1,
        _ => 2,
    };
    match channel.overlap {
        Some(mu) if mu < 1.0 => (
            vec![0, unique_bin],
            vec![(0, mu.sqrt()), (unique_bin, (1.0 - mu).sqrt())],
        ),
        _ => {
            let bin = channel.temporal_offset_bins;
            (vec![bin], vec![(bin, 1.0)])
        }
    }
}

/// Propagation through both fiber channels: per-photon phases e^{ikL},
/// temporal-bin restructuring for offsets or fractional overlap, and
/// attenuation loss. Input is the (pure) emission-register state.
pub fn apply_channels(
    state: &JointState,
    channel_a: &ChannelModel,
    channel_b: &ChannelModel,
) -> Result<Ensemble> {
    channel_a.validate()?;
    channel_b.validate()?;

    let state = state
        .apply_phase_on_site(Site::A, channel_a.phase())
        .apply_phase_on_site(Site::B, channel_b.phase());

    // Temporal restructuring: map each bin-0 mode onto its channel's bins.
    let (bins_a, map_a) = bin_map(Site::A, channel_a);
    let (bins_b, map_b) = bin_map(Site::B, channel_b);
    let mut labels = Vec::new();
    for pol in [Polarization::P1, Polarization::P2] {
        for &bin in &bins_a {
            labels.push(ModeLabel::new(Site::A, pol, bin));
        }
        for &bin in &bins_b {
            labels.push(ModeLabel::new(Site::B, pol, bin));
        }
    }
    labels.sort();
    labels.dedup();
    let out_register = ModeRegister::new(labels)?;
    let rows: crate::fock::ModeRows = state
        .register()
        .labels()
        .iter()
        .map(|l| {
            let map = if l.site == Site::A { &map_a } else { &map_b };
            map.iter()
                .map(|&(bin, amp)| {
                    let target = ModeLabel::new(l.site, l.pol, bin);
                    (
                        out_register.try_index(&target).expect("target mode"),
                        Complex64::new(amp, 0.0),
                    )
                })
                .collect()
        })
        .collect();
    let state = state.apply_mode_rows(out_register, &rows);

    let mut ens = apply_loss_on_site(&Ensemble::pure(state), Site::A, channel_a.survival())?;
    ens = apply_loss_on_site(&ens, Site::B, channel_b.survival())?;
    Ok(ens)
}

/// Groups raw measurement outcomes into the four herald classes. Classes
/// that cannot occur get probability zero and a maximally mixed placeholder
/// state.
pub fn group_by_class(outcomes: Vec<MeasurementOutcome>) -> Vec<HeraldedResult> {
    HeraldClass::ALL
        .iter()
        .map(|&class| {
            let mut probability = 0.0;
            let mut mat = nalgebra::DMatrix::zeros(4, 4);
            for outcome in outcomes
                .iter()
                .filter(|o| crate::optics::classify_pattern(&o.pattern) == class)
            {
                probability += outcome.probability;
                mat += outcome.ion_state.matrix().scale(outcome.probability);
            }
            let ion_state = if probability > 1e-30 {
                DensityMatrix::new(Basis::IonPair, mat.scale(1.0 / probability)).expect("4x4")
            } else {
                DensityMatrix::maximally_mixed(Basis::IonPair)
            };
            let fidelity_to_target = class
                .target()
                .map(|bell: BellState| ion_state.fidelity(&bell.ion_vector()).expect("4-dim"));
            HeraldedResult {
                class,
                probability,
                ion_state,
                fidelity_to_target,
            }
        })
        .collect()
}

/// One full entanglement-generation attempt by exact enumeration: for every
/// herald class, its probability and the conditional ion state.
pub fn run_attempt(
    emission: &EmissionModel,
    channel_a: &ChannelModel,
    channel_b: &ChannelModel,
    detectors: &DetectorBank,
) -> Result<Vec<HeraldedResult>> {
    emission.validate()?;
    let state = emit_pair(emission);
    let compensated = apply_compensation(&state, emission)?;
    let mut members = Vec::new();
    for m in compensated.members() {
        members.extend(apply_channels(m, channel_a, channel_b)?.members().to_vec());
    }
    let ens = bell_analyzer().apply(&Ensemble::from_members(members))?;
    let outcomes = measure(&ens, detectors)?;
    Ok(group_by_class(outcomes))
}

/// Convenience lookup in a `run_attempt` result.
pub fn result_for(results: &[HeraldedResult], class: HeraldClass) -> &HeraldedResult {
    results
        .iter()
        .find(|r| r.class == class)
        .expect("all classes present")
}

/// The ψ⁻-heralded ion state when the two photon wavepackets have overlap
/// μ = ⟨ψ_A|ψ_B⟩: ρ(μ) = μ²|ψ⁻⟩⟨ψ⁻| + (1−μ²)·(|s₁s₂⟩⟨s₁s₂|+|s₂s₁⟩⟨s₂s₁|)/2.
///
/// This closed form is cross-checked against the exact channel enumeration
/// in the tests.
pub fn overlap_herald_state(mu: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!(
            "overlap {mu} outside [0,1]"
        )));
    }
    let lambda = mu * mu;
    let psi = BellState::PsiMinus.density();
    let e1 = DensityMatrix::from_pure(
        Basis::IonPair,
        &[
            Complex64::ZERO,
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ZERO,
        ],
    )?;
    let e2 = DensityMatrix::from_pure(
        Basis::IonPair,
        &[
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::ONE,
            Complex64::ZERO,
        ],
    )?;
    DensityMatrix::mix(&[
        (lambda, &psi),
        ((1.0 - lambda) / 2.0, &e1),
        ((1.0 - lambda) / 2.0, &e2),
    ])
}

// ---------------------------------------------------------------------------
// Single-photon reference scheme
// ---------------------------------------------------------------------------

/// Distribution of the accumulated phase difference in the single-photon
/// scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseNoise {
    /// Gaussian jitter of the phase difference with standard deviation σ.
    Gaussian { sigma: f64 },
    /// Phase difference completely scrambled over [0, 2π).
    Uniform,
}

/// The state (e^{iφ_A}|g⟩_A|e⟩_B + e^{iφ_B}|e⟩_A|g⟩_B)/√2 produced by
/// single-photon-detection schemes, over the basis gg, ge, eg, ee.
pub fn single_photon_scheme_state(phi_a: f64, phi_b: f64) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = [
        Complex64::ZERO,
        Complex64::from_polar(s, phi_a),
        Complex64::from_polar(s, phi_b),
        Complex64::ZERO,
    ];
    DensityMatrix::from_pure(Basis::TwoLevelPair, &amps).expect("4-dim basis")
}

/// The single-photon-scheme state averaged over phase noise around a mean
/// phase difference Δφ₀ = φ_A − φ_B. The coherence shrinks by E\[e^{iδ}\].
pub fn single_photon_scheme_dephased(delta_phi: f64, noise: PhaseNoise) -> DensityMatrix {
    let damping = match noise {
        PhaseNoise::Gaussian { sigma } => (-sigma * sigma / 2.0).exp(),
        PhaseNoise::Uniform => 0.0,
    };
    let half = Complex64::new(0.5, 0.0);
    let coherence = Complex64::from_polar(0.5 * damping, delta_phi);
    let mut mat = nalgebra::DMatrix::zeros(4, 4);
    mat[(1, 1)] = half;
    mat[(2, 2)] = half;
    mat[(1, 2)] = coherence;
    mat[(2, 1)] = coherence.conj();
    DensityMatrix::new(Basis::TwoLevelPair, mat).expect("4x4")
}

/// The maximally entangled target (|ge⟩ + |eg⟩)/√2 of the single-photon
/// scheme.
pub fn symmetric_two_level_target() -> [Complex64; 4] {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [Complex64::ZERO, s, s, Complex64::ZERO]
}

/// One grid point of the phase-insensitivity comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReportRow {
    pub phi_a: f64,
    pub phi_b: f64,
    pub psi_minus_probability: f64,
    pub psi_minus_fidelity: f64,
    pub psi_plus_probability: f64,
    pub psi_plus_fidelity: f64,
    pub single_photon_fidelity: f64,
}

/// Heralded fidelity of the two-photon scheme (constant in the phases)
/// against the single-photon scheme fidelity ((1+cos Δφ)/2) over a phase
/// grid. Rows are ordered by input index.
pub fn phase_insensitivity_report(
    phis_a: &[f64],
    phis_b: &[f64],
    detectors: &DetectorBank,
) -> Result<Vec<PhaseReportRow>> {
    let grid: Vec<(f64, f64)> = phis_a
        .iter()
        .flat_map(|&pa| phis_b.iter().map(move |&pb| (pa, pb)))
        .collect();
    grid.par_iter()
        .map(|&(phi_a, phi_b)| {
            let channel = |phase: f64| ChannelModel {
                attenuation_db_per_km: 0.0,
                wavenumber_rad_per_m: 1.0,
                path_length_m: Some(phase),
                ..ChannelModel::default()
            };
            let results = run_attempt(
                &EmissionModel::default(),
                &channel(phi_a),
                &channel(phi_b),
                detectors,
            )?;
            let minus = result_for(&results, HeraldClass::PsiMinus);
            let plus = result_for(&results, HeraldClass::PsiPlus);
            let single =
                single_photon_scheme_state(phi_a, phi_b).fidelity(&symmetric_two_level_target())?;
            Ok(PhaseReportRow {
                phi_a,
                phi_b,
                psi_minus_probability: minus.probability,
                psi_minus_fidelity: minus.fidelity_to_target.unwrap_or(0.0),
                psi_plus_probability: plus.probability,
                psi_plus_fidelity: plus.fidelity_to_target.unwrap_or(0.0),
                single_photon_fidelity: single,
            })
        })
        .collect()
}

/// Evenly spaced grid over [0, 2π) with `n` points.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| k as f64 * std::f64::consts::TAU / n as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Two-photon interference at a bare 50/50 splitter
// ---------------------------------------------------------------------------

/// Output statistics of one photon per input port at a symmetric 50/50 beam
/// splitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomOutcome {
    /// One photon in each output port.
    pub coincidence_probability: f64,
    /// Both photons in the first output.
    pub bunched_first: f64,
    /// Both photons in the second output.
    pub bunched_second: f64,
}

/// Sends one photon into each port of a symmetric 50/50 beam splitter, with
/// the mutual wavepacket mismatch given either as whole temporal bins or as
/// a fractional overlap. Indistinguishable photons bunch completely; fully
/// distinguishable ones coincide with probability 1/2.
pub fn hom_experiment(offset_bins: u8, overlap: Option<f64>) -> Result<HomOutcome> {
    if offset_bins > MAX_TEMPORAL_BIN {
        return Err(Error::InvalidParameter(format!(
            "temporal offset {offset_bins} exceeds the bin range 0..={MAX_TEMPORAL_BIN}"
        )));
    }
    if let Some(mu) = overlap {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "overlap {mu} outside [0,1]"
            )));
        }
        if offset_bins != 0 {
            return Err(Error::InvalidParameter(
                "temporal offset and fractional overlap cannot be combined".into(),
            ));
        }
    }

    // Input amplitudes over temporal bins for each photon.
    let (bins_a, bins_b): (BinAmplitudes, BinAmplitudes) = match overlap {
        Some(mu) if mu < 1.0 => (
            vec![(0, mu.sqrt()), (1, (1.0 - mu).sqrt())],
            vec![(0, mu.sqrt()), (2, (1.0 - mu).sqrt())],
        ),
        _ => (vec![(0, 1.0)], vec![(offset_bins, 1.0)]),
    };
    // Both sides need matching bins after the splitter; take the union.
    let all_bins: Vec<u8> = {
        let mut v: Vec<u8> = bins_a.iter().chain(&bins_b).map(|&(bin, _)| bin).collect();
        v.sort();
        v.dedup();
        v
    };
    let mut full = Vec::new();
    for site in [Site::A, Site::B] {
        for &bin in &all_bins {
            full.push(ModeLabel::new(site, Polarization::P1, bin));
        }
    }
    full.sort();
    let register = ModeRegister::new(full)?;

    let amplitude_product: Vec<(FockState, Complex64)> = bins_a
        .iter()
        .flat_map(|&(bin_a, amp_a)| {
            let register = &register;
            bins_b.iter().map(move |&(bin_b, amp_b)| {
                let ia = register
                    .index_of(&ModeLabel::new(Site::A, Polarization::P1, bin_a))
                    .unwrap();
                let ib = register
                    .index_of(&ModeLabel::new(Site::B, Polarization::P1, bin_b))
                    .unwrap();
                (
                    FockState::with_photons(register.len(), &[(ia, 1), (ib, 1)]),
                    Complex64::new(amp_a * amp_b, 0.0),
                )
            })
        })
        .collect();
    let state = crate::fock::PhotonicState::from_terms(register.clone(), &amplitude_product)?;

    // Symmetric 50/50 splitter per temporal bin.
    let bs = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ],
    );
    let mut out = state;
    for &bin in &all_bins {
        out = out.apply_mode_unitary(
            &[
                ModeLabel::new(Site::A, Polarization::P1, bin),
                ModeLabel::new(Site::B, Polarization::P1, bin),
            ],
            &bs,
        )?;
    }

    let mut coincidence = 0.0;
    let mut bunched_first = 0.0;
    let mut bunched_second = 0.0;
    for (fock, amp) in out.terms() {
        let mut at_a = 0u8;
        let mut at_b = 0u8;
        for (label, &n) in register.labels().iter().zip(fock.occupations()) {
            match label.site {
                Site::A => at_a += n,
                _ => at_b += n,
            }
        }
        let p = amp.norm_sqr();
        match (at_a, at_b) {
            (1, 1) => coincidence += p,
            (2, 0) => bunched_first += p,
            (0, 2) => bunched_second += p,
            _ => {}
        }
    }
    Ok(HomOutcome {
        coincidence_probability: coincidence,
        bunched_first,
        bunched_second,
    })
}
