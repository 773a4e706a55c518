//! Linear-optical elements, the partial Bell-state analyzer, photon loss,
//! detector models and click-pattern classification.
//!
//! # Analyzer wiring
//!
//! The analyzer is a symmetric 50/50 beam splitter taking the two input
//! sites A, B to C, D (convention U = [[1, 1], [1, −1]]/√2, applied per
//! polarization and temporal bin), followed by one polarizing beam splitter
//! per output arm. Polarization 1 transmits, polarization 2 reflects:
//!
//! ```text
//!   C --PBS--> transmit: D1 (pol 1)    reflect: D2 (pol 2)
//!   D --PBS--> transmit: D4 (pol 1)    reflect: D3 (pol 2)
//! ```
//!
//! With this wiring a ψ⁻ photon pair produces coincidences on {D1, D3} or
//! {D2, D4}, ψ⁺ on {D1, D2} or {D3, D4}, and φ± always sends both photons to
//! a single detector. The cross pairs {D1, D4} and {D2, D3} have amplitude
//! exactly zero for any two-photon polarization input, which pins the
//! detector naming; see `cross_pair_coincidences_vanish` below.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{Basis, DensityMatrix};
use crate::error::{Error, Result};
use crate::fock::{FockState, JointState, ModeLabel, ModeRegister, Polarization, Site};

/// A single-photon detector. Threshold (non-number-resolving) detectors are
/// the default and report only click/no-click; number-resolving detectors
/// report counts saturating at 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub efficiency: f64,
    pub dark_count_prob: f64,
    pub number_resolving: bool,
}

impl Default for Detector {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            dark_count_prob: 0.0,
            number_resolving: false,
        }
    }
}

impl Detector {
    /// Unit-efficiency number-resolving detector with no dark counts.
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_count_prob: 0.0,
            number_resolving: true,
        }
    }

    pub fn with_efficiency(efficiency: f64) -> Self {
        Self {
            efficiency,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::InvalidParameter(format!(
                "detector efficiency {} outside [0,1]",
                self.efficiency
            )));
        }
        if !(0.0..1.0).contains(&self.dark_count_prob) {
            return Err(Error::InvalidParameter(format!(
                "dark count probability {} outside [0,1)",
                self.dark_count_prob
            )));
        }
        Ok(())
    }
}

/// Detectors keyed by the site they terminate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorBank {
    detectors: BTreeMap<Site, Detector>,
}

impl DetectorBank {
    pub fn new(detectors: BTreeMap<Site, Detector>) -> Result<Self> {
        for d in detectors.values() {
            d.validate()?;
        }
        Ok(Self { detectors })
    }

    /// The same detector on all four analyzer outputs.
    pub fn analyzer(detector: Detector) -> Self {
        let detectors = Site::DETECTORS.iter().map(|&s| (s, detector)).collect();
        Self { detectors }
    }

    pub fn get(&self, site: Site) -> Option<&Detector> {
        self.detectors.get(&site)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.detectors.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, &Detector)> {
        self.detectors.iter().map(|(s, d)| (*s, d))
    }
}

/// Observed counts per detector, zero entries omitted. For threshold
/// detectors counts are 0/1; number-resolving counts saturate at 2.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ClickPattern {
    counts: BTreeMap<Site, u8>,
}

impl ClickPattern {
    pub fn new(counts: impl IntoIterator<Item = (Site, u8)>) -> Self {
        Self {
            counts: counts.into_iter().filter(|&(_, n)| n > 0).collect(),
        }
    }

    pub fn count(&self, site: Site) -> u8 {
        self.counts.get(&site).copied().unwrap_or(0)
    }

    pub fn clicked_sites(&self) -> Vec<Site> {
        self.counts.keys().copied().collect()
    }

    pub fn total_clicks(&self) -> u32 {
        self.counts.values().map(|&n| n as u32).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return f.write_str("-");
        }
        for (i, (site, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{site}x{n}")?;
        }
        Ok(())
    }
}

impl Serialize for ClickPattern {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// What a click pattern heralds about the remote ion pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeraldClass {
    PsiMinus,
    PsiPlus,
    PhiOrUnusable,
    NoHerald,
}

impl HeraldClass {
    pub const ALL: [HeraldClass; 4] = [
        HeraldClass::PsiMinus,
        HeraldClass::PsiPlus,
        HeraldClass::PhiOrUnusable,
        HeraldClass::NoHerald,
    ];

    /// The Bell state a usable herald projects the ions onto.
    pub fn target(self) -> Option<crate::bell::BellState> {
        match self {
            HeraldClass::PsiMinus => Some(crate::bell::BellState::PsiMinus),
            HeraldClass::PsiPlus => Some(crate::bell::BellState::PsiPlus),
            _ => None,
        }
    }
}

impl fmt::Display for HeraldClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HeraldClass::PsiMinus => "psi_minus",
            HeraldClass::PsiPlus => "psi_plus",
            HeraldClass::PhiOrUnusable => "phi_or_unusable",
            HeraldClass::NoHerald => "no_herald",
        };
        f.write_str(s)
    }
}

/// Total classification of click patterns:
///
/// | pattern                                   | class         |
/// |-------------------------------------------|---------------|
/// | single clicks on exactly {D1,D3} or {D2,D4} | ψ⁻           |
/// | single clicks on exactly {D1,D2} or {D3,D4} | ψ⁺           |
/// | single clicks on {D1,D4} or {D2,D3}        | unusable (zero amplitude under the fixed wiring) |
/// | one detector with a double click           | unusable (φ±-type) |
/// | three or more clicked detectors            | unusable (dark counts) |
/// | two detectors where one shows a double     | unusable      |
/// | one single click, or nothing               | no herald     |
pub fn classify_pattern(pattern: &ClickPattern) -> HeraldClass {
    let sites = pattern.clicked_sites();
    match sites.len() {
        0 => HeraldClass::NoHerald,
        1 => {
            if pattern.count(sites[0]) >= 2 {
                HeraldClass::PhiOrUnusable
            } else {
                HeraldClass::NoHerald
            }
        }
        2 => {
            if pattern.count(sites[0]) != 1 || pattern.count(sites[1]) != 1 {
                return HeraldClass::PhiOrUnusable;
            }
            match (sites[0], sites[1]) {
                (Site::D1, Site::D3) | (Site::D2, Site::D4) => HeraldClass::PsiMinus,
                (Site::D1, Site::D2) | (Site::D3, Site::D4) => HeraldClass::PsiPlus,
                _ => HeraldClass::PhiOrUnusable,
            }
        }
        _ => HeraldClass::PhiOrUnusable,
    }
}

/// A linear-optical element acting on whole sites (every polarization and
/// temporal bin at the site transforms identically, except for the
/// polarization-selective elements).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpticalElement {
    /// Two-port beam splitter with transmissivity `t`:
    /// U = [[√t, √(1−t)e^{iφ}], [√(1−t)e^{−iφ}, −√t]].
    /// At t = 1/2, φ = 0 this is the symmetric convention fixed for the
    /// analyzer.
    BeamSplitter {
        inputs: (Site, Site),
        outputs: (Site, Site),
        transmissivity: f64,
        phase: f64,
    },
    /// Polarizing beam splitter: polarization 1 transmits, 2 reflects.
    PolarizingBeamSplitter {
        input: Site,
        transmit: Site,
        reflect: Site,
    },
    /// Per-photon phase e^{iφ} on every mode of the site.
    PhaseShifter { site: Site, phase: f64 },
    /// Rotation in the polarization plane:
    /// P1 → cosθ·P1 + sinθ·P2, P2 → −sinθ·P1 + cosθ·P2.
    PolarizationRotator { site: Site, angle: f64 },
    /// Photon loss on every mode of the site, each photon surviving with
    /// probability `survival`. Realized as beam-splitter coupling to an
    /// environment mode that is then traced out.
    Loss { site: Site, survival: f64 },
}

impl OpticalElement {
    pub fn validate(&self) -> Result<()> {
        match self {
            OpticalElement::BeamSplitter {
                inputs,
                outputs,
                transmissivity,
                ..
            } => {
                if inputs.0 == inputs.1 || outputs.0 == outputs.1 {
                    return Err(Error::InvalidParameter(
                        "beam splitter ports must be distinct".into(),
                    ));
                }
                if !(0.0..=1.0).contains(transmissivity) {
                    return Err(Error::InvalidParameter(format!(
                        "transmissivity {transmissivity} outside [0,1]"
                    )));
                }
                Ok(())
            }
            OpticalElement::PolarizingBeamSplitter {
                transmit, reflect, ..
            } => {
                if transmit == reflect {
                    return Err(Error::InvalidParameter(
                        "polarizing beam splitter ports must be distinct".into(),
                    ));
                }
                Ok(())
            }
            OpticalElement::Loss { survival, .. } => {
                if !(0.0..=1.0).contains(survival) {
                    return Err(Error::InvalidParameter(format!(
                        "survival probability {survival} outside [0,1]"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// An ordered list of optical elements. Serializable so circuits can be
/// loaded from JSON documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalCircuit {
    pub elements: Vec<OpticalElement>,
}

impl OpticalCircuit {
    pub fn new(elements: Vec<OpticalElement>) -> Result<Self> {
        for e in &elements {
            e.validate()?;
        }
        Ok(Self { elements })
    }

    /// Applies the circuit to every ensemble member in order.
    pub fn apply(&self, ensemble: &Ensemble) -> Result<Ensemble> {
        let mut members = ensemble.members.clone();
        for element in &self.elements {
            element.validate()?;
            match element {
                OpticalElement::Loss { site, survival } => {
                    let mut next = Vec::new();
                    for state in &members {
                        let mut branch = vec![state.clone()];
                        for label in site_labels(state.register(), *site) {
                            let mut split = Vec::new();
                            for b in &branch {
                                split.extend(loss_on_mode(b, &label, *survival)?);
                            }
                            branch = split;
                        }
                        next.extend(branch);
                    }
                    members = next;
                }
                _ => {
                    members = members
                        .iter()
                        .map(|state| apply_unitary_element(state, element))
                        .collect::<Result<_>>()?;
                }
            }
        }
        Ok(Ensemble { members })
    }
}

/// The four-detector partial Bell-state analyzer with the wiring
/// documented at the top of this module.
pub fn bell_analyzer() -> OpticalCircuit {
    OpticalCircuit {
        elements: vec![
            OpticalElement::BeamSplitter {
                inputs: (Site::A, Site::B),
                outputs: (Site::C, Site::D),
                transmissivity: 0.5,
                phase: 0.0,
            },
            OpticalElement::PolarizingBeamSplitter {
                input: Site::C,
                transmit: Site::D1,
                reflect: Site::D2,
            },
            OpticalElement::PolarizingBeamSplitter {
                input: Site::D,
                transmit: Site::D4,
                reflect: Site::D3,
            },
        ],
    }
}

/// A mixture of pure joint states; member weights are their squared norms.
/// Measurement statistics are additive over members, so this represents any
/// density operator produced by loss without densifying.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<JointState>,
}

impl Ensemble {
    pub fn pure(state: JointState) -> Self {
        Self {
            members: vec![state],
        }
    }

    pub fn from_members(members: Vec<JointState>) -> Self {
        Self { members }
    }

    pub fn members(&self) -> &[JointState] {
        &self.members
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|m| m.norm_sqr()).sum()
    }

    /// Weight of the sector with exactly `n` photons present.
    pub fn photon_number_weight(&self, n: u32) -> f64 {
        self.members
            .iter()
            .flat_map(|m| m.terms())
            .filter(|(_, fock, _)| fock.total() == n)
            .map(|(_, _, amp)| amp.norm_sqr())
            .sum()
    }

    pub fn map<F>(&self, f: F) -> Result<Ensemble>
    where
        F: Fn(&JointState) -> Result<JointState>,
    {
        Ok(Ensemble {
            members: self.members.iter().map(f).collect::<Result<_>>()?,
        })
    }

    /// Reduced ion-pair density matrix of the whole mixture.
    pub fn ion_density_matrix(&self) -> DensityMatrix {
        let mut mat = nalgebra::DMatrix::zeros(4, 4);
        for member in &self.members {
            mat += member.partial_trace(crate::density::Keep::Ions).matrix();
        }
        DensityMatrix::new(Basis::IonPair, mat).expect("4x4")
    }
}

fn site_labels(register: &ModeRegister, site: Site) -> Vec<ModeLabel> {
    register
        .labels()
        .iter()
        .copied()
        .filter(|l| l.site == site)
        .collect()
}

fn sorted_register(labels: impl IntoIterator<Item = ModeLabel>) -> ModeRegister {
    let mut v: Vec<ModeLabel> = labels.into_iter().collect();
    v.sort();
    v.dedup();
    ModeRegister::new_unchecked(v)
}

/// Builds the output register and per-mode rows for a unitary element.
fn element_rows(
    register: &ModeRegister,
    element: &OpticalElement,
) -> Result<(ModeRegister, crate::fock::ModeRows)> {
    let mapped: Vec<Vec<(ModeLabel, Complex64)>> = match element {
        OpticalElement::BeamSplitter {
            inputs,
            outputs,
            transmissivity,
            phase,
        } => {
            let t = transmissivity.sqrt();
            let r = (1.0 - transmissivity).sqrt();
            let u = [
                [Complex64::new(t, 0.0), Complex64::from_polar(r, *phase)],
                [Complex64::from_polar(r, -*phase), Complex64::new(-t, 0.0)],
            ];
            register
                .labels()
                .iter()
                .map(|l| {
                    let port = if l.site == inputs.0 {
                        0
                    } else if l.site == inputs.1 {
                        1
                    } else {
                        return vec![(*l, Complex64::ONE)];
                    };
                    vec![
                        (ModeLabel::new(outputs.0, l.pol, l.bin), u[port][0]),
                        (ModeLabel::new(outputs.1, l.pol, l.bin), u[port][1]),
                    ]
                })
                .collect()
        }
        OpticalElement::PolarizingBeamSplitter {
            input,
            transmit,
            reflect,
        } => register
            .labels()
            .iter()
            .map(|l| {
                if l.site != *input {
                    return vec![(*l, Complex64::ONE)];
                }
                let out = match l.pol {
                    Polarization::P1 => *transmit,
                    Polarization::P2 => *reflect,
                };
                vec![(ModeLabel::new(out, l.pol, l.bin), Complex64::ONE)]
            })
            .collect(),
        OpticalElement::PhaseShifter { site, phase } => register
            .labels()
            .iter()
            .map(|l| {
                let factor = if l.site == *site {
                    Complex64::from_polar(1.0, *phase)
                } else {
                    Complex64::ONE
                };
                vec![(*l, factor)]
            })
            .collect(),
        OpticalElement::PolarizationRotator { site, angle } => {
            let (c, s) = (angle.cos(), angle.sin());
            register
                .labels()
                .iter()
                .map(|l| {
                    if l.site != *site {
                        return vec![(*l, Complex64::ONE)];
                    }
                    let other = ModeLabel::new(l.site, l.pol.flipped(), l.bin);
                    match l.pol {
                        Polarization::P1 => vec![
                            (*l, Complex64::new(c, 0.0)),
                            (other, Complex64::new(s, 0.0)),
                        ],
                        Polarization::P2 => vec![
                            (other, Complex64::new(-s, 0.0)),
                            (*l, Complex64::new(c, 0.0)),
                        ],
                    }
                })
                .collect()
        }
        OpticalElement::Loss { .. } => {
            return Err(Error::InvalidParameter(
                "loss has no unitary mode map".into(),
            ))
        }
    };

    let out_register = sorted_register(mapped.iter().flatten().map(|(l, _)| *l));
    let rows = mapped
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(l, a)| (out_register.try_index(&l).expect("mapped label"), a))
                .collect()
        })
        .collect();
    Ok((out_register, rows))
}

fn apply_unitary_element(state: &JointState, element: &OpticalElement) -> Result<JointState> {
    let (out_register, rows) = element_rows(state.register(), element)?;
    Ok(state.apply_mode_rows(out_register, &rows))
}

/// Couples `mode` to a fresh vacuum environment mode with a beam splitter of
/// transmissivity `survival`, then traces the environment out. The returned
/// branches are indexed by the number of lost photons; their squared norms
/// sum to the input weight.
fn loss_on_mode(state: &JointState, mode: &ModeLabel, survival: f64) -> Result<Vec<JointState>> {
    if !(0.0..=1.0).contains(&survival) {
        return Err(Error::InvalidParameter(format!(
            "survival probability {survival} outside [0,1]"
        )));
    }
    let register = state.register();
    let idx = register.index_of(mode)?;
    let n_modes = register.len();

    // Scratch register with the environment appended.
    let env = ModeLabel::new(Site::Env, mode.pol, u8::MAX);
    let mut labels = register.labels().to_vec();
    labels.push(env);
    let scratch = ModeRegister::new_unchecked(labels);

    let t = survival.sqrt();
    let r = (1.0 - survival).sqrt();
    let mut rows: crate::fock::ModeRows = (0..n_modes + 1)
        .map(|i| vec![(i, Complex64::ONE)])
        .collect();
    rows[idx] = vec![
        (idx, Complex64::new(t, 0.0)),
        (n_modes, Complex64::new(r, 0.0)),
    ];
    rows[n_modes] = vec![
        (idx, Complex64::new(-r, 0.0)),
        (n_modes, Complex64::new(t, 0.0)),
    ];

    // Embed, couple, then split by environment occupation.
    let embedded = state_with_extra_mode(state, scratch.clone());
    let coupled = embedded.apply_mode_rows(scratch, &rows);

    let mut branches: BTreeMap<u8, Vec<(crate::fock::IonPair, FockState, Complex64)>> =
        BTreeMap::new();
    for (ions, fock, amp) in coupled.terms() {
        let occ = fock.occupations();
        let lost = occ[n_modes];
        let kept = FockState::new(occ[..n_modes].to_vec());
        branches.entry(lost).or_default().push((ions, kept, *amp));
    }
    branches
        .into_values()
        .map(|terms| JointState::from_terms(register.clone(), &terms))
        .collect()
}

fn state_with_extra_mode(state: &JointState, scratch: ModeRegister) -> JointState {
    let terms: Vec<_> = state
        .terms()
        .map(|(ions, fock, amp)| {
            let mut occ = fock.occupations().to_vec();
            occ.push(0);
            (ions, FockState::new(occ), *amp)
        })
        .collect();
    JointState::from_terms(scratch, &terms).expect("embedding preserves caps")
}

/// Photon loss on a single mode, returning the resulting mixture.
pub fn apply_loss(state: &JointState, mode: &ModeLabel, survival: f64) -> Result<Ensemble> {
    Ok(Ensemble {
        members: loss_on_mode(state, mode, survival)?,
    })
}

/// Photon loss with the same survival on every mode of a site.
pub fn apply_loss_on_site(ens: &Ensemble, site: Site, survival: f64) -> Result<Ensemble> {
    let circuit = OpticalCircuit {
        elements: vec![OpticalElement::Loss { site, survival }],
    };
    circuit.apply(ens)
}

/// One row of the measurement distribution: a click pattern, its
/// probability, and the normalized ion state conditioned on it.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub pattern: ClickPattern,
    pub probability: f64,
    pub ion_state: DensityMatrix,
}

/// Exact projective photon-number measurement on every register mode,
/// dressed with detector efficiency (binomial thinning), dark counts
/// (independent per-window Bernoulli) and the threshold/number-resolving
/// readout map. Outcome probabilities sum to the ensemble weight.
pub fn measure(ensemble: &Ensemble, bank: &DetectorBank) -> Result<Vec<MeasurementOutcome>> {
    for (_, detector) in bank.iter() {
        detector.validate()?;
    }
    let bank_sites: Vec<Site> = bank.sites().collect();
    for member in ensemble.members() {
        for label in member.register().labels() {
            if !bank_sites.contains(&label.site) {
                return Err(Error::InvalidParameter(format!(
                    "terminal mode {label} has no detector attached"
                )));
            }
        }
    }

    let mut acc: BTreeMap<ClickPattern, (f64, DMatrix<Complex64>)> = BTreeMap::new();
    for member in ensemble.members() {
        for (fock, ion_vec) in member.group_by_fock() {
            let weight: f64 = ion_vec.iter().map(|a| a.norm_sqr()).sum();
            if weight < 1e-300 {
                continue;
            }
            let mut projector = DMatrix::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    projector[(i, j)] = ion_vec[i] * ion_vec[j].conj();
                }
            }
            let counts = photon_counts(member.register(), &fock);
            for (pattern, p_obs) in observed_patterns(&counts, bank) {
                if p_obs <= 0.0 {
                    continue;
                }
                let entry = acc
                    .entry(pattern)
                    .or_insert_with(|| (0.0, DMatrix::zeros(4, 4)));
                entry.0 += p_obs * weight;
                entry.1 += projector.scale(p_obs);
            }
        }
    }

    Ok(acc
        .into_iter()
        .filter(|(_, (p, _))| *p > 1e-30)
        .map(|(pattern, (probability, mat))| MeasurementOutcome {
            pattern,
            probability,
            ion_state: DensityMatrix::new(Basis::IonPair, mat.scale(1.0 / probability))
                .expect("4x4"),
        })
        .collect())
}

fn photon_counts(register: &ModeRegister, fock: &FockState) -> BTreeMap<Site, u8> {
    let mut counts = BTreeMap::new();
    for (label, &n) in register.labels().iter().zip(fock.occupations()) {
        if n > 0 {
            *counts.entry(label.site).or_insert(0) += n;
        }
    }
    counts
}

fn binomial_pmf(n: u8, k: u8, p: f64) -> f64 {
    let choose = match (n, k) {
        (_, 0) => 1.0,
        (n, k) if k == n => 1.0,
        (2, 1) => 2.0,
        _ => 0.0,
    };
    choose * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Distribution of observed click patterns given the true photon counts.
fn observed_patterns(counts: &BTreeMap<Site, u8>, bank: &DetectorBank) -> Vec<(ClickPattern, f64)> {
    let mut partial: Vec<(Vec<(Site, u8)>, f64)> = vec![(Vec::new(), 1.0)];
    for (site, detector) in bank.iter() {
        let n = counts.get(&site).copied().unwrap_or(0);
        // Observed count distribution for this detector.
        let mut dist: BTreeMap<u8, f64> = BTreeMap::new();
        for k in 0..=n {
            let p_k = binomial_pmf(n, k, detector.efficiency);
            for (dark, p_dark) in [
                (0u8, 1.0 - detector.dark_count_prob),
                (1u8, detector.dark_count_prob),
            ] {
                if p_dark == 0.0 {
                    continue;
                }
                let raw = k + dark;
                let observed = if detector.number_resolving {
                    raw.min(2)
                } else {
                    raw.min(1)
                };
                *dist.entry(observed).or_insert(0.0) += p_k * p_dark;
            }
        }
        let mut next = Vec::with_capacity(partial.len() * dist.len());
        for (prefix, p) in &partial {
            for (&obs, &p_obs) in &dist {
                let mut prefix = prefix.clone();
                if obs > 0 {
                    prefix.push((site, obs));
                }
                next.push((prefix, p * p_obs));
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|(entries, p)| (ClickPattern::new(entries), p))
        .collect()
}
