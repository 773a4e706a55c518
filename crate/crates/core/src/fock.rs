//! Exact bosonic Fock-space states over a small register of labeled optical
//! modes, optionally tensored with a pair of two-level ion qubits.
//!
//! States are sparse maps from occupation configurations to complex
//! amplitudes. All operations are pure: they take `&self` and return new
//! values, so states can be shared freely across threads.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the total photon number per register. The emission protocol
/// produces exactly two photons; dark counts live in the detector model, not
/// in the Fock space.
pub const MAX_PHOTONS: u32 = 2;

/// Hard cap on the number of modes per register.
pub const MAX_MODES: usize = 16;

/// Amplitudes below this magnitude are dropped so that exact-zero
/// interference terms do not accumulate.
pub const AMP_DROP_TOL: f64 = 1e-15;

/// Maximum allowed deviation from unitarity for mode transformations.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Spatial location of a mode: the two emitters `A`/`B`, the beam-splitter
/// outputs `C`/`D`, the four analyzer detectors, or the loss environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Site {
    A,
    B,
    C,
    D,
    D1,
    D2,
    D3,
    D4,
    Env,
}

impl Site {
    pub const DETECTORS: [Site; 4] = [Site::D1, Site::D2, Site::D3, Site::D4];

    pub fn is_detector(self) -> bool {
        Site::DETECTORS.contains(&self)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Site::A => "A",
            Site::B => "B",
            Site::C => "C",
            Site::D => "D",
            Site::D1 => "D1",
            Site::D2 => "D2",
            Site::D3 => "D3",
            Site::D4 => "D4",
            Site::Env => "ENV",
        };
        f.write_str(s)
    }
}

/// Photon polarization. `P1` and `P2` are the two orthogonal polarization
/// modes a₁/a₂ (b₁/b₂) into which the ion decay branches emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    P1,
    P2,
}

impl Polarization {
    pub fn flipped(self) -> Self {
        match self {
            Polarization::P1 => Polarization::P2,
            Polarization::P2 => Polarization::P1,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Polarization::P1 => 1,
            Polarization::P2 => 2,
        }
    }
}

/// A single optical mode: site, polarization and temporal bin.
///
/// Temporal bins model wavepacket distinguishability: photons in different
/// bins never interfere. Bin 0 is the nominal arrival time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub site: Site,
    pub pol: Polarization,
    pub bin: u8,
}

impl ModeLabel {
    pub fn new(site: Site, pol: Polarization, bin: u8) -> Self {
        Self { site, pol, bin }
    }

    /// Mode in the nominal temporal bin.
    pub fn bin0(site: Site, pol: Polarization) -> Self {
        Self::new(site, pol, 0)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}@{}", self.site, self.pol.index(), self.bin)
    }
}

/// An ordered collection of unique mode labels. The position of a label in
/// the register is the index of that mode in every [`FockState`] built over
/// the register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeRegister {
    labels: Vec<ModeLabel>,
}

impl ModeRegister {
    pub fn new(labels: Vec<ModeLabel>) -> Result<Self> {
        if labels.len() > MAX_MODES {
            return Err(Error::ModeCapExceeded {
                count: labels.len(),
                cap: MAX_MODES,
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateMode(l.to_string()));
            }
        }
        Ok(Self { labels })
    }

    /// Internal constructor that skips the mode cap, used for scratch
    /// registers that temporarily carry an extra environment mode.
    pub(crate) fn new_unchecked(labels: Vec<ModeLabel>) -> Self {
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn try_index(&self, label: &ModeLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn index_of(&self, label: &ModeLabel) -> Result<usize> {
        self.try_index(label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    /// Indices of all modes at the given site.
    pub fn site_indices(&self, site: Site) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.site == site)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sites(&self) -> Vec<Site> {
        let mut sites: Vec<Site> = self.labels.iter().map(|l| l.site).collect();
        sites.sort();
        sites.dedup();
        sites
    }
}

/// Photon occupation numbers, one entry per register mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockState(Vec<u8>);

impl FockState {
    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    pub fn new(occupations: Vec<u8>) -> Self {
        Self(occupations)
    }

    /// State with the listed (mode index, count) occupations, zero elsewhere.
    pub fn with_photons(modes: usize, photons: &[(usize, u8)]) -> Self {
        let mut occ = vec![0; modes];
        for &(i, n) in photons {
            occ[i] += n;
        }
        Self(occ)
    }

    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    fn bumped(&self, mode: usize) -> (Self, u8) {
        let mut occ = self.0.clone();
        occ[mode] += 1;
        let n = occ[mode];
        (Self(occ), n)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// One of the two degenerate metastable levels an ion can end up in after
/// emission. The concrete Zeeman sublevels live only in documentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IonLevel {
    S1,
    S2,
}

impl IonLevel {
    pub const BOTH: [IonLevel; 2] = [IonLevel::S1, IonLevel::S2];

    pub fn index(self) -> usize {
        match self {
            IonLevel::S1 => 0,
            IonLevel::S2 => 1,
        }
    }
}

impl fmt::Display for IonLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IonLevel::S1 => f.write_str("s1"),
            IonLevel::S2 => f.write_str("s2"),
        }
    }
}

/// Joint configuration of the two ion qubits. Basis order is A-major:
/// `s1s1, s1s2, s2s1, s2s2` at indices 0..4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IonPair {
    pub ion_a: IonLevel,
    pub ion_b: IonLevel,
}

impl IonPair {
    pub const ALL: [IonPair; 4] = [
        IonPair {
            ion_a: IonLevel::S1,
            ion_b: IonLevel::S1,
        },
        IonPair {
            ion_a: IonLevel::S1,
            ion_b: IonLevel::S2,
        },
        IonPair {
            ion_a: IonLevel::S2,
            ion_b: IonLevel::S1,
        },
        IonPair {
            ion_a: IonLevel::S2,
            ion_b: IonLevel::S2,
        },
    ];

    pub fn new(ion_a: IonLevel, ion_b: IonLevel) -> Self {
        Self { ion_a, ion_b }
    }

    pub fn index(self) -> usize {
        self.ion_a.index() * 2 + self.ion_b.index()
    }
}

impl fmt::Display for IonPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.ion_a, self.ion_b)
    }
}

// ---------------------------------------------------------------------------
// Sparse amplitude engine, generic over the non-photonic sector tag.
// ---------------------------------------------------------------------------

pub(crate) trait SectorKey: Ord + Clone {
    fn fock(&self) -> &FockState;
    fn with_fock(&self, fock: FockState) -> Self;
}

impl SectorKey for FockState {
    fn fock(&self) -> &FockState {
        self
    }

    fn with_fock(&self, fock: FockState) -> Self {
        fock
    }
}

impl SectorKey for (IonPair, FockState) {
    fn fock(&self) -> &FockState {
        &self.1
    }

    fn with_fock(&self, fock: FockState) -> Self {
        (self.0, fock)
    }
}

type AmpMap<K> = BTreeMap<K, Complex64>;

/// Sparse mode map: `rows[i]` lists the (output mode, amplitude) components
/// of input mode `i` under a linear-optics transformation.
pub(crate) type ModeRows = Vec<Vec<(usize, Complex64)>>;

fn accumulate<K: SectorKey>(map: &mut AmpMap<K>, key: K, amp: Complex64) {
    let entry = map.entry(key).or_insert(Complex64::ZERO);
    *entry += amp;
}

fn pruned<K: SectorKey>(mut map: AmpMap<K>) -> AmpMap<K> {
    map.retain(|_, a| a.norm() >= AMP_DROP_TOL);
    map
}

fn norm_sqr<K: SectorKey>(map: &AmpMap<K>) -> f64 {
    map.values().map(|a| a.norm_sqr()).sum()
}

/// √(n!) for the occupations of a Fock state. With the photon cap at 2 the
/// per-mode factor is 1 or √2.
fn sqrt_factorial_product(fock: &FockState) -> f64 {
    fock.occupations()
        .iter()
        .map(|&n| {
            let mut f = 1.0;
            for k in 2..=n as u64 {
                f *= k as f64;
            }
            f.sqrt()
        })
        .product()
}

fn creation<K: SectorKey>(map: &AmpMap<K>, mode: usize, cap: u32) -> Result<AmpMap<K>> {
    let mut out = AmpMap::new();
    for (key, amp) in map {
        let fock = key.fock();
        let total = fock.total() + 1;
        if total > cap {
            return Err(Error::PhotonCapExceeded { total, cap });
        }
        let (bumped, n_new) = fock.bumped(mode);
        accumulate(&mut out, key.with_fock(bumped), amp * (n_new as f64).sqrt());
    }
    Ok(pruned(out))
}

/// Rewrites every creation operator a†ᵢ as Σⱼ rows[i][j].1 · b†ⱼ, where j
/// indexes a (possibly different) output register of `out_len` modes.
/// Entries absent from a row are zero; modes not listed map to themselves
/// only if the caller includes the identity entry.
fn lift_rows<K: SectorKey>(
    map: &AmpMap<K>,
    rows: &[Vec<(usize, Complex64)>],
    out_len: usize,
) -> AmpMap<K> {
    let mut out = AmpMap::new();
    for (key, amp) in map {
        let fock = key.fock();
        let coeff = amp / sqrt_factorial_product(fock);
        // Expand the monomial of creation operators one photon at a time.
        let mut terms: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        terms.insert(Vec::new(), coeff);
        for (mode, &n) in fock.occupations().iter().enumerate() {
            for _ in 0..n {
                let mut next: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
                for (ops, c) in &terms {
                    for &(j, u) in &rows[mode] {
                        let mut ops2 = ops.clone();
                        let pos = ops2.partition_point(|&k| k <= j);
                        ops2.insert(pos, j);
                        *next.entry(ops2).or_insert(Complex64::ZERO) += c * u;
                    }
                }
                terms = next;
            }
        }
        for (ops, c) in terms {
            let mut occ = vec![0u8; out_len];
            for j in ops {
                occ[j] += 1;
            }
            let fock_out = FockState::new(occ);
            let norm = sqrt_factorial_product(&fock_out);
            accumulate(&mut out, key.with_fock(fock_out), c * norm);
        }
    }
    pruned(out)
}

fn phase_on_modes<K: SectorKey>(map: &AmpMap<K>, modes: &[usize], phase: f64) -> AmpMap<K> {
    let mut out = AmpMap::new();
    for (key, amp) in map {
        let n: u32 = modes.iter().map(|&i| key.fock().get(i) as u32).sum();
        let factor = Complex64::from_polar(1.0, phase * n as f64);
        out.insert(key.clone(), amp * factor);
    }
    out
}

/// Checks ‖U†U − I‖∞ against [`UNITARITY_TOL`].
pub fn check_unitary(u: &DMatrix<Complex64>) -> Result<()> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            got: u.ncols(),
        });
    }
    let gram = u.adjoint() * u;
    let mut max_dev: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            max_dev = max_dev.max((gram[(i, j)] - target).norm());
        }
    }
    if max_dev > UNITARITY_TOL {
        return Err(Error::NotUnitary { max_dev });
    }
    Ok(())
}

fn subset_rows(
    register: &ModeRegister,
    modes: &[ModeLabel],
    u: &DMatrix<Complex64>,
) -> Result<ModeRows> {
    if u.nrows() != modes.len() {
        return Err(Error::DimensionMismatch {
            expected: modes.len(),
            got: u.nrows(),
        });
    }
    check_unitary(u)?;
    let idx: Vec<usize> = modes
        .iter()
        .map(|l| register.index_of(l))
        .collect::<Result<_>>()?;
    let mut rows: ModeRows = (0..register.len())
        .map(|i| vec![(i, Complex64::ONE)])
        .collect();
    for (k, &i) in idx.iter().enumerate() {
        rows[i] = idx
            .iter()
            .enumerate()
            .map(|(m, &j)| (j, u[(k, m)]))
            .filter(|(_, a)| a.norm() > 0.0)
            .collect();
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Public state types
// ---------------------------------------------------------------------------

/// A pure photonic state: sparse complex amplitudes over Fock states.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonicState {
    register: ModeRegister,
    amps: AmpMap<FockState>,
}

impl PhotonicState {
    pub fn vacuum(register: ModeRegister) -> Self {
        let n = register.len();
        let mut amps = AmpMap::new();
        amps.insert(FockState::vacuum(n), Complex64::ONE);
        Self { register, amps }
    }

    pub fn from_terms(register: ModeRegister, terms: &[(FockState, Complex64)]) -> Result<Self> {
        let mut amps = AmpMap::new();
        for (fock, amp) in terms {
            if fock.len() != register.len() {
                return Err(Error::DimensionMismatch {
                    expected: register.len(),
                    got: fock.len(),
                });
            }
            if fock.total() > MAX_PHOTONS {
                return Err(Error::PhotonCapExceeded {
                    total: fock.total(),
                    cap: MAX_PHOTONS,
                });
            }
            accumulate(&mut amps, fock.clone(), *amp);
        }
        Ok(Self {
            register,
            amps: pruned(amps),
        })
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    pub fn amplitude(&self, fock: &FockState) -> Complex64 {
        self.amps.get(fock).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockState, &Complex64)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        let mut amps = self.amps.clone();
        for a in amps.values_mut() {
            *a /= n;
        }
        Self {
            register: self.register.clone(),
            amps,
        }
    }

    /// Adds one photon to `mode`, with the bosonic √(n+1) factor. The result
    /// is unnormalized.
    pub fn apply_creation(&self, mode: &ModeLabel) -> Result<Self> {
        let idx = self.register.index_of(mode)?;
        Ok(Self {
            register: self.register.clone(),
            amps: creation(&self.amps, idx, MAX_PHOTONS)?,
        })
    }

    /// Applies a unitary mode transformation on a subset of modes:
    /// a†ᵢ → Σⱼ U\[i,j\] a†ⱼ in every basis monomial.
    pub fn apply_mode_unitary(&self, modes: &[ModeLabel], u: &DMatrix<Complex64>) -> Result<Self> {
        let rows = subset_rows(&self.register, modes, u)?;
        Ok(Self {
            register: self.register.clone(),
            amps: lift_rows(&self.amps, &rows, self.register.len()),
        })
    }

    /// Per-photon phase e^{iφ} on every mode of `site`.
    pub fn apply_phase_on_site(&self, site: Site, phase: f64) -> Self {
        let modes = self.register.site_indices(site);
        Self {
            register: self.register.clone(),
            amps: phase_on_modes(&self.amps, &modes, phase),
        }
    }
}

/// A pure state of the two ion qubits tensored with the photon register.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    register: ModeRegister,
    amps: AmpMap<(IonPair, FockState)>,
}

impl JointState {
    pub fn from_terms(
        register: ModeRegister,
        terms: &[(IonPair, FockState, Complex64)],
    ) -> Result<Self> {
        let mut amps = AmpMap::new();
        for (ions, fock, amp) in terms {
            if fock.len() != register.len() {
                return Err(Error::DimensionMismatch {
                    expected: register.len(),
                    got: fock.len(),
                });
            }
            if fock.total() > MAX_PHOTONS {
                return Err(Error::PhotonCapExceeded {
                    total: fock.total(),
                    cap: MAX_PHOTONS,
                });
            }
            accumulate(&mut amps, (*ions, fock.clone()), *amp);
        }
        Ok(Self {
            register,
            amps: pruned(amps),
        })
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    pub fn amplitude(&self, ions: IonPair, fock: &FockState) -> Complex64 {
        self.amps
            .get(&(ions, fock.clone()))
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (IonPair, &FockState, &Complex64)> {
        self.amps
            .iter()
            .map(|((ions, fock), amp)| (*ions, fock, amp))
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        let mut amps = self.amps.clone();
        for a in amps.values_mut() {
            *a /= n;
        }
        Self {
            register: self.register.clone(),
            amps,
        }
    }

    pub fn apply_creation(&self, mode: &ModeLabel) -> Result<Self> {
        let idx = self.register.index_of(mode)?;
        Ok(Self {
            register: self.register.clone(),
            amps: creation(&self.amps, idx, MAX_PHOTONS)?,
        })
    }

    pub fn apply_mode_unitary(&self, modes: &[ModeLabel], u: &DMatrix<Complex64>) -> Result<Self> {
        let rows = subset_rows(&self.register, modes, u)?;
        Ok(Self {
            register: self.register.clone(),
            amps: lift_rows(&self.amps, &rows, self.register.len()),
        })
    }

    /// Per-photon phase e^{iφ} on every mode of `site`, polarization
    /// independent.
    pub fn apply_phase_on_site(&self, site: Site, phase: f64) -> Self {
        let modes = self.register.site_indices(site);
        Self {
            register: self.register.clone(),
            amps: phase_on_modes(&self.amps, &modes, phase),
        }
    }

    /// Remaps the photon sector onto a new register. `rows[i]` lists the
    /// output components of input mode `i`; the map must be an isometry for
    /// the norm to be preserved (callers build it from unitary elements).
    pub(crate) fn apply_mode_rows(
        &self,
        out_register: ModeRegister,
        rows: &[Vec<(usize, Complex64)>],
    ) -> Self {
        let amps = lift_rows(&self.amps, rows, out_register.len());
        Self {
            register: out_register,
            amps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn two_mode_register() -> ModeRegister {
        ModeRegister::new(vec![
            ModeLabel::bin0(Site::A, Polarization::P1),
            ModeLabel::bin0(Site::B, Polarization::P1),
        ])
        .unwrap()
    }

    /// Symmetric 50/50 beam splitter, the convention fixed for the analyzer.
    fn bs_symmetric() -> DMatrix<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(-s, 0.0),
            ],
        )
    }

    /// 50/50 beam splitter in the i-phase convention [[1, i], [i, 1]]/√2.
    fn bs_i_convention() -> DMatrix<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(s, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, s),
                Complex64::new(s, 0.0),
            ],
        )
    }

    #[test]
    fn creation_on_vacuum() {
        let reg = two_mode_register();
        let label = reg.labels()[0];
        let state = PhotonicState::vacuum(reg.clone())
            .apply_creation(&label)
            .unwrap();
        let one = FockState::with_photons(2, &[(0, 1)]);
        assert_abs_diff_eq!(state.amplitude(&one).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(state.norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn creation_bosonic_factor() {
        let reg = two_mode_register();
        let label = reg.labels()[0];
        let state = PhotonicState::vacuum(reg)
            .apply_creation(&label)
            .unwrap()
            .apply_creation(&label)
            .unwrap();
        let two = FockState::with_photons(2, &[(0, 2)]);
        assert_abs_diff_eq!(
            state.amplitude(&two).re,
            std::f64::consts::SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn creation_cap() {
        let reg = two_mode_register();
        let label = reg.labels()[0];
        let state = PhotonicState::vacuum(reg)
            .apply_creation(&label)
            .unwrap()
            .apply_creation(&label)
            .unwrap();
        let err = state.apply_creation(&label).unwrap_err();
        assert!(matches!(err, Error::PhotonCapExceeded { .. }));
    }

    #[test]
    fn two_mode_product_norm() {
        // a₁†b₂†|0⟩ has norm 1: each monomial is a distinct single
        // excitation, so no bosonic factor appears.
        let reg = ModeRegister::new(vec![
            ModeLabel::bin0(Site::A, Polarization::P1),
            ModeLabel::bin0(Site::A, Polarization::P2),
            ModeLabel::bin0(Site::B, Polarization::P1),
            ModeLabel::bin0(Site::B, Polarization::P2),
        ])
        .unwrap();
        let a1 = reg.labels()[0];
        let b2 = reg.labels()[3];
        let state = PhotonicState::vacuum(reg)
            .apply_creation(&a1)
            .unwrap()
            .apply_creation(&b2)
            .unwrap();
        assert_abs_diff_eq!(state.norm_sqr(), 1.0, epsilon = 1e-14);
        let expected = FockState::with_photons(4, &[(0, 1), (3, 1)]);
        assert_abs_diff_eq!(state.amplitude(&expected).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn creation_commutes_on_distinct_modes() {
        let reg = two_mode_register();
        let (a, b) = (reg.labels()[0], reg.labels()[1]);
        let ab = PhotonicState::vacuum(reg.clone())
            .apply_creation(&a)
            .unwrap()
            .apply_creation(&b)
            .unwrap();
        let ba = PhotonicState::vacuum(reg)
            .apply_creation(&b)
            .unwrap()
            .apply_creation(&a)
            .unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn identity_unitary_is_noop() {
        let reg = two_mode_register();
        let labels = reg.labels().to_vec();
        let state = PhotonicState::vacuum(reg)
            .apply_creation(&labels[0])
            .unwrap();
        let id = DMatrix::identity(2, 2);
        let out = state.apply_mode_unitary(&labels, &id).unwrap();
        assert_eq!(out, state);
    }

    #[test]
    fn hong_ou_mandel_bunching() {
        // (c†+d†)(c†−d†)/2 |0⟩ = (c†² − d†²)/2 |0⟩ = (|2,0⟩ − |0,2⟩)/√2.
        let reg = two_mode_register();
        let labels = reg.labels().to_vec();
        let state = PhotonicState::vacuum(reg)
            .apply_creation(&labels[0])
            .unwrap()
            .apply_creation(&labels[1])
            .unwrap()
            .apply_mode_unitary(&labels, &bs_symmetric())
            .unwrap();
        let one_one = FockState::with_photons(2, &[(0, 1), (1, 1)]);
        let two_zero = FockState::with_photons(2, &[(0, 2)]);
        let zero_two = FockState::with_photons(2, &[(1, 2)]);
        assert_abs_diff_eq!(state.amplitude(&one_one).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            state.amplitude(&two_zero).re,
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            state.amplitude(&zero_two).re,
            -std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hom_distinguishable_photons() {
        // Photons in different temporal bins do not interfere: the
        // coincidence probability across the two output sites is exactly 1/2.
        let reg = ModeRegister::new(vec![
            ModeLabel::new(Site::A, Polarization::P1, 0),
            ModeLabel::new(Site::A, Polarization::P1, 1),
            ModeLabel::new(Site::B, Polarization::P1, 0),
            ModeLabel::new(Site::B, Polarization::P1, 1),
        ])
        .unwrap();
        let labels = reg.labels().to_vec();
        let state = PhotonicState::vacuum(reg)
            .apply_creation(&labels[0])
            .unwrap()
            .apply_creation(&labels[3])
            .unwrap();
        // Beam splitter acts per temporal bin.
        let state = state
            .apply_mode_unitary(&[labels[0], labels[2]], &bs_symmetric())
            .unwrap()
            .apply_mode_unitary(&[labels[1], labels[3]], &bs_symmetric())
            .unwrap();
        let mut p_coincidence = 0.0;
        for (fock, amp) in state.terms() {
            let at_a = fock.get(0) + fock.get(1);
            let at_b = fock.get(2) + fock.get(3);
            if at_a == 1 && at_b == 1 {
                p_coincidence += amp.norm_sqr();
            }
        }
        assert_abs_diff_eq!(p_coincidence, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn beam_splitter_twice_swaps_in_i_convention() {
        let reg = two_mode_register();
        let labels = reg.labels().to_vec();
        let bs = bs_i_convention();
        let state = PhotonicState::vacuum(reg)
            .apply_creation(&labels[0])
            .unwrap()
            .apply_mode_unitary(&labels, &bs)
            .unwrap()
            .apply_mode_unitary(&labels, &bs)
            .unwrap();
        // Oracle: the matrix square sends |1,0⟩ to i|0,1⟩.
        let square = &bs * &bs;
        let swapped = FockState::with_photons(2, &[(1, 1)]);
        let original = FockState::with_photons(2, &[(0, 1)]);
        assert_abs_diff_eq!(
            state.amplitude(&swapped).norm(),
            square[(0, 1)].norm(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(state.amplitude(&swapped).norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(state.amplitude(&original).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn non_unitary_rejected() {
        let reg = two_mode_register();
        let labels = reg.labels().to_vec();
        let state = PhotonicState::vacuum(reg);
        let bad = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::ONE,
                Complex64::ONE,
                Complex64::ZERO,
                Complex64::ONE,
            ],
        );
        let err = state.apply_mode_unitary(&labels, &bad).unwrap_err();
        assert!(matches!(err, Error::NotUnitary { .. }));
    }

    fn random_unitary_2x2(rng: &mut StdRng) -> DMatrix<Complex64> {
        // U = e^{iδ} [[e^{iα}cosθ, e^{iβ}sinθ], [−e^{−iβ}sinθ, e^{−iα}cosθ]]
        let (theta, alpha, beta, delta) = (
            rng.gen_range(0.0..std::f64::consts::PI),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let (c, s) = (theta.cos(), theta.sin());
        let g = Complex64::from_polar(1.0, delta);
        DMatrix::from_row_slice(
            2,
            2,
            &[
                g * Complex64::from_polar(c, alpha),
                g * Complex64::from_polar(s, beta),
                g * -Complex64::from_polar(s, -beta),
                g * Complex64::from_polar(c, -alpha),
            ],
        )
    }

    #[test]
    fn unitary_lift_preserves_norm() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let reg = two_mode_register();
        let labels = reg.labels().to_vec();
        for _ in 0..1000 {
            // Random two-photon state over two modes.
            let mut terms = Vec::new();
            for occ in [[0u8, 0], [1, 0], [0, 1], [1, 1], [2, 0], [0, 2]] {
                terms.push((
                    FockState::new(occ.to_vec()),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
            let state = PhotonicState::from_terms(reg.clone(), &terms)
                .unwrap()
                .normalized();
            let u = random_unitary_2x2(&mut rng);
            let out = state.apply_mode_unitary(&labels, &u).unwrap();
            assert!((out.norm_sqr().sqrt() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn register_rejects_duplicates_and_overflow() {
        let l = ModeLabel::bin0(Site::A, Polarization::P1);
        assert!(matches!(
            ModeRegister::new(vec![l, l]).unwrap_err(),
            Error::DuplicateMode(_)
        ));
        let many: Vec<ModeLabel> = (0..17)
            .map(|i| ModeLabel::new(Site::A, Polarization::P1, i as u8))
            .collect();
        assert!(matches!(
            ModeRegister::new(many).unwrap_err(),
            Error::ModeCapExceeded { .. }
        ));
    }
}
