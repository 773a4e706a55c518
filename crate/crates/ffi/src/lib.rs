//! C ABI for the ionherald simulator.
//!
//! Conventions:
//! - every fallible call returns an [`IhStatus`]; `IH_STATUS_OK` is zero;
//! - outputs go through pointers that must be non-null and writable;
//! - the last error message per thread is available from
//!   [`ih_last_error_message`]; strings returned by this library are freed
//!   with [`ih_string_free`];
//! - the attempt simulation is held behind the opaque [`IhAttempt`] handle,
//!   created by [`ih_attempt_run`] and released with [`ih_attempt_free`].
//!
//! Density matrices cross the boundary as two row-major 16-element arrays
//! (real and imaginary parts) over the ion basis `s1s1, s1s2, s2s1, s2s2`.

use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;

use ionherald::bell::{
    chsh_value, monte_carlo_chsh, readout_counts, ChshConfig, ChshSettings, MeasurementSetting,
    ReadoutModel,
};
use ionherald::budget::{fiber_survival, pair_rate, time_to_pairs, BudgetConfig};
use ionherald::cavity::{
    coupling_constant, dipole_from_decay, optimal_gamma, p_cav, scan_length, IonConstants,
};
use ionherald::density::DensityMatrix;
use ionherald::error::Error;
use ionherald::optics::{Detector, DetectorBank, HeraldClass};
use ionherald::protocol::{
    hom_experiment, run_attempt, ChannelModel, EmissionModel, HeraldedResult,
};
use ionherald::timing::{build_schedule, min_choice_delay, validate, Scenario};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapacityExceeded = 3,
    DimensionMismatch = 4,
    InsufficientData = 5,
    Infeasible = 6,
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let cstring =
        CString::new(message).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn status_of(err: &Error) -> IhStatus {
    match err {
        Error::PhotonCapExceeded { .. } | Error::ModeCapExceeded { .. } => {
            IhStatus::CapacityExceeded
        }
        Error::DimensionMismatch { .. } => IhStatus::DimensionMismatch,
        Error::InsufficientData(_) => IhStatus::InsufficientData,
        Error::Infeasible(_) => IhStatus::Infeasible,
        _ => IhStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> IhStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null_pointer(name: &str) -> IhStatus {
    set_error(format!("{name} must not be null"));
    IhStatus::NullPointer
}

fn guarded<F: FnOnce() -> IhStatus>(f: F) -> IhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            IhStatus::Internal
        }
    }
}

/// Version of the underlying simulator, as a static string.
#[no_mangle]
pub extern "C" fn ih_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The last error message raised on this thread, or NULL if none. The caller
/// frees the string with `ih_string_free`.
#[no_mangle]
pub extern "C" fn ih_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string allocated by this library. NULL is ignored.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ih_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Cavity model
// ---------------------------------------------------------------------------

/// Rates of the emitting ion.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IhIonConstants {
    /// Non-cavity loss rate Γ, 1/s.
    pub loss_rate: f64,
    /// Free-space rate of the cavity-coupled transition, 1/s.
    pub transition_rate: f64,
    /// Transition wavelength, m.
    pub wavelength: f64,
}

/// Derived cavity figures at the optimal decay rate γ = 2Ω.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IhCavityFigures {
    pub coupling: f64,
    pub gamma_opt: f64,
    pub finesse_pi: f64,
    pub finesse_4pi: f64,
    pub p_cav: f64,
    pub wavepacket_s: f64,
}

/// p_cav = 4γΩ²/((γ+Γ)(γΓ+4Ω²)).
///
/// # Safety
/// `out` must be null or valid for writing one f64. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_cavity_p_cav(
    gamma: f64,
    loss_rate: f64,
    coupling: f64,
    out: *mut f64,
) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match p_cav(gamma, loss_rate, coupling) {
            Ok(v) => {
                unsafe { *out = v };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The p_cav-maximizing cavity decay rate, 2Ω.
///
/// # Safety
/// `out` must be null or valid for writing one f64. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_cavity_optimal_gamma(coupling: f64, out: *mut f64) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if coupling <= 0.0 {
            set_error("coupling must be positive".to_string());
            return IhStatus::InvalidArgument;
        }
        unsafe { *out = optimal_gamma(coupling) };
        IhStatus::Ok
    })
}

/// Dipole element from the free-space decay rate, C·m.
///
/// # Safety
/// `out` must be null or valid for writing one f64. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_cavity_dipole_from_decay(
    transition_rate: f64,
    wavelength: f64,
    out: *mut f64,
) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match dipole_from_decay(transition_rate, wavelength) {
            Ok(v) => {
                unsafe { *out = v };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Transition-cavity coupling Ω = (D/ħ)√(hc/(2ε₀λV)), rad/s.
///
/// # Safety
/// `out` must be null or valid for writing one f64. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_cavity_coupling_constant(
    dipole: f64,
    wavelength: f64,
    mode_volume: f64,
    out: *mut f64,
) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match coupling_constant(dipole, wavelength, mode_volume) {
            Ok(v) => {
                unsafe { *out = v };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// All optimal-cavity figures for one cavity length, using the confocal mode
/// volume. Pass NULL for `ion` to use the built-in Ca⁺ defaults.
///
/// # Safety
/// `ion` must be null or point to a readable `IhIonConstants`; `out` must be null or writable. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_cavity_scan_length(
    ion: *const IhIonConstants,
    length: f64,
    out: *mut IhCavityFigures,
) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        let constants = if ion.is_null() {
            IonConstants::default()
        } else {
            let ion = unsafe { &*ion };
            IonConstants {
                loss_rate: ion.loss_rate,
                transition_rate: ion.transition_rate,
                wavelength: ion.wavelength,
            }
        };
        match scan_length(&constants, length) {
            Ok(row) => {
                unsafe {
                    *out = IhCavityFigures {
                        coupling: row.coupling,
                        gamma_opt: row.gamma_opt,
                        finesse_pi: row.finesse_pi,
                        finesse_4pi: row.finesse_4pi,
                        p_cav: row.p_cav,
                        wavepacket_s: row.wavepacket_s,
                    }
                };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Rate budget
// ---------------------------------------------------------------------------

/// Multiplicative factors of the entangled-pair rate.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IhBudgetConfig {
    pub repetition_rate: f64,
    pub p_cav: f64,
    pub fiber_coupling: f64,
    pub distance_km: f64,
    pub attenuation_db_per_km: f64,
    pub detector_eta: f64,
    pub herald_fraction: f64,
}

impl From<&IhBudgetConfig> for BudgetConfig {
    fn from(c: &IhBudgetConfig) -> Self {
        BudgetConfig {
            repetition_rate: c.repetition_rate,
            p_cav: c.p_cav,
            fiber_coupling: c.fiber_coupling,
            distance_km: c.distance_km,
            attenuation_db_per_km: c.attenuation_db_per_km,
            detector_eta: c.detector_eta,
            herald_fraction: c.herald_fraction,
        }
    }
}

/// Per-photon fiber survival 10^(−dB/km · km/10).
///
/// # Safety
/// `out` must be null or valid for writing one f64. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_fiber_survival(
    distance_km: f64,
    db_per_km: f64,
    out: *mut f64,
) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if distance_km < 0.0 || db_per_km < 0.0 {
            set_error("distance and attenuation must be non-negative".to_string());
            return IhStatus::InvalidArgument;
        }
        unsafe { *out = fiber_survival(distance_km, db_per_km) };
        IhStatus::Ok
    })
}

/// Heralded pairs per second for the configured budget.
///
/// # Safety
/// `config` must be null or readable; `out` must be null or writable. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_pair_rate(config: *const IhBudgetConfig, out: *mut f64) -> IhStatus {
    guarded(|| {
        if config.is_null() {
            return null_pointer("config");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        match pair_rate(&BudgetConfig::from(unsafe { &*config })) {
            Ok(v) => {
                unsafe { *out = v };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Seconds to accumulate `pairs` heralded pairs.
///
/// # Safety
/// `config` must be null or readable; `out` must be null or writable. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_time_to_pairs(
    config: *const IhBudgetConfig,
    pairs: u64,
    out: *mut f64,
) -> IhStatus {
    guarded(|| {
        if config.is_null() {
            return null_pointer("config");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        match time_to_pairs(&BudgetConfig::from(unsafe { &*config }), pairs) {
            Ok(v) => {
                unsafe { *out = v };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

/// 1-D experiment geometry and delays, SI units.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IhScenario {
    pub x_a: f64,
    pub x_b: f64,
    pub x_i: f64,
    pub fiber_speed: f64,
    pub excitation_to_choice: f64,
    pub choice_to_rotation: f64,
    pub readout_duration: f64,
    pub excitation_to_emission: f64,
}

/// Pass/fail flags and margins of the three timing constraints, plus the
/// derived feasibility figures.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IhTimingResult {
    pub locality_a_passed: bool,
    pub locality_b_passed: bool,
    pub herald_passed: bool,
    pub locality_a_margin_s: f64,
    pub locality_b_margin_s: f64,
    pub herald_margin_s: f64,
    pub max_choice_to_detection_window_s: f64,
    pub min_excitation_to_choice_delay_s: f64,
}

/// Validates the three lightcone constraints for a scenario.
///
/// # Safety
/// `scenario` must be null or readable; `out` must be null or writable. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_timing_validate(
    scenario: *const IhScenario,
    out: *mut IhTimingResult,
) -> IhStatus {
    guarded(|| {
        if scenario.is_null() {
            return null_pointer("scenario");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let s = unsafe { &*scenario };
        let scenario = Scenario {
            x_a: s.x_a,
            x_b: s.x_b,
            x_i: s.x_i,
            fiber_speed: s.fiber_speed,
            excitation_to_choice: s.excitation_to_choice,
            choice_to_rotation: s.choice_to_rotation,
            readout_duration: s.readout_duration,
            excitation_to_emission: s.excitation_to_emission,
        };
        let schedule = match build_schedule(&scenario) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let report = match validate(&schedule) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let min_delay = match min_choice_delay(&scenario) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        unsafe {
            *out = IhTimingResult {
                locality_a_passed: report.checks[0].passed,
                locality_b_passed: report.checks[1].passed,
                herald_passed: report.checks[2].passed,
                locality_a_margin_s: report.checks[0].margin_s,
                locality_b_margin_s: report.checks[1].margin_s,
                herald_margin_s: report.checks[2].margin_s,
                max_choice_to_detection_window_s: scenario.max_choice_to_detection_window(),
                min_excitation_to_choice_delay_s: min_delay,
            };
        }
        IhStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Readout
// ---------------------------------------------------------------------------

/// Fluorescence readout parameters.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IhReadoutModel {
    pub cycling_rate: f64,
    pub collection_efficiency: f64,
    pub window_s: f64,
    pub threshold: u32,
    pub dark_rate: f64,
}

/// Expected bright counts and the state-discrimination error.
///
/// # Safety
/// All pointers must be null or valid for the access performed. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_readout_counts(
    model: *const IhReadoutModel,
    expected_counts: *mut f64,
    discrimination_error: *mut f64,
) -> IhStatus {
    guarded(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if expected_counts.is_null() || discrimination_error.is_null() {
            return null_pointer("out");
        }
        let m = unsafe { &*model };
        match readout_counts(&ReadoutModel {
            cycling_rate: m.cycling_rate,
            collection_efficiency: m.collection_efficiency,
            window: m.window_s,
            threshold: m.threshold,
            dark_rate: m.dark_rate,
        }) {
            Ok(v) => {
                unsafe {
                    *expected_counts = v.expected_counts;
                    *discrimination_error = v.discrimination_error;
                }
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Attempt simulation (opaque handle)
// ---------------------------------------------------------------------------

/// Herald classes of the partial Bell-state analyzer.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IhHeraldClass {
    PsiMinus = 0,
    PsiPlus = 1,
    PhiOrUnusable = 2,
    NoHerald = 3,
}

impl From<IhHeraldClass> for HeraldClass {
    fn from(c: IhHeraldClass) -> Self {
        match c {
            IhHeraldClass::PsiMinus => HeraldClass::PsiMinus,
            IhHeraldClass::PsiPlus => HeraldClass::PsiPlus,
            IhHeraldClass::PhiOrUnusable => HeraldClass::PhiOrUnusable,
            IhHeraldClass::NoHerald => HeraldClass::NoHerald,
        }
    }
}

/// Configuration of one entanglement attempt. Negative `overlap` means
/// perfect wavepacket overlap.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IhAttemptConfig {
    pub distance_km: f64,
    pub attenuation_db_per_km: f64,
    pub phase_a_rad: f64,
    pub phase_b_rad: f64,
    pub temporal_offset_bins: u8,
    pub overlap: f64,
    pub amplitude_asymmetry: f64,
    pub compensate: bool,
    pub detector_eta: f64,
    pub dark_count_prob: f64,
    pub number_resolving: bool,
}

/// Opaque handle over the exact enumeration of one attempt.
pub struct IhAttempt {
    results: Vec<HeraldedResult>,
}

fn attempt_result(attempt: &IhAttempt, class: IhHeraldClass) -> &HeraldedResult {
    let class: HeraldClass = class.into();
    attempt
        .results
        .iter()
        .find(|r| r.class == class)
        .expect("all classes present")
}

/// Runs the exact enumeration for one attempt and returns a handle to the
/// per-class results. Free it with `ih_attempt_free`.
///
/// # Safety
/// `config` must be null or readable; `out` must be null or valid for writing one pointer. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_attempt_run(
    config: *const IhAttemptConfig,
    out: *mut *mut IhAttempt,
) -> IhStatus {
    guarded(|| {
        if config.is_null() {
            return null_pointer("config");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let c = unsafe { &*config };
        let emission = EmissionModel {
            amplitude_asymmetry: c.amplitude_asymmetry,
            compensate: c.compensate,
        };
        let channel = |phase: f64| ChannelModel {
            length_km: c.distance_km / 2.0,
            attenuation_db_per_km: c.attenuation_db_per_km,
            wavenumber_rad_per_m: 1.0,
            path_length_m: Some(phase),
            temporal_offset_bins: 0,
            overlap: if c.overlap >= 0.0 {
                Some(c.overlap)
            } else {
                None
            },
        };
        let mut channel_b = channel(c.phase_b_rad);
        channel_b.temporal_offset_bins = c.temporal_offset_bins;
        let bank = DetectorBank::analyzer(Detector {
            efficiency: c.detector_eta,
            dark_count_prob: c.dark_count_prob,
            number_resolving: c.number_resolving,
        });
        match run_attempt(&emission, &channel(c.phase_a_rad), &channel_b, &bank) {
            Ok(results) => {
                let handle = Box::new(IhAttempt { results });
                unsafe { *out = Box::into_raw(handle) };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Probability of a herald class in the attempt.
///
/// # Safety
/// `attempt` must be null or a live handle from `ih_attempt_run`; `out` must be null or writable. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_attempt_probability(
    attempt: *const IhAttempt,
    class: IhHeraldClass,
    out: *mut f64,
) -> IhStatus {
    guarded(|| {
        if attempt.is_null() {
            return null_pointer("attempt");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let result = attempt_result(unsafe { &*attempt }, class);
        unsafe { *out = result.probability };
        IhStatus::Ok
    })
}

/// Fidelity of the conditional ion state to the Bell state the class
/// heralds. Fails with `IH_STATUS_INVALID_ARGUMENT` for classes that herald
/// nothing.
///
/// # Safety
/// `attempt` must be null or a live handle from `ih_attempt_run`; `out` must be null or writable. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_attempt_fidelity(
    attempt: *const IhAttempt,
    class: IhHeraldClass,
    out: *mut f64,
) -> IhStatus {
    guarded(|| {
        if attempt.is_null() {
            return null_pointer("attempt");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let result = attempt_result(unsafe { &*attempt }, class);
        match result.fidelity_to_target {
            Some(f) => {
                unsafe { *out = f };
                IhStatus::Ok
            }
            None => {
                set_error(format!("herald class {class:?} has no target Bell state"));
                IhStatus::InvalidArgument
            }
        }
    })
}

/// Copies the conditional 4×4 ion density matrix of the class into two
/// row-major 16-element arrays.
///
/// # Safety
/// `attempt` must be null or a live handle; `re` and `im` must be null or valid for writing 16 f64 each. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_attempt_ion_state(
    attempt: *const IhAttempt,
    class: IhHeraldClass,
    re: *mut f64,
    im: *mut f64,
) -> IhStatus {
    guarded(|| {
        if attempt.is_null() {
            return null_pointer("attempt");
        }
        if re.is_null() || im.is_null() {
            return null_pointer("re/im");
        }
        let result = attempt_result(unsafe { &*attempt }, class);
        for i in 0..4 {
            for j in 0..4 {
                let z = result.ion_state.element(i, j);
                unsafe {
                    *re.add(i * 4 + j) = z.re;
                    *im.add(i * 4 + j) = z.im;
                }
            }
        }
        IhStatus::Ok
    })
}

/// Full herald report as a JSON string (same layout as the CLI's
/// herald_report.json `results` array). Free with `ih_string_free`.
///
/// # Safety
/// `attempt` must be null or a live handle; `out` must be null or valid for writing one pointer. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_attempt_report_json(
    attempt: *const IhAttempt,
    out: *mut *mut c_char,
) -> IhStatus {
    guarded(|| {
        if attempt.is_null() {
            return null_pointer("attempt");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let entries: Vec<ionherald::report::HeraldEntry> = unsafe { &*attempt }
            .results
            .iter()
            .map(Into::into)
            .collect();
        match serde_json::to_string(&entries) {
            Ok(json) => match CString::new(json) {
                Ok(cstring) => {
                    unsafe { *out = cstring.into_raw() };
                    IhStatus::Ok
                }
                Err(_) => {
                    set_error("report contains interior NUL".to_string());
                    IhStatus::Internal
                }
            },
            Err(e) => {
                set_error(format!("serializing report: {e}"));
                IhStatus::Internal
            }
        }
    })
}

/// Releases an attempt handle. NULL is ignored.
///
/// # Safety
/// `attempt` must be a pointer returned by `ih_attempt_run` and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ih_attempt_free(attempt: *mut IhAttempt) {
    if !attempt.is_null() {
        drop(Box::from_raw(attempt));
    }
}

// ---------------------------------------------------------------------------
// CHSH
// ---------------------------------------------------------------------------

/// Finite-statistics CHSH estimate.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IhChshEstimate {
    pub s_estimate: f64,
    pub std_error: f64,
}

fn density_from_parts(re: *const f64, im: *const f64) -> Result<DensityMatrix, IhStatus> {
    if re.is_null() || im.is_null() {
        return Err(null_pointer("re/im"));
    }
    let (re, im) = unsafe {
        (
            std::slice::from_raw_parts(re, 16),
            std::slice::from_raw_parts(im, 16),
        )
    };
    DensityMatrix::ion_pair_from_parts(re, im).map_err(fail)
}

fn settings_from_degrees(settings_deg: *const f64) -> Result<ChshSettings, IhStatus> {
    if settings_deg.is_null() {
        return Err(null_pointer("settings_deg"));
    }
    let s = unsafe { std::slice::from_raw_parts(settings_deg, 4) };
    Ok(ChshSettings {
        a: MeasurementSetting::equatorial(s[0].to_radians()),
        a_prime: MeasurementSetting::equatorial(s[1].to_radians()),
        b: MeasurementSetting::equatorial(s[2].to_radians()),
        b_prime: MeasurementSetting::equatorial(s[3].to_radians()),
    })
}

/// Analytic S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′) on a 4×4 ion density
/// matrix, with the four equatorial setting azimuths in degrees.
///
/// # Safety
/// `re` and `im` must be null or valid for reading 16 f64 each; `settings_deg` null or 4 readable f64; `out` null or writable. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_chsh_analytic(
    re: *const f64,
    im: *const f64,
    settings_deg: *const f64,
    out: *mut f64,
) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        let rho = match density_from_parts(re, im) {
            Ok(v) => v,
            Err(status) => return status,
        };
        let settings = match settings_from_degrees(settings_deg) {
            Ok(v) => v,
            Err(status) => return status,
        };
        match chsh_value(&rho, &settings) {
            Ok(s) => {
                unsafe { *out = s };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Seeded Monte Carlo CHSH experiment; bit-reproducible for a fixed seed.
///
/// # Safety
/// `re` and `im` must be null or valid for reading 16 f64 each; `settings_deg` null or 4 readable f64; `out` null or writable. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_chsh_monte_carlo(
    re: *const f64,
    im: *const f64,
    settings_deg: *const f64,
    trials: u64,
    seed: u64,
    out: *mut IhChshEstimate,
) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        let rho = match density_from_parts(re, im) {
            Ok(v) => v,
            Err(status) => return status,
        };
        let settings = match settings_from_degrees(settings_deg) {
            Ok(v) => v,
            Err(status) => return status,
        };
        match monte_carlo_chsh(
            &rho,
            &ChshConfig {
                settings,
                trials,
                rng_seed: seed,
            },
        ) {
            Ok(report) => {
                unsafe {
                    *out = IhChshEstimate {
                        s_estimate: report.s_estimate,
                        std_error: report.std_error,
                    }
                };
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Two-photon interference
// ---------------------------------------------------------------------------

/// One photon per port of a symmetric 50/50 splitter. `overlap < 0` means
/// perfect overlap. `out` receives {coincidence, bunched-first,
/// bunched-second} probabilities.
///
/// # Safety
/// `out` must be null or valid for writing three f64. Null pointers are
/// reported as `IH_STATUS_NULL_POINTER`.
#[no_mangle]
pub unsafe extern "C" fn ih_hom(offset_bins: u8, overlap: f64, out: *mut f64) -> IhStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        let overlap = if overlap >= 0.0 { Some(overlap) } else { None };
        match hom_experiment(offset_bins, overlap) {
            Ok(v) => {
                unsafe {
                    *out.add(0) = v.coincidence_probability;
                    *out.add(1) = v.bunched_first;
                    *out.add(2) = v.bunched_second;
                }
                IhStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
