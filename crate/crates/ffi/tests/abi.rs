//! Exercises the C ABI exactly as an external caller would: through the
//! exported symbols, raw pointers and status codes.

use std::ffi::CStr;
use std::os::raw::c_char;

use ionherald_ffi::*;

#[test]
fn version_is_a_c_string() {
    let ptr = ih_version();
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
    assert_eq!(s, env!("CARGO_PKG_VERSION"));
}

#[test]
fn p_cav_matches_core() {
    let mut out = 0.0;
    let status = unsafe { ih_cavity_p_cav(1.64e7, 1.47e8, 8.2e6, &mut out) };
    assert_eq!(status, IhStatus::Ok);
    let direct = ionherald::cavity::p_cav(1.64e7, 1.47e8, 8.2e6).unwrap();
    assert_eq!(out, direct);
}

#[test]
fn invalid_rates_set_an_error_message() {
    let mut out = 0.0;
    let status = unsafe { ih_cavity_p_cav(-1.0, 1.0, 1.0, &mut out) };
    assert_eq!(status, IhStatus::InvalidArgument);
    let msg = ih_last_error_message();
    assert!(!msg.is_null());
    let text = unsafe { CStr::from_ptr(msg) }.to_str().unwrap().to_string();
    assert!(text.contains("positive"), "message: {text}");
    unsafe { ih_string_free(msg) };
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        assert_eq!(
            ih_cavity_p_cav(1.0, 1.0, 1.0, std::ptr::null_mut()),
            IhStatus::NullPointer
        );
        assert_eq!(
            ih_pair_rate(std::ptr::null(), &mut 0.0),
            IhStatus::NullPointer
        );
        let mut handle: *mut IhAttempt = std::ptr::null_mut();
        assert_eq!(
            ih_attempt_run(std::ptr::null(), &mut handle),
            IhStatus::NullPointer
        );
    }
}

#[test]
fn cavity_scan_reproduces_published_numbers() {
    let mut figures = IhCavityFigures {
        coupling: 0.0,
        gamma_opt: 0.0,
        finesse_pi: 0.0,
        finesse_4pi: 0.0,
        p_cav: 0.0,
        wavepacket_s: 0.0,
    };
    let status = unsafe { ih_cavity_scan_length(std::ptr::null(), 3e-3, &mut figures) };
    assert_eq!(status, IhStatus::Ok);
    assert!((figures.p_cav - 0.01).abs() / 0.01 < 0.15);
    assert!((figures.finesse_pi - 19_000.0).abs() / 19_000.0 < 0.10);
}

#[test]
fn budget_round_trip() {
    let config = IhBudgetConfig {
        repetition_rate: 33_333.0,
        p_cav: 0.01,
        fiber_coupling: 1.0,
        distance_km: 10.0,
        attenuation_db_per_km: 1.0,
        detector_eta: 0.7,
        herald_fraction: 0.5,
    };
    unsafe {
        let mut rate = 0.0;
        assert_eq!(ih_pair_rate(&config, &mut rate), IhStatus::Ok);
        assert!((rate * 60.0 - 4.9).abs() < 0.05);
        let mut seconds = 0.0;
        assert_eq!(ih_time_to_pairs(&config, 1000, &mut seconds), IhStatus::Ok);
        assert!((seconds / 3600.0 - 3.4).abs() < 0.05);
        let mut survival = 0.0;
        assert_eq!(ih_fiber_survival(5.0, 1.0, &mut survival), IhStatus::Ok);
        assert!((survival - 0.3162).abs() < 1e-3);
    }
}

fn ideal_attempt_config() -> IhAttemptConfig {
    IhAttemptConfig {
        distance_km: 0.0,
        attenuation_db_per_km: 0.0,
        phase_a_rad: 0.0,
        phase_b_rad: 0.0,
        temporal_offset_bins: 0,
        overlap: -1.0,
        amplitude_asymmetry: 1.0,
        compensate: true,
        detector_eta: 1.0,
        dark_count_prob: 0.0,
        number_resolving: true,
    }
}

#[test]
fn attempt_handle_life_cycle() {
    unsafe {
        let config = ideal_attempt_config();
        let mut handle: *mut IhAttempt = std::ptr::null_mut();
        assert_eq!(ih_attempt_run(&config, &mut handle), IhStatus::Ok);
        assert!(!handle.is_null());

        let mut p = 0.0;
        assert_eq!(
            ih_attempt_probability(handle, IhHeraldClass::PsiMinus, &mut p),
            IhStatus::Ok
        );
        assert!((p - 0.25).abs() < 1e-10);

        let mut f = 0.0;
        assert_eq!(
            ih_attempt_fidelity(handle, IhHeraldClass::PsiMinus, &mut f),
            IhStatus::Ok
        );
        assert!((f - 1.0).abs() < 1e-10);
        assert_eq!(
            ih_attempt_fidelity(handle, IhHeraldClass::NoHerald, &mut f),
            IhStatus::InvalidArgument
        );

        let mut re = [0.0; 16];
        let mut im = [0.0; 16];
        assert_eq!(
            ih_attempt_ion_state(
                handle,
                IhHeraldClass::PsiMinus,
                re.as_mut_ptr(),
                im.as_mut_ptr()
            ),
            IhStatus::Ok
        );
        // ψ⁻ density matrix: ±1/2 on the central block.
        assert!((re[5] - 0.5).abs() < 1e-12);
        assert!((re[6] + 0.5).abs() < 1e-12);

        let mut json: *mut c_char = std::ptr::null_mut();
        assert_eq!(ih_attempt_report_json(handle, &mut json), IhStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap();
        let value: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(value.as_array().unwrap().len(), 4);
        ih_string_free(json);

        ih_attempt_free(handle);
    }
}

#[test]
fn chsh_through_the_ffi() {
    unsafe {
        // Build the ψ⁻ state via an attempt handle, then measure it.
        let config = IhAttemptConfig {
            phase_a_rad: 0.3,
            phase_b_rad: 1.9,
            number_resolving: false,
            ..ideal_attempt_config()
        };
        let mut handle: *mut IhAttempt = std::ptr::null_mut();
        assert_eq!(ih_attempt_run(&config, &mut handle), IhStatus::Ok);
        let mut re = [0.0; 16];
        let mut im = [0.0; 16];
        assert_eq!(
            ih_attempt_ion_state(
                handle,
                IhHeraldClass::PsiMinus,
                re.as_mut_ptr(),
                im.as_mut_ptr()
            ),
            IhStatus::Ok
        );
        ih_attempt_free(handle);

        let settings = [0.0, 90.0, 45.0, 135.0];
        let mut s = 0.0;
        assert_eq!(
            ih_chsh_analytic(re.as_ptr(), im.as_ptr(), settings.as_ptr(), &mut s),
            IhStatus::Ok
        );
        assert!((s.abs() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-10);

        let mut estimate = IhChshEstimate {
            s_estimate: 0.0,
            std_error: 0.0,
        };
        assert_eq!(
            ih_chsh_monte_carlo(
                re.as_ptr(),
                im.as_ptr(),
                settings.as_ptr(),
                100_000,
                5,
                &mut estimate
            ),
            IhStatus::Ok
        );
        assert!((estimate.s_estimate - s).abs() < 4.0 * estimate.std_error);

        let mut rerun = estimate;
        assert_eq!(
            ih_chsh_monte_carlo(
                re.as_ptr(),
                im.as_ptr(),
                settings.as_ptr(),
                100_000,
                5,
                &mut rerun
            ),
            IhStatus::Ok
        );
        assert_eq!(estimate.s_estimate.to_bits(), rerun.s_estimate.to_bits());
    }
}

#[test]
fn timing_and_readout_and_hom() {
    unsafe {
        let scenario = IhScenario {
            x_a: 0.0,
            x_b: 10_000.0,
            x_i: 5_000.0,
            fiber_speed: 2e8,
            excitation_to_choice: 10e-6,
            choice_to_rotation: 3e-6,
            readout_duration: 23e-6,
            excitation_to_emission: 0.0,
        };
        let mut result = IhTimingResult {
            locality_a_passed: false,
            locality_b_passed: false,
            herald_passed: false,
            locality_a_margin_s: 0.0,
            locality_b_margin_s: 0.0,
            herald_margin_s: 0.0,
            max_choice_to_detection_window_s: 0.0,
            min_excitation_to_choice_delay_s: 0.0,
        };
        assert_eq!(ih_timing_validate(&scenario, &mut result), IhStatus::Ok);
        assert!(result.locality_a_passed && result.locality_b_passed && result.herald_passed);
        assert!((result.max_choice_to_detection_window_s - 33.36e-6).abs() < 0.05e-6);

        let model = IhReadoutModel {
            cycling_rate: 1.3e8,
            collection_efficiency: 0.01,
            window_s: 23e-6,
            threshold: 1,
            dark_rate: 0.0,
        };
        let (mut counts, mut error) = (0.0, 0.0);
        assert_eq!(
            ih_readout_counts(&model, &mut counts, &mut error),
            IhStatus::Ok
        );
        assert!((counts - 29.9).abs() < 1e-9);
        assert!(error < 1e-10);

        let mut hom = [0.0; 3];
        assert_eq!(ih_hom(0, -1.0, hom.as_mut_ptr()), IhStatus::Ok);
        assert!(hom[0].abs() < 1e-12);
        assert_eq!(ih_hom(1, -1.0, hom.as_mut_ptr()), IhStatus::Ok);
        assert!((hom[0] - 0.5).abs() < 1e-12);
    }
}
