#ifndef IONHERALD_H
#define IONHERALD_H

/* This file is generated by cbindgen from the ionherald-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum IhStatus {
  IH_STATUS_OK = 0,
  IH_STATUS_NULL_POINTER = 1,
  IH_STATUS_INVALID_ARGUMENT = 2,
  IH_STATUS_CAPACITY_EXCEEDED = 3,
  IH_STATUS_DIMENSION_MISMATCH = 4,
  IH_STATUS_INSUFFICIENT_DATA = 5,
  IH_STATUS_INFEASIBLE = 6,
  IH_STATUS_INTERNAL = 7,
} IhStatus;

// Herald classes of the partial Bell-state analyzer.
typedef enum IhHeraldClass {
  IH_HERALD_CLASS_PSI_MINUS = 0,
  IH_HERALD_CLASS_PSI_PLUS = 1,
  IH_HERALD_CLASS_PHI_OR_UNUSABLE = 2,
  IH_HERALD_CLASS_NO_HERALD = 3,
} IhHeraldClass;

// Opaque handle over the exact enumeration of one attempt.
typedef struct IhAttempt IhAttempt;

// Rates of the emitting ion.
typedef struct IhIonConstants {
  // Non-cavity loss rate Γ, 1/s.
  double loss_rate;
  // Free-space rate of the cavity-coupled transition, 1/s.
  double transition_rate;
  // Transition wavelength, m.
  double wavelength;
} IhIonConstants;

// Derived cavity figures at the optimal decay rate γ = 2Ω.
typedef struct IhCavityFigures {
  double coupling;
  double gamma_opt;
  double finesse_pi;
  double finesse_4pi;
  double p_cav;
  double wavepacket_s;
} IhCavityFigures;

// Multiplicative factors of the entangled-pair rate.
typedef struct IhBudgetConfig {
  double repetition_rate;
  double p_cav;
  double fiber_coupling;
  double distance_km;
  double attenuation_db_per_km;
  double detector_eta;
  double herald_fraction;
} IhBudgetConfig;

// 1-D experiment geometry and delays, SI units.
typedef struct IhScenario {
  double x_a;
  double x_b;
  double x_i;
  double fiber_speed;
  double excitation_to_choice;
  double choice_to_rotation;
  double readout_duration;
  double excitation_to_emission;
} IhScenario;

// Pass/fail flags and margins of the three timing constraints, plus the
// derived feasibility figures.
typedef struct IhTimingResult {
  bool locality_a_passed;
  bool locality_b_passed;
  bool herald_passed;
  double locality_a_margin_s;
  double locality_b_margin_s;
  double herald_margin_s;
  double max_choice_to_detection_window_s;
  double min_excitation_to_choice_delay_s;
} IhTimingResult;

// Fluorescence readout parameters.
typedef struct IhReadoutModel {
  double cycling_rate;
  double collection_efficiency;
  double window_s;
  uint32_t threshold;
  double dark_rate;
} IhReadoutModel;

// Configuration of one entanglement attempt. Negative `overlap` means
// perfect wavepacket overlap.
typedef struct IhAttemptConfig {
  double distance_km;
  double attenuation_db_per_km;
  double phase_a_rad;
  double phase_b_rad;
  uint8_t temporal_offset_bins;
  double overlap;
  double amplitude_asymmetry;
  bool compensate;
  double detector_eta;
  double dark_count_prob;
  bool number_resolving;
} IhAttemptConfig;

// Finite-statistics CHSH estimate.
typedef struct IhChshEstimate {
  double s_estimate;
  double std_error;
} IhChshEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the underlying simulator, as a static string.
const char *ih_version(void);

// The last error message raised on this thread, or NULL if none. The caller
// frees the string with `ih_string_free`.
char *ih_last_error_message(void);

// Frees a string allocated by this library. NULL is ignored.
//
// # Safety
// `s` must be a pointer previously returned by this library and not yet
// freed.
void ih_string_free(char *s);

// p_cav = 4γΩ²/((γ+Γ)(γΓ+4Ω²)).
//
// # Safety
// `out` must be null or valid for writing one f64. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_cavity_p_cav(double gamma, double loss_rate, double coupling, double *out);

// The p_cav-maximizing cavity decay rate, 2Ω.
//
// # Safety
// `out` must be null or valid for writing one f64. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_cavity_optimal_gamma(double coupling, double *out);

// Dipole element from the free-space decay rate, C·m.
//
// # Safety
// `out` must be null or valid for writing one f64. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_cavity_dipole_from_decay(double transition_rate, double wavelength, double *out);

// Transition-cavity coupling Ω = (D/ħ)√(hc/(2ε₀λV)), rad/s.
//
// # Safety
// `out` must be null or valid for writing one f64. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_cavity_coupling_constant(double dipole,
                                          double wavelength,
                                          double mode_volume,
                                          double *out);

// All optimal-cavity figures for one cavity length, using the confocal mode
// volume. Pass NULL for `ion` to use the built-in Ca⁺ defaults.
//
// # Safety
// `ion` must be null or point to a readable `IhIonConstants`; `out` must be null or writable. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_cavity_scan_length(const struct IhIonConstants *ion,
                                    double length,
                                    struct IhCavityFigures *out);

// Per-photon fiber survival 10^(−dB/km · km/10).
//
// # Safety
// `out` must be null or valid for writing one f64. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_fiber_survival(double distance_km, double db_per_km, double *out);

// Heralded pairs per second for the configured budget.
//
// # Safety
// `config` must be null or readable; `out` must be null or writable. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_pair_rate(const struct IhBudgetConfig *config, double *out);

// Seconds to accumulate `pairs` heralded pairs.
//
// # Safety
// `config` must be null or readable; `out` must be null or writable. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_time_to_pairs(const struct IhBudgetConfig *config, uint64_t pairs, double *out);

// Validates the three lightcone constraints for a scenario.
//
// # Safety
// `scenario` must be null or readable; `out` must be null or writable. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_timing_validate(const struct IhScenario *scenario, struct IhTimingResult *out);

// Expected bright counts and the state-discrimination error.
//
// # Safety
// All pointers must be null or valid for the access performed. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_readout_counts(const struct IhReadoutModel *model,
                                double *expected_counts,
                                double *discrimination_error);

// Runs the exact enumeration for one attempt and returns a handle to the
// per-class results. Free it with `ih_attempt_free`.
//
// # Safety
// `config` must be null or readable; `out` must be null or valid for writing one pointer. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_attempt_run(const struct IhAttemptConfig *config,
                             struct IhAttempt **out);

// Probability of a herald class in the attempt.
//
// # Safety
// `attempt` must be null or a live handle from `ih_attempt_run`; `out` must be null or writable. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_attempt_probability(const struct IhAttempt *attempt,
                                     enum IhHeraldClass class_,
                                     double *out);

// Fidelity of the conditional ion state to the Bell state the class
// heralds. Fails with `IH_STATUS_INVALID_ARGUMENT` for classes that herald
// nothing.
//
// # Safety
// `attempt` must be null or a live handle from `ih_attempt_run`; `out` must be null or writable. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_attempt_fidelity(const struct IhAttempt *attempt,
                                  enum IhHeraldClass class_,
                                  double *out);

// Copies the conditional 4×4 ion density matrix of the class into two
// row-major 16-element arrays.
//
// # Safety
// `attempt` must be null or a live handle; `re` and `im` must be null or valid for writing 16 f64 each. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_attempt_ion_state(const struct IhAttempt *attempt,
                                   enum IhHeraldClass class_,
                                   double *re,
                                   double *im);

// Full herald report as a JSON string (same layout as the CLI's
// herald_report.json `results` array). Free with `ih_string_free`.
//
// # Safety
// `attempt` must be null or a live handle; `out` must be null or valid for writing one pointer. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_attempt_report_json(const struct IhAttempt *attempt,
                                     char **out);

// Releases an attempt handle. NULL is ignored.
//
// # Safety
// `attempt` must be a pointer returned by `ih_attempt_run` and not yet
// freed.
void ih_attempt_free(struct IhAttempt *attempt);

// Analytic S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′) on a 4×4 ion density
// matrix, with the four equatorial setting azimuths in degrees.
//
// # Safety
// `re` and `im` must be null or valid for reading 16 f64 each; `settings_deg` null or 4 readable f64; `out` null or writable. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_chsh_analytic(const double *re,
                               const double *im,
                               const double *settings_deg,
                               double *out);

// Seeded Monte Carlo CHSH experiment; bit-reproducible for a fixed seed.
//
// # Safety
// `re` and `im` must be null or valid for reading 16 f64 each; `settings_deg` null or 4 readable f64; `out` null or writable. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_chsh_monte_carlo(const double *re,
                                  const double *im,
                                  const double *settings_deg,
                                  uint64_t trials,
                                  uint64_t seed,
                                  struct IhChshEstimate *out);

// One photon per port of a symmetric 50/50 splitter. `overlap < 0` means
// perfect overlap. `out` receives {coincidence, bunched-first,
// bunched-second} probabilities.
//
// # Safety
// `out` must be null or valid for writing three f64. Null pointers are
// reported as `IH_STATUS_NULL_POINTER`.
enum IhStatus ih_hom(uint8_t offset_bins, double overlap, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IONHERALD_H */
