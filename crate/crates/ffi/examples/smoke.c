/* Minimal C consumer of the ionherald C ABI.
 *
 * Build from the repository root:
 *   cargo build -p ionherald-ffi
 *   cc -std=c99 -I crates/ffi/include crates/ffi/examples/smoke.c \
 *      -L target/debug -lionherald_ffi -lm -o smoke
 *   LD_LIBRARY_PATH=target/debug ./smoke
 */
#include <stdio.h>
#include <math.h>
#include "ionherald.h"

int main(void) {
    printf("version: %s\n", ih_version());

    IhCavityFigures figures;
    if (ih_cavity_scan_length(NULL, 3e-3, &figures) != IH_STATUS_OK) return 1;
    printf("p_cav(3mm) = %.6f finesse = %.0f\n", figures.p_cav, figures.finesse_pi);
    if (fabs(figures.p_cav - 0.01) / 0.01 > 0.15) return 2;

    IhAttemptConfig config = {
        .distance_km = 0.0, .attenuation_db_per_km = 0.0,
        .phase_a_rad = 0.0, .phase_b_rad = 0.0,
        .temporal_offset_bins = 0, .overlap = -1.0,
        .amplitude_asymmetry = 1.0, .compensate = true,
        .detector_eta = 1.0, .dark_count_prob = 0.0, .number_resolving = true,
    };
    IhAttempt *attempt = NULL;
    if (ih_attempt_run(&config, &attempt) != IH_STATUS_OK) return 3;
    double p = 0.0;
    ih_attempt_probability(attempt, IH_HERALD_CLASS_PSI_MINUS, &p);
    printf("P(psi-) = %.4f\n", p);
    if (fabs(p - 0.25) > 1e-10) return 4;

    double re[16], im[16];
    ih_attempt_ion_state(attempt, IH_HERALD_CLASS_PSI_MINUS, re, im);
    ih_attempt_free(attempt);

    double settings[4] = {0.0, 90.0, 45.0, 135.0};
    double s = 0.0;
    if (ih_chsh_analytic(re, im, settings, &s) != IH_STATUS_OK) return 5;
    printf("S = %.7f\n", s);
    if (fabs(fabs(s) - 2.0 * sqrt(2.0)) > 1e-10) return 6;

    double bad = 0.0;
    if (ih_cavity_p_cav(-1.0, 1.0, 1.0, &bad) != IH_STATUS_INVALID_ARGUMENT) return 7;
    char *msg = ih_last_error_message();
    printf("error message: %s\n", msg);
    ih_string_free(msg);
    return 0;
}
