/* Exercises the public header end to end: build a dataset, screen it with
 * the fixed and adaptive methods, and read every accessor. Exits nonzero
 * with a message on the first unexpected status. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "airholp.h"

#define CHECK(expr)                                                        \
    do {                                                                   \
        AirholpStatus status_ = (expr);                                    \
        if (status_ != AIRHOLP_STATUS_OK) {                                \
            fprintf(stderr, "%s -> %d: %s\n", #expr, (int)status_,         \
                    airholp_last_error_message());                         \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    /* 6 rows, 4 columns, row-major; the response is twice column 0. */
    double x[] = {
        1.0, 0.3,  -0.2, 0.5,  /* row 0 */
        2.0, -0.1, 0.4,  0.6,  /* row 1 */
        3.0, 0.2,  -0.3, 0.4,  /* row 2 */
        4.0, -0.2, 0.1,  0.7,  /* row 3 */
        5.0, 0.1,  0.2,  0.3,  /* row 4 */
        6.0, -0.3, -0.1, 0.8,  /* row 5 */
    };
    double y[] = {2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
    size_t n = 6, p = 4, m = 2;

    AirholpDataset *ds = NULL;
    CHECK(airholp_dataset_new(n, p, x, y, true, &ds));
    if (airholp_dataset_n(ds) != n || airholp_dataset_p(ds) != p) {
        fprintf(stderr, "dataset shape mismatch\n");
        return 1;
    }

    AirholpResult *ridge = NULL;
    CHECK(airholp_screen_ridge_holp(ds, 10.0, m, &ridge));
    size_t ranking[4];
    CHECK(airholp_result_ranking(ridge, ranking, p));
    if (ranking[0] != 0) {
        fprintf(stderr, "expected feature 0 to rank first, got %zu\n", ranking[0]);
        return 1;
    }
    double scores[4];
    CHECK(airholp_result_scores(ridge, scores, p));
    for (size_t j = 0; j < p; j++) {
        if (!isfinite(scores[j])) {
            fprintf(stderr, "score %zu is not finite\n", j);
            return 1;
        }
    }
    airholp_result_free(ridge);

    AirholpAirOptions opts = airholp_air_options_default();
    AirholpResult *adaptive = NULL;
    AirholpTrace *trace = NULL;
    CHECK(airholp_screen_air_holp(ds, &opts, m, &adaptive, &trace));
    size_t path_len = airholp_trace_len(trace);
    if (path_len != airholp_trace_iterations(trace) + 1) {
        fprintf(stderr, "trace length %zu disagrees with iteration count\n", path_len);
        return 1;
    }
    double *path = malloc(path_len * sizeof(double));
    CHECK(airholp_trace_penalties(trace, path, path_len));
    if (path[path_len - 1] != airholp_trace_final_penalty(trace)) {
        fprintf(stderr, "penalty path end disagrees with the final penalty\n");
        return 1;
    }
    free(path);

    size_t screened[2];
    CHECK(airholp_result_screened(adaptive, screened, m));
    if (screened[0] != 0) {
        fprintf(stderr, "adaptive screen lost the true feature\n");
        return 1;
    }

    airholp_trace_free(trace);
    airholp_result_free(adaptive);
    airholp_dataset_free(ds);

    /* Error reporting must classify a bad penalty and describe it. */
    CHECK(airholp_dataset_new(n, p, x, y, true, &ds));
    AirholpResult *bad = NULL;
    if (airholp_screen_ridge_holp(ds, -1.0, m, &bad) != AIRHOLP_STATUS_INVALID_ARGUMENT) {
        fprintf(stderr, "negative penalty was not rejected\n");
        return 1;
    }
    airholp_dataset_free(ds);

    printf("ok %s\n", airholp_version());
    return 0;
}
