#include <math.h>
#include <stdio.h>
#include <string.h>

#include "neckstack.h"

#define CHECK(call)                                                   \
    do {                                                              \
        NsStatus s_ = (call);                                         \
        if (s_ != NS_STATUS_OK) {                                     \
            char msg_[256] = {0};                                     \
            ns_last_error_message(msg_, sizeof msg_, NULL);           \
            fprintf(stderr, "%s failed (%d): %s\n", #call, s_, msg_); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    NsBlock *fan = NULL;
    CHECK(ns_block_builtin("fan:n=2", &fan));
    double re, im;
    CHECK(ns_block_residual_force(fan, &re, &im));
    if (fabs(re) > 1e-12 || fabs(im + 0.75) > 1e-12) return 2;

    NsConfiguration *cfg = NULL;
    CHECK(ns_block_configuration(fan, &cfg));
    double dev;
    CHECK(ns_configuration_limit_balance(cfg, &dev));
    if (dev > 1e-10) return 3;

    size_t sizes[3] = {1, 1, 1};
    double pts[6] = {0, 0, 1, 0, 2, 0};
    NsConfiguration *line = NULL;
    CHECK(ns_configuration_new(0, sizes, 3, pts, &line));
    double f[2];
    CHECK(ns_configuration_forces(line, 1, f, 2));
    if (hypot(f[0], f[1]) > 1e-14) return 4;

    NsConfiguration *bad = NULL;
    if (ns_configuration_from_json("{", &bad) != NS_STATUS_INVALID_INPUT) return 5;
    size_t needed = 0;
    ns_last_error_message(NULL, 0, &needed);
    if (needed < 2) return 6;

    printf("ok %s\n", ns_version());
    ns_configuration_free(line);
    ns_configuration_free(cfg);
    ns_block_free(fan);
    return 0;
}
