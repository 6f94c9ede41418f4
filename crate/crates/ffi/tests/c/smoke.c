#include <math.h>
#include <stdio.h>
#include "orlicz_polytope.h"

static int check(OpStatus s, const char *what) {
    if (s != OP_STATUS_OK) {
        const char *msg = op_last_error();
        fprintf(stderr, "%s: status %d: %s\n", what, (int)s, msg ? msg : "(none)");
        return 1;
    }
    return 0;
}

int main(void) {
    double v = 0.0;
    if (check(op_ball_volume(2.0, 2, &v), "ball_volume")) return 1;
    if (fabs(v - 3.14159265358979323846) > 1e-12) return 2;

    OpBody *cube = NULL;
    if (check(op_body_new(INFINITY, 10, 1, &cube), "body_new")) return 1;
    double e1[10] = {1.0};
    double est = 0.0;
    if (check(op_expected_support_orlicz(cube, e1, 10, 2, &est), "orlicz")) return 1;
    if (fabs(est - 0.1909830056250712) > 1e-12) return 3;

    OpMcSummary mc;
    if (check(op_expected_support_mc(cube, e1, 10, 2, 100, 1, &mc), "mc")) return 1;
    if (mc.trials != 100 || !(mc.ci_low <= mc.mean && mc.mean <= mc.ci_high)) return 4;

    op_body_free(cube);
    OpBody *bad = NULL;
    if (op_body_new(0.5, 3, 1, &bad) != OP_STATUS_DOMAIN || bad != NULL || op_last_error() == NULL) return 5;

    OpOrlicz *m = NULL;
    if (check(op_orlicz_power(2.0, &m), "power")) return 1;
    double s = 0.0;
    if (check(op_orlicz_invert(m, 4, &s), "invert")) return 1;
    if (fabs(s - 2.0) > 1e-9) return 6;
    op_orlicz_free(m);
    printf("ok %s\n", op_version());
    return 0;
}
