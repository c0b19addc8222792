#include <math.h>
#include <stdio.h>
#include "qdeform.h"

static int fails = 0;

static void check(int ok, const char *what) {
    if (!ok) {
        fprintf(stderr, "FAIL %s: %s\n", what, qd_last_error());
        fails++;
    }
}

int main(void) {
    double v = 0.0;
    check(fabs(qd_q_number(3, 2.0) - 7.0) < 1e-14, "q_number");
    check(qd_q_exponential(1.0, 1.0, &v) == QD_STATUS_OK && fabs(v - exp(1.0)) < 1e-14, "q_exponential");
    check(qd_q_exponential(2.0, 0.5, &v) == QD_STATUS_CONVERGENCE, "radius error");

    QdIsoMap map;
    check(qd_map_to_q(10.0, 1.0, 2, &map) == QD_STATUS_OK && fabs(map.q - 7.0 / 6.0) < 1e-15, "map_to_q");
    check(qd_map_to_q(10.0, 0.0, 2, &map) == QD_STATUS_DOMAIN, "map domain");

    QdModel model = qd_model_qosc(1.2, 1.0);
    double times[3] = {0.0, 1.0, 2.0};
    QdTimeSeries *ts = NULL;
    check(qd_evolve_q(model, 0.8, 0.0, 0, 0, times, 3, 1e-12, &ts) == QD_STATUS_OK, "evolve_q");
    double t, re, im;
    check(qd_time_series_get(ts, 2, &t, &re, &im) == QD_STATUS_OK && re == 1.0 && im == 0.0, "normalization");
    check(qd_time_series_get(ts, 3, &t, &re, &im) == QD_STATUS_INDEX, "series index");
    qd_time_series_free(ts);

    QdOperator *h = NULL, *lam = NULL, *c = NULL;
    check(qd_operator_hamiltonian(model, 8, &h) == QD_STATUS_OK, "hamiltonian");
    check(qd_operator_lambda(model, 1, 0, 8, &lam) == QD_STATUS_OK, "lambda");
    check(qd_operator_commutator(h, lam, &c) == QD_STATUS_OK, "commutator");
    check(qd_operator_entry(c, 1, 0, &re, &im) == QD_STATUS_OK && fabs(re - 1.0) < 1e-15, "entry");
    qd_operator_free(c);
    qd_operator_free(lam);
    qd_operator_free(h);

    check(qd_q_factorial_ln(3, 2.0, NULL) == QD_STATUS_NULL_POINTER, "null out");
    printf("qdeform %s: %d failures\n", qd_version(), fails);
    return fails != 0;
}
