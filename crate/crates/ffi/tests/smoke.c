#include <stdio.h>
#include <string.h>

#include "ljet.h"

static const char *EXAMPLE4 =
    "{\"order\": 2, \"equation\": {\"rhs\": \"-t^2/(4*v^3) - v - 1/(2*v)\"},"
    " \"lambda\": \"t/v^2\", \"vector_field\": {\"rho\": \"0\", \"psi\": \"v\"}}";

int main(void) {
    LjetProblem *problem = NULL;
    if (ljet_problem_from_json(EXAMPLE4, &problem) != LJET_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", ljet_last_error());
        return 1;
    }
    char *report = NULL;
    LjetStatus s = ljet_run(problem, "chi", NULL, &report);
    if (s != LJET_STATUS_OK || strstr(report, "\"chi\":\"-2\"") == NULL) {
        fprintf(stderr, "chi: %d %s\n", (int)s, report ? report : "(null)");
        return 1;
    }
    ljet_string_free(report);

    LjetExpr *e = NULL, *d = NULL;
    if (ljet_expr_parse_in(problem, "t/v^2", &e) != LJET_STATUS_OK) {
        return 1;
    }
    ljet_expr_total_derivative(e, &d);
    char *text = ljet_expr_to_string(d);
    const char *names[] = {"t", "v", "v1"};
    double values[] = {1.0, 2.0, 3.0};
    double x = 0.0;
    ljet_expr_eval(d, names, values, 3, &x);
    printf("%s = %g\n", text, x);
    int ok = x > -0.5 - 1e-12 && x < -0.5 + 1e-12;
    ljet_string_free(text);
    ljet_expr_free(d);
    ljet_expr_free(e);
    ljet_problem_free(problem);
    return ok ? 0 : 1;
}
