#include <stdio.h>
#include <string.h>
#include "asian_ctmc.h"

static const char *CONFIG =
    "strike = 100.0\n"
    "[model]\nkind = \"mjd\"\nsigma = 0.126349\nlambda = 0.174814\nmu_j = -0.390078\nsigma_j = 0.338796\n"
    "[market]\nspot = 100.0\nrate = 0.0367\nmaturity = 1.0\n"
    "[monitoring]\nkind = \"discrete\"\nn = 12\n";

int main(void) {
    AsianPricer *p = NULL;
    if (asian_pricer_new(CONFIG, &p) != ASIAN_OK) {
        fprintf(stderr, "new: %s\n", asian_last_error_message());
        return 1;
    }
    AsianPriceResult r;
    if (asian_pricer_price(p, &r) != ASIAN_OK) {
        fprintf(stderr, "price: %s\n", asian_last_error_message());
        return 1;
    }
    printf("%.8f %zu\n", r.price, r.n_states);
    int code = asian_pricer_set(p, "model.sigma=-1");
    if (code != ASIAN_ERR_ARGUMENT || strlen(asian_last_error_message()) == 0) {
        fprintf(stderr, "bad override accepted (%d)\n", code);
        return 1;
    }
    asian_pricer_free(p);
    return 0;
}
