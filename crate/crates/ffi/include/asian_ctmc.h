#ifndef ASIAN_CTMC_H
#define ASIAN_CTMC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ASIAN_OK 0

// Invalid argument or violated precondition.
#define ASIAN_ERR_ARGUMENT 1

// Input outside the domain of the computation.
#define ASIAN_ERR_DOMAIN 2

// Singular matrix or failed numerical method.
#define ASIAN_ERR_NUMERIC 3

// The model could not be turned into a chain.
#define ASIAN_ERR_CONSTRUCTION 4

// Malformed config text or override.
#define ASIAN_ERR_CONFIG 5

// A required pointer was null.
#define ASIAN_ERR_NULL 6

// A string argument was not valid UTF-8.
#define ASIAN_ERR_UTF8 7

// An internal panic was caught.
#define ASIAN_ERR_PANIC 8

// Opaque pricer handle.
typedef struct AsianPricer AsianPricer;

// Price with its inversion diagnostics.
typedef struct AsianPriceResult {
  double price;
  // Error proxy of the numerical inversion, in currency units.
  double error_proxy;
  // Non-zero when the error proxy exceeded the configured tolerance.
  int warning;
  // Final Euler series length; 0 on the zero-strike path.
  size_t series_terms;
  size_t n_states;
} AsianPriceResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a pricer from TOML config text. On success `*out` owns a handle
// that must be released with [`asian_pricer_free`]; on failure it is set
// to null.
//
// # Safety
// `config` must be a NUL-terminated string and `out` a valid pointer.
int asian_pricer_new(const char *config, struct AsianPricer **out);

// Apply one `key.path=value` override, e.g. `"grid.n_states=100"`. The
// pricer is unchanged if the result would be invalid.
//
// # Safety
// `pricer` must come from [`asian_pricer_new`]; `assignment` must be a
// NUL-terminated string.
int asian_pricer_set(struct AsianPricer *pricer, const char *assignment);

// Price the current request. Chains are cached inside the pricer, so
// repricing after a strike change skips the chain construction.
//
// # Safety
// `pricer` must come from [`asian_pricer_new`]; `out` must be valid.
int asian_pricer_price(struct AsianPricer *pricer, struct AsianPriceResult *out);

// Release a pricer. Null is accepted and ignored.
//
// # Safety
// `pricer` must come from [`asian_pricer_new`] and not be used afterwards.
void asian_pricer_free(struct AsianPricer *pricer);

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the thread.
const char *asian_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *asian_ctmc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASIAN_CTMC_H */
