/* C interface to simtrans-core. Generated by cbindgen; do not edit. */

#ifndef SIMTRANS_H
#define SIMTRANS_H

#include <stdbool.h>
#include <stddef.h>

// Result of a library call. The nonzero values match the exit statuses
// of the `simtrans` command.
typedef enum SimtransStatus {
  SIMTRANS_STATUS_OK = 0,
  // Null pointer, invalid UTF-8 or an index out of range.
  SIMTRANS_STATUS_INVALID_ARGUMENT = 1,
  // Configuration or domain error.
  SIMTRANS_STATUS_CONFIG = 2,
  // No magnitude beyond the separation threshold within the scan cap.
  SIMTRANS_STATUS_SCAN_EXHAUSTED = 3,
  // Order, escalation, precision or slack limits reached.
  SIMTRANS_STATUS_CAP_EXCEEDED = 4,
  // At least one certificate failed re-verification.
  SIMTRANS_STATUS_VERIFICATION_FAILED = 5,
  // The library or ledger cannot serve the requested extraction.
  SIMTRANS_STATUS_EXTRACTION_INFEASIBLE = 6,
  // File or archive error.
  SIMTRANS_STATUS_IO = 7,
  // The library panicked; the handle arguments should be discarded.
  SIMTRANS_STATUS_INTERNAL = 8,
} SimtransStatus;

// A parsed and validated run configuration.
typedef struct SimtransConfig SimtransConfig;

// A built or loaded series with its ledger and configuration.
typedef struct SimtransSeries SimtransSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread, or null. The
// string stays valid until the next call into the library on this thread.
const char *simtrans_last_error(void);

// Parses a TOML run configuration.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum SimtransStatus simtrans_config_parse(const char *toml, struct SimtransConfig **out);

// Releases a configuration; null is ignored.
//
// # Safety
// `config` must come from [`simtrans_config_parse`] and not be used afterwards.
void simtrans_config_free(struct SimtransConfig *config);

// Builds the configured schedule.
//
// # Safety
// `config` must be a live configuration handle and `out` a valid pointer.
enum SimtransStatus simtrans_build(const struct SimtransConfig *config,
                                   struct SimtransSeries **out);

// Reads a series archive from a file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SimtransStatus simtrans_series_load(const char *path, struct SimtransSeries **out);

// Parses a series archive from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum SimtransStatus simtrans_series_from_json(const char *json, struct SimtransSeries **out);

// Writes the series archive to a file.
//
// # Safety
// `series` must be a live handle and `path` a NUL-terminated string.
enum SimtransStatus simtrans_series_save(const struct SimtransSeries *series, const char *path);

// The archive as JSON; release the string with [`simtrans_string_free`].
//
// # Safety
// `series` must be a live handle and `out` a valid pointer.
enum SimtransStatus simtrans_series_to_json(const struct SimtransSeries *series, char **out);

// Releases a string returned by the library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void simtrans_string_free(char *s);

// Releases a series; null is ignored.
//
// # Safety
// `series` must come from this library and not be used afterwards.
void simtrans_series_free(struct SimtransSeries *series);

// Number of certificates in the ledger, 0 for null.
//
// # Safety
// `series` must be null or a live handle.
size_t simtrans_series_certificate_count(const struct SimtransSeries *series);

// Number of polynomial increments, 0 for null.
//
// # Safety
// `series` must be null or a live handle.
size_t simtrans_series_increment_count(const struct SimtransSeries *series);

// Evaluates the series at `re + i im`.
//
// # Safety
// `series` must be a live handle; `out_re` and `out_im` valid pointers.
enum SimtransStatus simtrans_series_eval(const struct SimtransSeries *series,
                                         double re,
                                         double im,
                                         double *out_re,
                                         double *out_im);

// Re-verifies certificate `index` (0-based) on a `grid x grid` mesh and
// stores the sampled sup and whether it is below `1/N`.
//
// # Safety
// `series` must be a live handle; `measured` and `passed` valid pointers.
enum SimtransStatus simtrans_series_verify_one(const struct SimtransSeries *series,
                                               size_t index,
                                               size_t grid,
                                               double *measured,
                                               bool *passed);

// Re-verifies every certificate; returns `VerificationFailed` when any
// fails and stores the number of failures in `failed` when non-null.
//
// # Safety
// `series` must be a live handle; `failed` null or a valid pointer.
enum SimtransStatus simtrans_series_verify(const struct SimtransSeries *series,
                                           size_t grid,
                                           size_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMTRANS_H */
