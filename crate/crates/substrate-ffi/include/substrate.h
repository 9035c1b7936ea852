#ifndef SUBSTRATE_H
#define SUBSTRATE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SubstrateStatus {
  SUBSTRATE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SUBSTRATE_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not UTF-8.
   */
  SUBSTRATE_STATUS_INVALID_UTF8 = 2,
  /**
   * The input was rejected (unknown rule, malformed pattern, bad parameter, ...).
   */
  SUBSTRATE_STATUS_INVALID = 3,
  /**
   * A cap was reached; the report handle, if any, carries the partial result.
   */
  SUBSTRATE_STATUS_INCONCLUSIVE = 4,
  /**
   * An internal error; the library state is unaffected.
   */
  SUBSTRATE_STATUS_INTERNAL = 5,
} SubstrateStatus;

typedef struct SubstratePattern SubstratePattern;

typedef struct SubstrateReport SubstrateReport;

typedef struct SubstrateRule SubstrateRule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *substrate_version(void);

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *substrate_last_error(void);

/**
 * Looks up a built-in symbolic rule.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SubstrateStatus substrate_rule_builtin(const char *name, struct SubstrateRule **out);

/**
 * Parses a symbolic rule from TOML text.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SubstrateStatus substrate_rule_from_toml(const char *text, struct SubstrateRule **out);

/**
 * Dimension of the rule, or 0 for a null handle.
 *
 * # Safety
 * `rule` must be null or a live handle.
 */
uint32_t substrate_rule_dim(const struct SubstrateRule *rule);

/**
 * Number of letters, or 0 for a null handle.
 *
 * # Safety
 * `rule` must be null or a live handle.
 */
uint32_t substrate_rule_alphabet_size(const struct SubstrateRule *rule);

/**
 * # Safety
 * `rule` must be null or a handle not yet freed.
 */
void substrate_rule_free(struct SubstrateRule *rule);

/**
 * Builds a pattern from a description such as `P_A`, `const:a`, `periodic:a.b` or `fixed:0`.
 *
 * # Safety
 * `rule` must be a live handle, `spec` a valid NUL-terminated string and `out` a valid pointer.
 */
enum SubstrateStatus substrate_pattern_new(const struct SubstrateRule *rule,
                                           const char *spec,
                                           uint32_t seed_power,
                                           struct SubstratePattern **out);

/**
 * The letter index at cell `(x0, x1)`; `x1` is ignored in 1-D.
 *
 * # Safety
 * `pattern` must be a live handle and `out` a valid pointer.
 */
enum SubstrateStatus substrate_pattern_value(const struct SubstratePattern *pattern,
                                             int64_t x0,
                                             int64_t x1,
                                             uint8_t *out);

/**
 * # Safety
 * `pattern` must be null or a handle not yet freed.
 */
void substrate_pattern_free(struct SubstratePattern *pattern);

/**
 * Pre-images of the pattern under `σ^power`; the report count is the fibre size.
 *
 * The space is the admitted language when the pattern looks admitted, else its own hull.
 *
 * # Safety
 * `pattern` must be a live handle and `out` a valid pointer.
 */
enum SubstrateStatus substrate_fibre(const struct SubstratePattern *pattern,
                                     uint32_t power,
                                     struct SubstrateReport **out);

/**
 * Period group of the pattern; the report count is the rank of its discrete part.
 *
 * # Safety
 * `pattern` must be a live handle and `out` a valid pointer.
 */
enum SubstrateStatus substrate_periods(const struct SubstratePattern *pattern,
                                       int64_t norm_bound,
                                       struct SubstrateReport **out);

/**
 * Recognisability radius of the admitted language; the report count is the radius.
 *
 * # Safety
 * `rule` must be a live handle and `out` a valid pointer.
 */
enum SubstrateStatus substrate_recognise(const struct SubstrateRule *rule,
                                         int64_t cap,
                                         struct SubstrateReport **out);

/**
 * Runs the acceptance criteria matching `only` (an id or tag; null for all). The report count
 * is the number of criteria passed; the status is `OK` even when some fail.
 *
 * # Safety
 * `only` must be null or a valid NUL-terminated string, and `out` a valid pointer.
 */
enum SubstrateStatus substrate_verify(const char *only, struct SubstrateReport **out);

/**
 * `OK` or `INCONCLUSIVE`; `NULL_ARGUMENT` for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
enum SubstrateStatus substrate_report_status(const struct SubstrateReport *report);

/**
 * The headline number of the report, or -1 when there is none.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int64_t substrate_report_count(const struct SubstrateReport *report);

/**
 * The report as JSON, owned by the handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
const char *substrate_report_json(const struct SubstrateReport *report);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void substrate_report_free(struct SubstrateReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBSTRATE_H */
