#ifndef SDMC_H
#define SDMC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Verification method selector.
 */
typedef enum SdmcMethod {
  /**
   * Flatten the diagram and run the classical fixpoint.
   */
  SDMC_METHOD_MONOLITHIC = 0,
  /**
   * Compose per-leaf solutions bottom-up.
   */
  SDMC_METHOD_BOTTOMUP = 1,
  /**
   * Build the explicit shortcut graph.
   */
  SDMC_METHOD_SHORTCUT = 2,
  /**
   * Iterative strategy refinement (the production method).
   */
  SDMC_METHOD_REFINE = 3,
} SdmcMethod;

/**
 * An opaque parsed diagram.
 */
typedef struct SdmcDiagram SdmcDiagram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Status code of the most recent failing call on this thread: 0 none, 2
 * validation error, 3 size guard, 4 internal invariant violation, 5 bad
 * argument.
 */
int sdmc_last_error_code(void);

/**
 * Message of the most recent failing call on this thread; the pointer
 * stays valid until the next failing call on the same thread. Null when
 * no error is pending.
 */
const char *sdmc_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *sdmc_version(void);

/**
 * Parses a diagram from the text file format. Returns null on error.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string.
 */
struct SdmcDiagram *sdmc_diagram_parse(const char *text);

/**
 * Releases a diagram handle; null is ignored.
 *
 * # Safety
 * `d` must be a pointer returned by `sdmc_diagram_parse`, not yet freed.
 */
void sdmc_diagram_free(struct SdmcDiagram *d);

/**
 * Number of component entrances (one verdict slot each).
 *
 * # Safety
 * `d` must be a live handle from `sdmc_diagram_parse`.
 */
uintptr_t sdmc_entrance_count(const struct SdmcDiagram *d);

/**
 * Key `name#occ:idx` of the component entrance at one ordinal, as a
 * caller-owned string; null when the ordinal is out of range.
 *
 * # Safety
 * `d` must be a live handle from `sdmc_diagram_parse`.
 */
char *sdmc_entrance_key(const struct SdmcDiagram *d, uintptr_t ordinal);

/**
 * Is the component entrance at this ordinal a global entrance of the
 * diagram?
 *
 * # Safety
 * `d` must be a live handle from `sdmc_diagram_parse`.
 */
bool sdmc_entrance_is_global(const struct SdmcDiagram *d, uintptr_t ordinal);

/**
 * Decides the almost-sure Büchi objective for every component entrance
 * and writes one verdict per ordinal into `verdicts`. `len` must equal
 * `sdmc_entrance_count`. Returns 0 on success.
 *
 * # Safety
 * `d` must be a live handle and `verdicts` must point to `len` writable
 * booleans.
 */
int sdmc_check(const struct SdmcDiagram *d, enum SdmcMethod method, bool *verdicts, uintptr_t len);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from an sdmc function that documents caller ownership.
 */
void sdmc_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SDMC_H */
