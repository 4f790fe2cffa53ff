#ifndef HYPERFLOW_H
#define HYPERFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. The first four agree with the command-line exit codes.
typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NOT_REFINES = 1,
  // Parse, elaboration or other input errors.
  HF_STATUS_INVALID = 2,
  // State spaces or dimensions do not agree.
  HF_STATUS_MISMATCH = 3,
  HF_STATUS_NULL_ARGUMENT = 4,
  // A string argument is not UTF-8.
  HF_STATUS_UTF8 = 5,
  // A panic was caught at the boundary.
  HF_STATUS_INTERNAL = 6,
} HfStatus;

// A hyper-distribution.
typedef struct HfHyper HfHyper;

// An elaborated program with its selected prior.
typedef struct HfProgram HfProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread.
const char *hf_last_error(void);

// Parses and elaborates program text.
enum HfStatus hf_program_parse(const char *src, struct HfProgram **out);

void hf_program_free(struct HfProgram *p);

// Number of states of the program.
size_t hf_program_states(const struct HfProgram *p);

// Runs the program. `prior` is a prior expression such as `(1/2, 1/2)` or
// a name, or null for the program's own prior.
enum HfStatus hf_program_run(const struct HfProgram *p, const char *prior, struct HfHyper **out);

// Expected loss after the program, as an exact `p/q` string to be released
// with [`hf_string_free`]. `loss` is the text of a loss file.
enum HfStatus hf_wp(const struct HfProgram *p, const char *loss, const char *prior, char **out);

// `Ok` when `imp` leaks no more than `spec`, `NotRefines` otherwise.
enum HfStatus hf_refines(const struct HfHyper *spec, const struct HfHyper *imp);

// Number of inners.
size_t hf_hyper_len(const struct HfHyper *h);

// JSON array of `{"inner": {label: "p/q"}, "outer": "p/q"}` objects.
enum HfStatus hf_hyper_to_json(const struct HfHyper *h, char **out);

void hf_hyper_free(struct HfHyper *h);

void hf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERFLOW_H */
