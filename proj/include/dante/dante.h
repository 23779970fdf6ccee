#ifndef DANTE_DANTE_H
#define DANTE_DANTE_H

#include <stddef.h>

#if defined(_WIN32)
#define DANTE_API __declspec(dllexport)
#else
#define DANTE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dante_status {
  DANTE_OK = 0,
  DANTE_ERR_CONFIG = 1,   /* invalid key, value or combination */
  DANTE_ERR_RUNTIME = 2,  /* solver failure, e.g. inner-loop cap exceeded */
  DANTE_ERR_IO = 3,       /* file could not be read or written */
  DANTE_ERR_ARGUMENT = 4  /* null handle, bad index, buffer too small */
} dante_status;

typedef struct dante_config dante_config;
typedef struct dante_run dante_run;

DANTE_API const char* dante_version(void);

/* Message of the last failed call on this thread; "" if none. */
DANTE_API const char* dante_last_error(void);

/* Recognized configuration keys, for building flag parsers. */
DANTE_API size_t dante_config_key_count(void);
/* Name, value kind ("real", "count", "text", "list", "matrix" or the choices joined by '|') and help of key `index`. */
DANTE_API dante_status dante_config_key_info(size_t index, const char** name, const char** kind, const char** help);

DANTE_API dante_status dante_config_create(dante_config** out);
DANTE_API dante_status dante_config_clone(const dante_config* config, dante_config** out);
DANTE_API void dante_config_destroy(dante_config* config);
DANTE_API dante_status dante_config_set(dante_config* config, const char* key, const char* value);
DANTE_API dante_status dante_config_load_file(dante_config* config, const char* path);

/*
 * Copies the value of `key` into `buffer` (NUL-terminated). `*length`
 * receives the string length without the terminator. A NULL buffer only
 * queries the length. Unset keys give DANTE_ERR_CONFIG.
 */
DANTE_API dante_status dante_config_get(const dante_config* config, const char* key, char* buffer, size_t capacity,
                                        size_t* length);

/* Runs the configured experiment. Writes nothing to disk. */
DANTE_API dante_status dante_run_execute(const dante_config* config, dante_run** out);
DANTE_API void dante_run_destroy(dante_run* run);

DANTE_API dante_status dante_run_outer_iterations(const dante_run* run, size_t* out);
/* Numeric summary entry by name (as written to summary.txt). */
DANTE_API dante_status dante_run_summary_value(const dante_run* run, const char* name, double* out);
/*
 * Final averaged point w_bar_N. With a NULL `values`, only `*length` is set.
 */
DANTE_API dante_status dante_run_final_point(const dante_run* run, double* values, size_t capacity, size_t* length);
/* trace.csv, summary.txt and images into `directory` (created if needed). */
DANTE_API dante_status dante_run_write(const dante_run* run, const char* directory);

typedef void (*dante_verify_callback)(const char* name, int passed, const char* detail, double seconds,
                                      void* user_data);

/*
 * Runs the acceptance checks; `only` selects a comma-separated subset (NULL
 * or "" for all). `c1_override` is used when `use_c1_override` is nonzero.
 * `*failures` receives the number of failed checks.
 */
DANTE_API dante_status dante_verify(const char* only, int use_c1_override, double c1_override,
                                    dante_verify_callback callback, void* user_data, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* DANTE_DANTE_H */
