#ifndef ROCCG_ROCCG_H_
#define ROCCG_ROCCG_H_

#include <stdint.h>

#define ROCCG_API __attribute__((visibility("default")))

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as the command-line exit codes (internal maps to 3
   there). */
typedef enum roccg_status {
  ROCCG_OK = 0,
  ROCCG_ERR_USAGE = 1,
  ROCCG_ERR_INPUT = 2,
  ROCCG_ERR_SOLVER = 3,
  ROCCG_ERR_INTERNAL = 4
} roccg_status;

typedef struct roccg_instance roccg_instance;
typedef struct roccg_model roccg_model;
typedef struct roccg_solution roccg_solution;

ROCCG_API const char* roccg_version(void);

/* Message of the last failed call on this thread; "" after a success. Valid
   until the next call on the same thread. */
ROCCG_API const char* roccg_last_error(void);

/* Runs one pipeline command ("gen", "data", "train", "solve", "bench") with a
   JSON config document. On success *summary_json, when not NULL, receives a
   JSON summary to release with roccg_string_free. */
ROCCG_API roccg_status roccg_run(const char* command, const char* config_json,
                                 int threads, char** summary_json);
ROCCG_API void roccg_string_free(char* s);

/* family: "knapsack" or "capital_budgeting". */
ROCCG_API roccg_status roccg_instance_generate(const char* family, int n, uint64_t seed,
                                               roccg_instance** out);
ROCCG_API roccg_status roccg_instance_load(const char* path, roccg_instance** out);
ROCCG_API roccg_status roccg_instance_save(const roccg_instance* inst, const char* path);
ROCCG_API void roccg_instance_free(roccg_instance* inst);
/* Number of items, or -1 for NULL. */
ROCCG_API int roccg_instance_size(const roccg_instance* inst);

ROCCG_API roccg_status roccg_model_load(const char* path, roccg_model** out);
ROCCG_API void roccg_model_free(roccg_model* model);

/* method: "ml-ccg" (needs a model), "ccg" (knapsack only) or "brute".
   settings_json may be NULL or hold the solver keys of the solve command. */
ROCCG_API roccg_status roccg_solve(const roccg_instance* inst, const roccg_model* model,
                                   const char* method, const char* settings_json,
                                   roccg_solution** out);
ROCCG_API void roccg_solution_free(roccg_solution* sol);
/* Copies the first-stage decision into x[0..len); len must equal its size. */
ROCCG_API roccg_status roccg_solution_x(const roccg_solution* sol, int* x, int len);
ROCCG_API int roccg_solution_size(const roccg_solution* sol);
ROCCG_API double roccg_solution_objective(const roccg_solution* sol);
/* Worst case of x (exact for knapsack, sampled for capital budgeting); NaN
   when the run produced no decision. */
ROCCG_API double roccg_solution_evaluated(const roccg_solution* sol);
ROCCG_API int roccg_solution_iterations(const roccg_solution* sol);
ROCCG_API const char* roccg_solution_termination(const roccg_solution* sol);
/* The solution document as JSON, owned by the solution. */
ROCCG_API const char* roccg_solution_json(const roccg_solution* sol);

/* Exact worst case of a knapsack first stage. */
ROCCG_API roccg_status roccg_evaluate(const roccg_instance* inst, const int* x, int len,
                                      double* value);

#ifdef __cplusplus
}
#endif

#endif /* ROCCG_ROCCG_H_ */
