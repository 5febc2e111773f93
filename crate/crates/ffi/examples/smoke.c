/* Minimal C consumer of polycycle.h. Exits non-zero on any mismatch. */
#include <stdio.h>
#include <string.h>

#include "polycycle.h"

#define CHECK(cond)                                                     \
  do {                                                                  \
    if (!(cond)) {                                                      \
      const char *e = pc_last_error();                                  \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,    \
              e ? e : "no error");                                      \
      return 1;                                                         \
    }                                                                   \
  } while (0)

int main(void) {
  PcMap *collatz = NULL;
  CHECK(pc_map_builtin("collatz", &collatz) == PC_STATUS_OK);

  char *value = NULL;
  PcBranch branch;
  CHECK(pc_map_eval(collatz, "3", &value, &branch) == PC_STATUS_OK);
  CHECK(strcmp(value, "10") == 0 && branch == PC_BRANCH_NON_DIVISIBLE);
  pc_string_free(value);

  PcCycle *cycle = NULL;
  CHECK(pc_cycle_new(collatz, "4,2,1", &cycle) == PC_STATUS_OK);
  CHECK(pc_cycle_len(cycle) == 3);
  char *first = NULL;
  CHECK(pc_cycle_member(cycle, 0, &first) == PC_STATUS_OK);
  CHECK(strcmp(first, "1") == 0);
  pc_string_free(first);

  PcOutcome outcome;
  CHECK(pc_verify(collatz, cycle, PC_CHECK_EQ1, &outcome, NULL) == PC_STATUS_OK);
  CHECK(outcome == PC_OUTCOME_PASS);
  pc_cycle_free(cycle);

  CHECK(pc_cycle_new(collatz, "1,4,3", &cycle) == PC_STATUS_NOT_A_CYCLE);
  CHECK(pc_last_error() != NULL);

  char *residual = NULL;
  CHECK(pc_padic_residual(collatz, "3", 64, &residual) == PC_STATUS_OK);
  CHECK(strcmp(residual, "0") == 0);
  pc_string_free(residual);

  PcSearchResult *result = NULL;
  CHECK(pc_search(collatz, -100, -1, 4, 0, &result) == PC_STATUS_OK);
  CHECK(pc_search_result_cycle_count(result) == 3);
  CHECK(pc_search_result_unresolved(result) == 0);
  pc_search_result_free(result);

  pc_map_free(collatz);
  puts("ok");
  return 0;
}
