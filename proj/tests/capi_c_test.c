#include <stdio.h>

#include "roccg/roccg.h"

/* The header must compile as C; exercises a handle round trip. */
int main(void) {
  roccg_instance* inst = NULL;
  roccg_solution* sol = NULL;
  int x[3];
  if (roccg_instance_generate("knapsack", 3, 7, &inst) != ROCCG_OK) return 1;
  if (roccg_solve(inst, NULL, "brute", NULL, &sol) != ROCCG_OK) return 2;
  if (roccg_solution_x(sol, x, 3) != ROCCG_OK) return 3;
  printf("%d %d %d %g\n", x[0], x[1], x[2], roccg_solution_objective(sol));
  roccg_solution_free(sol);
  roccg_instance_free(inst);
  return 0;
}
