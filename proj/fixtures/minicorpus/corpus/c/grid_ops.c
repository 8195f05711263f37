#include <stdio.h>

#define DIM 8

/* Fill a DIM x DIM grid with a constant. */
void grid_fill(double g[DIM][DIM], int size, double value) {
  for (int r = 0; r < size; r++) {
    for (int s = 0; s < size; s++) {
      g[r][s] = value;
    }
  }
}

/* Combine two grids into out; the middle loop runs over the shared index. */
void grid_combine(double lhs[DIM][DIM], double rhs[DIM][DIM], double out[DIM][DIM], int size) {
  for (int r = 0; r < size; r++) {
    for (int s = 0; s < size; s++) {
      out[r][s] = 0.0;
    }
    for (int t = 0; t < size; t++) {
      for (int s = 0; s < size; s++) {
        out[r][s] = out[r][s] + lhs[r][t] * rhs[t][s];
      }
    }
  }
}

void grid_print(double g[DIM][DIM], int size) {
  for (int r = 0; r < size; r++) {
    for (int s = 0; s < size; s++) {
      printf("%6.2f ", g[r][s]);
    }
    printf("\n");
  }
}
