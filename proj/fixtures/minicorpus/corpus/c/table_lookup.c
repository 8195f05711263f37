#include <stddef.h>

/* Position of wanted in the ascending table, or -1. */
int locate_entry(const int *table, int count, int wanted) {
  int first = 0;
  int last = count - 1;
  while (first <= last) {
    int middle = (first + last) / 2;
    if (table[middle] < wanted) {
      first = middle + 1;
    } else if (table[middle] == wanted) {
      return middle;
    } else {
      last = middle - 1;
    }
  }
  return -1;
}

int table_contains(const int *table, int count, int wanted) {
  return locate_entry(table, count, wanted) >= 0;
}
