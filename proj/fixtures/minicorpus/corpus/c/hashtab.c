#include <string.h>

#define BUCKETS 101

struct entry {
  const char *key;
  int value;
  int used;
};

unsigned long hash_str(const char *s) {
  unsigned long h = 5381;
  int c;
  while ((c = *s++) != 0) {
    h = ((h << 5) + h) + c;
  }
  return h;
}

int table_put(struct entry *t, const char *key, int value) {
  unsigned long slot = hash_str(key) % BUCKETS;
  for (int probe = 0; probe < BUCKETS; probe++) {
    struct entry *e = &t[(slot + probe) % BUCKETS];
    if (!e->used || strcmp(e->key, key) == 0) {
      e->key = key;
      e->value = value;
      e->used = 1;
      return 1;
    }
  }
  return 0;
}
