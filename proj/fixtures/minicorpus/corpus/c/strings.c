#include <ctype.h>

int str_length(const char *s) {
  int n = 0;
  while (s[n] != '\0') {
    n++;
  }
  return n;
}

void str_reverse(char *s) {
  int i = 0;
  int j = str_length(s) - 1;
  while (i < j) {
    char tmp = s[i];
    s[i] = s[j];
    s[j] = tmp;
    i++;
    j--;
  }
}

int str_count_char(const char *s, char c) {
  int count = 0;
  for (int i = 0; s[i] != '\0'; i++) {
    if (s[i] == c) {
      count++;
    }
  }
  return count;
}

void str_upper(char *s) {
  for (; *s; s++) {
    *s = (char)toupper((unsigned char)*s);
  }
}
