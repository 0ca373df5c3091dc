#include <stddef.h>

static size_t length(const char *s) {
  size_t n = 0;
  while (s[n]) ++n;
  return n;
}

long find(const char *hay, const char *needle) {
  size_t h = length(hay), n = length(needle);
  if (n == 0) return 0;
  for (size_t i = 0; i + n <= h; ++i) {
    size_t k = 0;
    while (k < n && hay[i + k] == needle[k]) ++k;
    if (k == n) return (long)i;
  }
  return -1;
}

int main(void) {
  return find("the quick brown fox", "brown") == 10 && find("abc", "d") == -1 ? 0 : 1;
}
