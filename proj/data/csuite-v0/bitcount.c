static int popcount_loop(unsigned x) {
  int n = 0;
  while (x) {
    n += x & 1;
    x >>= 1;
  }
  return n;
}

static int popcount_kernighan(unsigned x) {
  int n = 0;
  for (; x; ++n) x &= x - 1;
  return n;
}

static int popcount_table(unsigned x) {
  static const unsigned char nibble[16] = {0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4};
  int n = 0;
  for (int i = 0; i < 8; ++i) n += nibble[(x >> (4 * i)) & 0xF];
  return n;
}

int main(void) {
  for (unsigned x = 0; x < 4096; x += 7) {
    int a = popcount_loop(x), b = popcount_kernighan(x), c = popcount_table(x);
    if (a != b || b != c) return 1;
  }
  return 0;
}
