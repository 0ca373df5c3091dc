static unsigned long fib_rec(unsigned n) { return n < 2 ? n : fib_rec(n - 1) + fib_rec(n - 2); }

static unsigned long fib_iter(unsigned n) {
  unsigned long a = 0, b = 1;
  while (n--) {
    unsigned long t = a + b;
    a = b;
    b = t;
  }
  return a;
}

int main(void) {
  for (unsigned i = 0; i < 20; ++i)
    if (fib_rec(i) != fib_iter(i)) return 1;
  return 0;
}
