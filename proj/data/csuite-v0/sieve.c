#define LIMIT 1000

int count_primes(void) {
  static char composite[LIMIT + 1];
  int count = 0;
  for (int i = 2; i <= LIMIT; ++i) {
    if (composite[i]) continue;
    ++count;
    for (int j = i * i; j <= LIMIT; j += i) composite[j] = 1;
  }
  return count;
}

int main(void) { return count_primes() == 168 ? 0 : 1; }
