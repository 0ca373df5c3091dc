static void swap(int *a, int *b) {
  int t = *a;
  *a = *b;
  *b = t;
}

static int partition(int *a, int lo, int hi) {
  int pivot = a[hi], i = lo;
  for (int j = lo; j < hi; ++j)
    if (a[j] < pivot) swap(&a[i++], &a[j]);
  swap(&a[i], &a[hi]);
  return i;
}

static void quicksort(int *a, int lo, int hi) {
  if (lo >= hi) return;
  int p = partition(a, lo, hi);
  quicksort(a, lo, p - 1);
  quicksort(a, p + 1, hi);
}

int main(void) {
  int a[32];
  unsigned s = 7;
  for (int i = 0; i < 32; ++i) {
    s ^= s << 13;
    s ^= s >> 17;
    s ^= s << 5;
    a[i] = (int)(s % 10000);
  }
  quicksort(a, 0, 31);
  for (int i = 1; i < 32; ++i)
    if (a[i - 1] > a[i]) return 1;
  return 0;
}
