static void bubblesort(int *a, int n) {
  for (int i = 0; i < n - 1; ++i) {
    int swapped = 0;
    for (int j = 0; j < n - 1 - i; ++j) {
      if (a[j] > a[j + 1]) {
        int t = a[j];
        a[j] = a[j + 1];
        a[j + 1] = t;
        swapped = 1;
      }
    }
    if (!swapped) break;
  }
}

int main(void) {
  int a[16];
  unsigned s = 12345;
  for (int i = 0; i < 16; ++i) {
    s = s * 1103515245u + 12345u;
    a[i] = (int)(s >> 16) % 1000;
  }
  bubblesort(a, 16);
  for (int i = 1; i < 16; ++i)
    if (a[i - 1] > a[i]) return 1;
  return 0;
}
