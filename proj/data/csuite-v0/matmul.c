#define N 8

static void matmul(const double a[N][N], const double b[N][N], double c[N][N]) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double s = 0;
      for (int k = 0; k < N; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
}

int main(void) {
  double a[N][N], b[N][N], c[N][N];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      a[i][j] = i + j;
      b[i][j] = i == j;
    }
  matmul(a, b, c);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (c[i][j] != a[i][j]) return 1;
  return 0;
}
