#define V 8
#define INF 1000000

static int shortest(const int g[V][V], int src, int dst) {
  int dist[V], done[V];
  for (int i = 0; i < V; ++i) {
    dist[i] = INF;
    done[i] = 0;
  }
  dist[src] = 0;
  for (int round = 0; round < V; ++round) {
    int u = -1;
    for (int i = 0; i < V; ++i)
      if (!done[i] && (u < 0 || dist[i] < dist[u])) u = i;
    if (u < 0 || dist[u] == INF) break;
    done[u] = 1;
    for (int v = 0; v < V; ++v)
      if (g[u][v] && dist[u] + g[u][v] < dist[v]) dist[v] = dist[u] + g[u][v];
  }
  return dist[dst];
}

int main(void) {
  int g[V][V] = {{0}};
  for (int i = 0; i + 1 < V; ++i) g[i][i + 1] = g[i + 1][i] = 2;
  g[0][V - 1] = g[V - 1][0] = 20;
  return shortest(g, 0, V - 1) == 2 * (V - 1) ? 0 : 1;
}
