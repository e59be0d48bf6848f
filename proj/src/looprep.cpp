#include "loopforge/looprep.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "loopforge/rng.hpp"

namespace loopforge {

CycleBasis cycle_basis(const CableGraph& g, const std::vector<std::uint8_t>& mask) {
  const int n = g.vertex_count();
  const int m = g.edge_count();
  auto allowed = [&](int e) { return mask.empty() || mask[e] != 0; };

  CycleBasis basis;
  basis.tree.assign(m, 0);
  std::vector<int> parent_edge(n, -1);
  std::vector<int> parent_vertex(n, -1);
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::uint8_t> vertex_allowed(n, 0);
  for (int e = 0; e < m; ++e) {
    if (!allowed(e)) continue;
    ++basis.allowed_edges;
    vertex_allowed[g.edge(e).u] = 1;
    vertex_allowed[g.edge(e).v] = 1;
  }

  int covered = 0;
  for (int root = 0; root < n; ++root) {
    if (seen[root] || !vertex_allowed[root]) continue;
    ++basis.components;
    std::queue<int> q;
    q.push(root);
    seen[root] = 1;
    ++covered;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const auto& [e, w] : g.star(v)) {
        if (!allowed(e) || seen[w]) continue;
        seen[w] = 1;
        ++covered;
        basis.tree[e] = 1;
        parent_edge[w] = e;
        parent_vertex[w] = v;
        q.push(w);
      }
    }
  }
  (void)covered;

  // depth for path reconstruction
  std::vector<int> depth(n, 0);
  {
    // parents form a forest; compute depths by walking up (memoized lazily)
    std::vector<int> stack;
    std::vector<std::uint8_t> done(n, 0);
    for (int v = 0; v < n; ++v) {
      if (!vertex_allowed[v] || done[v]) continue;
      int u = v;
      stack.clear();
      while (u >= 0 && !done[u]) {
        stack.push_back(u);
        u = parent_vertex[u];
      }
      int d = (u >= 0) ? depth[u] : -1;
      while (!stack.empty()) {
        depth[stack.back()] = ++d;
        done[stack.back()] = 1;
        stack.pop_back();
      }
    }
  }

  for (int e = 0; e < m; ++e) {
    if (!allowed(e) || basis.tree[e]) continue;
    std::vector<std::uint8_t> cyc(m, 0);
    cyc[e] = 1;
    int u = g.edge(e).u;
    int v = g.edge(e).v;
    while (u != v) {
      if (depth[u] < depth[v]) std::swap(u, v);
      cyc[parent_edge[u]] ^= 1;
      u = parent_vertex[u];
    }
    basis.cycles.push_back(std::move(cyc));
  }
  return basis;
}

std::vector<std::uint8_t> sample_even_subgraph(const CycleBasis& basis,
                                               std::mt19937_64& rng) {
  std::vector<std::uint8_t> out(basis.tree.size(), 0);
  for (const auto& cyc : basis.cycles) {
    if (uniform01(rng) < 0.5) continue;
    for (std::size_t e = 0; e < out.size(); ++e) out[e] ^= cyc[e];
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> all_even_subgraphs(const CycleBasis& basis) {
  const std::size_t h = basis.cycles.size();
  if (h > 20) throw ConfigError("even-subgraph enumeration limited to h <= 20");
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(std::size_t(1) << h);
  for (std::size_t bits = 0; bits < (std::size_t(1) << h); ++bits) {
    std::vector<std::uint8_t> sub(basis.tree.size(), 0);
    for (std::size_t i = 0; i < h; ++i) {
      if (!(bits & (std::size_t(1) << i))) continue;
      for (std::size_t e = 0; e < sub.size(); ++e) sub[e] ^= basis.cycles[i][e];
    }
    out.push_back(std::move(sub));
  }
  return out;
}

bool is_even_subgraph(const CableGraph& g, const std::vector<std::uint8_t>& mask,
                      const std::vector<int>& sources) {
  std::vector<int> degree(g.vertex_count(), 0);
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!mask[e]) continue;
    ++degree[g.edge(e).u];
    ++degree[g.edge(e).v];
  }
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (std::find(sources.begin(), sources.end(), v) != sources.end()) continue;
    if (degree[v] % 2 != 0) return false;
  }
  return true;
}

CrossingState switch_cycle(const CrossingState& state,
                           const std::vector<std::uint8_t>& cycle) {
  CrossingState out;
  out.open = state.open;
  out.parity = state.parity;
  for (std::size_t e = 0; e < cycle.size(); ++e) {
    if (!cycle[e]) continue;
    if (!state.open[e]) throw CycleLeavesOpenSet();
    out.parity[e] ^= 1;
  }
  return out;
}

namespace {

void check_parity_mean(double m, Parity parity) {
  if (m < 0.0 || !std::isfinite(m)) throw InvalidProbability("mean m must be >= 0");
  if (parity == Parity::odd && m == 0.0) throw OddWithZeroMean();
}

}  // namespace

int conditioned_poisson(double m, Parity parity, std::mt19937_64& rng) {
  check_parity_mean(m, parity);
  if (parity == Parity::none) return static_cast<int>(poisson(rng, m));
  if (m == 0.0) return 0;  // parity even
  if (m > 30.0) {
    // parity classes are near-balanced; plain rejection is cheap and exact
    for (;;) {
      const int n = static_cast<int>(poisson(rng, m));
      if ((n % 2 == 0) == (parity == Parity::even)) return n;
    }
  }
  const int start = parity == Parity::even ? 0 : 1;
  const double z = parity == Parity::even ? std::cosh(m) : std::sinh(m);
  double u = uniform01(rng) * z;
  // terms m^n / n! over the parity class, consecutive ratio m^2/((n+1)(n+2))
  double term = parity == Parity::even ? 1.0 : m;
  int n = start;
  for (;;) {
    if (u < term || n > 10000) return n;
    u -= term;
    term *= m * m / ((n + 1.0) * (n + 2.0));
    n += 2;
  }
}

double poisson_parity_pmf(int n, double m, Parity parity) {
  check_parity_mean(m, parity);
  if (n < 0) return 0.0;
  if (parity == Parity::even && n % 2 != 0) return 0.0;
  if (parity == Parity::odd && n % 2 != 1) return 0.0;
  if (m == 0.0) return n == 0 ? 1.0 : 0.0;
  double logp = n * std::log(m) - std::lgamma(n + 1.0);
  switch (parity) {
    case Parity::none:
      logp -= m;
      break;
    case Parity::even:
      // log cosh(m) = m + log((1 + e^{-2m}) / 2), safe for large m
      logp -= m + std::log1p(std::exp(-2.0 * m)) - std::log(2.0);
      break;
    case Parity::odd:
      logp -= m + std::log1p(-std::exp(-2.0 * m)) - std::log(2.0);
      break;
  }
  return std::exp(logp);
}

std::vector<double> crossing_pmf_discrete(int A, int B, double p_xx, double p_yy,
                                          double p_xy) {
  if (A < 0 || B < 0) throw InvalidProbability("visit counts must be >= 0");
  for (double p : {p_xx, p_yy, p_xy})
    if (!(p > 0.0 && p <= 1.0)) throw InvalidProbability("probabilities must lie in (0,1]");
  const int tmax = std::min(A, B);
  std::vector<double> logw(tmax + 1);
  double best = -1e300;
  for (int t = 0; t <= tmax; ++t) {
    logw[t] = 2.0 * t * std::log(p_xy) - t * std::log(p_xx) - t * std::log(p_yy) -
              std::lgamma(2.0 * t + 1.0) - std::lgamma(A - t + 1.0) -
              std::lgamma(B - t + 1.0);
    best = std::max(best, logw[t]);
  }
  double z = 0.0;
  for (int t = 0; t <= tmax; ++t) z += std::exp(logw[t] - best);
  std::vector<double> pmf(tmax + 1);
  for (int t = 0; t <= tmax; ++t) pmf[t] = std::exp(logw[t] - best) / z;
  return pmf;
}

int winding_parity(const CrossingState& state, const std::vector<std::uint8_t>& ray_edge,
                   const std::vector<std::uint8_t>& cluster_edges) {
  int bit = 0;
  for (std::size_t e = 0; e < state.parity.size(); ++e)
    if (cluster_edges[e] && ray_edge[e]) bit ^= state.parity[e];
  return bit;
}

std::vector<ClusterWinding> winding_parities(const CableGraph& g,
                                             const std::vector<std::uint8_t>& ray_edge,
                                             const CrossingState& state) {
  // component roots via the open edges
  std::vector<int> comp(g.vertex_count(), -1);
  {
    std::vector<std::vector<int>> adj(g.vertex_count());
    for (int e = 0; e < g.edge_count(); ++e) {
      if (!state.open[e]) continue;
      adj[g.edge(e).u].push_back(g.edge(e).v);
      adj[g.edge(e).v].push_back(g.edge(e).u);
    }
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (comp[v] >= 0 || adj[v].empty()) continue;
      std::queue<int> q;
      q.push(v);
      comp[v] = v;
      while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int w : adj[u]) {
          if (comp[w] >= 0) continue;
          comp[w] = v;
          q.push(w);
        }
      }
    }
  }

  const CycleBasis basis = cycle_basis(g, state.open);
  std::vector<ClusterWinding> out;
  std::vector<int> slot(g.vertex_count(), -1);
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!state.open[e]) continue;
    const int root = comp[g.edge(e).u];
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.size());
      ClusterWinding cw;
      cw.root = root;
      out.push_back(cw);
    }
    ClusterWinding& cw = out[slot[root]];
    if (ray_edge[e] && state.parity[e]) cw.parity ^= 1;
  }
  for (const auto& cyc : basis.cycles) {
    int raysum = 0;
    int root = -1;
    for (int e = 0; e < g.edge_count(); ++e) {
      if (!cyc[e]) continue;
      if (root < 0) root = comp[g.edge(e).u];
      if (ray_edge[e]) raysum ^= 1;
    }
    if (root >= 0 && raysum) out[slot[root]].qualifying = true;
  }
  std::sort(out.begin(), out.end(),
            [](const ClusterWinding& a, const ClusterWinding& b) { return a.root < b.root; });
  return out;
}

}  // namespace loopforge
