#include "loopforge/gff.hpp"

#include <algorithm>
#include <cmath>

#include "loopforge/rng.hpp"

namespace loopforge {

Eigen::VectorXd sample_field(const GreenOperator& G, std::mt19937_64& rng) {
  return G.sample(rng);
}

namespace {

CableGraph pin_as_boundary(const CableGraph& g, const std::vector<int>& pins) {
  GraphSpec s = spec_of(g);
  for (int v : pins) {
    if (g.is_boundary(v)) throw ConfigError("pin " + g.name(v) + " is already boundary");
    s.vertices[v].boundary = true;
  }
  return build_graph(s);
}

}  // namespace

DirichletSampler::DirichletSampler(const CableGraph& g, std::vector<int> pins)
    : g_(&g), pins_(std::move(pins)), pinned_graph_(pin_as_boundary(g, pins_)) {
  G0_ = std::make_unique<GreenOperator>(pinned_graph_);
  basis_.reserve(pins_.size());
  for (std::size_t i = 0; i < pins_.size(); ++i) {
    std::vector<std::pair<int, double>> pv;
    for (std::size_t j = 0; j < pins_.size(); ++j)
      pv.emplace_back(pins_[j], i == j ? 1.0 : 0.0);
    basis_.push_back(solve_harmonic(*g_, pv));
  }
}

Eigen::VectorXd DirichletSampler::sample_zero(std::mt19937_64& rng) const {
  return G0_->sample(rng);
}

Eigen::VectorXd DirichletSampler::sample(std::mt19937_64& rng,
                                         const std::vector<double>& values) const {
  if (values.size() != pins_.size())
    throw ConfigError("pin value count mismatch");
  Eigen::VectorXd gamma = sample_zero(rng);
  for (std::size_t i = 0; i < pins_.size(); ++i) gamma += values[i] * basis_[i];
  return gamma;
}

Eigen::VectorXd condition_on_values(const CableGraph& g,
                                    const std::vector<std::pair<int, double>>& pins,
                                    std::mt19937_64& rng) {
  std::vector<int> vs;
  std::vector<double> vals;
  for (const auto& [v, a] : pins) {
    vs.push_back(v);
    vals.push_back(a);
  }
  DirichletSampler sampler(g, vs);
  return sampler.sample(rng, vals);
}

bool lupu_open(double gu, double gv, double resistance, std::mt19937_64& rng) {
  if (!((gu > 0.0 && gv > 0.0) || (gu < 0.0 && gv < 0.0))) return false;
  const double p = 1.0 - std::exp(-2.0 * gu * gv / resistance);
  return uniform01(rng) < p;
}

std::vector<std::uint8_t> lupu_open_all(const CableGraph& g,
                                        const Eigen::VectorXd& gamma,
                                        std::mt19937_64& rng) {
  std::vector<std::uint8_t> open(g.edge_count(), 0);
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    open[e] = lupu_open(gamma[ed.u], gamma[ed.v], ed.resistance, rng) ? 1 : 0;
  }
  return open;
}

UnionFind::UnionFind(int n) : parent_(n), rank_(n, 0) {
  for (int i = 0; i < n; ++i) parent_[i] = i;
}

int UnionFind::find(int v) {
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];
    v = parent_[v];
  }
  return v;
}

void UnionFind::unite(int u, int v) {
  u = find(u);
  v = find(v);
  if (u == v) return;
  if (rank_[u] < rank_[v]) std::swap(u, v);
  parent_[v] = u;
  if (rank_[u] == rank_[v]) ++rank_[u];
}

std::vector<int> components(const CableGraph& g, const std::vector<std::uint8_t>& open) {
  UnionFind uf(g.vertex_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!open[e]) continue;
    uf.unite(g.edge(e).u, g.edge(e).v);
  }
  std::vector<int> label(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) label[v] = uf.find(v);
  // canonical label = smallest vertex index in the component
  std::vector<int> smallest(g.vertex_count(), -1);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (smallest[label[v]] < 0) smallest[label[v]] = v;
  for (int v = 0; v < g.vertex_count(); ++v) label[v] = smallest[label[v]];
  return label;
}

bool connected_in_open(const CableGraph& g, const std::vector<std::uint8_t>& open,
                       int x, int y) {
  UnionFind uf(g.vertex_count());
  for (int e = 0; e < g.edge_count(); ++e)
    if (open[e]) uf.unite(g.edge(e).u, g.edge(e).v);
  return uf.find(x) == uf.find(y);
}

namespace {

void check_mean(double m) {
  if (m < 0.0 || !std::isfinite(m)) throw InvalidProbability("mean m must be >= 0");
}

}  // namespace

double p_same_sign(double m) {
  check_mean(m);
  return 1.0 / (1.0 + std::exp(-2.0 * m));
}

double p_connect_given_occupations(double m) {
  check_mean(m);
  return std::tanh(m);
}

double p_connect_given_signed(double m) {
  check_mean(m);
  return 1.0 - std::exp(-2.0 * m);
}

}  // namespace loopforge
