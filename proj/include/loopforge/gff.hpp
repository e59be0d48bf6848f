#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "loopforge/green.hpp"

namespace loopforge {

// Zero-boundary Gaussian free field on the vertices of g, full-graph-indexed.
Eigen::VectorXd sample_field(const GreenOperator& G, std::mt19937_64& rng);

// Gaussian free field additionally pinned at a list of vertices: the field is
// gamma = Gamma0 + sum_i values[i] * basis(i), where Gamma0 is the zero field
// with Dirichlet condition on boundary + pins and basis(i) is the harmonic
// extension of 1 at pins[i], 0 at the other pins and the boundary.
class DirichletSampler {
 public:
  DirichletSampler(const CableGraph& g, std::vector<int> pins);
  DirichletSampler(const DirichletSampler&) = delete;
  DirichletSampler& operator=(const DirichletSampler&) = delete;

  const CableGraph& graph() const { return *g_; }
  const std::vector<int>& pins() const { return pins_; }
  const Eigen::VectorXd& basis(int i) const { return basis_[i]; }
  const GreenOperator& green0() const { return *G0_; }

  Eigen::VectorXd sample_zero(std::mt19937_64& rng) const;
  Eigen::VectorXd sample(std::mt19937_64& rng, const std::vector<double>& values) const;

 private:
  const CableGraph* g_;
  std::vector<int> pins_;
  CableGraph pinned_graph_;  // pins re-marked as boundary; same vertex indices
  std::unique_ptr<GreenOperator> G0_;
  std::vector<Eigen::VectorXd> basis_;
};

// One-shot convenience wrapper around DirichletSampler.
Eigen::VectorXd condition_on_values(const CableGraph& g,
                                    const std::vector<std::pair<int, double>>& pins,
                                    std::mt19937_64& rng);

// Lupu opening for a single edge: open with probability
// 1 - exp(-2 gu gv / R) when the endpoint values have the same strict sign,
// closed otherwise (opposite signs or a zero endpoint).
bool lupu_open(double gu, double gv, double resistance, std::mt19937_64& rng);

// Per-edge openness mask for the whole graph.
std::vector<std::uint8_t> lupu_open_all(const CableGraph& g,
                                        const Eigen::VectorXd& gamma,
                                        std::mt19937_64& rng);

class UnionFind {
 public:
  explicit UnionFind(int n);
  int find(int v);
  void unite(int u, int v);

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

// Component label per vertex under the open-edge subgraph; labels are the
// smallest vertex index in each component.
std::vector<int> components(const CableGraph& g, const std::vector<std::uint8_t>& open);

bool connected_in_open(const CableGraph& g, const std::vector<std::uint8_t>& open,
                       int x, int y);

// Closed-form two-point probabilities at excursion mean m >= 0.
double p_same_sign(double m);                 // e^m / (e^m + e^{-m})
double p_connect_given_occupations(double m); // tanh(m)
double p_connect_given_signed(double m);      // 1 - e^{-2m}

}  // namespace loopforge
