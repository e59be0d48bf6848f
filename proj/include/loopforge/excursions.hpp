#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "loopforge/green.hpp"
#include "loopforge/looprep.hpp"

namespace loopforge {

struct ExcursionPath {
  // Visited vertex sequence from source to target.
  std::vector<int> vertices;
  // Per-visit local-time increments, aligned with `vertices`; drawn as
  // Exp(total_rate(v)) chain holdings at intermediate visits, 0 at the
  // endpoints (excursions carry no local time at their marked endpoints).
  std::vector<double> local_times;
  // Traversed edge indices, aligned with consecutive vertex pairs.
  std::vector<int> edges;
};

struct ExcursionEnsemble {
  std::vector<ExcursionPath> paths;
  // Accumulated local time per vertex in squared-field units: twice the sum
  // of the chain-holding increments (the loop-soup occupation convention that
  // makes Exp(c) holdings comparable with gamma^2).
  Eigen::VectorXd occupation;
  // Per-edge traversal counts.
  std::vector<int> traversals;
};

// Samples h-transform-conditioned excursions between two marked vertices (or
// from a vertex to the wired boundary when target = kTargetBoundary).
class ExcursionSampler {
 public:
  static constexpr int kTargetBoundary = -1;

  ExcursionSampler(const CableGraph& g, int x, int y);
  ExcursionSampler(const ExcursionSampler&) = delete;
  ExcursionSampler& operator=(const ExcursionSampler&) = delete;

  const CableGraph& graph() const { return *g_; }

  // Total mass sum_w c_{xw} h(w) of the x->y excursion measure; equals the
  // effective conductance between x and y when y is a vertex.
  double xy_mass() const { return mass_; }

  // Total mass sum_w c_{xw} h_ret(w) of the x->x return-excursion measure
  // (returns avoiding y and the boundary).
  double xx_mass() const { return ret_mass_; }

  // One excursion from x to y: first step with probability proportional to
  // c_{xw} h(w), then the h-conditioned chain, stopped on arrival.  Throws
  // ZeroMass when the excursion measure has zero mass (c_eff = 0).
  ExcursionPath sample_xy(std::mt19937_64& rng) const;

  // conditioned_poisson(mean, parity) independent copies of sample_xy.
  ExcursionEnsemble sample_xy_ensemble(double mean, Parity parity,
                                       std::mt19937_64& rng) const;

  // Poisson(a^2 xx_mass / 2) return excursions x->x avoiding y and the
  // boundary; the 1/2 is the unoriented-intensity convention fixed by the
  // occupation calibration E[occupation(z)] = a^2 h_ret(z)^2.
  ExcursionEnsemble sample_xx_ensemble(double a, std::mt19937_64& rng) const;

  const Eigen::VectorXd& h_forward() const { return h_; }
  const Eigen::VectorXd& h_return() const { return hret_; }

 private:
  const CableGraph* g_;
  int x_;
  int y_;
  Eigen::VectorXd h_;     // P_w[reach y before x, boundary or death]
  Eigen::VectorXd hret_;  // P_w[return to x before y, boundary or death]
  double mass_ = 0.0;
  double ret_mass_ = 0.0;

  ExcursionPath walk(const Eigen::VectorXd& h, bool to_x, std::mt19937_64& rng) const;
};

// Convenience wrappers matching the sampler methods.
ExcursionPath sample_xy_excursion(const CableGraph& g, int x, int y,
                                  std::mt19937_64& rng);
ExcursionEnsemble sample_xy_ensemble(const CableGraph& g, int x, int y, double mean,
                                     Parity parity, std::mt19937_64& rng);
ExcursionEnsemble sample_xx_ensemble(const CableGraph& g, int x, int avoid_y,
                                     double a, std::mt19937_64& rng);

// Excursion from x to the wired boundary set (the finite-box stand-in for an
// excursion to infinity): never returns to x after step 0.
ExcursionPath boundary_excursion_to_infinity(const CableGraph& g, int x,
                                             std::mt19937_64& rng);

// Probability that an edge carrying no crossing is nevertheless zero-free
// given the endpoint occupations: 1 - exp(-sqrt(Lu Lv) / R).
double edge_open_given_no_crossing(double occ_u, double occ_v, double resistance);

// Test helper: occupation (chain units, Exp(total_rate) holdings) of the
// plain killed walk from x run to absorption; E[occupation(z)] = G(x,z).
Eigen::VectorXd plain_walk_occupation(const CableGraph& g, int x, std::mt19937_64& rng);

}  // namespace loopforge
