#include "loopforge/excursions.hpp"

#include <cmath>

#include "loopforge/rng.hpp"

namespace loopforge {

namespace {

constexpr long long kStepCap = 50'000'000;

}  // namespace

ExcursionSampler::ExcursionSampler(const CableGraph& g, int x, int y)
    : g_(&g), x_(x), y_(y) {
  if (x == y) throw SameVertex();
  if (g.is_boundary(x)) throw GraphError("excursion source on the boundary");
  if (y == kTargetBoundary) {
    bool any = false;
    for (int v = 0; v < g.vertex_count(); ++v) any = any || g.is_boundary(v);
    if (!any) throw GraphError("no wired boundary to target");
    std::vector<std::pair<int, double>> pins{{x, 0.0}};
    for (int v = 0; v < g.vertex_count(); ++v)
      if (g.is_boundary(v)) pins.emplace_back(v, 1.0);
    h_ = solve_harmonic(g, pins);
    hret_ = solve_harmonic(g, {{x, 1.0}});
  } else {
    if (g.is_boundary(y)) throw GraphError("excursion target on the boundary");
    h_ = solve_harmonic(g, {{x, 0.0}, {y, 1.0}});
    hret_ = solve_harmonic(g, {{x, 1.0}, {y, 0.0}});
  }
  for (const auto& [e, w] : g.star(x_)) {
    mass_ += g.conductance(e) * h_[w];
    ret_mass_ += g.conductance(e) * hret_[w];
  }
}

ExcursionPath ExcursionSampler::walk(const Eigen::VectorXd& h, bool to_x,
                                     std::mt19937_64& rng) const {
  ExcursionPath path;
  path.vertices.push_back(x_);
  path.local_times.push_back(0.0);

  auto arrived = [&](int v) {
    if (to_x) return v == x_;
    if (y_ == kTargetBoundary) return g_->is_boundary(v);
    return v == y_;
  };

  // first step: probability proportional to c_{xw} h(w)
  int current = -1;
  {
    double total = 0.0;
    for (const auto& [e, w] : g_->star(x_)) total += g_->conductance(e) * h[w];
    if (!(total > 0.0)) throw ZeroMass();
    double u = uniform01(rng) * total;
    for (const auto& [e, w] : g_->star(x_)) {
      u -= g_->conductance(e) * h[w];
      if (u <= 0.0) {
        current = w;
        path.edges.push_back(e);
        break;
      }
    }
    if (current < 0) {
      current = g_->star(x_).back().second;
      path.edges.push_back(g_->star(x_).back().first);
    }
  }

  long long steps = 0;
  while (!arrived(current)) {
    path.vertices.push_back(current);
    path.local_times.push_back(exponential(rng, g_->total_rate(current)));
    double total = 0.0;
    for (const auto& [e, w] : g_->star(current)) total += g_->conductance(e) * h[w];
    double u = uniform01(rng) * total;
    int next = -1;
    for (const auto& [e, w] : g_->star(current)) {
      u -= g_->conductance(e) * h[w];
      if (u <= 0.0) {
        next = w;
        path.edges.push_back(e);
        break;
      }
    }
    if (next < 0) {
      next = g_->star(current).back().second;
      path.edges.push_back(g_->star(current).back().first);
    }
    current = next;
    if (++steps > kStepCap) throw GraphError("excursion walk exceeded step cap");
  }
  path.vertices.push_back(current);
  path.local_times.push_back(0.0);
  return path;
}

ExcursionPath ExcursionSampler::sample_xy(std::mt19937_64& rng) const {
  if (!(mass_ > 0.0)) throw ZeroMass();
  return walk(h_, false, rng);
}

namespace {

ExcursionEnsemble aggregate(const CableGraph& g, std::vector<ExcursionPath> paths) {
  ExcursionEnsemble ens;
  ens.occupation = Eigen::VectorXd::Zero(g.vertex_count());
  ens.traversals.assign(g.edge_count(), 0);
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < p.vertices.size(); ++i)
      ens.occupation[p.vertices[i]] += 2.0 * p.local_times[i];
    for (int e : p.edges) ++ens.traversals[e];
  }
  ens.paths = std::move(paths);
  return ens;
}

}  // namespace

ExcursionEnsemble ExcursionSampler::sample_xy_ensemble(double mean, Parity parity,
                                                       std::mt19937_64& rng) const {
  const int n = conditioned_poisson(mean, parity, rng);
  if (n > 0 && !(mass_ > 0.0)) throw ZeroMass();
  std::vector<ExcursionPath> paths;
  paths.reserve(n);
  for (int i = 0; i < n; ++i) paths.push_back(walk(h_, false, rng));
  return aggregate(*g_, std::move(paths));
}

ExcursionEnsemble ExcursionSampler::sample_xx_ensemble(double a,
                                                       std::mt19937_64& rng) const {
  if (a < 0.0) throw ConfigError("root a must be >= 0");
  const double intensity = 0.5 * a * a * ret_mass_;
  const int n = intensity > 0.0 ? static_cast<int>(poisson(rng, intensity)) : 0;
  std::vector<ExcursionPath> paths;
  paths.reserve(n);
  for (int i = 0; i < n; ++i) paths.push_back(walk(hret_, true, rng));
  return aggregate(*g_, std::move(paths));
}

ExcursionPath sample_xy_excursion(const CableGraph& g, int x, int y,
                                  std::mt19937_64& rng) {
  return ExcursionSampler(g, x, y).sample_xy(rng);
}

ExcursionEnsemble sample_xy_ensemble(const CableGraph& g, int x, int y, double mean,
                                     Parity parity, std::mt19937_64& rng) {
  return ExcursionSampler(g, x, y).sample_xy_ensemble(mean, parity, rng);
}

ExcursionEnsemble sample_xx_ensemble(const CableGraph& g, int x, int avoid_y,
                                     double a, std::mt19937_64& rng) {
  return ExcursionSampler(g, x, avoid_y).sample_xx_ensemble(a, rng);
}

ExcursionPath boundary_excursion_to_infinity(const CableGraph& g, int x,
                                             std::mt19937_64& rng) {
  return ExcursionSampler(g, x, ExcursionSampler::kTargetBoundary).sample_xy(rng);
}

double edge_open_given_no_crossing(double occ_u, double occ_v, double resistance) {
  if (occ_u < 0.0 || occ_v < 0.0) throw InvalidProbability("occupations must be >= 0");
  if (!(resistance > 0.0)) throw NonpositiveResistance("edge resistance must be > 0");
  return 1.0 - std::exp(-std::sqrt(occ_u * occ_v) / resistance);
}

Eigen::VectorXd plain_walk_occupation(const CableGraph& g, int x, std::mt19937_64& rng) {
  Eigen::VectorXd occ = Eigen::VectorXd::Zero(g.vertex_count());
  int current = x;
  long long steps = 0;
  while (!g.is_boundary(current)) {
    const double rate = g.total_rate(current);
    occ[current] += exponential(rng, rate);
    // jump or die: each incident conductance is a jump channel, killing kills
    double u = uniform01(rng) * rate;
    int next = -1;
    for (const auto& [e, w] : g.star(current)) {
      u -= g.conductance(e);
      if (u <= 0.0) {
        next = w;
        break;
      }
    }
    if (next < 0) break;  // killed
    current = next;
    if (++steps > kStepCap) throw GraphError("plain walk exceeded step cap");
  }
  return occ;
}

}  // namespace loopforge
