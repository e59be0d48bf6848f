#include <doctest.h>

#include <cmath>
#include <vector>

#include "loopforge/gff.hpp"
#include "loopforge/rng.hpp"
#include "loopforge/stats.hpp"

using namespace loopforge;

TEST_CASE("two-point probability trio") {
  CHECK(p_same_sign(1.0) == doctest::Approx(0.880797).epsilon(1e-5));
  CHECK(p_connect_given_occupations(1.0) == doctest::Approx(0.761594).epsilon(1e-5));
  CHECK(p_connect_given_signed(1.0) == doctest::Approx(0.864665).epsilon(1e-5));
  CHECK(p_same_sign(0.0) == doctest::Approx(0.5));
  CHECK(p_connect_given_occupations(0.0) == doctest::Approx(0.0));
  // the three laws are one law: P[conn] = P[same sign] * P[conn | same sign]
  for (const double m : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    CHECK(p_same_sign(m) * p_connect_given_signed(m) ==
          doctest::Approx(p_connect_given_occupations(m)).epsilon(1e-12));
    // even/odd normalisers recombine to the full exponential
    const double even = std::exp(-m) * std::cosh(m);
    const double odd = std::exp(-m) * std::sinh(m);
    CHECK(even + odd == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(even - odd == doctest::Approx(std::exp(-2.0 * m)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(p_same_sign(-0.1), InvalidProbability);
  CHECK_THROWS_AS(p_connect_given_signed(-2.0), InvalidProbability);
  CHECK_THROWS_AS(p_connect_given_occupations(std::nan("")), InvalidProbability);
}

TEST_CASE("single-edge opening probabilities") {
  auto rng = replica_rng(42, 0);
  // opposite signs or a zero endpoint never open
  for (int i = 0; i < 2000; ++i) {
    CHECK_FALSE(lupu_open(1.0, -1.0, 1.0, rng));
    CHECK_FALSE(lupu_open(0.0, 1.0, 1.0, rng));
    CHECK_FALSE(lupu_open(-0.5, 0.0, 1.0, rng));
  }
  // same-sign frequency matches 1 - exp(-2 gu gv / R)
  for (const auto& [gu, gv, R] : std::vector<std::tuple<double, double, double>>{
           {1.0, 1.0, 1.0}, {0.7, 1.3, 2.0}, {-0.8, -0.9, 0.5}}) {
    const double ref = 1.0 - std::exp(-2.0 * gu * gv / R);
    const int n = 200000;
    int open = 0;
    for (int i = 0; i < n; ++i) open += lupu_open(gu, gv, R, rng) ? 1 : 0;
    const double se = std::sqrt(ref * (1.0 - ref) / n);
    CHECK(std::fabs(double(open) / n - ref) < 3.0 * se);
  }
}

TEST_CASE("opening probability agrees with a discretised bridge minimum") {
  // Independent oracle for the constant 2 in the exponent: a Brownian bridge
  // from a to b over resistance R stays positive with probability
  // 1 - exp(-2ab/R).  Simulated on a fine grid; the grid misses rare
  // excursions below zero, so the empirical value sits slightly above the
  // target by O(sqrt(step)).
  auto rng = replica_rng(43, 0);
  const double a = 0.8, b = 0.6, R = 1.0;
  const double ref = 1.0 - std::exp(-2.0 * a * b / R);
  const int steps = 10000, n = 10000;
  const double dt = R / steps;
  int positive = 0;
  for (int i = 0; i < n; ++i) {
    double x = a;
    bool ok = true;
    for (int s = 0; s < steps; ++s) {
      const double remain = R - s * dt;
      const double mean = x + (b - x) * dt / remain;
      const double var = dt * (remain - dt) / remain;
      x = mean + std::sqrt(std::max(var, 0.0)) * std_normal(rng);
      if (x <= 0.0) {
        ok = false;
        break;
      }
    }
    positive += ok ? 1 : 0;
  }
  const double emp = double(positive) / n;
  CHECK(emp > ref - 0.015);
  CHECK(emp < ref + 0.025);  // discretisation bias is upward
}

TEST_CASE("components and connectivity") {
  const CableGraph g = build_graph(path_spec(5));
  std::vector<std::uint8_t> open(g.edge_count(), 0);
  open[1] = 1;  // p1 - p2
  const auto labels = components(g, open);
  CHECK(labels[g.index_of("p1")] == labels[g.index_of("p2")]);
  CHECK(labels[g.index_of("p1")] != labels[g.index_of("p3")]);
  CHECK(labels[g.index_of("p1")] ==
        std::min(g.index_of("p1"), g.index_of("p2")));  // smallest-index label
  CHECK(connected_in_open(g, open, g.index_of("p1"), g.index_of("p2")));
  CHECK_FALSE(connected_in_open(g, open, g.index_of("p1"), g.index_of("p3")));
  open[2] = 1;
  CHECK(connected_in_open(g, open, g.index_of("p1"), g.index_of("p3")));
}

TEST_CASE("conditioned sampler reproduces mean and variance") {
  const CableGraph g = build_graph(grid_spec(3, 3, GridBoundary::wired));
  const int x = g.index_of("g0_0"), y = g.index_of("g2_2");
  DirichletSampler cond(g, {x, y});
  const int z = g.index_of("g1_1");
  const double a = 1.4, b = -0.7;
  const double drift = a * cond.basis(0)[z] + b * cond.basis(1)[z];
  const double var0 = cond.green0()(z, z);
  auto rng = replica_rng(77, 0);
  const int n = 200000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd f = cond.sample(rng, {a, b});
    CHECK(f[x] == doctest::Approx(a));
    CHECK(f[y] == doctest::Approx(b));
    s1 += f[z];
    s2 += f[z] * f[z];
  }
  const double mean_emp = s1 / n;
  const double var_emp = s2 / n - mean_emp * mean_emp;
  CHECK(std::fabs(mean_emp - drift) < 3.5 * std::sqrt(var0 / n));
  CHECK(std::fabs(var_emp - var0) < 0.01);
  // harmonic basis: nonnegative, bounded by one, complementary at the pins
  for (int v = 0; v < g.vertex_count(); ++v) {
    CHECK(cond.basis(0)[v] >= -1e-12);
    CHECK(cond.basis(0)[v] + cond.basis(1)[v] <= 1.0 + 1e-12);
  }
  CHECK(cond.basis(0)[x] == doctest::Approx(1.0));
  CHECK(cond.basis(0)[y] == doctest::Approx(0.0));
}

TEST_CASE("one-shot conditioning wrapper") {
  const CableGraph g = build_graph(path_spec(4));
  auto rng = replica_rng(78, 0);
  const Eigen::VectorXd f =
      condition_on_values(g, {{g.index_of("p1"), 2.0}}, rng);
  CHECK(f[g.index_of("p1")] == doctest::Approx(2.0));
  CHECK(f[g.index_of("p0")] == doctest::Approx(0.0));
}

TEST_CASE("field law at original vertices is mesh invariant") {
  const CableGraph g = build_graph(path_spec(4));
  const GreenOperator G1(g);
  const Refined r = refine(g, 8);
  const GreenOperator G8(r.graph);
  const int v1 = g.index_of("p1");
  const int v8 = r.vertex_map[v1];
  CHECK(G8(v8, v8) == doctest::Approx(G1(v1, v1)).epsilon(1e-9));
  auto rng = replica_rng(79, 0);
  const int n = 20000;
  std::vector<double> s1(n), s8(n);
  for (int i = 0; i < n; ++i) s1[i] = sample_field(G1, rng)[v1];
  for (int i = 0; i < n; ++i) s8[i] = sample_field(G8, rng)[v8];
  CHECK(ks_two_sample(s1, s8).p > 1e-3);
}
