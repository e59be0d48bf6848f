#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "loopforge/gff.hpp"
#include "loopforge/looprep.hpp"
#include "loopforge/rng.hpp"
#include "loopforge/stats.hpp"

using namespace loopforge;

namespace {

GraphSpec triangle_tail_spec() {
  GraphSpec s;
  s.vertices = {{"x", false, 0.0}, {"y", false, 0.0}, {"z", false, 0.0},
                {"gnd", true, 0.0}};
  s.edges = {{"x", "y", 1.0}, {"y", "z", 1.0}, {"x", "z", 1.0}, {"z", "gnd", 1.0}};
  return s;
}

GraphSpec complete4_spec() {
  GraphSpec s;
  s.vertices = {{"a", false, 0.0}, {"b", false, 0.0}, {"c", false, 0.0},
                {"d", false, 0.0}, {"gnd", true, 0.0}};
  const char* names[4] = {"a", "b", "c", "d"};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) s.edges.push_back({names[i], names[j], 1.0});
  s.edges.push_back({"a", "gnd", 1.0});
  return s;
}

GraphSpec book_spec() {
  // two independent cycles sharing the vertex x
  GraphSpec s;
  s.vertices = {{"x", false, 0.0}, {"y", false, 0.0}, {"z", false, 0.0},
                {"w", false, 0.0}, {"gnd", true, 0.0}};
  s.edges = {{"x", "y", 1.0}, {"y", "z", 1.0}, {"x", "z", 1.0},
             {"y", "w", 1.0}, {"x", "w", 1.0}, {"x", "gnd", 1.0}};
  return s;
}

std::set<std::vector<std::uint8_t>> brute_force_even(const CableGraph& g) {
  std::set<std::vector<std::uint8_t>> out;
  const int ne = g.edge_count();
  REQUIRE(ne <= 20);
  for (unsigned long mask = 0; mask < (1ul << ne); ++mask) {
    std::vector<std::uint8_t> sub(ne, 0);
    for (int e = 0; e < ne; ++e) sub[e] = (mask >> e) & 1u;
    if (is_even_subgraph(g, sub)) out.insert(sub);
  }
  return out;
}

}  // namespace

TEST_CASE("cycle space dimension") {
  CHECK(cycle_basis(build_graph(triangle_tail_spec())).cycles.size() == 1);
  CHECK(cycle_basis(build_graph(path_spec(6))).cycles.empty());
  const CableGraph k4 = build_graph(complete4_spec());
  CHECK(cycle_basis(k4).cycles.size() == 3);
  // masking edges out removes cycles
  std::vector<std::uint8_t> allowed(k4.edge_count(), 1);
  allowed[0] = 0;  // drop one cycle edge
  CHECK(cycle_basis(k4, allowed).cycles.size() == 2);
  std::fill(allowed.begin(), allowed.end(), 0);
  CHECK(cycle_basis(k4, allowed).cycles.empty());
  CHECK(cycle_basis(k4, allowed).components == 0);
}

TEST_CASE("even subgraph enumeration matches brute force") {
  const CableGraph g = build_graph(book_spec());
  const CycleBasis basis = cycle_basis(g);
  const auto listed = all_even_subgraphs(basis);
  CHECK(listed.size() == (1u << basis.cycles.size()));
  std::set<std::vector<std::uint8_t>> as_set(listed.begin(), listed.end());
  CHECK(as_set.size() == listed.size());
  CHECK(as_set == brute_force_even(g));
}

TEST_CASE("even subgraph sampler is uniform") {
  const CableGraph g = build_graph(complete4_spec());
  const CycleBasis basis = cycle_basis(g);
  const auto all = all_even_subgraphs(basis);
  REQUIRE(all.size() == 8);
  std::map<std::vector<std::uint8_t>, long long> counts;
  auto rng = replica_rng(101, 0);
  const int n = 80000;
  for (int i = 0; i < n; ++i) {
    const auto sub = sample_even_subgraph(basis, rng);
    CHECK(is_even_subgraph(g, sub));
    ++counts[sub];
  }
  CHECK(counts.size() == all.size());
  std::vector<long long> flat;
  for (const auto& [sub, c] : counts) flat.push_back(c);
  CHECK(chi_square_uniform(flat).p > 1e-3);
}

TEST_CASE("odd degree at sources") {
  const CableGraph g = build_graph(path_spec(4));
  std::vector<std::uint8_t> both(g.edge_count(), 1);  // p0-p1-p2-p3 full path
  const int x = g.index_of("p1"), y = g.index_of("p2");
  CHECK_FALSE(is_even_subgraph(g, both));
  std::vector<std::uint8_t> middle(g.edge_count(), 0);
  middle[1] = 1;  // the single edge p1-p2: odd exactly at {x, y}
  CHECK(is_even_subgraph(g, middle, {x, y}));
  CHECK_FALSE(is_even_subgraph(g, middle));
  CHECK_FALSE(is_even_subgraph(g, middle, {x}));
}

TEST_CASE("cycle switching is an involution inside the open set") {
  const CableGraph g = build_graph(triangle_tail_spec());
  const CycleBasis basis = cycle_basis(g);
  REQUIRE(basis.cycles.size() == 1);
  CrossingState st;
  st.open.assign(g.edge_count(), 1);
  st.parity.assign(g.edge_count(), 0);
  st.has_counts = false;
  const CrossingState once = switch_cycle(st, basis.cycles[0]);
  int flipped = 0;
  for (int e = 0; e < g.edge_count(); ++e)
    flipped += once.parity[e] != st.parity[e] ? 1 : 0;
  CHECK(flipped == 3);
  const CrossingState twice = switch_cycle(once, basis.cycles[0]);
  CHECK(twice.parity == st.parity);
  // counts do not survive a switch
  CrossingState with_counts = st;
  with_counts.counts.assign(g.edge_count(), 2);
  with_counts.has_counts = true;
  CHECK_FALSE(switch_cycle(with_counts, basis.cycles[0]).has_counts);
  // a cycle with a closed edge cannot be switched
  CrossingState closed = st;
  closed.open.assign(g.edge_count(), 0);
  CHECK_THROWS_AS(switch_cycle(closed, basis.cycles[0]), CycleLeavesOpenSet);
}

TEST_CASE("parity-conditioned Poisson sampler") {
  auto rng = replica_rng(103, 0);
  SUBCASE("degenerate cases") {
    for (int i = 0; i < 50; ++i)
      CHECK(conditioned_poisson(0.0, Parity::even, rng) == 0);
    CHECK_THROWS_AS(conditioned_poisson(0.0, Parity::odd, rng), OddWithZeroMean);
    CHECK_THROWS_AS(conditioned_poisson(-1.0, Parity::even, rng), InvalidProbability);
  }
  SUBCASE("odd mass at one") {
    const double m = 1.0;
    const double ref = m / std::sinh(m);  // P[N = 1 | N odd]
    const int n = 100000;
    int ones = 0;
    for (int i = 0; i < n; ++i)
      ones += conditioned_poisson(m, Parity::odd, rng) == 1 ? 1 : 0;
    const double se = std::sqrt(ref * (1.0 - ref) / n);
    CHECK(std::fabs(double(ones) / n - ref) < 3.0 * se);
  }
  SUBCASE("distributional agreement") {
    const double m = 2.5;
    const int n = 200000, support = 40;
    for (const Parity par : {Parity::even, Parity::odd}) {
      std::vector<double> emp(support, 0.0);
      for (int i = 0; i < n; ++i) {
        const int k = conditioned_poisson(m, par, rng);
        REQUIRE(k >= 0);
        REQUIRE(k % 2 == (par == Parity::odd ? 1 : 0));
        if (k < support) emp[k] += 1.0 / n;
      }
      std::vector<double> ref(support);
      for (int k = 0; k < support; ++k) ref[k] = poisson_parity_pmf(k, m, par);
      CHECK(tv_distance(emp, ref) < 0.01);
    }
  }
}

TEST_CASE("parity-restricted Poisson pmf") {
  for (const double m : {0.3, 1.0, 4.0}) {
    for (const Parity par : {Parity::even, Parity::odd}) {
      double total = 0.0;
      for (int k = 0; k < 60; ++k) total += poisson_parity_pmf(k, m, par);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(poisson_parity_pmf(1, m, Parity::even) == 0.0);
    CHECK(poisson_parity_pmf(2, m, Parity::even) /
              poisson_parity_pmf(0, m, Parity::even) ==
          doctest::Approx(m * m / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("discrete crossing pmf") {
  const auto pmf = crossing_pmf_discrete(3, 2, 0.2, 0.3, 0.1);
  CHECK(pmf.size() == 3);  // t in {0, 1, min(A,B)}
  double total = 0.0;
  for (const double p : pmf) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // one excursion each way: odds of pairing up
  const double pxx = 0.4, pyy = 0.5, pxy = 0.25;
  const auto one = crossing_pmf_discrete(1, 1, pxx, pyy, pxy);
  CHECK(one[1] / one[0] ==
        doctest::Approx(pxy * pxy / (2.0 * pxx * pyy)).epsilon(1e-12));
  CHECK_THROWS_AS(crossing_pmf_discrete(-1, 1, 0.1, 0.1, 0.1), InvalidProbability);
  CHECK_THROWS_AS(crossing_pmf_discrete(1, 1, 0.0, 0.1, 0.1), InvalidProbability);
  // many-excursion limit: the number of crossings (2t) approaches the
  // even-restricted Poisson with mean alpha
  const int K = 200;
  const double alpha = 1.0;
  const auto lim = crossing_pmf_discrete(K, K, 1.0, 1.0, alpha / K);
  std::vector<double> as_counts(41, 0.0), ref(41, 0.0);
  for (int t = 0; t < int(lim.size()) && 2 * t <= 40; ++t)
    as_counts[2 * t] = lim[t];
  for (int k = 0; k <= 40; ++k) ref[k] = poisson_parity_pmf(k, alpha, Parity::even);
  CHECK(tv_distance(as_counts, ref) < 0.1);
}

TEST_CASE("winding parity of clusters around the annulus") {
  const Annulus ann = annulus(4);
  const CableGraph& g = ann.graph;
  int n_ray = 0;
  for (const auto b : ann.ray_edge) n_ray += b;
  REQUIRE(n_ray == 1);
  // the outer ring: all edges with both endpoints interior
  std::vector<std::uint8_t> ring(g.edge_count(), 0);
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (!g.is_boundary(ed.u) && !g.is_boundary(ed.v)) ring[e] = 1;
  }
  CrossingState st;
  st.open = ring;
  st.has_counts = false;

  SUBCASE("full ring crosses the ray once") {
    st.parity = ring;
    const auto ws = winding_parities(g, ann.ray_edge, st);
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].qualifying);
    CHECK(ws[0].parity == 1);
  }
  SUBCASE("empty parity winds zero times") {
    st.parity.assign(g.edge_count(), 0);
    const auto ws = winding_parities(g, ann.ray_edge, st);
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].qualifying);
    CHECK(ws[0].parity == 0);
  }
  SUBCASE("switching the ring cycle flips the winding") {
    st.parity.assign(g.edge_count(), 0);
    const CycleBasis basis = cycle_basis(g, ring);
    REQUIRE(basis.cycles.size() == 1);
    const CrossingState flipped = switch_cycle(st, basis.cycles[0]);
    CHECK(winding_parities(g, ann.ray_edge, flipped)[0].parity == 1);
  }
  SUBCASE("an arc that avoids the ray does not qualify") {
    // open a single non-ray edge; its two-vertex cluster does not surround
    // the inner hole
    std::vector<std::uint8_t> arc(g.edge_count(), 0);
    for (int e = 0; e < g.edge_count(); ++e) {
      const Edge& ed = g.edge(e);
      if (g.is_boundary(ed.u) || g.is_boundary(ed.v)) continue;
      if (!ann.ray_edge[e]) {
        arc[e] = 1;
        break;
      }
    }
    CrossingState st2;
    st2.open = arc;
    st2.parity.assign(g.edge_count(), 0);
    st2.has_counts = false;
    const auto ws = winding_parities(g, ann.ray_edge, st2);
    REQUIRE(ws.size() == 1);
    CHECK_FALSE(ws[0].qualifying);
    CHECK(ws[0].parity == 0);
  }
}
