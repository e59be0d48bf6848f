#pragma once

#include <random>
#include <vector>

#include "loopforge/graph.hpp"

namespace loopforge {

enum class Parity { none, even, odd };

struct CycleBasis {
  // Edge mask of the spanning forest inside the allowed subgraph.
  std::vector<std::uint8_t> tree;
  // One fundamental cycle (edge mask) per allowed non-tree edge.
  std::vector<std::vector<std::uint8_t>> cycles;
  int components = 0;
  int allowed_edges = 0;
};

// Cycle space of the subgraph spanned by edges with mask[e] == 1 (every edge
// when the mask is empty).  Deterministic: BFS spanning forest rooted at the
// lowest vertex index of each component, edges scanned in insertion order;
// cycles.size() = |E_allowed| - |V| + components.
CycleBasis cycle_basis(const CableGraph& g, const std::vector<std::uint8_t>& mask = {});

// Uniform random element of the cycle space: XOR of a fair-coin subset of the
// fundamental cycles.  Every vertex degree in the result is even.
std::vector<std::uint8_t> sample_even_subgraph(const CycleBasis& basis,
                                               std::mt19937_64& rng);

// All 2^h even subgraphs (enumeration oracle; requires h <= 20).
std::vector<std::vector<std::uint8_t>> all_even_subgraphs(const CycleBasis& basis);

// True iff every vertex outside `sources` has even degree in the edge mask.
bool is_even_subgraph(const CableGraph& g, const std::vector<std::uint8_t>& mask,
                      const std::vector<int>& sources = {});

// Crossing-parity configuration over the edges of an open subgraph.
struct CrossingState {
  std::vector<std::uint8_t> open;    // reference open edge set E_Lambda
  std::vector<std::uint8_t> parity;  // P(e), supported on open edges
  std::vector<int> counts;           // optional crossing counts N(e)
  bool has_counts = false;
};

// Flips the parity bits exactly on the cycle's edges; an involution.  The
// cycle must stay inside the open set (CycleLeavesOpenSet) and counts, if
// any, are dropped (only the parity survives a switch).
CrossingState switch_cycle(const CrossingState& state,
                           const std::vector<std::uint8_t>& cycle);

// Exact sampling from Poisson(m) restricted to a parity class; normalizers
// e^{-m} cosh(m) (even) and e^{-m} sinh(m) (odd).  OddWithZeroMean when
// parity = odd and m = 0.
int conditioned_poisson(double m, Parity parity, std::mt19937_64& rng);

// pmf of the conditioned Poisson law at n.
double poisson_parity_pmf(int n, double m, Parity parity);

// pmf over the number t of crossing pairs (2t crossings between x and y)
// given A visits of x and B visits of y in the discrete trace chain; evaluated
// in log space, support t = 0..min(A,B).  The t-th weight is proportional to
//   p_xy^{2t} p_xx^{-t} p_yy^{-t} / ((2t)! (A-t)! (B-t)!).
std::vector<double> crossing_pmf_discrete(int A, int B, double p_xx, double p_yy,
                                          double p_xy);

// Winding parity of one cluster: sum mod 2 of P(e) over the cluster's edges
// crossed by the dual ray.
int winding_parity(const CrossingState& state, const std::vector<std::uint8_t>& ray_edge,
                   const std::vector<std::uint8_t>& cluster_edges);

struct ClusterWinding {
  int root = -1;         // smallest vertex index of the cluster
  bool qualifying = false;  // cluster's cycle space contains an odd-ray cycle
  int parity = 0;           // winding parity of the assigned configuration
};

// Per-cluster winding summary (clusters with at least one open edge, ordered
// by root vertex index).  A cluster qualifies when some fundamental cycle of
// its open subgraph crosses the ray an odd number of times; only then can the
// parity configuration wind.
std::vector<ClusterWinding> winding_parities(const CableGraph& g,
                                             const std::vector<std::uint8_t>& ray_edge,
                                             const CrossingState& state);

}  // namespace loopforge
