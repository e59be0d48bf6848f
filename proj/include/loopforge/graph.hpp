#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "loopforge/errors.hpp"

namespace loopforge {

struct VertexSpec {
  std::string name;
  bool boundary = false;
  double killing = 0.0;
};

struct EdgeSpec {
  std::string u;
  std::string v;
  double resistance = 1.0;
};

struct GraphSpec {
  std::vector<VertexSpec> vertices;
  std::vector<EdgeSpec> edges;
};

struct Edge {
  int u;
  int v;
  double resistance;
};

// Finite electrical network with unit conductance c = 1/R per edge, an optional
// Dirichlet boundary set and per-vertex killing rates.  Immutable once built,
// so instances can be shared freely across worker threads.
class CableGraph {
 public:
  int vertex_count() const { return static_cast<int>(names_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  int index_of(const std::string& name) const;
  bool has_vertex(const std::string& name) const { return by_name_.count(name) > 0; }
  const std::string& name(int v) const { return names_[v]; }

  bool is_boundary(int v) const { return boundary_[v] != 0; }
  double killing(int v) const { return killing_[v]; }

  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  double conductance(int e) const { return 1.0 / edges_[e].resistance; }

  // Incident (edge index, opposite vertex) pairs, in edge insertion order.
  const std::vector<std::pair<int, int>>& star(int v) const { return star_[v]; }

  // Sum of incident conductances plus the killing rate: the holding rate of
  // the continuous-time chain at v.
  double total_rate(int v) const { return total_rate_[v]; }

  const std::vector<int>& interior() const { return interior_; }
  int interior_size() const { return static_cast<int>(interior_.size()); }
  // Position of v within interior(), or -1 for boundary vertices.
  int interior_pos(int v) const { return interior_pos_[v]; }

  friend CableGraph build_graph(const GraphSpec& spec);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> by_name_;
  std::vector<std::uint8_t> boundary_;
  std::vector<double> killing_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, int>>> star_;
  std::vector<double> total_rate_;
  std::vector<int> interior_;
  std::vector<int> interior_pos_;
};

// Validates and assembles a CableGraph.  Throws NonpositiveResistance,
// DisconnectedGraph, NoKillingNoBoundary or GraphError on malformed input.
CableGraph build_graph(const GraphSpec& spec);

// --- generators ----------------------------------------------------------

// Path with n >= 3 vertices p0..p{n-1}; both endpoints are Dirichlet boundary.
// The canonical two-point fixture is path(4) with marked vertices p1, p2.
GraphSpec path_spec(int n);

enum class GridBoundary { wired, free };

// w x h square grid, vertices g{i}_{j} with 0 <= i < w, 0 <= j < h, unit
// resistances.  "wired": one boundary vertex "bnd" with one unit edge per
// missing lattice neighbour of each perimeter vertex.  "free": no boundary
// (pass a positive killing rate or the build will fail).
GraphSpec grid_spec(int w, int h, GridBoundary b, double killing = 0.0);

// Cubic box [-L, L]^3, vertices c{i}_{j}_{k} with 0 <= i,j,k <= 2L, wired
// boundary "bnd" as in grid_spec.  The centre vertex is c{L}_{L}_{L}.
GraphSpec box3_spec(int L);

// box3_spec with the wired vertex moved into the interior and given a killing
// rate equal to its total conductance; models the point at infinity of a
// transient medium as an ordinary vertex that can be marked and conditioned.
GraphSpec interlacement_box_spec(int L);

struct Annulus {
  CableGraph graph;
  // Edge mask: 1 for edges crossing the dual ray from the hole centre to the
  // right; used to read winding parities around the hole.
  std::vector<std::uint8_t> ray_edge;
};

// n x n grid (n even, >= 4) with the central 2x2 block of vertices removed and
// the outer perimeter wired to "bnd".  The hole is the marked face.
Annulus annulus(int n);

struct DoubleAnnulus {
  CableGraph graph;
  // Dual rays from each hole centre to the right exterior.
  std::vector<std::uint8_t> ray_a;
  std::vector<std::uint8_t> ray_b;
};

// 12 x 6 grid with two 2x2 holes side by side and the outer perimeter wired
// to "bnd"; distinct clusters can wind around distinct holes, which makes the
// joint law of two winding parities observable.
DoubleAnnulus double_annulus();

struct Refined {
  CableGraph graph;
  // chains[e]: vertex indices u, m1, ..., m{K-1}, v of the subdivision of
  // original edge e, in the refined graph.
  std::vector<std::vector<int>> chains;
  // original vertex index -> refined vertex index
  std::vector<int> vertex_map;
  int mesh = 1;
};

// Splits every edge into K series pieces of resistance R/K.  Mesh vertices are
// interior with zero killing; original vertices keep names, roles and killing.
Refined refine(const CableGraph& g, int K);

// --- JSON fixtures -------------------------------------------------------
// Schema: {"vertices": [..], "edges": [{"u","v","R"}], "boundary": [..],
//          "killing": {name: rate}}
GraphSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const GraphSpec& spec);
GraphSpec spec_of(const CableGraph& g);

}  // namespace loopforge
