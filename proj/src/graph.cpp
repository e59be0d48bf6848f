#include "loopforge/graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace loopforge {

int CableGraph::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ConfigError("unknown vertex: " + name);
  return it->second;
}

CableGraph build_graph(const GraphSpec& spec) {
  CableGraph g;
  g.names_.reserve(spec.vertices.size());
  for (const auto& v : spec.vertices) {
    if (g.by_name_.count(v.name))
      throw GraphError("duplicate vertex name: " + v.name);
    if (v.killing < 0.0)
      throw GraphError("negative killing rate at " + v.name);
    g.by_name_[v.name] = static_cast<int>(g.names_.size());
    g.names_.push_back(v.name);
    g.boundary_.push_back(v.boundary ? 1 : 0);
    g.killing_.push_back(v.killing);
  }
  if (g.names_.empty()) throw GraphError("graph has no vertices");

  g.star_.resize(g.names_.size());
  for (const auto& e : spec.edges) {
    if (!(e.resistance > 0.0)) {
      std::ostringstream os;
      os << "edge " << e.u << "-" << e.v << " has nonpositive resistance " << e.resistance;
      throw NonpositiveResistance(os.str());
    }
    const int u = g.index_of(e.u);
    const int v = g.index_of(e.v);
    if (u == v) throw GraphError("self-loop at " + e.u);
    const int idx = static_cast<int>(g.edges_.size());
    g.edges_.push_back(Edge{u, v, e.resistance});
    g.star_[u].emplace_back(idx, v);
    g.star_[v].emplace_back(idx, u);
  }

  // Connectivity over all vertices (boundary included).
  {
    std::vector<std::uint8_t> seen(g.names_.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const auto& [e, w] : g.star_[v]) {
        (void)e;
        if (!seen[w]) {
          seen[w] = 1;
          ++reached;
          q.push(w);
        }
      }
    }
    if (reached != static_cast<int>(g.names_.size())) throw DisconnectedGraph();
  }

  bool any_exit = false;
  g.total_rate_.resize(g.names_.size(), 0.0);
  g.interior_pos_.assign(g.names_.size(), -1);
  for (int v = 0; v < g.vertex_count(); ++v) {
    double c = g.killing_[v];
    for (const auto& [e, w] : g.star_[v]) {
      (void)w;
      c += g.conductance(e);
    }
    g.total_rate_[v] = c;
    if (g.boundary_[v] || g.killing_[v] > 0.0) any_exit = true;
    if (!g.boundary_[v]) {
      g.interior_pos_[v] = static_cast<int>(g.interior_.size());
      g.interior_.push_back(v);
    }
  }
  if (!any_exit) throw NoKillingNoBoundary();
  if (g.interior_.empty()) throw GraphError("graph has no interior vertices");
  return g;
}

GraphSpec path_spec(int n) {
  if (n < 3) throw GraphError("path needs at least 3 vertices");
  GraphSpec s;
  for (int i = 0; i < n; ++i) {
    s.vertices.push_back({"p" + std::to_string(i), i == 0 || i == n - 1, 0.0});
  }
  for (int i = 0; i + 1 < n; ++i) {
    s.edges.push_back({"p" + std::to_string(i), "p" + std::to_string(i + 1), 1.0});
  }
  return s;
}

namespace {

std::string grid_name(int i, int j) {
  return "g" + std::to_string(i) + "_" + std::to_string(j);
}

}  // namespace

GraphSpec grid_spec(int w, int h, GridBoundary b, double killing) {
  if (w < 1 || h < 1) throw GraphError("grid needs positive dimensions");
  GraphSpec s;
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < h; ++j)
      s.vertices.push_back({grid_name(i, j), false, killing});
  for (int i = 0; i < w; ++i) {
    for (int j = 0; j < h; ++j) {
      if (i + 1 < w) s.edges.push_back({grid_name(i, j), grid_name(i + 1, j), 1.0});
      if (j + 1 < h) s.edges.push_back({grid_name(i, j), grid_name(i, j + 1), 1.0});
    }
  }
  if (b == GridBoundary::wired) {
    s.vertices.push_back({"bnd", true, 0.0});
    for (int i = 0; i < w; ++i) {
      for (int j = 0; j < h; ++j) {
        // one edge to "bnd" per missing lattice neighbour, so every grid
        // vertex keeps total degree 4 as in the wired box
        int missing = 0;
        if (i == 0) ++missing;
        if (i == w - 1) ++missing;
        if (j == 0) ++missing;
        if (j == h - 1) ++missing;
        for (int r = 0; r < missing; ++r)
          s.edges.push_back({grid_name(i, j), "bnd", 1.0});
      }
    }
  }
  return s;
}

namespace {

std::string box3_name(int i, int j, int k) {
  return "c" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k);
}

}  // namespace

GraphSpec box3_spec(int L) {
  if (L < 1) throw GraphError("box3 needs L >= 1");
  const int n = 2 * L + 1;
  GraphSpec s;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        s.vertices.push_back({box3_name(i, j, k), false, 0.0});
  auto at_edge = [&](int a) { return a == 0 || a == n - 1; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (i + 1 < n) s.edges.push_back({box3_name(i, j, k), box3_name(i + 1, j, k), 1.0});
        if (j + 1 < n) s.edges.push_back({box3_name(i, j, k), box3_name(i, j + 1, k), 1.0});
        if (k + 1 < n) s.edges.push_back({box3_name(i, j, k), box3_name(i, j, k + 1), 1.0});
      }
    }
  }
  s.vertices.push_back({"bnd", true, 0.0});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const int missing = (at_edge(i) ? 1 : 0) + (at_edge(j) ? 1 : 0) + (at_edge(k) ? 1 : 0);
        for (int r = 0; r < missing; ++r)
          s.edges.push_back({box3_name(i, j, k), "bnd", 1.0});
      }
    }
  }
  return s;
}

GraphSpec interlacement_box_spec(int L) {
  GraphSpec s = box3_spec(L);
  double c_bnd = 0.0;
  for (const auto& e : s.edges)
    if (e.u == "bnd" || e.v == "bnd") c_bnd += 1.0 / e.resistance;
  for (auto& v : s.vertices) {
    if (v.name == "bnd") {
      v.boundary = false;
      v.killing = c_bnd;  // escape to infinity, never to return
    }
  }
  return s;
}

Annulus annulus(int n) {
  if (n < 4 || n % 2 != 0) throw GraphError("annulus needs an even n >= 4");
  const int r0 = n / 2 - 1;  // hole spans rows/cols r0..r0+1
  auto in_hole = [&](int i, int j) {
    return i >= r0 && i <= r0 + 1 && j >= r0 && j <= r0 + 1;
  };
  GraphSpec s;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!in_hole(i, j)) s.vertices.push_back({grid_name(i, j), false, 0.0});
  auto present = [&](int i, int j) {
    return i >= 0 && i < n && j >= 0 && j < n && !in_hole(i, j);
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!present(i, j)) continue;
      if (present(i + 1, j)) s.edges.push_back({grid_name(i, j), grid_name(i + 1, j), 1.0});
      if (present(i, j + 1)) s.edges.push_back({grid_name(i, j), grid_name(i, j + 1), 1.0});
    }
  }
  s.vertices.push_back({"bnd", true, 0.0});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!present(i, j)) continue;
      // wire only the outer perimeter; the hole stays free so that winding
      // around it is a genuine topological event
      int missing = 0;
      if (i == 0) ++missing;
      if (i == n - 1) ++missing;
      if (j == 0) ++missing;
      if (j == n - 1) ++missing;
      for (int r = 0; r < missing; ++r) s.edges.push_back({grid_name(i, j), "bnd", 1.0});
    }
  }
  Annulus a{build_graph(s), {}};
  a.ray_edge.assign(a.graph.edge_count(), 0);
  // Dual ray from the hole centre to the right: it crosses exactly the
  // vertical edges (i, r0)-(i, r0+1) with i > r0 + 1.
  for (int e = 0; e < a.graph.edge_count(); ++e) {
    const Edge& ed = a.graph.edge(e);
    const std::string& nu = a.graph.name(ed.u);
    const std::string& nv = a.graph.name(ed.v);
    for (int i = r0 + 2; i < n; ++i) {
      const std::string lo = grid_name(i, r0);
      const std::string hi = grid_name(i, r0 + 1);
      if ((nu == lo && nv == hi) || (nu == hi && nv == lo)) a.ray_edge[e] = 1;
    }
  }
  return a;
}

DoubleAnnulus double_annulus() {
  const int w = 12, h = 6;
  const int ja = 2;  // both holes span rows ja..ja+1
  const int ca = 2, cb = 8;  // hole columns ca..ca+1 and cb..cb+1
  auto in_hole = [&](int i, int j) {
    if (j < ja || j > ja + 1) return false;
    return (i >= ca && i <= ca + 1) || (i >= cb && i <= cb + 1);
  };
  GraphSpec s;
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < h; ++j)
      if (!in_hole(i, j)) s.vertices.push_back({grid_name(i, j), false, 0.0});
  auto present = [&](int i, int j) {
    return i >= 0 && i < w && j >= 0 && j < h && !in_hole(i, j);
  };
  for (int i = 0; i < w; ++i) {
    for (int j = 0; j < h; ++j) {
      if (!present(i, j)) continue;
      if (present(i + 1, j)) s.edges.push_back({grid_name(i, j), grid_name(i + 1, j), 1.0});
      if (present(i, j + 1)) s.edges.push_back({grid_name(i, j), grid_name(i, j + 1), 1.0});
    }
  }
  s.vertices.push_back({"bnd", true, 0.0});
  for (int i = 0; i < w; ++i) {
    for (int j = 0; j < h; ++j) {
      if (!present(i, j)) continue;
      int missing = 0;
      if (i == 0) ++missing;
      if (i == w - 1) ++missing;
      if (j == 0) ++missing;
      if (j == h - 1) ++missing;
      for (int r = 0; r < missing; ++r) s.edges.push_back({grid_name(i, j), "bnd", 1.0});
    }
  }
  DoubleAnnulus d{build_graph(s), {}, {}};
  d.ray_a.assign(d.graph.edge_count(), 0);
  d.ray_b.assign(d.graph.edge_count(), 0);
  // Each ray runs right from its hole centre between rows ja and ja+1,
  // crossing the vertical edges (i, ja)-(i, ja+1) past the hole.  The ray
  // from the left hole passes through the right hole's face, which is fine:
  // a cycle around the right hole meets it in an even number of edges.
  auto mark = [&](std::vector<std::uint8_t>& ray, int c0) {
    for (int e = 0; e < d.graph.edge_count(); ++e) {
      const Edge& ed = d.graph.edge(e);
      const std::string& nu = d.graph.name(ed.u);
      const std::string& nv = d.graph.name(ed.v);
      for (int i = c0 + 2; i < w; ++i) {
        const std::string lo = grid_name(i, ja);
        const std::string hi = grid_name(i, ja + 1);
        if ((nu == lo && nv == hi) || (nu == hi && nv == lo)) ray[e] = 1;
      }
    }
  };
  mark(d.ray_a, ca);
  mark(d.ray_b, cb);
  return d;
}

Refined refine(const CableGraph& g, int K) {
  if (K < 1) throw GraphError("mesh factor must be >= 1");
  GraphSpec s;
  for (int v = 0; v < g.vertex_count(); ++v)
    s.vertices.push_back({g.name(v), g.is_boundary(v), g.killing(v)});
  std::vector<std::vector<std::string>> chain_names(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    std::vector<std::string>& chain = chain_names[e];
    chain.push_back(g.name(ed.u));
    for (int i = 1; i < K; ++i) {
      std::string m = "m" + std::to_string(e) + "_" + std::to_string(i);
      s.vertices.push_back({m, false, 0.0});
      chain.push_back(m);
    }
    chain.push_back(g.name(ed.v));
    const double r = ed.resistance / K;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
      s.edges.push_back({chain[i], chain[i + 1], r});
  }
  Refined out;
  out.graph = build_graph(s);
  out.mesh = K;
  out.vertex_map.resize(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v)
    out.vertex_map[v] = out.graph.index_of(g.name(v));
  out.chains.resize(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e)
    for (const auto& nm : chain_names[e]) out.chains[e].push_back(out.graph.index_of(nm));
  return out;
}

GraphSpec spec_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GraphSpec s;
  std::unordered_map<std::string, std::size_t> pos;
  for (const auto& v : j.at("vertices")) {
    pos[v.get<std::string>()] = s.vertices.size();
    s.vertices.push_back({v.get<std::string>(), false, 0.0});
  }
  if (j.contains("boundary")) {
    for (const auto& b : j.at("boundary")) {
      auto it = pos.find(b.get<std::string>());
      if (it == pos.end()) throw ConfigError("boundary lists unknown vertex " + b.get<std::string>());
      s.vertices[it->second].boundary = true;
    }
  }
  if (j.contains("killing")) {
    for (const auto& [name, rate] : j.at("killing").items()) {
      auto it = pos.find(name);
      if (it == pos.end()) throw ConfigError("killing lists unknown vertex " + name);
      s.vertices[it->second].killing = rate.get<double>();
    }
  }
  for (const auto& e : j.at("edges")) {
    s.edges.push_back({e.at("u").get<std::string>(), e.at("v").get<std::string>(),
                       e.at("R").get<double>()});
  }
  return s;
}

std::string spec_to_json_text(const GraphSpec& spec) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  j["boundary"] = nlohmann::json::array();
  j["killing"] = nlohmann::json::object();
  for (const auto& v : spec.vertices) {
    j["vertices"].push_back(v.name);
    if (v.boundary) j["boundary"].push_back(v.name);
    if (v.killing > 0.0) j["killing"][v.name] = v.killing;
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : spec.edges)
    j["edges"].push_back({{"u", e.u}, {"v", e.v}, {"R", e.resistance}});
  return j.dump(2);
}

GraphSpec spec_of(const CableGraph& g) {
  GraphSpec s;
  for (int v = 0; v < g.vertex_count(); ++v)
    s.vertices.push_back({g.name(v), g.is_boundary(v), g.killing(v)});
  for (const auto& e : g.edges())
    s.edges.push_back({g.name(e.u), g.name(e.v), e.resistance});
  return s;
}

}  // namespace loopforge
