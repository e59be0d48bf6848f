#include "loopforge/green.hpp"

#include <cmath>

#include "loopforge/rng.hpp"

namespace loopforge {

namespace {

constexpr int kDenseLimit = 2600;  // full G cached below this interior size

}  // namespace

Eigen::SparseMatrix<double> interior_laplacian(const CableGraph& g) {
  const int n = g.interior_size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * g.edge_count());
  for (int i = 0; i < n; ++i) {
    const int v = g.interior()[i];
    trip.emplace_back(i, i, g.total_rate(v));
    for (const auto& [e, w] : g.star(v)) {
      const int j = g.interior_pos(w);
      if (j >= 0) trip.emplace_back(i, j, -g.conductance(e));
    }
  }
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

GreenOperator::GreenOperator(const CableGraph& g) : g_(&g) {
  llt_.compute(interior_laplacian(g));
  if (llt_.info() != Eigen::Success) throw SingularLaplacian();
  const int n = g.interior_size();
  if (n <= kDenseLimit) {
    dense_ = llt_.solve(Eigen::MatrixXd::Identity(n, n));
    have_dense_ = true;
  }
}

Eigen::VectorXd GreenOperator::solve_interior(const Eigen::VectorXd& rhs) const {
  return llt_.solve(rhs);
}

double GreenOperator::operator()(int x, int y) const {
  const int i = g_->interior_pos(x);
  const int j = g_->interior_pos(y);
  if (i < 0 || j < 0) return 0.0;
  if (have_dense_) return dense_(i, j);
  return column(x)[y];
}

Eigen::VectorXd GreenOperator::column(int x) const {
  const int n = g_->interior_size();
  Eigen::VectorXd full = Eigen::VectorXd::Zero(g_->vertex_count());
  const int i = g_->interior_pos(x);
  if (i < 0) return full;
  Eigen::VectorXd col(n);
  if (have_dense_) {
    col = dense_.col(i);
  } else {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = column_cache_.find(i);
    if (it == column_cache_.end()) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      rhs[i] = 1.0;
      it = column_cache_.emplace(i, solve_interior(rhs)).first;
    }
    col = it->second;
  }
  for (int k = 0; k < n; ++k) full[g_->interior()[k]] = col[k];
  return full;
}

Eigen::VectorXd GreenOperator::sample(std::mt19937_64& rng) const {
  const int n = g_->interior_size();
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = std_normal(rng);
  // With P L L^T P^T = Lap (Eigen's twisted factorization), the vector
  // P^{-1} L^{-T} z has covariance Lap^{-1} = G exactly.
  Eigen::VectorXd y = llt_.matrixU().solve(z);
  Eigen::VectorXd x = llt_.permutationPinv() * y;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(g_->vertex_count());
  for (int k = 0; k < n; ++k) full[g_->interior()[k]] = x[k];
  return full;
}

Eigen::VectorXd solve_harmonic(const CableGraph& g,
                               const std::vector<std::pair<int, double>>& pinned) {
  const int n = g.vertex_count();
  Eigen::VectorXd value = Eigen::VectorXd::Zero(n);
  std::vector<std::uint8_t> is_pinned(n, 0);
  for (int v = 0; v < n; ++v)
    if (g.is_boundary(v)) is_pinned[v] = 1;
  for (const auto& [v, val] : pinned) {
    is_pinned[v] = 1;
    value[v] = val;
  }
  std::vector<int> free_pos(n, -1);
  std::vector<int> free_vs;
  for (int v = 0; v < n; ++v) {
    if (!is_pinned[v]) {
      free_pos[v] = static_cast<int>(free_vs.size());
      free_vs.push_back(v);
    }
  }
  if (free_vs.empty()) return value;
  const int m = static_cast<int>(free_vs.size());
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    const int v = free_vs[i];
    trip.emplace_back(i, i, g.total_rate(v));
    for (const auto& [e, w] : g.star(v)) {
      const double c = g.conductance(e);
      if (free_pos[w] >= 0)
        trip.emplace_back(i, free_pos[w], -c);
      else
        rhs[i] += c * value[w];
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
  if (llt.info() != Eigen::Success) throw SingularLaplacian();
  Eigen::VectorXd sol = llt.solve(rhs);
  for (int i = 0; i < m; ++i) value[free_vs[i]] = sol[i];
  return value;
}

double effective_conductance(const CableGraph& g, int x, int y) {
  if (x == y) throw SameVertex();
  if (g.is_boundary(x) || g.is_boundary(y))
    throw GraphError("marked vertex lies on the boundary");
  // Schur complement onto {x, y}: -S(x,y) = c_xy + row_x(L_xI) L_II^{-1}
  // col_I(L_Iy).  Realized via the harmonic profile h = P[hit y before
  // x or boundary], giving  c_eff = sum_w c_{xw} h(w).
  Eigen::VectorXd h = solve_harmonic(g, {{x, 0.0}, {y, 1.0}});
  double c = 0.0;
  for (const auto& [e, w] : g.star(x)) c += g.conductance(e) * h[w];
  return c;
}

double effective_conductance(const GreenOperator& G, int x, int y) {
  if (x == y) throw SameVertex();
  const double gxy = G(x, y);
  const double det = G(x, x) * G(y, y) - gxy * gxy;
  return gxy / det;
}

double two_point_mass(const CableGraph& g, int x, int y, double a, double b) {
  if (x == y) throw SameVertex();
  if (a < 0.0 || b < 0.0) throw ConfigError("roots a, b must be nonnegative");
  return a * b * effective_conductance(g, x, y);
}

}  // namespace loopforge
