#pragma once

#include <memory>
#include <mutex>
#include <random>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "loopforge/graph.hpp"

namespace loopforge {

// Green operator G = L^{-1} of the interior-restricted weighted Laplacian
// (conductance 1/R per edge, killing rates on the diagonal).  Holds a sparse
// Cholesky factorization used both for linear solves and for exact Gaussian
// sampling; a dense copy of G is cached for small graphs, larger graphs fall
// back to cached column solves.  Thread-safe: the cache is mutex-guarded and
// the factorization is immutable after construction.
class GreenOperator {
 public:
  explicit GreenOperator(const CableGraph& g);

  const CableGraph& graph() const { return *g_; }

  // G(x,y) with x,y full-graph vertex indices; 0 if either vertex is boundary.
  double operator()(int x, int y) const;
  double diag(int x) const { return (*this)(x, x); }

  // Column G(., x) as a full-graph-indexed vector (zeros at boundary).
  Eigen::VectorXd column(int x) const;

  // Exact sample of the zero-boundary Gaussian field with covariance G,
  // full-graph-indexed (zeros at boundary).
  Eigen::VectorXd sample(std::mt19937_64& rng) const;

  int interior_size() const { return g_->interior_size(); }

 private:
  const CableGraph* g_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  Eigen::MatrixXd dense_;  // full G when small enough, else empty
  bool have_dense_ = false;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<int, Eigen::VectorXd> column_cache_;

  Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs_interior) const;
};

// Interior weighted Laplacian of g as a sparse matrix in interior ordering.
Eigen::SparseMatrix<double> interior_laplacian(const CableGraph& g);

// Value vector (full-graph-indexed) of the harmonic extension of the pinned
// values: at every vertex that is neither pinned nor boundary,
// total_rate(v) * h(v) = sum_w c_{vw} h(w); boundary vertices are pinned at 0
// unless an explicit pin overrides them.  Killing acts as a leak to 0.
Eigen::VectorXd solve_harmonic(const CableGraph& g,
                               const std::vector<std::pair<int, double>>& pinned);

// Effective conductance between distinct non-boundary vertices x and y: the
// negated off-diagonal of the Schur complement of the interior Laplacian onto
// {x, y}.  Returns 0 when x and y are separated by the Dirichlet boundary.
double effective_conductance(const CableGraph& g, int x, int y);

// Same quantity read off a Green operator via the 2x2 inverse-submatrix
// identity G(x,y) / (G(x,x)G(y,y) - G(x,y)^2); the two routes must agree.
double effective_conductance(const GreenOperator& G, int x, int y);

// m = a * b * effective_conductance(g, x, y): the mean number of connecting
// excursions between x and y at root values a and b.
double two_point_mass(const CableGraph& g, int x, int y, double a, double b);

}  // namespace loopforge
