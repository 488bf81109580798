#pragma once

#include <memory>
#include <vector>

#include "cgode/linalg.hpp"
#include "cgode/precision.hpp"

namespace cgode {

// Quadrature rule on the reference interval [0, 1]. Weights sum to 1.
struct QuadratureRule {
  std::vector<BigScalar> points;   // strictly increasing
  std::vector<BigScalar> weights;
  int exactness_degree = 0;  // integrates t^k exactly for k <= this
  int digits = 0;

  int size() const { return static_cast<int>(points.size()); }
};

// Largest supported point count for the rule constructors.
inline constexpr int kMaxQuadraturePoints = 256;

// n-point Gauss-Legendre rule on [0, 1]; exact through degree 2n-1. Nodes by
// Newton iteration on P_n from Chebyshev initial guesses, converged to
// working precision.
QuadratureRule gauss_legendre(int n, const PrecisionContext& ctx);

// n-point Gauss-Lobatto rule on [0, 1] (endpoints included); exact through
// degree 2n-3. Requires n >= 2.
QuadratureRule gauss_lobatto(int n, const PrecisionContext& ctx);

// Cached variants, memoized by (family, n, digits). Thread-safe.
std::shared_ptr<const QuadratureRule> gauss_legendre_cached(
    int n, const PrecisionContext& ctx);
std::shared_ptr<const QuadratureRule> gauss_lobatto_cached(
    int n, const PrecisionContext& ctx);

// Lagrange nodal basis on distinct nodes in [0, 1], with barycentric weights
// and the nodal differentiation matrix.
class NodalBasis {
 public:
  NodalBasis(std::vector<BigScalar> nodes, int digits);

  int degree() const { return static_cast<int>(nodes_.size()) - 1; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int digits() const { return digits_; }
  const std::vector<BigScalar>& nodes() const { return nodes_; }
  const std::vector<BigScalar>& bary_weights() const { return bary_; }

  // D(i, j) = derivative of cardinal function j at node i. Rows sum to zero
  // exactly by construction.
  const Matrix& diff_matrix() const { return diff_; }

  // Cardinal function values at arbitrary points: E(i, j) = l_j(points[i]).
  Matrix eval_matrix(const std::vector<BigScalar>& points) const;

  // Barycentric evaluation of the interpolant through (node_j, values[j]) at
  // t (reference coordinate). Exact when t hits a node.
  BigScalar eval(const std::vector<BigScalar>& values, const BigScalar& t) const;

  // Vector-valued variant: values[j] is the nodal vector at node j.
  Vector eval(const std::vector<Vector>& values, const BigScalar& t) const;
  void eval(const std::vector<Vector>& values, const BigScalar& t,
            Vector& out) const;

 private:
  std::vector<BigScalar> cardinal_row(const BigScalar& t) const;

  int digits_;
  std::vector<BigScalar> nodes_;
  std::vector<BigScalar> bary_;
  Matrix diff_;
};

// Gauss-Lobatto nodal basis of degree q (q+1 nodes including both endpoints):
// the cG trial space on the reference interval.
NodalBasis lobatto_basis(int q, const PrecisionContext& ctx);
std::shared_ptr<const NodalBasis> lobatto_basis_cached(
    int q, const PrecisionContext& ctx);

// Differentiation matrix of a basis.
inline const Matrix& differentiation_matrix(const NodalBasis& b) {
  return b.diff_matrix();
}

// Barycentric interpolation through (basis node_i, coeffs_i) at t in [0, 1],
// per solution component.
inline BigScalar lagrange_eval(const NodalBasis& basis,
                               const std::vector<BigScalar>& coeffs,
                               const BigScalar& t) {
  return basis.eval(coeffs, t);
}

}  // namespace cgode
