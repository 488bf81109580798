#pragma once

#include <vector>

#include "cgode/precision.hpp"

namespace cgode {

// Dense vector of BigScalars sharing one precision context.
class Vector {
 public:
  Vector() = default;
  Vector(const PrecisionContext& ctx, int n);  // zero-filled
  Vector(const PrecisionContext& ctx, std::initializer_list<long> values);

  int size() const { return static_cast<int>(e_.size()); }
  int digits() const { return digits_; }
  PrecisionContext ctx() const { return PrecisionContext(digits_); }

  BigScalar& operator[](int i) { return e_[static_cast<std::size_t>(i)]; }
  const BigScalar& operator[](int i) const {
    return e_[static_cast<std::size_t>(i)];
  }

  void set_zero();
  void set(const Vector& other);

  Vector& operator+=(const Vector& b);
  Vector& operator-=(const Vector& b);
  Vector& operator*=(const BigScalar& s);
  // *this += s * b
  Vector& add_scaled(const BigScalar& s, const Vector& b);

  friend Vector operator+(const Vector& a, const Vector& b);
  friend Vector operator-(const Vector& a, const Vector& b);
  friend Vector operator*(const BigScalar& s, const Vector& a);

  BigScalar dot(const Vector& b) const;
  BigScalar norm_l2() const;
  BigScalar norm_inf() const;

 private:
  void require_same_shape(const Vector& b) const;

  int digits_ = 0;
  std::vector<BigScalar> e_;
};

// Dense row-major matrix of BigScalars.
class Matrix {
 public:
  Matrix() = default;
  Matrix(const PrecisionContext& ctx, int rows, int cols);  // zero-filled

  static Matrix identity(const PrecisionContext& ctx, int n);
  static Matrix diagonal(const Vector& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int digits() const { return digits_; }
  PrecisionContext ctx() const { return PrecisionContext(digits_); }

  BigScalar& at(int i, int j) {
    return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
              static_cast<std::size_t>(j)];
  }
  const BigScalar& at(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
              static_cast<std::size_t>(j)];
  }

  void set_zero();
  void set(const Matrix& other);

  Matrix transposed() const;
  Matrix operator*(const Matrix& b) const;
  Vector operator*(const Vector& x) const;
  // out = this * x without allocation.
  void multiply(const Vector& x, Vector& out) const;

  // Max absolute row sum (operator infinity norm).
  BigScalar norm_inf() const;

 private:
  int digits_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<BigScalar> a_;
};

// Solves A x = b by LU with partial (row) pivoting. A must be square and
// nonsingular to working precision; throws SingularMatrixError otherwise,
// reporting the offending pivot magnitude.
Vector linsolve(const Matrix& A, const Vector& b);

// In-place variant for hot loops: factors A (destroyed) and overwrites b
// with the solution. `perm` is scratch sized A.rows().
void lu_solve_inplace(Matrix& A, Vector& b, std::vector<int>& perm);

// Largest singular value via power iteration on A^T A, to a fixed relative
// tolerance of 1e-8 (diagnostic accuracy). Deterministic start vector.
BigScalar spectral_norm(const Matrix& A);

}  // namespace cgode
