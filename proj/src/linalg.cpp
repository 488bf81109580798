#include "cgode/linalg.hpp"

#include <utility>

namespace cgode {

Vector::Vector(const PrecisionContext& ctx, int n) : digits_(ctx.digits()) {
  e_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) e_.emplace_back(ctx);
}

Vector::Vector(const PrecisionContext& ctx, std::initializer_list<long> values)
    : digits_(ctx.digits()) {
  e_.reserve(values.size());
  for (long v : values) e_.emplace_back(ctx, v);
}

void Vector::require_same_shape(const Vector& b) const {
  if (size() != b.size() || digits_ != b.digits_) {
    throw MixedPrecisionError("vector shape/context mismatch");
  }
}

void Vector::set_zero() {
  for (auto& x : e_) x.set_zero();
}

void Vector::set(const Vector& other) {
  require_same_shape(other);
  for (int i = 0; i < size(); ++i) e_[static_cast<std::size_t>(i)].set(other[i]);
}

Vector& Vector::operator+=(const Vector& b) {
  require_same_shape(b);
  for (int i = 0; i < size(); ++i) (*this)[i] += b[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& b) {
  require_same_shape(b);
  for (int i = 0; i < size(); ++i) (*this)[i] -= b[i];
  return *this;
}

Vector& Vector::operator*=(const BigScalar& s) {
  for (int i = 0; i < size(); ++i) (*this)[i] *= s;
  return *this;
}

Vector& Vector::add_scaled(const BigScalar& s, const Vector& b) {
  require_same_shape(b);
  for (int i = 0; i < size(); ++i) (*this)[i].add_mul(s, b[i]);
  return *this;
}

Vector operator+(const Vector& a, const Vector& b) {
  Vector r(a);
  r += b;
  return r;
}

Vector operator-(const Vector& a, const Vector& b) {
  Vector r(a);
  r -= b;
  return r;
}

Vector operator*(const BigScalar& s, const Vector& a) {
  Vector r(a);
  r *= s;
  return r;
}

BigScalar Vector::dot(const Vector& b) const {
  require_same_shape(b);
  BigScalar acc(ctx());
  for (int i = 0; i < size(); ++i) acc.add_mul((*this)[i], b[i]);
  return acc;
}

BigScalar Vector::norm_l2() const {
  BigScalar acc(ctx());
  for (int i = 0; i < size(); ++i) acc.add_mul((*this)[i], (*this)[i]);
  return sqrt(acc);
}

BigScalar Vector::norm_inf() const {
  BigScalar m(ctx());
  BigScalar t(ctx());
  for (int i = 0; i < size(); ++i) {
    t.set((*this)[i]);
    t.abs_assign();
    if (t > m) m.set(t);
  }
  return m;
}

Matrix::Matrix(const PrecisionContext& ctx, int rows, int cols)
    : digits_(ctx.digits()), rows_(rows), cols_(cols) {
  a_.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int i = 0; i < rows * cols; ++i) a_.emplace_back(ctx);
}

Matrix Matrix::identity(const PrecisionContext& ctx, int n) {
  Matrix m(ctx, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i).set(1);
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.ctx(), d.size(), d.size());
  for (int i = 0; i < d.size(); ++i) m.at(i, i).set(d[i]);
  return m;
}

void Matrix::set_zero() {
  for (auto& x : a_) x.set_zero();
}

void Matrix::set(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_ || digits_ != other.digits_) {
    throw MixedPrecisionError("matrix shape/context mismatch");
  }
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i].set(other.a_[i]);
}

Matrix Matrix::transposed() const {
  Matrix t(ctx(), cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.at(j, i).set(at(i, j));
  return t;
}

Matrix Matrix::operator*(const Matrix& b) const {
  if (cols_ != b.rows_) throw MixedPrecisionError("matrix product shape mismatch");
  Matrix r(ctx(), rows_, b.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < b.cols_; ++j) {
      BigScalar& acc = r.at(i, j);
      for (int k = 0; k < cols_; ++k) acc.add_mul(at(i, k), b.at(k, j));
    }
  }
  return r;
}

Vector Matrix::operator*(const Vector& x) const {
  Vector out(ctx(), rows_);
  multiply(x, out);
  return out;
}

void Matrix::multiply(const Vector& x, Vector& out) const {
  if (x.size() != cols_ || out.size() != rows_) {
    throw MixedPrecisionError("matvec shape mismatch");
  }
  for (int i = 0; i < rows_; ++i) {
    BigScalar& acc = out[i];
    acc.set_zero();
    for (int j = 0; j < cols_; ++j) acc.add_mul(at(i, j), x[j]);
  }
}

BigScalar Matrix::norm_inf() const {
  BigScalar best(ctx());
  BigScalar row(ctx());
  BigScalar t(ctx());
  for (int i = 0; i < rows_; ++i) {
    row.set_zero();
    for (int j = 0; j < cols_; ++j) {
      t.set(at(i, j));
      t.abs_assign();
      row += t;
    }
    if (row > best) best.set(row);
  }
  return best;
}

void lu_solve_inplace(Matrix& A, Vector& b, std::vector<int>& perm) {
  const int n = A.rows();
  if (A.cols() != n || b.size() != n) {
    throw MixedPrecisionError("lu_solve: shape mismatch");
  }
  const PrecisionContext ctx = A.ctx();
  perm.resize(static_cast<std::size_t>(n));

  // Singularity threshold relative to the matrix scale.
  BigScalar scale(ctx);
  BigScalar t(ctx);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      t.set(A.at(i, j));
      t.abs_assign();
      if (t > scale) scale.set(t);
    }
  BigScalar tiny = ctx.eps() * scale;
  tiny *= n;

  BigScalar piv(ctx);
  BigScalar cand(ctx);
  BigScalar factor(ctx);
  for (int k = 0; k < n; ++k) {
    int p = k;
    piv.set(A.at(k, k));
    piv.abs_assign();
    for (int i = k + 1; i < n; ++i) {
      cand.set(A.at(i, k));
      cand.abs_assign();
      if (cand > piv) {
        piv.set(cand);
        p = i;
      }
    }
    if (piv.is_zero() || (!scale.is_zero() && piv <= tiny)) {
      throw SingularMatrixError(
          "matrix singular to working precision at column " + std::to_string(k) +
              " (pivot magnitude " + piv.str(6) + ")",
          piv.str(6));
    }
    perm[static_cast<std::size_t>(k)] = p;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(A.at(k, j), A.at(p, j));
      std::swap(b[k], b[p]);
    }
    for (int i = k + 1; i < n; ++i) {
      factor.set(A.at(i, k));
      factor /= A.at(k, k);
      factor.negate();
      if (factor.is_zero()) continue;
      for (int j = k + 1; j < n; ++j) A.at(i, j).add_mul(factor, A.at(k, j));
      b[i].add_mul(factor, b[k]);
    }
  }
  // Back substitution.
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) b[i].sub_mul(A.at(i, j), b[j]);
    b[i] /= A.at(i, i);
  }
}

Vector linsolve(const Matrix& A, const Vector& b) {
  Matrix work(A);
  Vector x(b);
  std::vector<int> perm;
  lu_solve_inplace(work, x, perm);
  return x;
}

BigScalar spectral_norm(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw DomainError("spectral_norm requires a square matrix");
  }
  const PrecisionContext ctx = A.ctx();
  const int n = A.rows();
  if (n == 0) return BigScalar(ctx);

  Matrix B = A.transposed() * A;

  // Deterministic start: ones with a small index-dependent tilt so symmetric
  // eigenvector splits do not trap the iteration.
  Vector v(ctx, n);
  for (int i = 0; i < n; ++i) {
    v[i].set(100 + i);
    v[i] /= 100;
  }
  BigScalar nv = v.norm_l2();
  for (int i = 0; i < n; ++i) v[i] /= nv;

  const BigScalar rel_tol = parse_decimal("1e-8", ctx);
  constexpr int kMaxIters = 5000;

  Vector w(ctx, n);
  BigScalar lambda(ctx);
  BigScalar lambda_prev(ctx);
  BigScalar diff(ctx);
  for (int iter = 0; iter < kMaxIters; ++iter) {
    B.multiply(v, w);
    lambda = v.dot(w);  // Rayleigh quotient; v is unit length
    const BigScalar wn = w.norm_l2();
    if (wn.is_zero()) return BigScalar(ctx);  // A = 0
    for (int i = 0; i < n; ++i) {
      v[i].set(w[i]);
      v[i] /= wn;
    }
    if (iter > 0) {
      diff = lambda - lambda_prev;
      diff.abs_assign();
      if (diff <= rel_tol * abs(lambda)) {
        if (lambda.sign() < 0) lambda.set_zero();
        return sqrt(lambda);
      }
    }
    lambda_prev.set(lambda);
  }
  throw ConvergenceError(
      "power iteration did not converge within " + std::to_string(kMaxIters) +
          " iterations",
      "last eigenvalue estimate " + lambda.str(12));
}

}  // namespace cgode
