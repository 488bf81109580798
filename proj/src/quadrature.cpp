#include "cgode/quadrature.hpp"

#include <map>
#include <mutex>
#include <tuple>

namespace cgode {

namespace {

// Legendre P_n(x) and P_n'(x) on [-1, 1] by the three-term recurrence.
void legendre(int n, const BigScalar& x, BigScalar& p, BigScalar& dp) {
  const PrecisionContext ctx = x.ctx();
  BigScalar p0(ctx, 1);
  if (n == 0) {
    p = p0;
    dp = BigScalar(ctx, 0);
    return;
  }
  BigScalar p1(x);
  BigScalar pk(ctx);
  for (int k = 2; k <= n; ++k) {
    // k P_k = (2k-1) x P_{k-1} - (k-1) P_{k-2}
    pk.set(x);
    pk *= p1;
    pk *= (2 * k - 1);
    pk.sub_mul(BigScalar(ctx, k - 1), p0);
    pk /= k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  // (x^2 - 1) P_n' = n (x P_n - P_{n-1})
  BigScalar num(x);
  num *= p1;
  num -= p0;
  num *= n;
  BigScalar den(x);
  den *= x;
  den -= BigScalar(ctx, 1);
  dp = num / den;
}

// Second derivative from the Legendre ODE: (1-x^2) y'' = 2x y' - n(n+1) y.
BigScalar legendre_dd(int n, const BigScalar& x, const BigScalar& p,
                      const BigScalar& dp) {
  const PrecisionContext ctx = x.ctx();
  BigScalar num(x);
  num *= dp;
  num *= 2;
  num.sub_mul(BigScalar(ctx, n * (n + 1)), p);
  BigScalar den(ctx, 1);
  den.sub_mul(x, x);
  return num / den;
}

void check_rule_size(int n, int min_n, const char* family) {
  if (n < min_n || n > kMaxQuadraturePoints) {
    throw ConfigError(std::string(family) + " rule size " + std::to_string(n) +
                      " outside supported range [" + std::to_string(min_n) +
                      ", " + std::to_string(kMaxQuadraturePoints) + "]");
  }
}

// Maps symmetric nodes/weights from [-1, 1] to [0, 1] enforcing exact
// symmetry about 1/2: only the lower half is computed, the mirror half is
// derived from it.
QuadratureRule map_symmetric_to_unit(std::vector<BigScalar> x_low,
                                     std::vector<BigScalar> w_low, int n,
                                     int exactness,
                                     const PrecisionContext& ctx) {
  QuadratureRule rule;
  rule.digits = ctx.digits();
  rule.exactness_degree = exactness;
  rule.points.resize(static_cast<std::size_t>(n), BigScalar(ctx));
  rule.weights.resize(static_cast<std::size_t>(n), BigScalar(ctx));
  const BigScalar one(ctx, 1);
  const int half = static_cast<int>(x_low.size());
  for (int i = 0; i < half; ++i) {
    // x in [-1, 0] maps to (1+x)/2; mirror node is 1 - mapped.
    BigScalar t = (one + x_low[static_cast<std::size_t>(i)]) / 2;
    BigScalar w = w_low[static_cast<std::size_t>(i)] / 2;
    rule.points[static_cast<std::size_t>(i)] = t;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.points[static_cast<std::size_t>(n - 1 - i)] = one - t;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = std::move(w);
  }
  if (n % 2 == 1) {
    rule.points[static_cast<std::size_t>(n / 2)] = ctx.parse("0.5");
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n, const PrecisionContext& ctx) {
  check_rule_size(n, 1, "gauss_legendre");

  const BigScalar tol = [&] {
    BigScalar t(ctx, 1);
    mpfr_mul_2si(t.raw(), t.raw(), -static_cast<long>(ctx.bits()) + 3,
                 MPFR_RNDN);
    return t;
  }();

  // Pi at working precision for the Chebyshev initial guesses.
  BigScalar pi(ctx);
  mpfr_const_pi(pi.raw(), MPFR_RNDN);

  const int half = (n + 1) / 2;  // roots in [-1, 0]
  std::vector<BigScalar> x_low, w_low;
  x_low.reserve(static_cast<std::size_t>(half));
  w_low.reserve(static_cast<std::size_t>(half));

  BigScalar p(ctx), dp(ctx), delta(ctx), ad(ctx);
  for (int i = 0; i < half; ++i) {
    // cos(pi (4(n-1-i)+3) / (4n+2)) lies in [-1, 0] for i < (n+1)/2.
    BigScalar x = pi * (4 * (n - 1 - i) + 3);
    x /= (4 * n + 2);
    mpfr_cos(x.raw(), x.raw(), MPFR_RNDN);

    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      legendre(n, x, p, dp);
      delta = p / dp;
      x -= delta;
      ad.set(delta);
      ad.abs_assign();
      if (ad <= tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError("gauss_legendre: Newton failed for root " +
                             std::to_string(i) + " of P_" + std::to_string(n));
    }
    legendre(n, x, p, dp);
    // w = 2 / ((1 - x^2) P_n'(x)^2)
    BigScalar w(ctx, 1);
    w.sub_mul(x, x);
    w *= dp;
    w *= dp;
    w = BigScalar(ctx, 2) / w;
    x_low.push_back(std::move(x));
    w_low.push_back(std::move(w));
  }
  // Odd n: center node exactly 0 before mapping, weight from the formula.
  if (n % 2 == 1) {
    BigScalar zero(ctx, 0);
    legendre(n, zero, p, dp);
    BigScalar w = BigScalar(ctx, 2) / (dp * dp);
    x_low.back().set_zero();
    w_low.back() = std::move(w);
  }
  return map_symmetric_to_unit(std::move(x_low), std::move(w_low), n, 2 * n - 1,
                               ctx);
}

QuadratureRule gauss_lobatto(int n, const PrecisionContext& ctx) {
  check_rule_size(n, 2, "gauss_lobatto");

  const BigScalar tol = [&] {
    BigScalar t(ctx, 1);
    mpfr_mul_2si(t.raw(), t.raw(), -static_cast<long>(ctx.bits()) + 3,
                 MPFR_RNDN);
    return t;
  }();

  BigScalar pi(ctx);
  mpfr_const_pi(pi.raw(), MPFR_RNDN);

  const int m = n - 1;          // interior nodes are roots of P_m'
  const int half = (n + 1) / 2;  // nodes in [-1, 0] including endpoint -1
  std::vector<BigScalar> x_low, w_low;
  x_low.reserve(static_cast<std::size_t>(half));
  w_low.reserve(static_cast<std::size_t>(half));

  const BigScalar w_denominator(ctx, n * m);
  // Endpoint -1, weight 2/(n(n-1)).
  {
    BigScalar xe(ctx, -1);
    BigScalar we = BigScalar(ctx, 2) / w_denominator;
    x_low.push_back(std::move(xe));
    w_low.push_back(std::move(we));
  }

  BigScalar p(ctx), dp(ctx), ddp(ctx), delta(ctx), ad(ctx);
  for (int i = 1; i < half; ++i) {
    // Chebyshev-Lobatto guess cos(pi (n-1-i)/(n-1)), in (-1, 0] half.
    BigScalar x = pi * (m - i);
    x /= m;
    mpfr_cos(x.raw(), x.raw(), MPFR_RNDN);

    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      legendre(m, x, p, dp);
      ddp = legendre_dd(m, x, p, dp);
      delta = dp / ddp;
      x -= delta;
      ad.set(delta);
      ad.abs_assign();
      if (ad <= tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError("gauss_lobatto: Newton failed for interior root " +
                             std::to_string(i) + " of P'_" + std::to_string(m));
    }
    legendre(m, x, p, dp);
    // w = 2 / (n(n-1) P_{n-1}(x)^2)
    BigScalar w = BigScalar(ctx, 2) / (w_denominator * p * p);
    x_low.push_back(std::move(x));
    w_low.push_back(std::move(w));
  }
  if (n % 2 == 1) x_low.back().set_zero();
  QuadratureRule rule = map_symmetric_to_unit(std::move(x_low), std::move(w_low),
                                              n, 2 * n - 3, ctx);
  // Endpoints exactly 0 and 1.
  rule.points.front().set(0);
  rule.points.back().set(1);
  return rule;
}

namespace {

using RuleKey = std::tuple<int, int, int>;  // family, n, digits
std::mutex g_rule_mutex;
std::map<RuleKey, std::shared_ptr<const QuadratureRule>>& rule_cache() {
  static std::map<RuleKey, std::shared_ptr<const QuadratureRule>> cache;
  return cache;
}

std::shared_ptr<const QuadratureRule> cached_rule(int family, int n,
                                                  const PrecisionContext& ctx) {
  const RuleKey key{family, n, ctx.digits()};
  {
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = rule_cache().find(key);
    if (it != rule_cache().end()) return it->second;
  }
  auto rule = std::make_shared<const QuadratureRule>(
      family == 0 ? gauss_legendre(n, ctx) : gauss_lobatto(n, ctx));
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto [it, inserted] = rule_cache().emplace(key, std::move(rule));
  (void)inserted;
  return it->second;
}

}  // namespace

std::shared_ptr<const QuadratureRule> gauss_legendre_cached(
    int n, const PrecisionContext& ctx) {
  return cached_rule(0, n, ctx);
}

std::shared_ptr<const QuadratureRule> gauss_lobatto_cached(
    int n, const PrecisionContext& ctx) {
  return cached_rule(1, n, ctx);
}

NodalBasis::NodalBasis(std::vector<BigScalar> nodes, int digits)
    : digits_(digits), nodes_(std::move(nodes)) {
  const int n = static_cast<int>(nodes_.size());
  if (n < 1) throw ConfigError("NodalBasis requires at least one node");
  const PrecisionContext ctx(digits_);

  // Barycentric weights: 1 / prod_{i != j} (x_j - x_i).
  bary_.reserve(static_cast<std::size_t>(n));
  BigScalar d(ctx);
  for (int j = 0; j < n; ++j) {
    BigScalar prod(ctx, 1);
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      d = nodes_[static_cast<std::size_t>(j)] - nodes_[static_cast<std::size_t>(i)];
      if (d.is_zero()) throw ConfigError("NodalBasis nodes must be distinct");
      prod *= d;
    }
    bary_.push_back(BigScalar(ctx, 1) / prod);
  }

  // D(i, j) = (w_j / w_i) / (x_i - x_j) off-diagonal; diagonal makes each
  // row sum exactly zero (derivative of constants vanishes identically).
  diff_ = Matrix(ctx, n, n);
  for (int i = 0; i < n; ++i) {
    BigScalar rowsum(ctx);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      BigScalar& dij = diff_.at(i, j);
      dij.set(bary_[static_cast<std::size_t>(j)]);
      dij /= bary_[static_cast<std::size_t>(i)];
      dij /= (nodes_[static_cast<std::size_t>(i)] -
              nodes_[static_cast<std::size_t>(j)]);
      rowsum += dij;
    }
    rowsum.negate();
    diff_.at(i, i) = std::move(rowsum);
  }
}

std::vector<BigScalar> NodalBasis::cardinal_row(const BigScalar& t) const {
  const PrecisionContext ctx(digits_);
  const int n = size();
  std::vector<BigScalar> row(static_cast<std::size_t>(n), BigScalar(ctx));

  // Exact hit on a node: cardinal row is a Kronecker delta.
  for (int j = 0; j < n; ++j) {
    if (t == nodes_[static_cast<std::size_t>(j)]) {
      row[static_cast<std::size_t>(j)].set(1);
      return row;
    }
  }
  // Second barycentric form: l_j(t) = (w_j/(t-x_j)) / sum_k (w_k/(t-x_k)).
  BigScalar denom(ctx);
  for (int j = 0; j < n; ++j) {
    BigScalar& rj = row[static_cast<std::size_t>(j)];
    rj.set(bary_[static_cast<std::size_t>(j)]);
    rj /= (t - nodes_[static_cast<std::size_t>(j)]);
    denom += rj;
  }
  for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] /= denom;
  return row;
}

Matrix NodalBasis::eval_matrix(const std::vector<BigScalar>& points) const {
  const PrecisionContext ctx(digits_);
  Matrix e(ctx, static_cast<int>(points.size()), size());
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    auto row = cardinal_row(points[static_cast<std::size_t>(i)]);
    for (int j = 0; j < size(); ++j)
      e.at(i, j) = std::move(row[static_cast<std::size_t>(j)]);
  }
  return e;
}

BigScalar NodalBasis::eval(const std::vector<BigScalar>& values,
                           const BigScalar& t) const {
  if (static_cast<int>(values.size()) != size()) {
    throw ConfigError("lagrange_eval: coefficient count does not match basis");
  }
  const auto row = cardinal_row(t);
  BigScalar acc{PrecisionContext(digits_)};
  for (int j = 0; j < size(); ++j)
    acc.add_mul(row[static_cast<std::size_t>(j)],
                values[static_cast<std::size_t>(j)]);
  return acc;
}

Vector NodalBasis::eval(const std::vector<Vector>& values,
                        const BigScalar& t) const {
  Vector out(PrecisionContext(digits_), values.empty() ? 0 : values[0].size());
  eval(values, t, out);
  return out;
}

void NodalBasis::eval(const std::vector<Vector>& values, const BigScalar& t,
                      Vector& out) const {
  if (static_cast<int>(values.size()) != size()) {
    throw ConfigError("lagrange_eval: nodal value count does not match basis");
  }
  const auto row = cardinal_row(t);
  out.set_zero();
  for (int j = 0; j < size(); ++j) {
    const Vector& vj = values[static_cast<std::size_t>(j)];
    for (int c = 0; c < out.size(); ++c)
      out[c].add_mul(row[static_cast<std::size_t>(j)], vj[c]);
  }
}

NodalBasis lobatto_basis(int q, const PrecisionContext& ctx) {
  if (q < 1) throw ConfigError("lobatto_basis requires degree >= 1");
  auto rule = gauss_lobatto_cached(q + 1, ctx);
  return NodalBasis(rule->points, ctx.digits());
}

namespace {
using BasisKey = std::pair<int, int>;
std::mutex g_basis_mutex;
std::map<BasisKey, std::shared_ptr<const NodalBasis>>& basis_cache() {
  static std::map<BasisKey, std::shared_ptr<const NodalBasis>> cache;
  return cache;
}
}  // namespace

std::shared_ptr<const NodalBasis> lobatto_basis_cached(
    int q, const PrecisionContext& ctx) {
  const BasisKey key{q, ctx.digits()};
  {
    std::lock_guard<std::mutex> lock(g_basis_mutex);
    auto it = basis_cache().find(key);
    if (it != basis_cache().end()) return it->second;
  }
  auto basis = std::make_shared<const NodalBasis>(lobatto_basis(q, ctx));
  std::lock_guard<std::mutex> lock(g_basis_mutex);
  auto [it, inserted] = basis_cache().emplace(key, std::move(basis));
  (void)inserted;
  return it->second;
}

}  // namespace cgode
