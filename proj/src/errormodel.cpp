#include "cgode/errormodel.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "cgode/errors.hpp"

namespace cgode {

LineFit least_squares_line(
    const std::vector<std::pair<BigScalar, BigScalar>>& xy) {
  if (xy.size() < 2) {
    throw CalibrationError("least squares requires at least 2 points");
  }
  const PrecisionContext ctx = xy[0].first.ctx();
  const long n = static_cast<long>(xy.size());
  BigScalar sx(ctx), sy(ctx), sxx(ctx), sxy(ctx);
  for (const auto& [x, y] : xy) {
    sx += x;
    sy += y;
    sxx.add_mul(x, x);
    sxy.add_mul(x, y);
  }
  BigScalar denom = sxx * n - sx * sx;
  if (denom.is_zero()) {
    throw CalibrationError("least squares: degenerate abscissae");
  }
  LineFit fit{BigScalar(ctx), BigScalar(ctx), BigScalar(ctx),
              static_cast<int>(n)};
  fit.slope = (sxy * n - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  BigScalar ss(ctx), r(ctx);
  for (const auto& [x, y] : xy) {
    r.set(fit.intercept);
    r.add_mul(fit.slope, x);
    r -= y;
    ss.add_mul(r, r);
  }
  fit.rms_residual = sqrt(ss / n);
  return fit;
}

LineFit fit_loglog_slope(
    const std::vector<std::pair<BigScalar, BigScalar>>& points,
    const BigScalar& window_lo, const BigScalar& window_hi) {
  if (points.empty()) throw CalibrationError("fit_loglog_slope: no points");
  const PrecisionContext ctx = points[0].first.ctx();
  std::vector<std::pair<BigScalar, BigScalar>> logs;
  for (const auto& [x, y] : points) {
    if (x < window_lo || x > window_hi) continue;
    if (!(x > BigScalar(ctx, 0)) || !(y > BigScalar(ctx, 0))) {
      throw CalibrationError(
          "fit_loglog_slope: nonpositive value inside the fit window");
    }
    logs.emplace_back(log10(x), log10(y));
  }
  if (logs.size() < 2) {
    throw CalibrationError("fit_loglog_slope: fewer than 2 points in window");
  }
  return least_squares_line(logs);
}

ErrorModel::ErrorModel(const PrecisionContext& ctx)
    : digits_(ctx.digits()),
      c1_(ctx),
      gamma_(ctx),
      beta_(ctx) {}

ErrorModel ErrorModel::reported_constants(const PrecisionContext& ctx) {
  ErrorModel m(ctx);
  m.formulaic_ = true;
  m.c1_ = ctx.parse("0.5");
  m.gamma_ = ctx.parse("0.388");
  m.beta_ = ctx.parse("-0.5");
  return m;
}

BigScalar ErrorModel::c2(int q) const {
  auto it = c2_.find(q);
  if (it != c2_.end()) return it->second;
  if (formulaic_) return PrecisionContext(digits_).parse("0.001");
  throw ConfigError("error model has no C2 constant for q=" + std::to_string(q));
}

BigScalar ErrorModel::c3(int q) const {
  auto it = c3_.find(q);
  if (it != c3_.end()) return it->second;
  if (formulaic_) {
    // 0.002 + 0.0005 q
    const PrecisionContext ctx(digits_);
    BigScalar v = ctx.parse("0.0005");
    v *= q;
    v += ctx.parse("0.002");
    return v;
  }
  throw ConfigError("error model has no C3 constant for q=" + std::to_string(q));
}

BigScalar ErrorModel::alpha(int q) const {
  auto it = alpha_.find(q);
  if (it != alpha_.end()) return it->second;
  if (formulaic_) return BigScalar(PrecisionContext(digits_), 2 * q);
  throw ConfigError("error model has no alpha for q=" + std::to_string(q));
}

void ErrorModel::set_q_constants(int q, BigScalar c2v, BigScalar c3v,
                                 BigScalar alphav) {
  c2_[q] = std::move(c2v);
  c3_[q] = std::move(c3v);
  alpha_[q] = std::move(alphav);
}

void ErrorModel::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError(IoError::Code::kOpenFailed, "cannot write " + path);
  os << "cgode-errormodel\nversion 1\n";
  os << "digits " << digits_ << "\n";
  os << "formulaic " << (formulaic_ ? 1 : 0) << "\n";
  os << "c1 " << c1_.str_exact() << "\n";
  os << "gamma " << gamma_.str_exact() << "\n";
  os << "beta " << beta_.str_exact() << "\n";
  for (const auto& [q, v] : c2_) {
    os << "q " << q << " c2 " << v.str_exact() << " c3 "
       << c3_.at(q).str_exact() << " alpha " << alpha_.at(q).str_exact()
       << "\n";
  }
  os << "end\n";
}

ErrorModel ErrorModel::load(const std::string& path,
                            const PrecisionContext& ctx) {
  std::ifstream is(path);
  if (!is) throw IoError(IoError::Code::kOpenFailed, "cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line != "cgode-errormodel") {
    throw IoError(IoError::Code::kMalformed, path + " is not a model file");
  }
  if (!std::getline(is, line) || line != "version 1") {
    throw IoError(IoError::Code::kVersionMismatch,
                  "unsupported model version: " + line);
  }
  ErrorModel m(ctx);
  bool saw_end = false;
  while (std::getline(is, line)) {
    if (line == "end") {
      saw_end = true;
      break;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "digits") {
      int d;
      ls >> d;  // informative; constants are re-rounded into ctx
    } else if (key == "formulaic") {
      int f;
      ls >> f;
      m.formulaic_ = (f != 0);
    } else if (key == "c1" || key == "gamma" || key == "beta") {
      std::string v;
      ls >> v;
      BigScalar parsed = parse_decimal(v, ctx);
      if (key == "c1") m.c1_ = std::move(parsed);
      if (key == "gamma") m.gamma_ = std::move(parsed);
      if (key == "beta") m.beta_ = std::move(parsed);
    } else if (key == "q") {
      int q;
      std::string kc2, vc2, kc3, vc3, ka, va;
      ls >> q >> kc2 >> vc2 >> kc3 >> vc3 >> ka >> va;
      if (kc2 != "c2" || kc3 != "c3" || ka != "alpha") {
        throw IoError(IoError::Code::kMalformed, "bad model line: " + line);
      }
      m.set_q_constants(q, parse_decimal(vc2, ctx), parse_decimal(vc3, ctx),
                        parse_decimal(va, ctx));
    } else {
      throw IoError(IoError::Code::kMalformed, "bad model line: " + line);
    }
  }
  if (!saw_end) {
    throw IoError(IoError::Code::kTruncated, "model file missing end marker");
  }
  return m;
}

namespace {

BigScalar exp10(const BigScalar& x) {
  BigScalar r(x.ctx());
  mpfr_exp10(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

// Geometric mean of ratios error / predictor over the index set.
BigScalar geometric_mean_ratio(
    const std::vector<SweepPoint>& pts, const std::vector<std::size_t>& idx,
    const std::function<BigScalar(const SweepPoint&)>& predictor) {
  const PrecisionContext ctx = pts[idx[0]].dt.ctx();
  BigScalar acc(ctx);
  for (std::size_t i : idx) {
    acc += log10(pts[i].error / predictor(pts[i]));
  }
  acc /= static_cast<long>(idx.size());
  return exp10(acc);
}

}  // namespace

ErrorModel calibrate(const std::vector<SweepPoint>& sweeps,
                     const BigScalar& gamma, std::optional<BigScalar> c1) {
  if (sweeps.empty()) throw CalibrationError("calibrate: no sweep points");
  const PrecisionContext ctx = gamma.ctx();

  std::map<int, std::vector<SweepPoint>> by_q;
  for (const auto& p : sweeps) by_q[p.q].push_back(p);

  ErrorModel model(ctx);
  model.set_gamma(gamma);
  model.set_c1(c1 ? *c1 : ctx.parse("0.5"));

  std::vector<std::pair<BigScalar, BigScalar>> beta_logs;

  for (auto& [q, pts] : by_q) {
    std::sort(pts.begin(), pts.end(), [](const SweepPoint& a,
                                         const SweepPoint& b) {
      return a.dt < b.dt;
    });
    for (const auto& p : pts) {
      if (!(p.error > BigScalar(ctx, 0)) || !(p.dt > BigScalar(ctx, 0))) {
        throw CalibrationError("calibrate: nonpositive error or dt for q=" +
                               std::to_string(q));
      }
    }
    // Regime boundary at the smallest error; both regimes must exist.
    std::size_t m = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].error < pts[m].error) m = i;
    }
    if (m == 0 || m + 1 == pts.size()) {
      throw CalibrationError(
          "calibrate: q=" + std::to_string(q) +
          " sweep has a single regime (no sign change in local slope)");
    }
    std::vector<std::size_t> roundoff, discretization;
    for (std::size_t i = 0; i < m; ++i) roundoff.push_back(i);
    for (std::size_t i = m + 1; i < pts.size(); ++i) discretization.push_back(i);
    if (roundoff.size() < 2 || discretization.size() < 2) {
      throw CalibrationError("calibrate: q=" + std::to_string(q) +
                             " needs at least 2 points per regime");
    }

    const int qq = q;
    BigScalar c2v = geometric_mean_ratio(
        pts, discretization, [&](const SweepPoint& p) {
          return pow(p.dt, 2L * qq) * exp10(gamma * p.T);
        });
    BigScalar c3v = geometric_mean_ratio(pts, roundoff, [&](const SweepPoint& p) {
      return p.eps_mach * exp10(gamma * p.T) / sqrt(p.dt);
    });

    // Free-slope fits for the alpha/beta diagnostics.
    std::vector<std::pair<BigScalar, BigScalar>> disc_xy;
    for (std::size_t i : discretization) {
      disc_xy.emplace_back(pts[i].dt, pts[i].error);
    }
    LineFit alpha_fit = fit_loglog_slope(
        disc_xy, disc_xy.front().first, disc_xy.back().first);
    for (std::size_t i : roundoff) {
      beta_logs.emplace_back(log10(pts[i].dt), log10(pts[i].error));
    }
    model.set_q_constants(q, std::move(c2v), std::move(c3v),
                          std::move(alpha_fit.slope));
  }
  model.set_beta(least_squares_line(beta_logs).slope);
  return model;
}

BigScalar eval_model(const ErrorModel& model, const BigScalar& data_err, int q,
                     const BigScalar& dt, const BigScalar& eps,
                     const BigScalar& T) {
  const PrecisionContext ctx = dt.ctx();
  if (!(dt > BigScalar(ctx, 0)) || !(eps > BigScalar(ctx, 0))) {
    throw DomainError("eval_model requires dt > 0 and eps > 0");
  }
  BigScalar bracket = model.c1() * data_err;
  bracket.add_mul(model.c2(q), pow(dt, 2L * q));
  bracket.add_mul(model.c3(q), eps / sqrt(dt));
  return bracket * exp10(model.gamma() * T);
}

BigScalar optimal_timestep(int q, const BigScalar& eps) {
  if (q < 1) throw ConfigError("optimal_timestep requires q >= 1");
  const PrecisionContext ctx = eps.ctx();
  if (!(eps > BigScalar(ctx, 0))) {
    throw DomainError("optimal_timestep requires eps > 0");
  }
  // ((2 + q/2) eps)^(2 / (4q + 1))
  BigScalar base(ctx, 4 + q);
  base /= 2;
  base *= eps;
  BigScalar expo(ctx, 2);
  expo /= (4 * q + 1);
  return pow(base, expo);
}

BigScalar computability(const BigScalar& eps, const BigScalar* epsilon_target,
                        const BigScalar* prefactor) {
  const PrecisionContext ctx = eps.ctx();
  if (!(eps > BigScalar(ctx, 0))) {
    throw DomainError("computability requires eps > 0");
  }
  BigScalar n_mach = -log10(eps);
  if (!epsilon_target) {
    BigScalar T = n_mach * 5;
    T /= 2;  // 2.5 n_mach
    return T;
  }
  if (!(*epsilon_target > eps)) {
    throw DomainError(
        "computability: target accuracy must exceed the machine epsilon");
  }
  const BigScalar pf = prefactor ? *prefactor : ctx.parse("0.002");
  BigScalar T = n_mach + log10(*epsilon_target / pf);
  T *= 5;
  T /= 2;  // divide by 0.4
  return T;
}

BigScalar apriori_bound(const BigScalar& L, const BigScalar& T,
                        const BigScalar& eps) {
  if (L.sign() <= 0 || T.sign() < 0 || eps.sign() <= 0) {
    throw DomainError("apriori_bound requires L > 0, T >= 0, eps > 0");
  }
  return exp(L * T) * eps;
}

}  // namespace cgode
