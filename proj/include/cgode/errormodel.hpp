#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgode/precision.hpp"

namespace cgode {

// One measured point of an error-vs-timestep sweep.
struct SweepPoint {
  int q = 0;
  BigScalar dt;
  BigScalar eps_mach;
  BigScalar T;
  BigScalar error;  // sup-gap against the dominating reference at time T
};

struct LineFit {
  BigScalar slope;
  BigScalar intercept;
  BigScalar rms_residual;
  int n_points = 0;
};

// Ordinary least squares y = slope x + intercept.
LineFit least_squares_line(
    const std::vector<std::pair<BigScalar, BigScalar>>& xy);

// OLS on (log10 x, log10 y) restricted to x in [window_lo, window_hi].
// Requires at least two in-window points with positive x and y.
LineFit fit_loglog_slope(
    const std::vector<std::pair<BigScalar, BigScalar>>& points,
    const BigScalar& window_lo, const BigScalar& window_hi);

// The error-propagation model
//   E = [ C1 |U(0)-u(0)| + C2[q] dt^2q + C3[q] dt^(-1/2) eps ] * 10^(gamma T).
// Calibrated instances carry per-q constants; the reported-constants
// instance uses C2 = 0.001 and C3 = 0.002 + 0.0005 q for every q.
class ErrorModel {
 public:
  ErrorModel(const PrecisionContext& ctx);

  static ErrorModel reported_constants(const PrecisionContext& ctx);

  int digits() const { return digits_; }
  const BigScalar& c1() const { return c1_; }
  const BigScalar& gamma() const { return gamma_; }
  const BigScalar& beta() const { return beta_; }
  bool formulaic() const { return formulaic_; }

  BigScalar c2(int q) const;
  BigScalar c3(int q) const;
  BigScalar alpha(int q) const;
  const std::map<int, BigScalar>& c2_map() const { return c2_; }
  const std::map<int, BigScalar>& c3_map() const { return c3_; }
  const std::map<int, BigScalar>& alpha_map() const { return alpha_; }

  void set_c1(BigScalar v) { c1_ = std::move(v); }
  void set_gamma(BigScalar v) { gamma_ = std::move(v); }
  void set_beta(BigScalar v) { beta_ = std::move(v); }
  void set_q_constants(int q, BigScalar c2, BigScalar c3, BigScalar alpha);

  void save(const std::string& path) const;
  static ErrorModel load(const std::string& path, const PrecisionContext& ctx);

 private:
  int digits_;
  bool formulaic_ = false;
  BigScalar c1_;
  BigScalar gamma_;
  BigScalar beta_;
  std::map<int, BigScalar> c2_;
  std::map<int, BigScalar> c3_;
  std::map<int, BigScalar> alpha_;
};

// Extracts C2[q] and C3[q] from sweep data by dividing out 10^(gamma T) and
// fitting the two regimes with fixed exponents 2q and -1/2. Each q group
// must exhibit both regimes (detected from the sign of local log-log
// slopes); the point of smallest error is the regime boundary and joins
// neither fit. gamma is an input, not refitted. c1 defaults to the
// S_D-growth value 0.5 when not supplied.
ErrorModel calibrate(const std::vector<SweepPoint>& sweeps,
                     const BigScalar& gamma,
                     std::optional<BigScalar> c1 = std::nullopt);

BigScalar eval_model(const ErrorModel& model, const BigScalar& data_err, int q,
                     const BigScalar& dt, const BigScalar& eps,
                     const BigScalar& T);

// k = ((2 + 0.5 q) eps)^(1 / (2q + 1/2)), the step equalizing the
// discretization and round-off terms.
BigScalar optimal_timestep(int q, const BigScalar& eps);

// Computability horizon: T = 2.5 n_mach, or when a target accuracy is given,
// T = (n_mach + log10(target / prefactor)) / 0.4 with the model prefactor
// 0.002. Requires target > eps.
BigScalar computability(const BigScalar& eps,
                        const BigScalar* epsilon_target = nullptr,
                        const BigScalar* prefactor = nullptr);

// A priori comparator e^(L T) eps (C = 1 convention).
BigScalar apriori_bound(const BigScalar& L, const BigScalar& T,
                        const BigScalar& eps);

}  // namespace cgode
