#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgode/quadrature.hpp"

namespace cgode {

// Provenance recorded in trajectory headers.
struct ProblemInfo {
  std::string name;
  std::string params;
  std::vector<std::string> u0_decimal;
};

// Piecewise-polynomial solution on a time partition. Each interval carries
// q+1 nodal vectors on the (symmetric) reference node set; adjacent
// intervals share their boundary node, so continuity at partition points is
// exact by representation, not by comparison. Evaluation follows the
// left-continuity convention: t in (t_i, t_{i+1}] belongs to interval i.
// Immutable once built; concurrent evaluation is safe.
class Trajectory {
 public:
  Trajectory(const PrecisionContext& ctx, int q, const BigScalar& t0,
             const Vector& u0, ProblemInfo info);

  // Appends one interval ending at t_right. `nodes` holds the q+1 nodal
  // vectors; nodes[0] must be the current right boundary value and is not
  // stored again.
  void append_interval(const BigScalar& t_right, std::vector<Vector> nodes);

  int digits() const { return digits_; }
  int q() const { return q_; }
  int intervals() const {
    return static_cast<int>(partition_.size()) - 1;
  }
  const BigScalar& t_begin() const { return partition_.front(); }
  const BigScalar& t_end() const { return partition_.back(); }
  const std::vector<BigScalar>& partition() const { return partition_; }
  const NodalBasis& basis() const { return *basis_; }
  const ProblemInfo& info() const { return info_; }

  // Nodal vector j (0..q) of interval i. Shared boundary nodes alias the
  // same stored value.
  const Vector& node_value(int interval, int node) const;

  Vector evaluate(const BigScalar& t) const;
  void evaluate(const BigScalar& t, Vector& out) const;

  // order-th derivative of the interval polynomial at t, 0 <= order <= q.
  // At an interior partition point the left interval's one-sided value is
  // returned and *one_sided is set when provided.
  Vector derivative(const BigScalar& t, int order,
                    bool* one_sided = nullptr) const;

  // Reparameterization t -> (t_begin + t_end) - t. Exact: intervals and
  // node orders are reversed, no re-evaluation happens.
  Trajectory time_reversed() const;

  void save(const std::string& path) const;
  static Trajectory load(const std::string& path, const PrecisionContext& ctx);

  // Index of the interval owning t (left-continuous convention).
  int find_interval(const BigScalar& t) const;

 private:
  Trajectory() = default;

  int digits_ = 0;
  int q_ = 0;
  std::shared_ptr<const NodalBasis> basis_;
  std::vector<BigScalar> partition_;  // size M+1
  std::vector<Vector> values_;        // size M*q + 1 (shared boundaries)
  ProblemInfo info_;
};

// Outcome of a divergence scan between two trajectories.
struct DivergenceReport {
  std::optional<BigScalar> t_div;  // empty = "never" within the common span
  BigScalar max_gap_before;        // largest sampled gap among accepted times
  BigScalar tolerance;
  BigScalar sample_dt;
};

// First time at which two state evaluators disagree by more than tol in the
// componentwise sup norm. Samples every sample_dt from t_begin to t_end,
// then bisects the bracketing sample interval down to sample_dt / 2^20.
DivergenceReport divergence_scan(
    const std::function<void(const BigScalar&, Vector&)>& eval_a,
    const std::function<void(const BigScalar&, Vector&)>& eval_b,
    const BigScalar& t_begin, const BigScalar& t_end, int dimension,
    const BigScalar& tol, const BigScalar& sample_dt);

// Trajectory front-end of the scan over the common span of a and b.
DivergenceReport divergence_time(const Trajectory& a, const Trajectory& b,
                                 const BigScalar& tol,
                                 const BigScalar& sample_dt);

// Bounded window over the most recent intervals of a running integration;
// lets pair studies evaluate recent history without storing the whole
// trajectory. push_interval and drop_before maintain the window, evaluate
// works anywhere inside it.
class RollingWindow {
 public:
  RollingWindow(const PrecisionContext& ctx, int q, int dimension);

  void push_interval(const BigScalar& t_left, const BigScalar& t_right,
                     std::vector<Vector> nodes);
  void drop_before(const BigScalar& t);

  bool empty() const { return win_.empty(); }
  const BigScalar& t_begin() const;
  const BigScalar& t_end() const;

  void evaluate(const BigScalar& t, Vector& out) const;

 private:
  struct Interval {
    BigScalar t_left;
    BigScalar t_right;
    std::vector<Vector> nodes;
  };

  int digits_;
  int dimension_;
  std::shared_ptr<const NodalBasis> basis_;
  std::deque<Interval> win_;
};

}  // namespace cgode
