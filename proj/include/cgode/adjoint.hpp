#pragma once

#include <optional>

#include "cgode/galerkin.hpp"

namespace cgode {

// Configuration of a backward dual solve along a stored primal trajectory.
struct DualConfig {
  Vector z_T;        // terminal condition, must be nonzero
  int dual_q = 3;
  BigScalar dual_dt;
  BigScalar residual_tol;  // defaulted to 100 eps when empty
  int max_newton_iters = 25;

  // dual_q = max(3, primal_q / 2), dual_dt = primal step, z_T = (1, 0, ...).
  static DualConfig defaults(const Trajectory& primal,
                             const PrecisionContext& ctx, int dimension);
  void validate() const;
};

// The time-reversed dual system: with s = T - t and w(s) = z(T - s), the
// backward problem -z' = A^T(t) z becomes the forward problem
// w'(s) = J(ubar(T - s))^T w(s), which the cG stepper integrates directly.
// The driving Jacobian is evaluated on the supplied primal trajectory.
class DualReversedSystem : public ODESystem {
 public:
  DualReversedSystem(const Trajectory& primal, const ODESystem& base,
                     BigScalar horizon);

  int dimension() const override { return base_.dimension(); }
  std::string name() const override { return base_.name() + "-dual"; }
  std::string params_string() const override;

  void rhs(const Vector& w, const BigScalar& s, Vector& out) const override;
  void jacobian(const Vector& w, const BigScalar& s,
                Matrix& out) const override;
  // Linear in the dual state.
  bool jacobian_is_affine() const override { return true; }
  void jacobian_directional(const Vector&, const Vector&, const BigScalar&,
                            Matrix& out) const override {
    out.set_zero();
  }

 private:
  const Trajectory& primal_;
  const ODESystem& base_;
  BigScalar horizon_;
};

// Solves the dual problem backward from z(T) = z_T over the primal span
// [0, T] and returns the dual trajectory parameterized by primal time, so
// evaluate(dual, 0) is z(0).
Trajectory solve_dual(const Trajectory& primal, const ODESystem& system,
                      const DualConfig& cfg,
                      IntegrationStats* stats = nullptr);

// The stability factors of the a posteriori error estimate:
//   S_D  = ||z(0)||
//   S_G  = int_0^T ||z^(p+1)|| dt
//   S_C  = int_0^T ||z|| dt        (projection taken as the identity)
//   S_C2 = (int_0^T ||z||^2 dt)^(1/2)
struct StabilityFactors {
  BigScalar S_D;
  BigScalar S_G;
  BigScalar S_C;
  BigScalar S_C2;
  BigScalar T;
  int p = 0;
  std::vector<std::string> z_T_decimal;
};

// Integrates the factors over the dual trajectory by composite Gauss
// quadrature per dual interval. z^(p+1) uses the analytic recurrence
// z' = -A^T z (differentiated along the primal) for p+1 <= 3 on systems with
// an affine Jacobian, and falls back to differentiation-matrix application
// on the dual polynomial otherwise (requires p+1 <= dual q).
StabilityFactors stability_factors(const Trajectory& dual,
                                   const Trajectory& primal,
                                   const ODESystem& system, int p);

struct GrowthPoint {
  BigScalar T;
  std::optional<StabilityFactors> factors;
  std::string error;  // nonempty when this point failed
};

// Independent dual solves on [0, T] for each requested horizon. Failures are
// recorded per point; the series continues.
std::vector<GrowthPoint> growth_series(const Trajectory& primal,
                                       const ODESystem& system,
                                       const std::vector<BigScalar>& T_list,
                                       const DualConfig& cfg, int p,
                                       int workers = 1);

// Literal products of the a posteriori bounds with C_p = C_p' = 1 (the
// recorded convention). Inputs are echoed alongside the bounds.
struct ErrorBounds {
  BigScalar E_D_bound;
  BigScalar E_G_bound;
  BigScalar E_C_bound;
  BigScalar E_C_rms_bound;
  // Echoed inputs.
  BigScalar data_err;
  BigScalar disc_terms;
  BigScalar comp_terms;
  BigScalar eps_mach;
  BigScalar k_min;
  std::string convention = "C_p = C_p' = 1";
};

ErrorBounds error_bounds(const StabilityFactors& factors,
                         const BigScalar& data_err, const BigScalar& disc_terms,
                         const BigScalar& comp_terms, const BigScalar& eps_mach,
                         const BigScalar& k_min);

}  // namespace cgode
