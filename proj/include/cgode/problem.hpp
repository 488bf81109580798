#pragma once

#include <functional>
#include <memory>
#include <string>

#include "cgode/linalg.hpp"
#include "cgode/trajectory.hpp"

namespace cgode {

// Parameters of the Lorenz system. The standard values are sigma = 10,
// b = 8/3 (formed by division, never a truncated literal), r = 28.
struct LorenzParams {
  BigScalar sigma;
  BigScalar b;
  BigScalar r;

  static LorenzParams standard(const PrecisionContext& ctx);
  std::string describe() const;
};

// Right-hand side f and Jacobian of an initial value problem u' = f(u, t).
// Evaluators are pure functions; instances are safe to share across threads.
class ODESystem {
 public:
  virtual ~ODESystem() = default;

  virtual int dimension() const = 0;
  virtual std::string name() const = 0;
  virtual std::string params_string() const { return ""; }

  virtual void rhs(const Vector& u, const BigScalar& t, Vector& out) const = 0;
  virtual void jacobian(const Vector& u, const BigScalar& t,
                        Matrix& out) const = 0;

  // True when the Jacobian is an affine function of the state (as for any
  // quadratic right-hand side). Enables the analytic dual-derivative
  // recurrence in the adjoint module.
  virtual bool jacobian_is_affine() const { return false; }

  // Directional derivative of the Jacobian along du: d/ds J(u + s du) at
  // s = 0. Only required when jacobian_is_affine() is true.
  virtual void jacobian_directional(const Vector& u, const Vector& du,
                                    const BigScalar& t, Matrix& out) const;

  Vector rhs(const Vector& u, const BigScalar& t) const;
  Matrix jacobian(const Vector& u, const BigScalar& t) const;
};

// The Lorenz system (1): x' = sigma(y-x), y' = rx - y - xz, z' = xy - bz.
class LorenzSystem : public ODESystem {
 public:
  explicit LorenzSystem(LorenzParams params) : p_(std::move(params)) {}

  using ODESystem::jacobian;
  using ODESystem::rhs;

  int dimension() const override { return 3; }
  std::string name() const override { return "lorenz"; }
  std::string params_string() const override { return p_.describe(); }
  const LorenzParams& params() const { return p_; }

  void rhs(const Vector& u, const BigScalar& t, Vector& out) const override;
  void jacobian(const Vector& u, const BigScalar& t,
                Matrix& out) const override;
  bool jacobian_is_affine() const override { return true; }
  void jacobian_directional(const Vector& u, const Vector& du,
                            const BigScalar& t, Matrix& out) const override;

 private:
  LorenzParams p_;
};

// Scalar test problem u' = a u (and its exact exponential solution) used by
// solver and adjoint tests.
class ScalarLinearSystem : public ODESystem {
 public:
  explicit ScalarLinearSystem(BigScalar a) : a_(std::move(a)) {}

  using ODESystem::jacobian;
  using ODESystem::rhs;

  int dimension() const override { return 1; }
  std::string name() const override { return "scalar-linear"; }
  std::string params_string() const override { return "a=" + a_.str(); }

  void rhs(const Vector& u, const BigScalar& t, Vector& out) const override;
  void jacobian(const Vector& u, const BigScalar& t,
                Matrix& out) const override;
  bool jacobian_is_affine() const override { return true; }
  void jacobian_directional(const Vector& u, const Vector& du,
                            const BigScalar& t, Matrix& out) const override;

 private:
  BigScalar a_;
};

// State-independent right-hand side u_c' = p_c(t) given per-component
// monomial coefficients; exercises exact-integration paths of the stepper.
class PolynomialRhsSystem : public ODESystem {
 public:
  // coeffs[c][j] multiplies t^j in component c.
  PolynomialRhsSystem(const PrecisionContext& ctx,
                      std::vector<std::vector<BigScalar>> coeffs)
      : digits_(ctx.digits()), coeffs_(std::move(coeffs)) {}

  using ODESystem::jacobian;
  using ODESystem::rhs;

  int dimension() const override { return static_cast<int>(coeffs_.size()); }
  std::string name() const override { return "polynomial-rhs"; }

  void rhs(const Vector& u, const BigScalar& t, Vector& out) const override;
  void jacobian(const Vector& u, const BigScalar& t,
                Matrix& out) const override;
  bool jacobian_is_affine() const override { return true; }
  void jacobian_directional(const Vector& u, const Vector& du,
                            const BigScalar& t, Matrix& out) const override;

 private:
  int digits_;
  std::vector<std::vector<BigScalar>> coeffs_;
};

// Free operations on the Lorenz instance.
Vector lorenz_rhs(const Vector& state, const LorenzParams& params);
Matrix lorenz_jacobian(const Vector& state, const LorenzParams& params);

// Time derivative of the dual state: zdot = -J(ubar)^T z, written out
// componentwise from the backward system
//   -xi'   = -sigma xi + (r - zbar) eta + ybar zeta
//   -eta'  =  sigma xi - eta + xbar zeta
//   -zeta' = -xbar eta - b zeta.
Vector dual_rhs(const Vector& z, const Vector& ubar, const LorenzParams& params);

// Midpoint of two states; for a quadratic right-hand side the state-averaged
// Jacobian equals the Jacobian at this midpoint.
Vector averaged_state(const Vector& U_t, const Vector& u_t);

// Unstable fixed point P+ (sign=+1) or P- (sign=-1): (+-6 sqrt2, +-6 sqrt2, 27).
Vector lorenz_fixed_point(const PrecisionContext& ctx, int sign);

// Lipschitz diagnostic: the maximum spectral norm of the Jacobian along the
// trajectory, sampled every sample_dt (the sample at t_begin is always
// taken). Drives the pessimistic a priori comparator e^(L T).
BigScalar lipschitz_estimate(const Trajectory& traj, const ODESystem& system,
                             const BigScalar& sample_dt);
// Default sampling interval 0.01 (two orders below the attractor's fastest
// oscillation).
BigScalar lipschitz_estimate(const Trajectory& traj, const ODESystem& system);

// Problem registry for CLI selection by name. Overrides are "key=value"
// pairs with decimal-string values (for lorenz: sigma, b, r).
std::unique_ptr<ODESystem> make_system(
    const std::string& name, const PrecisionContext& ctx,
    const std::vector<std::string>& overrides = {});

}  // namespace cgode
