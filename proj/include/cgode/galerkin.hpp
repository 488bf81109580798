#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cgode/problem.hpp"
#include "cgode/trajectory.hpp"

namespace cgode {

enum class GuessMode {
  kConstant,       // left value copied to all nodes (default)
  kPreviousPoly,   // previous interval's polynomial extrapolated
};

// Configuration of a cG(q) integration. residual_tol is relative to the
// right-hand-side scale at the collocation points (max(1, ||f||_inf)); the
// default 100 eps_mach ties the discrete-residual tolerance to machine
// precision.
struct SolverConfig {
  int q = 1;
  BigScalar dt;
  BigScalar residual_tol;
  int max_newton_iters = 50;
  GuessMode guess = GuessMode::kConstant;
  bool damping = true;

  static SolverConfig make(const PrecisionContext& ctx, int q,
                           const BigScalar& dt);
  void validate() const;
  PrecisionContext ctx() const { return dt.ctx(); }
};

struct NewtonStats {
  int iterations = 0;
  int damping_halvings = 0;
  bool converged = false;
  std::vector<std::string> residual_history;  // infinity norms per iterate

  std::string history_string() const;
};

// The per-interval nonlinear system of the cG(q) method: the trial
// polynomial interpolates u_left at the left Lobatto node and the q unknown
// nodal vectors elsewhere; Galerkin orthogonality against P^(q-1) under
// q-point Gauss quadrature collapses to collocation of U' = f at the Gauss
// points. residual() evaluates R(tau_g) = U'(tau_g) - f(U(tau_g)) for the
// stacked unknowns; jacobian() its exact derivative.
class StepSystem {
 public:
  StepSystem(const ODESystem& system, int q, const PrecisionContext& ctx);

  void bind(const Vector& u_left, const BigScalar& t_left, const BigScalar& k);

  int q() const { return q_; }
  int dimension() const { return dim_; }
  int unknowns() const { return q_ * dim_; }
  const NodalBasis& basis() const { return *basis_; }
  const QuadratureRule& rule() const { return *gauss_; }

  void residual(const Vector& X, Vector& R);
  void jacobian(const Vector& X, Matrix& J);

  // max(1, ||f||_inf over collocation points) from the latest residual().
  const BigScalar& residual_scale() const { return scale_; }

  // Expands stacked unknowns into the q+1 interval nodal vectors
  // (index 0 = bound left value).
  std::vector<Vector> interval_nodes(const Vector& X) const;

 private:
  const ODESystem& system_;
  int q_;
  int dim_;
  int digits_;
  std::shared_ptr<const NodalBasis> basis_;   // q+1 Lobatto nodes
  std::shared_ptr<const QuadratureRule> gauss_;  // q Gauss points
  Matrix eval_at_gauss_;   // E: q x (q+1) cardinal values
  Matrix deriv_at_gauss_;  // E * D: q x (q+1) cardinal derivatives

  // Bound step data.
  Vector u_left_;
  BigScalar t_left_;
  BigScalar k_;
  BigScalar inv_k_;

  // Workspaces.
  std::vector<BigScalar> t_colloc_;
  std::vector<Vector> u_at_gauss_;
  std::vector<Vector> f_at_gauss_;
  Matrix jf_;
  BigScalar scale_;
};

// Damped Newton iteration on a StepSystem. Starts from `guess` (stacked
// unknowns), verifies first, and returns once the residual infinity norm
// drops below tol * residual_scale(). Throws ConvergenceError carrying the
// residual history on divergence or iteration exhaustion.
Vector newton_solve(StepSystem& sys, Vector guess, const BigScalar& tol,
                    int max_iters, bool damping, NewtonStats* stats = nullptr);

struct StepResult {
  std::vector<Vector> nodes;  // q+1 nodal vectors, nodes[0] == u_left
  NewtonStats stats;
};

// Reusable single-interval solver; owns the workspaces, so one instance per
// integration (not shared across threads).
class Stepper {
 public:
  Stepper(const ODESystem& system, const SolverConfig& cfg);

  StepResult step(const Vector& u_left, const BigScalar& t_left,
                  const BigScalar& k);
  void reset_history();  // forget the previous interval (guess modes)

 private:
  const ODESystem& system_;
  SolverConfig cfg_;
  StepSystem step_system_;
  Vector guess_;
  bool have_prev_ = false;
  BigScalar prev_t_left_;
  BigScalar prev_k_;
  std::vector<Vector> prev_nodes_;
};

struct IntegrationStats {
  long steps = 0;
  long newton_iterations = 0;
  int max_newton_iterations = 0;
  long damping_halvings = 0;
};

// Called after each completed interval with the interval's nodal vectors
// (nodes[0] = left boundary value).
using StepSink = std::function<void(
    long step_index, const BigScalar& t_left, const BigScalar& t_right,
    const std::vector<Vector>& nodes)>;

// Number of uniform steps covering [0, T]; the last step may be short.
long step_count(const BigScalar& T, const BigScalar& dt);

// Integrates u' = f over [0, T] with uniform steps. Step failures carry the
// failing interval index and time.
Trajectory integrate(const ODESystem& system, const Vector& u0,
                     const BigScalar& T, const SolverConfig& cfg,
                     ProblemInfo info = {}, const StepSink& sink = nullptr,
                     IntegrationStats* stats = nullptr);

// Storage-free variant returning only u(T); sink still sees every interval.
Vector integrate_final(const ODESystem& system, const Vector& u0,
                       const BigScalar& T, const SolverConfig& cfg,
                       const StepSink& sink = nullptr,
                       IntegrationStats* stats = nullptr);

// Resumes the uniform-step integration of horizon T at step `first_step`
// with state u_at_step = U(first_step * dt); reproduces the uninterrupted
// run exactly.
Vector integrate_resume(const ODESystem& system, const Vector& u_at_step,
                        long first_step, const BigScalar& T,
                        const SolverConfig& cfg,
                        const StepSink& sink = nullptr,
                        IntegrationStats* stats = nullptr);

// Pointwise residual R(t) = U'(t) - f(U(t), t) of a stored trajectory.
Vector residual(const Trajectory& traj, const ODESystem& system,
                const BigScalar& t);

// The magnitude against which residual_tol is measured at time t: the
// larger of 1, ||f|| and the absolute-sum size of the differentiated nodal
// values (whose cancellation limits the achievable residual).
BigScalar residual_scale(const Trajectory& traj, const ODESystem& system,
                         const BigScalar& t);

}  // namespace cgode
