#include "cgode/galerkin.hpp"

#include <sstream>

namespace cgode {

SolverConfig SolverConfig::make(const PrecisionContext& ctx, int q,
                                const BigScalar& dt) {
  SolverConfig cfg;
  cfg.q = q;
  cfg.dt = dt;
  cfg.residual_tol = ctx.eps() * 100;
  cfg.validate();
  return cfg;
}

void SolverConfig::validate() const {
  if (q < 1) throw ConfigError("cG(q) requires q >= 1");
  if (dt.empty() || !(dt > BigScalar(dt.ctx(), 0))) {
    throw ConfigError("solver step size dt must be positive");
  }
  if (residual_tol.empty() || residual_tol < dt.ctx().eps()) {
    throw ConfigError("residual_tol must be at least the context epsilon");
  }
  if (max_newton_iters < 1) throw ConfigError("max_newton_iters must be >= 1");
}

std::string NewtonStats::history_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < residual_history.size(); ++i) {
    if (i) os << " -> ";
    os << residual_history[i];
  }
  return os.str();
}

StepSystem::StepSystem(const ODESystem& system, int q,
                       const PrecisionContext& ctx)
    : system_(system),
      q_(q),
      dim_(system.dimension()),
      digits_(ctx.digits()),
      basis_(lobatto_basis_cached(q, ctx)),
      gauss_(gauss_legendre_cached(q, ctx)),
      u_left_(ctx, dim_),
      t_left_(ctx),
      k_(ctx),
      inv_k_(ctx),
      jf_(ctx, dim_, dim_),
      scale_(ctx) {
  eval_at_gauss_ = basis_->eval_matrix(gauss_->points);
  deriv_at_gauss_ = eval_at_gauss_ * basis_->diff_matrix();
  t_colloc_.assign(static_cast<std::size_t>(q_), BigScalar(ctx));
  u_at_gauss_.assign(static_cast<std::size_t>(q_), Vector(ctx, dim_));
  f_at_gauss_.assign(static_cast<std::size_t>(q_), Vector(ctx, dim_));
}

void StepSystem::bind(const Vector& u_left, const BigScalar& t_left,
                      const BigScalar& k) {
  u_left_.set(u_left);
  t_left_.set(t_left);
  k_.set(k);
  inv_k_ = BigScalar(PrecisionContext(digits_), 1);
  inv_k_ /= k_;
  for (int g = 0; g < q_; ++g) {
    BigScalar& t = t_colloc_[static_cast<std::size_t>(g)];
    t.set(t_left_);
    t.add_mul(k_, gauss_->points[static_cast<std::size_t>(g)]);
  }
}

void StepSystem::residual(const Vector& X, Vector& R) {
  // The achievable residual accuracy is set by the size of the summands in
  // U'(tau_g), which cancel down to O(||f||): the scale must track the
  // absolute sums, not just the right-hand side.
  scale_.set(1);
  BigScalar mag{PrecisionContext(digits_)};
  BigScalar term{PrecisionContext(digits_)};
  for (int g = 0; g < q_; ++g) {
    Vector& u = u_at_gauss_[static_cast<std::size_t>(g)];
    Vector& f = f_at_gauss_[static_cast<std::size_t>(g)];
    // U and U' at the collocation point from the Lobatto nodal values:
    // node 0 is the bound left value, nodes 1..q come from X.
    for (int c = 0; c < dim_; ++c) {
      BigScalar& uc = u[c];
      uc.set_zero();
      uc.add_mul(eval_at_gauss_.at(g, 0), u_left_[c]);
      BigScalar& rc = R[g * dim_ + c];
      rc.set_zero();
      rc.add_mul(deriv_at_gauss_.at(g, 0), u_left_[c]);
      mag.set_zero();
      term.set(deriv_at_gauss_.at(g, 0));
      term *= u_left_[c];
      term.abs_assign();
      mag += term;
      for (int j = 1; j <= q_; ++j) {
        const BigScalar& xjc = X[(j - 1) * dim_ + c];
        uc.add_mul(eval_at_gauss_.at(g, j), xjc);
        rc.add_mul(deriv_at_gauss_.at(g, j), xjc);
        term.set(deriv_at_gauss_.at(g, j));
        term *= xjc;
        term.abs_assign();
        mag += term;
      }
      rc *= inv_k_;
      mag *= inv_k_;
      if (mag > scale_) scale_.set(mag);
    }
    system_.rhs(u, t_colloc_[static_cast<std::size_t>(g)], f);
    for (int c = 0; c < dim_; ++c) {
      BigScalar& rc = R[g * dim_ + c];
      rc -= f[c];
      BigScalar af(f[c]);
      af.abs_assign();
      if (af > scale_) scale_.set(af);
    }
  }
}

void StepSystem::jacobian(const Vector& X, Matrix& J) {
  const PrecisionContext ctx(digits_);
  // u_at_gauss_ is refreshed so jacobian() is usable independently.
  for (int g = 0; g < q_; ++g) {
    Vector& u = u_at_gauss_[static_cast<std::size_t>(g)];
    for (int c = 0; c < dim_; ++c) {
      BigScalar& uc = u[c];
      uc.set_zero();
      uc.add_mul(eval_at_gauss_.at(g, 0), u_left_[c]);
      for (int j = 1; j <= q_; ++j) {
        uc.add_mul(eval_at_gauss_.at(g, j), X[(j - 1) * dim_ + c]);
      }
    }
    system_.jacobian(u, t_colloc_[static_cast<std::size_t>(g)], jf_);
    for (int j = 1; j <= q_; ++j) {
      const BigScalar& e = eval_at_gauss_.at(g, j);
      const BigScalar& d = deriv_at_gauss_.at(g, j);
      for (int a = 0; a < dim_; ++a) {
        for (int b = 0; b < dim_; ++b) {
          BigScalar& entry = J.at(g * dim_ + a, (j - 1) * dim_ + b);
          entry.set_zero();
          entry.sub_mul(e, jf_.at(a, b));
          if (a == b) {
            entry.add_mul(d, inv_k_);
          }
        }
      }
    }
  }
}

std::vector<Vector> StepSystem::interval_nodes(const Vector& X) const {
  std::vector<Vector> nodes;
  nodes.reserve(static_cast<std::size_t>(q_ + 1));
  nodes.push_back(u_left_);
  const PrecisionContext ctx(digits_);
  for (int j = 1; j <= q_; ++j) {
    Vector v(ctx, dim_);
    for (int c = 0; c < dim_; ++c) v[c].set(X[(j - 1) * dim_ + c]);
    nodes.push_back(std::move(v));
  }
  return nodes;
}

Vector newton_solve(StepSystem& sys, Vector guess, const BigScalar& tol,
                    int max_iters, bool damping, NewtonStats* stats) {
  const PrecisionContext ctx = tol.ctx();
  const int n = sys.unknowns();
  NewtonStats local;
  NewtonStats& st = stats ? *stats : local;
  st = NewtonStats{};

  Vector X = std::move(guess);
  Vector R(ctx, n);
  Vector R_trial(ctx, n);
  Vector X_trial(ctx, n);
  Matrix J(ctx, n, n);
  std::vector<int> perm;

  sys.residual(X, R);
  BigScalar rnorm = R.norm_inf();
  st.residual_history.push_back(rnorm.str(6));
  BigScalar threshold = tol * sys.residual_scale();
  st.iterations = 1;  // the verification pass counts as one iteration
  if (rnorm <= threshold) {
    st.converged = true;
    return X;
  }

  for (int iter = 0; iter < max_iters; ++iter) {
    sys.jacobian(X, J);
    Vector delta(R);
    for (int i = 0; i < n; ++i) delta[i].negate();
    Matrix Jw(J);
    lu_solve_inplace(Jw, delta, perm);

    // Accept the full step if it reduces the residual; otherwise halve.
    BigScalar step_scale(ctx, 1);
    bool accepted = false;
    const int max_halvings = damping ? 30 : 0;
    for (int h = 0; h <= max_halvings; ++h) {
      X_trial.set(X);
      X_trial.add_scaled(step_scale, delta);
      sys.residual(X_trial, R_trial);
      BigScalar rnew = R_trial.norm_inf();
      BigScalar thr_new = tol * sys.residual_scale();
      if (rnew <= thr_new || rnew < rnorm || !damping) {
        X.set(X_trial);
        R.set(R_trial);
        rnorm = std::move(rnew);
        threshold = std::move(thr_new);
        accepted = true;
        st.damping_halvings += h;
        break;
      }
      step_scale /= 2;
    }
    ++st.iterations;
    st.residual_history.push_back(rnorm.str(6));
    if (st.residual_history.size() > 64) {
      st.residual_history.erase(st.residual_history.begin());
    }
    if (!accepted) {
      throw ConvergenceError(
          "Newton stalled: residual would not decrease after 30 halvings",
          st.history_string());
    }
    if (rnorm <= threshold) {
      st.converged = true;
      return X;
    }
  }
  throw ConvergenceError("Newton did not reach the residual tolerance within " +
                             std::to_string(max_iters) + " iterations",
                         st.history_string());
}

Stepper::Stepper(const ODESystem& system, const SolverConfig& cfg)
    : system_(system),
      cfg_(cfg),
      step_system_(system, cfg.q, cfg.ctx()),
      guess_(cfg.ctx(), cfg.q * system.dimension()),
      prev_t_left_(cfg.ctx()),
      prev_k_(cfg.ctx()) {
  cfg_.validate();
}

void Stepper::reset_history() { have_prev_ = false; }

StepResult Stepper::step(const Vector& u_left, const BigScalar& t_left,
                         const BigScalar& k) {
  const PrecisionContext ctx = cfg_.ctx();
  const int dim = system_.dimension();
  step_system_.bind(u_left, t_left, k);

  if (cfg_.guess == GuessMode::kPreviousPoly && have_prev_) {
    // Extrapolate the previous interval's polynomial to the new nodes.
    const auto& nodes = step_system_.basis().nodes();
    Vector v(ctx, dim);
    for (int j = 1; j <= cfg_.q; ++j) {
      BigScalar tau = t_left;
      tau.add_mul(k, nodes[static_cast<std::size_t>(j)]);
      tau -= prev_t_left_;
      tau /= prev_k_;
      step_system_.basis().eval(prev_nodes_, tau, v);
      for (int c = 0; c < dim; ++c) guess_[(j - 1) * dim + c].set(v[c]);
    }
  } else {
    for (int j = 1; j <= cfg_.q; ++j) {
      for (int c = 0; c < dim; ++c) guess_[(j - 1) * dim + c].set(u_left[c]);
    }
  }

  StepResult result;
  Vector X = newton_solve(step_system_, guess_, cfg_.residual_tol,
                          cfg_.max_newton_iters, cfg_.damping, &result.stats);
  result.nodes = step_system_.interval_nodes(X);

  if (cfg_.guess == GuessMode::kPreviousPoly) {
    prev_nodes_ = result.nodes;
    prev_t_left_.set(t_left);
    prev_k_.set(k);
    have_prev_ = true;
  }
  return result;
}

long step_count(const BigScalar& T, const BigScalar& dt) {
  const PrecisionContext ctx = dt.ctx();
  if (!(T > BigScalar(ctx, 0))) {
    throw DomainError("integration horizon T must be positive (empty interval)");
  }
  BigScalar ratio = T / dt;
  // Snap to the rounded count when M*dt lands on T up to a 2^-30 dt grain;
  // otherwise take the ceiling and let the last step be short.
  BigScalar rounded(ctx);
  mpfr_round(rounded.raw(), ratio.raw());
  long m_round = rounded.to_long();
  if (m_round >= 1) {
    BigScalar err = dt * m_round;
    err -= T;
    err.abs_assign();
    BigScalar grain(dt);
    mpfr_mul_2si(grain.raw(), grain.raw(), -30, MPFR_RNDN);
    if (err <= grain) return m_round;
  }
  BigScalar up(ctx);
  mpfr_ceil(up.raw(), ratio.raw());
  long m = up.to_long();
  return m < 1 ? 1 : m;
}

namespace {

Vector integrate_core(const ODESystem& system, const Vector& u_start,
                      long first_step, const BigScalar& T,
                      const SolverConfig& cfg, const StepSink& sink,
                      IntegrationStats* stats) {
  cfg.validate();
  const PrecisionContext ctx = cfg.ctx();
  const long M = step_count(T, cfg.dt);
  if (first_step < 0 || first_step >= M) {
    throw ConfigError("resume step index outside the step range");
  }

  Stepper stepper(system, cfg);
  Vector u = u_start;
  BigScalar t_left(ctx), t_right(ctx), k(ctx);
  for (long n = first_step; n < M; ++n) {
    t_left = (n == 0) ? BigScalar(ctx, 0) : cfg.dt * n;
    if (n == M - 1) {
      t_right = T;
    } else {
      t_right = cfg.dt * (n + 1);
    }
    k = t_right - t_left;
    if (!(k > BigScalar(ctx, 0))) {
      throw ConfigError("degenerate step at index " + std::to_string(n));
    }
    try {
      StepResult r = stepper.step(u, t_left, k);
      if (stats) {
        ++stats->steps;
        stats->newton_iterations += r.stats.iterations;
        stats->damping_halvings += r.stats.damping_halvings;
        if (r.stats.iterations > stats->max_newton_iterations) {
          stats->max_newton_iterations = r.stats.iterations;
        }
      }
      u.set(r.nodes.back());
      if (sink) sink(n, t_left, t_right, r.nodes);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("step " + std::to_string(n) + " at t = " +
                                 t_left.str(8) + " failed: " + e.what(),
                             e.trace());
    }
  }
  return u;
}

}  // namespace

Trajectory integrate(const ODESystem& system, const Vector& u0,
                     const BigScalar& T, const SolverConfig& cfg,
                     ProblemInfo info, const StepSink& sink,
                     IntegrationStats* stats) {
  const PrecisionContext ctx = cfg.ctx();
  if (info.name.empty()) info.name = system.name();
  if (info.params.empty()) info.params = system.params_string();
  if (info.u0_decimal.empty()) {
    for (int c = 0; c < u0.size(); ++c) info.u0_decimal.push_back(u0[c].str_exact());
  }
  Trajectory traj(ctx, cfg.q, BigScalar(ctx, 0), u0, std::move(info));
  auto collect = [&](long n, const BigScalar& tl, const BigScalar& tr,
                     const std::vector<Vector>& nodes) {
    traj.append_interval(tr, nodes);
    if (sink) sink(n, tl, tr, nodes);
  };
  integrate_core(system, u0, 0, T, cfg, collect, stats);
  return traj;
}

Vector integrate_final(const ODESystem& system, const Vector& u0,
                       const BigScalar& T, const SolverConfig& cfg,
                       const StepSink& sink, IntegrationStats* stats) {
  return integrate_core(system, u0, 0, T, cfg, sink, stats);
}

Vector integrate_resume(const ODESystem& system, const Vector& u_at_step,
                        long first_step, const BigScalar& T,
                        const SolverConfig& cfg, const StepSink& sink,
                        IntegrationStats* stats) {
  return integrate_core(system, u_at_step, first_step, T, cfg, sink, stats);
}

Vector residual(const Trajectory& traj, const ODESystem& system,
                const BigScalar& t) {
  Vector du = traj.derivative(t, 1);
  Vector f = system.rhs(traj.evaluate(t), t);
  du -= f;
  return du;
}

BigScalar residual_scale(const Trajectory& traj, const ODESystem& system,
                         const BigScalar& t) {
  const PrecisionContext ctx(traj.digits());
  const int i = traj.find_interval(t);
  const BigScalar& tl = traj.partition()[static_cast<std::size_t>(i)];
  const BigScalar& tr = traj.partition()[static_cast<std::size_t>(i + 1)];
  const Matrix& D = traj.basis().diff_matrix();

  BigScalar umax(ctx);
  for (int j = 0; j <= traj.q(); ++j) {
    BigScalar nj = traj.node_value(i, j).norm_inf();
    if (nj > umax) umax.set(nj);
  }
  BigScalar scale = D.norm_inf() * umax / (tr - tl);
  BigScalar fn = system.rhs(traj.evaluate(t), t).norm_inf();
  if (fn > scale) scale.set(fn);
  BigScalar one(ctx, 1);
  if (one > scale) scale.set(one);
  return scale;
}

}  // namespace cgode
