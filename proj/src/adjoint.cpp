#include "cgode/adjoint.hpp"

#include "cgode/util.hpp"

namespace cgode {

DualConfig DualConfig::defaults(const Trajectory& primal,
                                const PrecisionContext& ctx, int dimension) {
  DualConfig cfg;
  cfg.z_T = Vector(ctx, dimension);
  cfg.z_T[0].set(1);
  cfg.dual_q = std::max(3, primal.q() / 2);
  // Median primal step as the dual step (uniform integrations have a single
  // interior width; the final short step does not matter here).
  cfg.dual_dt = primal.partition()[1] - primal.partition()[0];
  cfg.residual_tol = ctx.eps() * 100;
  return cfg;
}

void DualConfig::validate() const {
  if (z_T.size() == 0 || z_T.norm_inf().is_zero()) {
    throw ConfigError("dual terminal condition z_T must be nonzero");
  }
  if (dual_q < 1) throw ConfigError("dual_q must be >= 1");
  if (dual_dt.empty() || !(dual_dt > BigScalar(dual_dt.ctx(), 0))) {
    throw ConfigError("dual_dt must be positive");
  }
}

DualReversedSystem::DualReversedSystem(const Trajectory& primal,
                                       const ODESystem& base, BigScalar horizon)
    : primal_(primal), base_(base), horizon_(std::move(horizon)) {
  if (!(horizon_ > primal_.t_begin()) || horizon_ > primal_.t_end()) {
    throw DomainError("dual horizon outside the primal trajectory span");
  }
}

std::string DualReversedSystem::params_string() const {
  return base_.params_string() + " horizon=" + horizon_.str();
}

void DualReversedSystem::rhs(const Vector& w, const BigScalar& s,
                             Vector& out) const {
  BigScalar t = horizon_ - s;
  Vector ubar = primal_.evaluate(t);
  Matrix J = base_.jacobian(ubar, t);
  const int n = dimension();
  for (int a = 0; a < n; ++a) {
    BigScalar& acc = out[a];
    acc.set_zero();
    for (int b = 0; b < n; ++b) acc.add_mul(J.at(b, a), w[b]);
  }
}

void DualReversedSystem::jacobian(const Vector&, const BigScalar& s,
                                  Matrix& out) const {
  BigScalar t = horizon_ - s;
  Vector ubar = primal_.evaluate(t);
  Matrix J = base_.jacobian(ubar, t);
  const int n = dimension();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out.at(a, b).set(J.at(b, a));
}

Trajectory solve_dual(const Trajectory& primal, const ODESystem& system,
                      const DualConfig& cfg, IntegrationStats* stats) {
  cfg.validate();
  const PrecisionContext ctx(primal.digits());
  if (!primal.t_begin().is_zero()) {
    throw DomainError("solve_dual expects a primal trajectory starting at 0");
  }
  const BigScalar T = primal.t_end();

  DualReversedSystem reversed(primal, system, T);
  SolverConfig scfg = SolverConfig::make(ctx, cfg.dual_q, cfg.dual_dt);
  if (!cfg.residual_tol.empty()) scfg.residual_tol = cfg.residual_tol;
  scfg.max_newton_iters = cfg.max_newton_iters;

  ProblemInfo info;
  info.name = reversed.name();
  info.params = reversed.params_string();
  for (int c = 0; c < cfg.z_T.size(); ++c) {
    info.u0_decimal.push_back(cfg.z_T[c].str_exact());
  }
  Trajectory w = integrate(reversed, cfg.z_T, T, scfg, std::move(info), nullptr,
                           stats);
  return w.time_reversed();
}

namespace {

// z^(m) at primal time t by the recurrence z' = -A^T z with
// A = J(u(t)), A' = J_dir(u'), A'' = J_dir(u'') (affine Jacobian).
Vector dual_derivative_analytic(const Trajectory& dual,
                                const Trajectory& primal,
                                const ODESystem& system, const BigScalar& t,
                                int m) {
  const PrecisionContext ctx(dual.digits());
  const int n = system.dimension();

  Vector u = primal.evaluate(t);
  Matrix A = system.jacobian(u, t);
  Vector z = dual.evaluate(t);

  auto neg_transpose_mul = [n](const Matrix& M, const Vector& v) {
    Vector out(v.ctx(), n);
    for (int a = 0; a < n; ++a) {
      BigScalar& acc = out[a];
      for (int b = 0; b < n; ++b) acc.sub_mul(M.at(b, a), v[b]);
    }
    return out;
  };

  Vector z1 = neg_transpose_mul(A, z);  // z'
  if (m == 1) return z1;

  Vector du = primal.derivative(t, 1);
  Matrix A1(ctx, n, n);
  system.jacobian_directional(u, du, t, A1);
  // z'' = -A'^T z - A^T z'
  Vector z2 = neg_transpose_mul(A1, z);
  z2 += neg_transpose_mul(A, z1);
  if (m == 2) return z2;

  Vector ddu = primal.derivative(t, 2);
  Matrix A2(ctx, n, n);
  system.jacobian_directional(u, ddu, t, A2);
  // z''' = -A''^T z - 2 A'^T z' - A^T z''
  Vector z3 = neg_transpose_mul(A2, z);
  Vector t2 = neg_transpose_mul(A1, z1);
  t2 += t2;
  z3 += t2;
  z3 += neg_transpose_mul(A, z2);
  return z3;
}

}  // namespace

StabilityFactors stability_factors(const Trajectory& dual,
                                   const Trajectory& primal,
                                   const ODESystem& system, int p) {
  if (p < 0) throw ConfigError("stability_factors requires p >= 0");
  const PrecisionContext ctx(dual.digits());
  const int order = p + 1;
  const bool analytic = order <= 3 && system.jacobian_is_affine();
  if (!analytic && order > dual.q()) {
    throw CapabilityError(
        "dual derivative of order " + std::to_string(order) +
        " unavailable: dual polynomial degree is " + std::to_string(dual.q()) +
        " and the analytic recurrence covers only orders 1..3 on "
        "affine-Jacobian systems");
  }

  StabilityFactors out{BigScalar(ctx, 0), BigScalar(ctx, 0), BigScalar(ctx, 0),
                       BigScalar(ctx, 0), dual.t_end(), p, {}};
  Vector z0 = dual.evaluate(dual.t_begin());
  out.S_D = z0.norm_l2();
  Vector zT = dual.evaluate(dual.t_end());
  for (int c = 0; c < zT.size(); ++c) out.z_T_decimal.push_back(zT[c].str());

  const int npts = std::max(dual.q() + 1, 8);
  auto rule = gauss_legendre_cached(npts, ctx);

  BigScalar sc2_acc(ctx);
  BigScalar t(ctx), contrib(ctx), nrm(ctx);
  const auto& part = dual.partition();
  for (int i = 0; i < dual.intervals(); ++i) {
    const BigScalar& tl = part[static_cast<std::size_t>(i)];
    const BigScalar& tr = part[static_cast<std::size_t>(i + 1)];
    BigScalar k = tr - tl;
    for (int g = 0; g < npts; ++g) {
      t.set(tl);
      t.add_mul(k, rule->points[static_cast<std::size_t>(g)]);
      Vector z = dual.evaluate(t);
      nrm = z.norm_l2();
      contrib.set(rule->weights[static_cast<std::size_t>(g)]);
      contrib *= k;
      out.S_C.add_mul(contrib, nrm);
      sc2_acc.add_mul(contrib, nrm * nrm);
      Vector zd = analytic
                      ? dual_derivative_analytic(dual, primal, system, t, order)
                      : dual.derivative(t, order);
      out.S_G.add_mul(contrib, zd.norm_l2());
    }
  }
  out.S_C2 = sqrt(sc2_acc);
  return out;
}

std::vector<GrowthPoint> growth_series(const Trajectory& primal,
                                       const ODESystem& system,
                                       const std::vector<BigScalar>& T_list,
                                       const DualConfig& cfg, int p,
                                       int workers) {
  const PrecisionContext ctx(primal.digits());
  std::vector<GrowthPoint> out(T_list.size());

  parallel_for(static_cast<int>(T_list.size()), workers, [&](int idx) {
    const BigScalar& T = T_list[static_cast<std::size_t>(idx)];
    GrowthPoint& point = out[static_cast<std::size_t>(idx)];
    point.T = T;
    try {
      if (!(T > BigScalar(ctx, 0)) || T > primal.t_end()) {
        throw DomainError("growth_series horizon outside primal span");
      }
      // Re-solve the dual on [0, T]: each point is an independent solve.
      DualReversedSystem reversed(primal, system, T);
      SolverConfig scfg = SolverConfig::make(ctx, cfg.dual_q, cfg.dual_dt);
      if (!cfg.residual_tol.empty()) scfg.residual_tol = cfg.residual_tol;
      scfg.max_newton_iters = cfg.max_newton_iters;
      ProblemInfo info;
      info.name = reversed.name();
      info.params = reversed.params_string();
      Trajectory w =
          integrate(reversed, cfg.z_T, T, scfg, std::move(info));
      Trajectory dual = w.time_reversed();
      point.factors = stability_factors(dual, primal, system, p);
    } catch (const std::exception& e) {
      point.error = e.what();
    }
  });
  return out;
}

ErrorBounds error_bounds(const StabilityFactors& factors,
                         const BigScalar& data_err, const BigScalar& disc_terms,
                         const BigScalar& comp_terms, const BigScalar& eps_mach,
                         const BigScalar& k_min) {
  const PrecisionContext ctx = data_err.ctx();
  for (const BigScalar* v : {&data_err, &disc_terms, &comp_terms, &eps_mach}) {
    if (v->sign() < 0) throw DomainError("error_bounds inputs must be >= 0");
  }
  if (!(k_min > BigScalar(ctx, 0))) {
    throw DomainError("error_bounds requires k_min > 0");
  }
  ErrorBounds b{BigScalar(ctx), BigScalar(ctx), BigScalar(ctx), BigScalar(ctx),
                data_err,       disc_terms,     comp_terms,     eps_mach,
                k_min};
  b.E_D_bound = factors.S_D * data_err;
  b.E_G_bound = factors.S_G * disc_terms;
  b.E_C_bound = factors.S_C * comp_terms;
  b.E_C_rms_bound = factors.S_C2 * eps_mach / sqrt(k_min);
  return b;
}

}  // namespace cgode
