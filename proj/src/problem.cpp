#include "cgode/problem.hpp"

namespace cgode {

LorenzParams LorenzParams::standard(const PrecisionContext& ctx) {
  LorenzParams p{BigScalar(ctx, 10), BigScalar(ctx, 8), BigScalar(ctx, 28)};
  p.b /= 3;
  return p;
}

std::string LorenzParams::describe() const {
  return "sigma=" + sigma.str() + " b=" + b.str() + " r=" + r.str();
}

void ODESystem::jacobian_directional(const Vector&, const Vector&,
                                     const BigScalar&, Matrix&) const {
  throw CapabilityError("jacobian_directional not provided by system '" +
                        name() + "'");
}

Vector ODESystem::rhs(const Vector& u, const BigScalar& t) const {
  Vector out(u.ctx(), dimension());
  rhs(u, t, out);
  return out;
}

Matrix ODESystem::jacobian(const Vector& u, const BigScalar& t) const {
  Matrix out(u.ctx(), dimension(), dimension());
  jacobian(u, t, out);
  return out;
}

void LorenzSystem::rhs(const Vector& u, const BigScalar&, Vector& out) const {
  const BigScalar& x = u[0];
  const BigScalar& y = u[1];
  const BigScalar& z = u[2];
  // sigma (y - x)
  out[0].set(y);
  out[0] -= x;
  out[0] *= p_.sigma;
  // r x - y - x z
  out[1].set(p_.r);
  out[1] *= x;
  out[1] -= y;
  out[1].sub_mul(x, z);
  // x y - b z
  out[2].set(x);
  out[2] *= y;
  out[2].sub_mul(p_.b, z);
}

void LorenzSystem::jacobian(const Vector& u, const BigScalar&,
                            Matrix& out) const {
  const BigScalar& x = u[0];
  const BigScalar& y = u[1];
  const BigScalar& z = u[2];
  out.at(0, 0).set(p_.sigma);
  out.at(0, 0).negate();
  out.at(0, 1).set(p_.sigma);
  out.at(0, 2).set_zero();
  out.at(1, 0).set(p_.r);
  out.at(1, 0) -= z;
  out.at(1, 1).set(-1);
  out.at(1, 2).set(x);
  out.at(1, 2).negate();
  out.at(2, 0).set(y);
  out.at(2, 1).set(x);
  out.at(2, 2).set(p_.b);
  out.at(2, 2).negate();
}

void LorenzSystem::jacobian_directional(const Vector&, const Vector& du,
                                        const BigScalar&, Matrix& out) const {
  // J is affine in u; the directional derivative keeps only the du terms.
  out.set_zero();
  out.at(1, 0).set(du[2]);
  out.at(1, 0).negate();
  out.at(1, 2).set(du[0]);
  out.at(1, 2).negate();
  out.at(2, 0).set(du[1]);
  out.at(2, 1).set(du[0]);
}

void ScalarLinearSystem::rhs(const Vector& u, const BigScalar&,
                             Vector& out) const {
  out[0].set(a_);
  out[0] *= u[0];
}

void ScalarLinearSystem::jacobian(const Vector&, const BigScalar&,
                                  Matrix& out) const {
  out.at(0, 0).set(a_);
}

void ScalarLinearSystem::jacobian_directional(const Vector&, const Vector&,
                                              const BigScalar&,
                                              Matrix& out) const {
  out.set_zero();
}

void PolynomialRhsSystem::rhs(const Vector&, const BigScalar& t,
                              Vector& out) const {
  for (int c = 0; c < dimension(); ++c) {
    const auto& cs = coeffs_[static_cast<std::size_t>(c)];
    BigScalar& acc = out[c];
    acc.set_zero();
    for (auto it = cs.rbegin(); it != cs.rend(); ++it) {
      acc *= t;
      acc += *it;
    }
  }
}

void PolynomialRhsSystem::jacobian(const Vector&, const BigScalar&,
                                   Matrix& out) const {
  out.set_zero();
}

void PolynomialRhsSystem::jacobian_directional(const Vector&, const Vector&,
                                               const BigScalar&,
                                               Matrix& out) const {
  out.set_zero();
}

Vector lorenz_rhs(const Vector& state, const LorenzParams& params) {
  LorenzSystem sys(params);
  Vector out(state.ctx(), 3);
  sys.rhs(state, BigScalar(state.ctx(), 0), out);
  return out;
}

Matrix lorenz_jacobian(const Vector& state, const LorenzParams& params) {
  LorenzSystem sys(params);
  Matrix out(state.ctx(), 3, 3);
  sys.jacobian(state, BigScalar(state.ctx(), 0), out);
  return out;
}

Vector dual_rhs(const Vector& z, const Vector& ubar,
                const LorenzParams& params) {
  const PrecisionContext ctx = z.ctx();
  const BigScalar& xi = z[0];
  const BigScalar& eta = z[1];
  const BigScalar& zeta = z[2];
  const BigScalar& xbar = ubar[0];
  const BigScalar& ybar = ubar[1];
  const BigScalar& zbar = ubar[2];

  Vector out(ctx, 3);
  // zdot_1 = sigma xi - (r - zbar) eta - ybar zeta
  out[0].set(params.sigma);
  out[0] *= xi;
  BigScalar rz(params.r);
  rz -= zbar;
  out[0].sub_mul(rz, eta);
  out[0].sub_mul(ybar, zeta);
  // zdot_2 = -sigma xi + eta - xbar zeta
  out[1].set(eta);
  out[1].sub_mul(params.sigma, xi);
  out[1].sub_mul(xbar, zeta);
  // zdot_3 = xbar eta + b zeta
  out[2].set_zero();
  out[2].add_mul(xbar, eta);
  out[2].add_mul(params.b, zeta);
  return out;
}

Vector averaged_state(const Vector& U_t, const Vector& u_t) {
  Vector mid = U_t;
  mid += u_t;
  for (int i = 0; i < mid.size(); ++i) mid[i] /= 2;
  return mid;
}

Vector lorenz_fixed_point(const PrecisionContext& ctx, int sign) {
  if (sign != 1 && sign != -1) {
    throw ConfigError("lorenz_fixed_point: sign must be +1 or -1");
  }
  Vector p(ctx, 3);
  BigScalar s = sqrt(BigScalar(ctx, 2));
  s *= 6 * sign;
  p[0].set(s);
  p[1].set(s);
  p[2].set(27);
  return p;
}

BigScalar lipschitz_estimate(const Trajectory& traj, const ODESystem& system,
                             const BigScalar& sample_dt) {
  const PrecisionContext ctx(traj.digits());
  if (!(sample_dt > BigScalar(ctx, 0))) {
    throw ConfigError("lipschitz_estimate requires sample_dt > 0");
  }
  const int n = system.dimension();
  Matrix J(ctx, n, n);
  Vector u(ctx, n);
  BigScalar best(ctx);
  BigScalar t = traj.t_begin();
  long i = 0;
  while (true) {
    traj.evaluate(t, u);
    system.jacobian(u, t, J);
    BigScalar s = spectral_norm(J);
    if (s > best) best.set(s);
    ++i;
    t = traj.t_begin() + sample_dt * i;
    if (t > traj.t_end()) break;
  }
  return best;
}

BigScalar lipschitz_estimate(const Trajectory& traj, const ODESystem& system) {
  return lipschitz_estimate(traj, system,
                            PrecisionContext(traj.digits()).parse("0.01"));
}

std::unique_ptr<ODESystem> make_system(
    const std::string& name, const PrecisionContext& ctx,
    const std::vector<std::string>& overrides) {
  if (name == "lorenz") {
    LorenzParams p = LorenzParams::standard(ctx);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("parameter override '" + kv + "' is not key=value");
      }
      const std::string key = kv.substr(0, eq);
      BigScalar value = parse_decimal(kv.substr(eq + 1), ctx);
      if (key == "sigma") {
        p.sigma = std::move(value);
      } else if (key == "b") {
        p.b = std::move(value);
      } else if (key == "r") {
        p.r = std::move(value);
      } else {
        throw ConfigError("unknown lorenz parameter '" + key +
                          "' (sigma, b, r)");
      }
    }
    return std::make_unique<LorenzSystem>(std::move(p));
  }
  if (!overrides.empty()) {
    throw ConfigError("parameter overrides are not defined for '" + name + "'");
  }
  throw ConfigError("unknown problem '" + name + "' (available: lorenz)");
}

}  // namespace cgode
