// Acceptance suite: one checkable criterion per number, each printing a
// single PASS/FAIL line (plus indented detail lines). Exit code 0 iff every
// selected criterion passes.
//
//   acceptance            runs all criteria
//   acceptance <n> [...]  runs the listed criteria only

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "cgode/harness.hpp"

using namespace cgode;
namespace h = cgode::harness;
namespace fs = std::filesystem;

namespace {

const char* kWorkDir = "acceptance_artifacts";

std::string art(const std::string& name) {
  fs::create_directories(kWorkDir);
  return (fs::path(kWorkDir) / name).string();
}

double slope_of(const std::optional<LineFit>& fit) {
  return fit ? fit->slope.to_double() : std::nan("");
}

bool within(double value, double center, double tol) {
  return std::abs(value - center) <= tol;
}

struct Line {
  std::ostringstream os;
  ~Line() { std::cout << os.str() << "\n" << std::flush; }
};

#define DETAIL() Line{}.os << "    "

// ---------------------------------------------------------------------------

bool criterion_1() {
  // Order verification: q = 1, 2, 3 on [0, 1] at 64 digits, errors against a
  // (q+3, 128-digit, k_min/2) reference fit slope 2q +- 0.2 over
  // k in {0.1, 0.05, 0.025, 0.0125}.
  bool ok = true;
  for (int q : {1, 2, 3}) {
    h::SweepRequest req;
    req.digits = 64;
    req.q = q;
    req.T = "1";
    req.k_list = {"0.1", "0.05", "0.025", "0.0125"};
    req.cache_dir = art("cache");
    req.out = art("order_q" + std::to_string(q) + ".csv");
    h::SweepOutcome out = h::run_sweep(req);

    // The criterion's fit spans all four points.
    PrecisionContext ctx = make_context(128);
    std::vector<std::pair<BigScalar, BigScalar>> pts;
    for (const auto& [k, e] : out.rows) {
      pts.emplace_back(parse_decimal(k, ctx), parse_decimal(e, ctx));
    }
    LineFit fit = fit_loglog_slope(pts, pts.front().first, pts.back().first);
    const double slope = fit.slope.to_double();
    const bool pass = within(slope, 2.0 * q, 0.2);
    DETAIL() << "q=" << q << ": slope " << slope << " (target " << 2 * q
             << " +- 0.2) " << (pass ? "ok" : "VIOLATION");
    ok = ok && pass;

    if (!pass) {
      // Informational: the same fit one halving lower, inside the
      // asymptotic regime of the Lorenz timescales (omega k < 1).
      h::SweepRequest shifted = req;
      shifted.k_list = {"0.025", "0.0125", "0.00625", "0.003125"};
      shifted.out = art("order_q" + std::to_string(q) + "_shifted.csv");
      h::SweepOutcome s2 = h::run_sweep(shifted);
      std::vector<std::pair<BigScalar, BigScalar>> pts2;
      for (const auto& [k, e] : s2.rows) {
        pts2.emplace_back(parse_decimal(k, ctx), parse_decimal(e, ctx));
      }
      LineFit f2 = fit_loglog_slope(pts2, pts2.front().first, pts2.back().first);
      DETAIL() << "q=" << q << ": informational shifted-grid {0.025..0.003125} "
               << "slope " << f2.slope.to_double();
    }
  }
  return ok;
}

bool criterion_2() {
  bool ok = true;
  {
    // cG(1), T = 30, 16-digit context, k from 1e-1 down to 1e-5, against a
    // 64-digit reference. Expect a V with right branch 1.95 +- 0.3 and
    // left branch -0.35 +- 0.15.
    h::SweepRequest req;
    req.digits = 16;
    req.q = 1;
    req.T = "30";
    req.k_list = {"1e-1",   "4.6e-2", "2.2e-2", "1e-2",   "4.6e-3",
                  "2.2e-3", "1e-3",   "4.6e-4", "2.2e-4", "1e-4",
                  "4.6e-5", "2.2e-5", "1e-5"};
    req.reference.q = 5;
    req.reference.digits = 64;
    req.reference.dt = "0.01";
    req.cache_dir = art("cache");
    req.out = art("roundoff_q1.csv");
    h::SweepOutcome out = h::run_sweep(req);
    for (const auto& [k, e] : out.rows) DETAIL() << "cG(1) k=" << k << " error=" << e;
    const double right = slope_of(out.right_fit);
    const double left = slope_of(out.left_fit);
    const bool pass_right = out.right_fit && within(right, 1.95, 0.3);
    const bool pass_left = out.left_fit && within(left, -0.35, 0.15);
    DETAIL() << "cG(1): right slope " << right << " (1.95 +- 0.3) "
             << (pass_right ? "ok" : "VIOLATION")
             << (out.right_fit ? "" : (" [" + out.right_fit_note + "]"));
    DETAIL() << "cG(1): left slope " << left << " (-0.35 +- 0.15) "
             << (pass_left ? "ok" : "VIOLATION")
             << (out.left_fit ? "" : (" [" + out.left_fit_note + "]"));
    ok = ok && pass_right && pass_left;
  }
  {
    // cG(5), T = 40 variant: slopes 10 +- 0.5 and -0.49 +- 0.15.
    h::SweepRequest req;
    req.digits = 16;
    req.q = 5;
    req.T = "40";
    req.k_list = {"0.2",  "0.17", "0.14", "0.12",  "0.1",   "0.09",
                  "0.08", "0.07", "0.06", "0.05",  "0.04",  "0.03",
                  "0.02", "0.012", "0.007", "0.004", "0.002", "0.001"};
    req.reference.q = 8;
    req.reference.digits = 64;
    req.reference.dt = "0.005";
    req.cache_dir = art("cache");
    req.out = art("roundoff_q5.csv");
    h::SweepOutcome out = h::run_sweep(req);
    for (const auto& [k, e] : out.rows) DETAIL() << "cG(5) k=" << k << " error=" << e;
    const double right = slope_of(out.right_fit);
    const double left = slope_of(out.left_fit);
    const bool pass_right = out.right_fit && within(right, 10.0, 0.5);
    const bool pass_left = out.left_fit && within(left, -0.49, 0.15);
    DETAIL() << "cG(5): right slope " << right << " (10 +- 0.5) "
             << (pass_right ? "ok" : "VIOLATION")
             << (out.right_fit ? "" : (" [" + out.right_fit_note + "]"));
    DETAIL() << "cG(5): left slope " << left << " (-0.49 +- 0.15) "
             << (pass_left ? "ok" : "VIOLATION")
             << (out.left_fit ? "" : (" [" + out.left_fit_note + "]"));

    // Large-k boundedness: the coarsest run stays on the attractor while the
    // gap is order ten (wrong place, bounded error).
    bool bounded = false;
    if (!out.largest_k_final.empty()) {
      PrecisionContext ctx = make_context(16);
      Vector f = Vector(ctx, 3);
      for (int c = 0; c < 3; ++c) {
        f[c] = parse_decimal(out.largest_k_final[static_cast<std::size_t>(c)], ctx);
      }
      const bool in_box = abs(f[0]) <= BigScalar(ctx, 25) &&
                          abs(f[1]) <= BigScalar(ctx, 35) &&
                          f[2] >= BigScalar(ctx, -5) && f[2] <= BigScalar(ctx, 55);
      BigScalar gap = parse_decimal(out.rows.back().second, ctx);
      bounded = in_box && gap <= BigScalar(ctx, 80);
      DETAIL() << "cG(5) largest k: final in attractor box=" << in_box
               << " gap=" << gap.str(4) << (bounded ? " ok" : " VIOLATION");
    }
    ok = ok && pass_right && pass_left && bounded;

    if (!(pass_right && pass_left)) {
      // Informational: the same experiment at 32 digits, where the
      // discretization branch clears the round-off floor by many decades
      // and the k^(2q) scaling shows cleanly.
      h::SweepRequest info = req;
      info.digits = 32;
      info.reference.digits = 70;
      info.reference.dt = "0.0005";
      info.k_list = {"0.1",  "0.085", "0.07", "0.06",  "0.05",  "0.04", "0.03",
                     "0.02", "0.012", "0.007", "0.004", "0.002", "0.001"};
      info.saturation = "0.5";
      info.out = art("roundoff_q5_32d_info.csv");
      h::SweepOutcome oi = h::run_sweep(info);
      DETAIL() << "informational: cG(5) T=40 at 32 digits, right slope "
               << slope_of(oi.right_fit)
               << " (k^10 branch clear of the noise floor)";
    }
  }
  return ok;
}

bool criterion_3() {
  // Stability growth: dual solves at T = 10..50, 64 digits; least-squares
  // rate of log10 S_C versus T within 0.39 +- 0.10.
  h::StabilityRequest req;
  req.digits = 64;
  req.q = 6;
  req.dt = "0.005";
  req.T_list = {"10", "20", "30", "40", "50"};
  req.extrapolate_T = "1000";
  req.out = art("stability.csv");
  h::StabilityOutcome out = h::run_stability(req);
  for (const auto& r : out.rows) {
    if (r.error.empty()) {
      DETAIL() << "T=" << r.T << " S_D=" << r.S_D << " S_C=" << r.S_C
               << " S_C2=" << r.S_C2;
    } else {
      DETAIL() << "T=" << r.T << " FAILED: " << r.error;
    }
  }
  if (!out.rate_fit) {
    DETAIL() << "rate fit unavailable";
    return false;
  }
  const double rate = out.rate_fit->slope.to_double();
  const bool pass = within(rate, 0.39, 0.10);
  DETAIL() << "rate " << rate << " decades/unit (0.39 +- 0.10) "
           << (pass ? "ok" : "VIOLATION");
  if (!out.extrapolated_log10_SC.empty()) {
    DETAIL() << "extrapolated log10 S_C(1000) = " << out.extrapolated_log10_SC
             << " (used by criterion 8)";
  }
  return pass;
}

h::PairOutcome pair_at(int digits, int q_low, int q_high, const char* dt,
                       const char* tmax, const char* tol,
                       const std::string& out_name) {
  h::PairRequest req;
  req.digits = digits;
  req.q_low = q_low;
  req.q_high = q_high;
  req.dt = dt;
  req.T_max = tmax;
  req.tol = tol;
  req.out = art(out_name);
  return h::run_pair_converge(req);
}

bool criterion_4() {
  // 16-digit computability probe: divergence of (cG(2), cG(4)) at k = 1e-3
  // under tol 1e-16 lands in [20, 55]; at 32 digits it comes strictly later.
  h::PairOutcome p16 =
      pair_at(16, 2, 4, "1e-3", "80", "1e-16", "pair16.csv");
  h::PairOutcome p32 =
      pair_at(32, 2, 4, "1e-3", "80", "1e-16", "pair32.csv");

  const std::string t16 =
      p16.report.t_div ? p16.report.t_div->str(8) : "never";
  const std::string t32 =
      p32.report.t_div ? p32.report.t_div->str(8) : "never";
  DETAIL() << "t_div(16 digits) = " << t16;
  DETAIL() << "t_div(32 digits) = " << t32;

  bool in_bracket = false;
  if (p16.report.t_div) {
    const double t = p16.report.t_div->to_double();
    in_bracket = t >= 20.0 && t <= 55.0;
  }
  DETAIL() << "bracket [20, 55]: " << (in_bracket ? "ok" : "VIOLATION");

  bool ordered = false;
  if (p16.report.t_div) {
    ordered = !p32.report.t_div ||
              p32.report.t_div->to_double() > p16.report.t_div->to_double();
  }
  DETAIL() << "t_div(32) > t_div(16): " << (ordered ? "ok" : "VIOLATION");

  // Informational: the same probe at the computability-scale tolerance the
  // criterion's own anchors (T ~ 40, E = 0.001 at T ~ 50) refer to.
  h::PairOutcome info =
      pair_at(16, 2, 4, "1e-3", "80", "1e-3", "pair16_info.csv");
  DETAIL() << "informational: t_div(16 digits, tol 1e-3) = "
           << (info.report.t_div ? info.report.t_div->str(8)
                                 : std::string("never"));
  return in_bracket && ordered;
}

bool criterion_5() {
  // Computability slope: divergence times at n_mach = 8, 16, 24, 32 with
  // q = 4 at the near-optimal step, against a fixed accuracy tolerance
  // (1e-6; the linear-in-n_mach law needs an n-independent target), fit a
  // line with slope 2.5 +- 0.5.
  struct Point {
    int n;
    const char* tmax;
  };
  const Point points[] = {{8, "40"}, {16, "60"}, {24, "85"}, {32, "105"}};
  std::vector<std::pair<BigScalar, BigScalar>> fit_pts;
  PrecisionContext fit_ctx = make_context(32);
  bool all_diverged = true;
  for (const auto& [n, tmax] : points) {
    PrecisionContext ctx = make_context(n == 8 ? 8 : n);
    BigScalar k_opt = optimal_timestep(4, ctx.eps());
    const std::string k = k_opt.str(3);
    h::PairOutcome out = pair_at(n, 4, 5, k.c_str(), tmax, "1e-6",
                                 "computability_n" + std::to_string(n) + ".csv");
    if (!out.report.t_div) {
      DETAIL() << "n=" << n << " k=" << k << ": no divergence before T=" << tmax;
      all_diverged = false;
      continue;
    }
    const double t = out.report.t_div->to_double();
    DETAIL() << "n=" << n << " k=" << k << ": t_div = " << t;
    fit_pts.emplace_back(BigScalar(fit_ctx, n),
                         parse_decimal(out.report.t_div->str_exact(), fit_ctx));
  }
  if (!all_diverged || fit_pts.size() < 4) {
    DETAIL() << "insufficient divergence data for the fit";
    return false;
  }
  LineFit fit = least_squares_line(fit_pts);
  const double slope = fit.slope.to_double();
  const bool pass = within(slope, 2.5, 0.5);
  DETAIL() << "slope " << slope << " time-units/digit (2.5 +- 0.5) "
           << (pass ? "ok" : "VIOLATION");
  return pass;
}

bool criterion_6() {
  // Formula identities, all instant.
  PrecisionContext ctx = make_context(64);
  bool ok = true;

  BigScalar k100 = optimal_timestep(100, pow10(-420, ctx));
  bool k_ok = k100 >= ctx.parse("0.007") && k100 <= ctx.parse("0.009");
  DETAIL() << "optimal_timestep(100, 1e-420) = " << k100.str(6)
           << " in [0.007, 0.009] " << (k_ok ? "ok" : "VIOLATION");
  ok = ok && k_ok;

  struct Case {
    int n;
    long T;
  };
  for (const Case c : {Case{6, 15}, Case{16, 40}, Case{420, 1050}}) {
    BigScalar T = computability(pow10(-c.n, ctx));
    bool t_ok = abs(T - BigScalar(ctx, c.T)) < ctx.parse("1e-30");
    DETAIL() << "computability horizon(n=" << c.n << ") = " << T.str(8)
             << " expected " << c.T << " " << (t_ok ? "ok" : "VIOLATION");
    ok = ok && t_ok;
  }

  // e^(33 T) * 1e-16 crosses 1 near T = 1.1.
  BigScalar L(ctx, 33);
  BigScalar eps = pow10(-16, ctx);
  BigScalar lo = apriori_bound(L, BigScalar(ctx, 1), eps);
  BigScalar hi = apriori_bound(L, ctx.parse("1.2"), eps);
  // Crossing time 16 ln(10) / 33.
  BigScalar t_star = BigScalar(ctx, 16) * log(BigScalar(ctx, 10)) / 33;
  bool a_ok = lo < BigScalar(ctx, 1) && hi > BigScalar(ctx, 1) &&
              abs(t_star - ctx.parse("1.1")) < ctx.parse("0.05");
  DETAIL() << "apriori_bound(33, T, 1e-16) = 1 at T = " << t_star.str(6)
           << " (about 1.1); bound(1.0) = " << lo.str(4) << ", bound(1.2) = "
           << hi.str(4) << " " << (a_ok ? "ok" : "VIOLATION");
  return ok && a_ok;
}

bool criterion_7() {
  bool ok = true;

  {  // Galerkin orthogonality at the residual tolerance, every interval.
    PrecisionContext ctx = make_context(32);
    LorenzSystem sys(LorenzParams::standard(ctx));
    const int q = 3;
    SolverConfig cfg = SolverConfig::make(ctx, q, ctx.parse("0.01"));
    Vector u0(ctx, {1, 0, 0});
    Trajectory traj = integrate(sys, u0, BigScalar(ctx, 1), cfg);
    auto rule = gauss_legendre_cached(q, ctx);
    BigScalar worst(ctx);
    for (int i = 0; i < traj.intervals(); ++i) {
      const BigScalar& tl = traj.partition()[static_cast<std::size_t>(i)];
      const BigScalar& tr = traj.partition()[static_cast<std::size_t>(i + 1)];
      BigScalar k = tr - tl;
      for (int g = 0; g < q; ++g) {
        BigScalar tg = tl + k * rule->points[static_cast<std::size_t>(g)];
        Vector R = residual(traj, sys, tg);
        BigScalar scale = residual_scale(traj, sys, tg);
        BigScalar rel = R.norm_inf() / scale;
        if (rel > worst) worst.set(rel);
      }
    }
    bool pass = worst <= cfg.residual_tol * 2;
    DETAIL() << "galerkin orthogonality: worst scaled residual "
             << worst.str(4) << " vs tol " << cfg.residual_tol.str(4) << " "
             << (pass ? "ok" : "VIOLATION");
    ok = ok && pass;

    // Continuity: shared nodes are bit-identical across interval boundaries.
    bool continuous = true;
    for (int i = 0; i + 1 < traj.intervals(); ++i) {
      for (int c = 0; c < 3; ++c) {
        if (traj.node_value(i, q)[c].str_exact() !=
            traj.node_value(i + 1, 0)[c].str_exact()) {
          continuous = false;
        }
      }
    }
    DETAIL() << "trajectory continuity bit-exact at nodes: "
             << (continuous ? "ok" : "VIOLATION");
    ok = ok && continuous;

    // Dual linearity in z_T.
    DualConfig dcfg = DualConfig::defaults(traj, ctx, 3);
    Trajectory d1 = solve_dual(traj, sys, dcfg);
    DualConfig dcfg2 = dcfg;
    dcfg2.z_T[0] *= 2;
    Trajectory d2 = solve_dual(traj, sys, dcfg2);
    BigScalar lin_err(ctx);
    for (const char* ts : {"0", "0.35", "0.8", "1"}) {
      Vector v1 = d1.evaluate(ctx.parse(ts));
      Vector v2 = d2.evaluate(ctx.parse(ts));
      for (int c = 0; c < 3; ++c) {
        BigScalar e = abs(v2[c] - v1[c] * 2) / (abs(v1[c]) + 1);
        if (e > lin_err) lin_err.set(e);
      }
    }
    bool lin_ok = lin_err <= ctx.eps() * 10000;
    DETAIL() << "dual linearity in z_T: max deviation " << lin_err.str(4)
             << " " << (lin_ok ? "ok" : "VIOLATION");
    ok = ok && lin_ok;

    // Serialization round-trip losslessness.
    const std::string path = art("prop_traj.txt");
    traj.save(path);
    Trajectory loaded = Trajectory::load(path, ctx);
    const std::string path2 = art("prop_traj2.txt");
    loaded.save(path2);
    std::ifstream f1(path), f2(path2);
    std::string s1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    bool rt_ok = !s1.empty() && s1 == s2;
    DETAIL() << "serialization round-trip lossless: "
             << (rt_ok ? "ok" : "VIOLATION");
    ok = ok && rt_ok;
  }

  {  // Determinism of replayed runs.
    h::SweepRequest req;
    req.digits = 10;
    req.q = 2;
    req.T = "2";
    req.k_list = {"0.1", "0.05", "0.025", "0.0125"};
    req.reference.q = 5;
    req.reference.digits = 24;
    req.reference.dt = "0.01";
    req.cache_dir = art("cache");
    req.out = art("replay_src.csv");
    h::run_sweep(req);
    h::run_replay(art("replay_src.csv"), art("replay_dst.csv"));
    std::ifstream f1(art("replay_src.csv")), f2(art("replay_dst.csv"));
    std::string s1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    bool replay_ok = !s1.empty() && s1 == s2;
    DETAIL() << "replay determinism (bit-identical files): "
             << (replay_ok ? "ok" : "VIOLATION");
    ok = ok && replay_ok;
  }

  {  // Quadrature exactness on monomials.
    PrecisionContext ctx = make_context(64);
    bool quad_ok = true;
    for (int n : {1, 3, 6, 10}) {
      QuadratureRule r = gauss_legendre(n, ctx);
      for (int k = 0; k <= r.exactness_degree; ++k) {
        BigScalar acc(ctx);
        for (int i = 0; i < r.size(); ++i) {
          acc.add_mul(r.weights[static_cast<std::size_t>(i)],
                      pow(r.points[static_cast<std::size_t>(i)],
                          static_cast<long>(k)));
        }
        BigScalar exact = BigScalar(ctx, 1) / (k + 1);
        if (abs(acc - exact) > ctx.eps() * 256) quad_ok = false;
      }
    }
    DETAIL() << "quadrature exactness on monomials: "
             << (quad_ok ? "ok" : "VIOLATION");
    ok = ok && quad_ok;
  }

  {  // Inverse crime: calibrate on model-generated sweeps, 4-digit recovery.
    PrecisionContext ctx = make_context(64);
    const BigScalar gamma = ctx.parse("0.388");
    const BigScalar eps = pow10(-16, ctx);
    const BigScalar T(ctx, 40);
    ErrorModel truth(ctx);
    truth.set_gamma(gamma);
    truth.set_c1(ctx.parse("0.5"));
    truth.set_q_constants(2, ctx.parse("0.000356"), ctx.parse("0.0031"),
                          BigScalar(ctx, 4));
    truth.set_q_constants(3, ctx.parse("0.000135"), ctx.parse("0.0036"),
                          BigScalar(ctx, 6));
    std::vector<SweepPoint> pts;
    for (int q : {2, 3}) {
      BigScalar k_star = optimal_timestep(q, eps);
      for (const char* f : {"0.001", "0.003", "0.01", "0.03", "30", "100",
                            "300", "1000"}) {
        SweepPoint p;
        p.q = q;
        p.dt = k_star * ctx.parse(f);
        p.eps_mach = eps;
        p.T = T;
        p.error = eval_model(truth, BigScalar(ctx, 0), q, p.dt, eps, T);
        pts.push_back(std::move(p));
      }
    }
    ErrorModel fitted = calibrate(pts, gamma);
    BigScalar worst(ctx);
    for (int q : {2, 3}) {
      BigScalar e2 = abs(fitted.c2(q) / truth.c2(q) - BigScalar(ctx, 1));
      BigScalar e3 = abs(fitted.c3(q) / truth.c3(q) - BigScalar(ctx, 1));
      if (e2 > worst) worst.set(e2);
      if (e3 > worst) worst.set(e3);
    }
    bool cal_ok = worst < ctx.parse("1e-4");
    DETAIL() << "inverse-crime constant recovery: worst relative error "
             << worst.str(4) << " " << (cal_ok ? "ok" : "VIOLATION");
    ok = ok && cal_ok;
  }
  return ok;
}

bool criterion_8() {
  // Full-scale stability magnitudes (~1e388 at T = 1000) are out of
  // desk-scale reach by design. Substitutes: the measured growth rate extrapolated to T = 1000
  // lands at log10 S_C = 388 +- 100, and the unattended long-run mode
  // (checkpoint + exact resume) works.
  h::StabilityRequest req;
  req.digits = 64;
  req.q = 6;
  req.dt = "0.005";
  req.T_list = {"10", "20", "30", "40", "50"};
  req.extrapolate_T = "1000";
  req.out = art("stability_extrapolate.csv");
  h::StabilityOutcome out = h::run_stability(req);
  if (!out.rate_fit || out.extrapolated_log10_SC.empty()) {
    DETAIL() << "no extrapolation available";
    return false;
  }
  PrecisionContext ctx = make_context(64);
  BigScalar ex = parse_decimal(out.extrapolated_log10_SC, ctx);
  bool ex_ok = ex >= BigScalar(ctx, 288) && ex <= BigScalar(ctx, 488);
  DETAIL() << "extrapolated log10 S_C(1000) = " << ex.str(6)
           << " in [288, 488] " << (ex_ok ? "ok" : "VIOLATION");

  // Unattended mode machinery: checkpoint cadence plus exact resume.
  h::SolveRequest sreq;
  sreq.digits = 16;
  sreq.q = 3;
  sreq.dt = "0.01";
  sreq.T = "2";
  sreq.checkpoint_every = 50;
  sreq.checkpoint_path = art("longrun.ck");
  sreq.out = art("longrun_full.traj");
  h::SolveOutcome full = h::run_solve(sreq);
  h::SolveRequest rreq = sreq;
  rreq.resume_from = art("longrun.ck");
  rreq.out = art("longrun_tail.traj");
  rreq.checkpoint_every = 0;
  h::SolveOutcome tail = h::run_solve(rreq);
  bool resume_ok = full.final_state == tail.final_state;
  DETAIL() << "unattended long-run mode (checkpoint + exact resume): "
           << (resume_ok ? "ok" : "VIOLATION");
  return ex_ok && resume_ok;
}

struct Criterion {
  int number;
  const char* summary;
  bool (*run)();
};

const Criterion kCriteria[] = {
    {1, "order verification: nodal error slope 2q over the k grid", criterion_1},
    {2, "round-off scaling: V-shaped error with the expected branch slopes",
     criterion_2},
    {3, "stability growth rate 0.39 +- 0.10 decades/time-unit", criterion_3},
    {4, "16-digit pair divergence in [20, 55] and 32-digit ordering",
     criterion_4},
    {5, "computability slope 2.5 +- 0.5 time-units per digit", criterion_5},
    {6, "formula identities (optimal step, horizons, a priori bound)",
     criterion_6},
    {7, "property suite (orthogonality, continuity, linearity, round-trip, "
        "determinism, exactness, inverse crime)",
     criterion_7},
    {8, "full-scale substitute: rate extrapolation + unattended mode",
     criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all_ok = true;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.number) ==
            selected.end()) {
      continue;
    }
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      std::cout << "    exception: " << e.what() << "\n";
      ok = false;
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.number << ": "
              << c.summary << "\n"
              << std::flush;
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
