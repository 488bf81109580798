#include "cgode/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cgode/util.hpp"

namespace cgode::harness {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& parts, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string echo_get(const ConfigEcho& echo, const std::string& key,
                     const std::string& fallback = "") {
  for (const auto& [k, v] : echo) {
    if (k == key) return v;
  }
  if (fallback.empty()) {
    throw IoError(IoError::Code::kMalformed,
                  "recorded config is missing key '" + key + "'");
  }
  return fallback;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

Vector parse_state(const std::vector<std::string>& decimals,
                   const PrecisionContext& ctx) {
  Vector v(ctx, static_cast<int>(decimals.size()));
  for (int c = 0; c < v.size(); ++c) {
    v[c] = parse_decimal(decimals[static_cast<std::size_t>(c)], ctx);
  }
  return v;
}

// Re-rounds a scalar into a (higher-precision) context through its exact
// decimal form.
BigScalar promote(const BigScalar& x, const PrecisionContext& to) {
  return parse_decimal(x.str_exact(), to);
}

BigScalar sup_gap(const Vector& a, const Vector& b) {
  BigScalar gap(a.ctx(), 0);
  BigScalar comp(a.ctx());
  for (int c = 0; c < a.size(); ++c) {
    comp.set(a[c]);
    comp -= b[c];
    comp.abs_assign();
    if (comp > gap) gap.set(comp);
  }
  return gap;
}

SolverConfig build_solver_config(const PrecisionContext& ctx, int q,
                                 const std::string& dt,
                                 const std::string& residual_tol) {
  SolverConfig cfg = SolverConfig::make(ctx, q, parse_decimal(dt, ctx));
  if (!residual_tol.empty()) {
    cfg.residual_tol = parse_decimal(residual_tol, ctx);
  }
  cfg.validate();
  return cfg;
}

}  // namespace

std::string echo_to_string(const ConfigEcho& echo) {
  std::string out;
  for (std::size_t i = 0; i < echo.size(); ++i) {
    if (i) out += ' ';
    out += echo[i].first + "=" + echo[i].second;
  }
  return out;
}

ConfigEcho echo_from_string(const std::string& s) {
  ConfigEcho echo;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw IoError(IoError::Code::kMalformed, "bad config token: " + tok);
    }
    echo.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return echo;
}

void write_csv(const std::string& path, const std::string& command,
               const ConfigEcho& echo, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows,
               const std::vector<std::string>& trailing_comments) {
  std::ofstream os(path);
  if (!os) throw IoError(IoError::Code::kOpenFailed, "cannot write " + path);
  os << "# cgode-csv v1\n";
  os << "# cmd: " << command << "\n";
  os << "# config: " << echo_to_string(echo) << "\n";
  os << "# col: " << join(columns) << "\n";
  for (const auto& row : rows) os << join(row) << "\n";
  for (const auto& c : trailing_comments) os << "# " << c << "\n";
  if (!os) throw IoError(IoError::Code::kOpenFailed, "write failed: " + path);
}

CsvFile read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError(IoError::Code::kOpenFailed, "cannot open " + path);
  CsvFile file;
  std::string line;
  if (!std::getline(is, line) || line != "# cgode-csv v1") {
    throw IoError(IoError::Code::kVersionMismatch,
                  path + " is not a cgode CSV (v1)");
  }
  while (std::getline(is, line)) {
    if (line.rfind("# cmd: ", 0) == 0) {
      file.command = line.substr(7);
    } else if (line.rfind("# config: ", 0) == 0) {
      file.echo = echo_from_string(line.substr(10));
    } else if (line.rfind("# col: ", 0) == 0) {
      file.columns = split(line.substr(7));
    } else if (!line.empty() && line[0] == '#') {
      continue;  // trailing fit comments
    } else if (!line.empty()) {
      file.rows.push_back(split(line));
    }
  }
  if (file.command.empty() || file.columns.empty()) {
    throw IoError(IoError::Code::kTruncated, path + " lacks cmd/col headers");
  }
  return file;
}

// ---------------------------------------------------------------------------
// solve

namespace {

ConfigEcho solve_echo(const SolveRequest& req) {
  ConfigEcho echo{
      {"problem", req.problem},
      {"digits", std::to_string(req.digits)},
      {"q", std::to_string(req.q)},
      {"dt", req.dt},
      {"T", req.T},
      {"u0", join(req.u0)},
      {"rtol", req.residual_tol.empty() ? std::string("default")
                                        : req.residual_tol},
  };
  if (!req.param_overrides.empty()) {
    echo.emplace_back("params", join(req.param_overrides));
  }
  if (req.guess_previous) echo.emplace_back("guess", "previous");
  return echo;
}

}  // namespace

void write_checkpoint(const std::string& path, const SolveRequest& req,
                      long completed_steps, const BigScalar& t,
                      const Vector& u) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw IoError(IoError::Code::kOpenFailed, "cannot write " + tmp);
    os << "cgode-checkpoint\nversion 1\n";
    os << "config " << echo_to_string(solve_echo(req)) << "\n";
    os << "step " << completed_steps << "\n";
    os << "t " << t.str_exact() << "\n";
    os << "u";
    for (int c = 0; c < u.size(); ++c) os << " " << u[c].str_exact();
    os << "\nend\n";
  }
  fs::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError(IoError::Code::kOpenFailed, "cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line != "cgode-checkpoint") {
    throw IoError(IoError::Code::kMalformed, path + " is not a checkpoint");
  }
  if (!std::getline(is, line) || line != "version 1") {
    throw IoError(IoError::Code::kVersionMismatch,
                  "unsupported checkpoint version");
  }
  Checkpoint ck;
  bool saw_end = false;
  while (std::getline(is, line)) {
    if (line == "end") {
      saw_end = true;
      break;
    }
    if (line.rfind("config ", 0) == 0) {
      ck.config = echo_from_string(line.substr(7));
    } else if (line.rfind("step ", 0) == 0) {
      ck.step = std::stol(line.substr(5));
    } else if (line.rfind("t ", 0) == 0) {
      ck.t_decimal = line.substr(2);
    } else if (line.rfind("u ", 0) == 0) {
      ck.u_decimal = split(line.substr(2), ' ');
    } else {
      throw IoError(IoError::Code::kMalformed, "bad checkpoint line: " + line);
    }
  }
  if (!saw_end || ck.u_decimal.empty()) {
    throw IoError(IoError::Code::kTruncated, "checkpoint truncated");
  }
  return ck;
}

SolveOutcome run_solve(const SolveRequest& req) {
  const PrecisionContext ctx = make_context(req.digits);
  auto system = make_system(req.problem, ctx, req.param_overrides);
  SolverConfig cfg = build_solver_config(ctx, req.q, req.dt, req.residual_tol);
  if (req.guess_previous) cfg.guess = GuessMode::kPreviousPoly;
  const BigScalar T = parse_decimal(req.T, ctx);
  Vector u0 = parse_state(req.u0, ctx);

  const long M = step_count(T, cfg.dt);
  long first_step = 0;
  BigScalar t_start(ctx, 0);
  Vector u_start = u0;

  if (!req.resume_from.empty()) {
    Checkpoint ck = read_checkpoint(req.resume_from);
    const ConfigEcho current = solve_echo(req);
    for (const auto& [k, v] : current) {
      if (echo_get(ck.config, k) != v) {
        throw ConfigError("checkpoint config mismatch on '" + k +
                          "': checkpoint has " + echo_get(ck.config, k) +
                          ", request has " + v);
      }
    }
    first_step = ck.step;
    t_start = parse_decimal(ck.t_decimal, ctx);
    u_start = parse_state(ck.u_decimal, ctx);
  }

  SolveOutcome out;
  out.total_steps = M;

  ProblemInfo info;
  info.name = system->name();
  info.params = system->params_string();
  for (const auto& s : req.u0) info.u0_decimal.push_back(s);

  std::optional<Trajectory> traj;
  if (req.store_trajectory) {
    traj.emplace(ctx, cfg.q, t_start, u_start, info);
  }

  long steps_done = 0;
  StepSink sink = [&](long n, const BigScalar&, const BigScalar& tr,
                      const std::vector<Vector>& nodes) {
    if (traj) traj->append_interval(tr, nodes);
    ++steps_done;
    if (req.checkpoint_every > 0 && !req.checkpoint_path.empty() &&
        (n + 1) % req.checkpoint_every == 0 && n + 1 < M) {
      write_checkpoint(req.checkpoint_path, req, n + 1, tr, nodes.back());
    }
    if (req.progress && (n + 1) % 10000 == 0) {
      std::cerr << "step " << (n + 1) << "/" << M << " t=" << tr.str(6)
                << "\n";
    }
  };

  Vector u_final =
      integrate_resume(*system, u_start, first_step, T, cfg, sink, &out.stats);

  for (int c = 0; c < u_final.size(); ++c) {
    out.final_state.push_back(u_final[c].str());
  }
  if (traj && !req.out.empty()) {
    traj->save(req.out);
    out.trajectory_path = req.out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// pair-converge

std::string default_pair_tolerance(int digits) {
  // max(1e-16, 10^(2 - digits)): desk-scale contexts get the looser
  // digit-tied tolerance, deep-precision contexts keep the 1e-16 floor.
  return digits >= 18 ? "1e-16" : "1e-" + std::to_string(digits - 2);
}

namespace {

ConfigEcho pair_echo(const PairRequest& req, const std::string& tol) {
  return {
      {"problem", req.problem},
      {"digits", std::to_string(req.digits)},
      {"q_low", std::to_string(req.q_low)},
      {"q_high", std::to_string(req.q_high)},
      {"dt", req.dt},
      {"T_max", req.T_max},
      {"u0", join(req.u0)},
      {"tol", tol},
      {"sample_dt", req.sample_dt},
  };
}

}  // namespace

PairOutcome run_pair_converge(const PairRequest& req) {
  if (req.q_low > req.q_high) {
    throw ConfigError("pair-converge requires q_low <= q_high");
  }
  const PrecisionContext ctx = make_context(req.digits);
  auto system = make_system(req.problem, ctx);
  const int dim = system->dimension();
  const std::string tol_str =
      req.tol.empty() ? default_pair_tolerance(req.digits) : req.tol;
  const BigScalar tol = parse_decimal(tol_str, ctx);
  const BigScalar sample_dt = parse_decimal(req.sample_dt, ctx);
  const BigScalar T = parse_decimal(req.T_max, ctx);
  Vector u0 = parse_state(req.u0, ctx);

  PairOutcome out;
  out.degenerate_equal_orders = (req.q_low == req.q_high);
  if (out.degenerate_equal_orders) {
    std::cerr << "warning: identical orders; the runs coincide and the "
                 "divergence time is trivially 'never'\n";
  }

  SolverConfig cfg_a = build_solver_config(ctx, req.q_low, req.dt, "");
  SolverConfig cfg_b = build_solver_config(ctx, req.q_high, req.dt, "");
  Stepper stepper_a(*system, cfg_a);
  Stepper stepper_b(*system, cfg_b);
  RollingWindow win_a(ctx, req.q_low, dim);
  RollingWindow win_b(ctx, req.q_high, dim);

  const long M = step_count(T, cfg_a.dt);
  Vector ua = u0, ub = u0;
  Vector eva(ctx, dim), evb(ctx, dim);

  BigScalar prev_sample(ctx, 0);
  BigScalar next_sample(ctx, 0);  // first sample at t = 0
  long sample_index = 0;
  bool crossed = false;
  BigScalar cross_lo(ctx), cross_hi(ctx);
  BigScalar max_gap_before(ctx, 0);

  auto gap_at = [&](const BigScalar& t) {
    win_a.evaluate(t, eva);
    win_b.evaluate(t, evb);
    return sup_gap(eva, evb);
  };

  BigScalar t_left(ctx), t_right(ctx);
  for (long n = 0; n < M && !crossed; ++n) {
    t_left = (n == 0) ? BigScalar(ctx, 0) : cfg_a.dt * n;
    t_right = (n == M - 1) ? T : cfg_a.dt * (n + 1);
    try {
      StepResult ra = stepper_a.step(ua, t_left, t_right - t_left);
      StepResult rb = stepper_b.step(ub, t_left, t_right - t_left);
      ua.set(ra.nodes.back());
      ub.set(rb.nodes.back());
      win_a.push_interval(t_left, t_right, std::move(ra.nodes));
      win_b.push_interval(t_left, t_right, std::move(rb.nodes));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("pair-converge step " + std::to_string(n) +
                                 " failed: " + e.what(),
                             e.trace());
    }

    while (!crossed) {
      BigScalar t_s = next_sample;
      bool is_final = false;
      if (t_s >= T) {
        t_s = T;
        is_final = true;
      }
      if (t_s > t_right) break;  // not yet integrated this far
      BigScalar gap = gap_at(t_s);
      if (gap > tol) {
        crossed = true;
        cross_lo = prev_sample;
        cross_hi = t_s;
        break;
      }
      out.samples.emplace_back(t_s.str(12), gap.str(6));
      if (gap > max_gap_before) max_gap_before.set(gap);
      prev_sample = t_s;
      if (is_final) {
        n = M;  // done
        break;
      }
      ++sample_index;
      next_sample = sample_dt * sample_index;
    }
    win_a.drop_before(prev_sample);
    win_b.drop_before(prev_sample);
  }

  DivergenceReport report{std::nullopt, max_gap_before, tol, sample_dt};
  if (crossed) {
    if (cross_hi == cross_lo) {
      report.t_div = cross_hi;
    } else {
      // Bisect [lo, hi] keeping gap(hi) > tol.
      BigScalar mid(ctx);
      for (int it = 0; it < 20; ++it) {
        mid = cross_lo + cross_hi;
        mid /= 2;
        if (gap_at(mid) > tol) {
          cross_hi.set(mid);
        } else {
          cross_lo.set(mid);
        }
      }
      report.t_div = cross_hi;
    }
  }
  out.report = std::move(report);

  if (!req.out.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [t, g] : out.samples) rows.push_back({t, g});
    std::vector<std::string> trailing;
    trailing.push_back(
        "t_div: " +
        (out.report.t_div ? out.report.t_div->str(12) : std::string("never")));
    trailing.push_back("max_gap_before: " + out.report.max_gap_before.str(6));
    write_csv(req.out, "pair-converge", pair_echo(req, tol_str), {"t", "gap"},
              rows, trailing);
  }
  return out;
}

// ---------------------------------------------------------------------------
// sweep-k

namespace {

ConfigEcho sweep_echo(const SweepRequest& req, int ref_q, int ref_digits,
                      const std::string& ref_dt) {
  return {
      {"problem", req.problem},
      {"digits", std::to_string(req.digits)},
      {"q", std::to_string(req.q)},
      {"T", req.T},
      {"k_list", join(req.k_list)},
      {"u0", join(req.u0)},
      {"ref_q", std::to_string(ref_q)},
      {"ref_digits", std::to_string(ref_digits)},
      {"ref_dt", ref_dt},
      {"saturation", req.saturation},
      {"workers", std::to_string(req.workers)},
  };
}

// Computes (or loads from cache) the dominating reference final state.
Vector reference_final_state(const SweepRequest& req, int ref_q, int ref_digits,
                             const std::string& ref_dt,
                             const PrecisionContext& ref_ctx,
                             ConfigEcho* echo_out) {
  const std::string key = "problem=" + req.problem + " q=" +
                          std::to_string(ref_q) + " digits=" +
                          std::to_string(ref_digits) + " dt=" + ref_dt +
                          " T=" + req.T + " u0=" + join(req.u0);
  if (echo_out) {
    *echo_out = {{"ref_key", hex64(fnv1a64(key))}};
  }
  fs::path cache_file;
  if (!req.cache_dir.empty()) {
    fs::create_directories(req.cache_dir);
    cache_file = fs::path(req.cache_dir) / ("ref-" + hex64(fnv1a64(key)) + ".txt");
    if (fs::exists(cache_file)) {
      std::ifstream is(cache_file);
      std::string line;
      std::getline(is, line);
      if (line == "cgode-reference") {
        std::getline(is, line);  // key line
        if (line == "key " + key) {
          Vector v(ref_ctx, 0);
          std::vector<std::string> comps;
          while (std::getline(is, line) && line != "end") {
            comps.push_back(line);
          }
          if (line == "end" && !comps.empty()) {
            return parse_state(comps, ref_ctx);
          }
        }
      }
      // Stale or foreign file: recompute below and overwrite.
    }
  }

  auto ref_system = make_system(req.problem, ref_ctx);
  SolverConfig cfg = build_solver_config(ref_ctx, ref_q, ref_dt, "");
  Vector u0 = parse_state(req.u0, ref_ctx);
  Vector final_state = integrate_final(
      *ref_system, u0, parse_decimal(req.T, ref_ctx), cfg);

  if (!cache_file.empty()) {
    std::ofstream os(cache_file);
    os << "cgode-reference\nkey " << key << "\n";
    for (int c = 0; c < final_state.size(); ++c) {
      os << final_state[c].str_exact() << "\n";
    }
    os << "end\n";
  }
  return final_state;
}

}  // namespace

SweepOutcome run_sweep(const SweepRequest& req) {
  if (req.k_list.size() < 2) {
    throw ConfigError("sweep-k requires at least two step sizes");
  }
  const PrecisionContext ctx = make_context(req.digits);
  auto system = make_system(req.problem, ctx);

  // Sort step sizes ascending.
  std::vector<BigScalar> ks;
  for (const auto& s : req.k_list) ks.push_back(parse_decimal(s, ctx));
  std::vector<std::size_t> order(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ks[a] < ks[b]; });

  // Resolve and validate the dominating reference.
  const int ref_q = req.reference.q > 0 ? req.reference.q : req.q + 3;
  const int ref_digits =
      req.reference.digits > 0 ? req.reference.digits : 2 * req.digits;
  const PrecisionContext ref_ctx = make_context(ref_digits);
  std::string ref_dt = req.reference.dt;
  if (ref_dt.empty()) {
    BigScalar half_min = promote(ks[order.front()], ref_ctx);
    half_min /= 2;
    ref_dt = half_min.str_exact();
  }
  if (ref_q <= req.q || ref_digits <= req.digits) {
    throw ConfigError(
        "sweep-k reference does not dominate the sweep: need ref_q > q and "
        "ref_digits > digits, got ref_q=" + std::to_string(ref_q) + " vs q=" +
        std::to_string(req.q) + ", ref_digits=" + std::to_string(ref_digits) +
        " vs digits=" + std::to_string(req.digits));
  }

  SweepOutcome out;
  Vector ref_final =
      reference_final_state(req, ref_q, ref_digits, ref_dt, ref_ctx,
                            &out.reference_echo);

  const BigScalar T = parse_decimal(req.T, ctx);
  Vector u0 = parse_state(req.u0, ctx);

  struct Row {
    std::string k;
    BigScalar k_val;
    BigScalar error;       // in the reference context
    std::vector<std::string> final_state;
    std::string failure;
  };
  std::vector<Row> rows(ks.size());

  parallel_for(static_cast<int>(order.size()), req.workers, [&](int slot) {
    const std::size_t src = order[static_cast<std::size_t>(slot)];
    Row& row = rows[static_cast<std::size_t>(slot)];
    row.k = ks[src].str_exact();
    row.k_val = ks[src];
    try {
      SolverConfig cfg = SolverConfig::make(ctx, req.q, ks[src]);
      Vector final_state = integrate_final(*system, u0, T, cfg);
      Vector promoted(ref_ctx, final_state.size());
      for (int c = 0; c < final_state.size(); ++c) {
        promoted[c] = promote(final_state[c], ref_ctx);
        row.final_state.push_back(final_state[c].str());
      }
      row.error = sup_gap(promoted, ref_final);
    } catch (const std::exception& e) {
      row.failure = e.what();
    }
  });

  const BigScalar saturation = parse_decimal(req.saturation, ref_ctx);

  // Regime split at the error minimum; saturated large-k points leave the
  // discretization fit, failed points leave everything.
  std::size_t argmin = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].failure.empty()) continue;
    if (argmin == rows.size() || rows[i].error < rows[argmin].error) argmin = i;
  }
  std::vector<std::pair<BigScalar, BigScalar>> left_pts, right_pts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].failure.empty() || i == argmin) continue;
    BigScalar k_ref = promote(rows[i].k_val, ref_ctx);
    if (i < argmin) {
      left_pts.emplace_back(std::move(k_ref), rows[i].error);
    } else if (rows[i].error <= saturation) {
      right_pts.emplace_back(std::move(k_ref), rows[i].error);
    }
  }
  auto fit_branch = [&](std::vector<std::pair<BigScalar, BigScalar>>& pts,
                        std::optional<LineFit>& fit, std::string& note,
                        const char* which) {
    if (pts.size() < 2) {
      note = std::string(which) +
             " branch has fewer than 2 usable points; no fit";
      return;
    }
    fit = fit_loglog_slope(pts, pts.front().first, pts.back().first);
  };
  fit_branch(left_pts, out.left_fit, out.left_fit_note, "round-off");
  fit_branch(right_pts, out.right_fit, out.right_fit_note, "discretization");

  for (auto& row : rows) {
    out.rows.emplace_back(row.k,
                          row.failure.empty() ? row.error.str(12)
                                              : "failed:" + row.failure);
  }
  if (!rows.empty() && rows.back().failure.empty()) {
    out.largest_k_final = rows.back().final_state;
  }

  if (!req.out.empty()) {
    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& [k, e] : out.rows) csv_rows.push_back({k, e});
    std::vector<std::string> trailing;
    if (out.left_fit) {
      trailing.push_back("fit-left: slope=" + out.left_fit->slope.str(8) +
                         " intercept=" + out.left_fit->intercept.str(8) +
                         " n=" + std::to_string(out.left_fit->n_points));
    } else {
      trailing.push_back("fit-left: " + out.left_fit_note);
    }
    if (out.right_fit) {
      trailing.push_back("fit-right: slope=" + out.right_fit->slope.str(8) +
                         " intercept=" + out.right_fit->intercept.str(8) +
                         " n=" + std::to_string(out.right_fit->n_points));
    } else {
      trailing.push_back("fit-right: " + out.right_fit_note);
    }
    write_csv(req.out, "sweep-k", sweep_echo(req, ref_q, ref_digits, ref_dt),
              {"k", "error"}, csv_rows, trailing);
  }
  return out;
}

// ---------------------------------------------------------------------------
// stability

namespace {

ConfigEcho stability_echo(const StabilityRequest& req, int dual_q,
                          const std::string& dual_dt) {
  return {
      {"problem", req.problem},
      {"digits", std::to_string(req.digits)},
      {"q", std::to_string(req.q)},
      {"dt", req.dt},
      {"u0", join(req.u0)},
      {"T_list", join(req.T_list)},
      {"dual_q", std::to_string(dual_q)},
      {"dual_dt", dual_dt},
      {"z_T", join(req.z_T)},
      {"p", std::to_string(req.p)},
      {"workers", std::to_string(req.workers)},
  };
}

// "m.mmme±x" -> {"m.mmm", "±x"}
std::pair<std::string, std::string> mantissa_exponent(const std::string& sci) {
  const auto e = sci.find('e');
  if (e == std::string::npos) return {sci, "0"};
  return {sci.substr(0, e), sci.substr(e + 1)};
}

}  // namespace

StabilityOutcome run_stability(const StabilityRequest& req) {
  if (req.T_list.empty()) throw ConfigError("stability requires a T list");
  const PrecisionContext ctx = make_context(req.digits);
  auto system = make_system(req.problem, ctx);

  std::vector<BigScalar> T_list;
  for (const auto& s : req.T_list) T_list.push_back(parse_decimal(s, ctx));
  BigScalar T_max = T_list[0];
  for (const auto& t : T_list) {
    if (t > T_max) T_max.set(t);
  }

  std::optional<Trajectory> primal;
  if (!req.primal_file.empty()) {
    primal.emplace(Trajectory::load(req.primal_file, ctx));
    if (primal->t_end() < T_max) {
      throw ConfigError("primal trajectory span " + primal->t_end().str(8) +
                        " does not cover the largest horizon " +
                        T_max.str(8));
    }
  } else {
    SolverConfig cfg = build_solver_config(ctx, req.q, req.dt, "");
    Vector u0 = parse_state(req.u0, ctx);
    primal.emplace(integrate(*system, u0, T_max, cfg));
  }

  DualConfig dual_cfg =
      DualConfig::defaults(*primal, ctx, system->dimension());
  if (req.dual_q > 0) dual_cfg.dual_q = req.dual_q;
  if (!req.dual_dt.empty()) dual_cfg.dual_dt = parse_decimal(req.dual_dt, ctx);
  dual_cfg.z_T = parse_state(req.z_T, ctx);
  dual_cfg.validate();

  auto points =
      growth_series(*primal, *system, T_list, dual_cfg, req.p, req.workers);

  StabilityOutcome out;
  std::vector<std::pair<BigScalar, BigScalar>> fit_pts;
  for (const auto& pt : points) {
    StabilityRow row;
    row.T = pt.T.str(12);
    if (pt.factors) {
      row.S_D = pt.factors->S_D.str(16);
      row.S_G = pt.factors->S_G.str(16);
      row.S_C = pt.factors->S_C.str(16);
      row.S_C2 = pt.factors->S_C2.str(16);
      fit_pts.emplace_back(pt.T, log10(pt.factors->S_C));
    } else {
      row.error = pt.error;
    }
    out.rows.push_back(std::move(row));
  }

  if (req.fit && fit_pts.size() >= 2) {
    out.rate_fit = least_squares_line(fit_pts);
    if (!req.extrapolate_T.empty()) {
      BigScalar Tx = parse_decimal(req.extrapolate_T, ctx);
      BigScalar v = out.rate_fit->intercept;
      v.add_mul(out.rate_fit->slope, Tx);
      out.extrapolated_log10_SC = v.str(8);
    }
  }

  if (!req.out.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : out.rows) {
      if (!r.error.empty()) {
        rows.push_back({r.T, "failed", "-", "failed", "-", "failed", "-",
                        "failed", "-"});
        continue;
      }
      auto [dm, de] = mantissa_exponent(r.S_D);
      auto [gm, ge] = mantissa_exponent(r.S_G);
      auto [cm, ce] = mantissa_exponent(r.S_C);
      auto [c2m, c2e] = mantissa_exponent(r.S_C2);
      rows.push_back({r.T, dm, de, gm, ge, cm, ce, c2m, c2e});
    }
    std::vector<std::string> trailing;
    if (out.rate_fit) {
      trailing.push_back("fit: rate=" + out.rate_fit->slope.str(8) +
                         " intercept=" + out.rate_fit->intercept.str(8) +
                         " n=" + std::to_string(out.rate_fit->n_points));
    }
    if (!out.extrapolated_log10_SC.empty()) {
      trailing.push_back("extrapolate: T=" + req.extrapolate_T +
                         " log10_SC=" + out.extrapolated_log10_SC);
    }
    write_csv(req.out, "stability",
              stability_echo(req, dual_cfg.dual_q, dual_cfg.dual_dt.str_exact()),
              {"T", "SD_mant", "SD_exp", "SG_mant", "SG_exp", "SC_mant",
               "SC_exp", "SC2_mant", "SC2_exp"},
              rows, trailing);
  }
  return out;
}

// ---------------------------------------------------------------------------
// calibrate / predict

CalibrateOutcome run_calibrate(const CalibrateRequest& req) {
  if (req.sweep_files.empty()) {
    throw ConfigError("calibrate requires at least one sweep CSV");
  }
  const PrecisionContext ctx = make_context(req.digits);
  std::vector<SweepPoint> points;
  for (const auto& path : req.sweep_files) {
    CsvFile csv = read_csv(path);
    if (csv.command != "sweep-k") {
      throw ConfigError(path + " is not a sweep-k table");
    }
    const int q = std::stoi(echo_get(csv.echo, "q"));
    const int digits = std::stoi(echo_get(csv.echo, "digits"));
    const std::string T = echo_get(csv.echo, "T");
    for (const auto& row : csv.rows) {
      if (row.size() != 2 || row[1].rfind("failed", 0) == 0) continue;
      SweepPoint p;
      p.q = q;
      p.dt = parse_decimal(row[0], ctx);
      p.eps_mach = pow10(-digits, ctx);
      p.T = parse_decimal(T, ctx);
      p.error = parse_decimal(row[1], ctx);
      points.push_back(std::move(p));
    }
  }
  const BigScalar gamma = parse_decimal(req.gamma, ctx);
  std::optional<BigScalar> c1;
  if (!req.c1.empty()) c1 = parse_decimal(req.c1, ctx);
  CalibrateOutcome out{calibrate(points, gamma, c1), req.out};
  if (!req.out.empty()) out.model.save(req.out);
  return out;
}

PredictOutcome run_predict(const PredictRequest& req) {
  const PrecisionContext ctx = make_context(req.digits);
  ErrorModel model = req.model_file.empty()
                         ? ErrorModel::reported_constants(ctx)
                         : ErrorModel::load(req.model_file, ctx);
  const BigScalar eps = parse_decimal(req.eps, ctx);

  PredictOutcome out;
  BigScalar k_opt = optimal_timestep(req.q, eps);
  out.optimal_dt = k_opt.str(8);
  BigScalar dt = req.dt.empty() ? k_opt : parse_decimal(req.dt, ctx);
  if (!req.T.empty()) {
    BigScalar E = eval_model(model, parse_decimal(req.data_err, ctx), req.q, dt,
                             eps, parse_decimal(req.T, ctx));
    out.predicted_error = E.str(8);
  }
  out.horizon = computability(eps).str(8);
  if (!req.target_eps.empty()) {
    BigScalar target = parse_decimal(req.target_eps, ctx);
    if (req.model_file.empty()) {
      out.horizon_target = computability(eps, &target).str(8);
    } else {
      // Recalibrated models substitute their own 2 C2[q] for the reported
      // 0.002 prefactor inside the log.
      BigScalar prefactor = model.c2(req.q) * 2;
      out.horizon_target = computability(eps, &target, &prefactor).str(8);
      out.horizon_target_prefactor = prefactor.str(8);
    }
  }

  if (!req.out.empty()) {
    ConfigEcho echo{
        {"model", req.model_file.empty() ? std::string("reported-constants")
                                          : req.model_file},
        {"digits", std::to_string(req.digits)},
        {"q", std::to_string(req.q)},
        {"eps", req.eps},
        {"dt", req.dt.empty() ? std::string("optimal") : req.dt},
        {"T", req.T.empty() ? std::string("-") : req.T},
        {"target_eps",
         req.target_eps.empty() ? std::string("-") : req.target_eps},
        {"data_err", req.data_err},
    };
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"optimal_dt", out.optimal_dt});
    if (!out.predicted_error.empty()) {
      rows.push_back({"predicted_error", out.predicted_error});
    }
    rows.push_back({"horizon", out.horizon});
    if (!out.horizon_target.empty()) {
      rows.push_back({"horizon_target", out.horizon_target});
    }
    write_csv(req.out, "predict", echo, {"quantity", "value"}, rows);
  }
  return out;
}

// ---------------------------------------------------------------------------
// quad-table / replay

void run_quad_table(const QuadTableRequest& req, std::ostream& os) {
  const PrecisionContext ctx = make_context(req.digits);
  QuadratureRule rule;
  if (req.family == "legendre") {
    rule = gauss_legendre(req.n, ctx);
  } else if (req.family == "lobatto") {
    rule = gauss_lobatto(req.n, ctx);
  } else {
    throw ConfigError("unknown quadrature family '" + req.family +
                      "' (legendre|lobatto)");
  }
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < rule.size(); ++i) {
    rows.push_back({std::to_string(i),
                    rule.points[static_cast<std::size_t>(i)].str(),
                    rule.weights[static_cast<std::size_t>(i)].str()});
  }
  ConfigEcho echo{{"family", req.family},
                  {"n", std::to_string(req.n)},
                  {"digits", std::to_string(req.digits)}};
  if (!req.out.empty()) {
    write_csv(req.out, "quad-table", echo, {"i", "point", "weight"}, rows);
  } else {
    os << "# cmd: quad-table\n# config: " << echo_to_string(echo) << "\n";
    os << "# col: i,point,weight\n";
    for (const auto& r : rows) os << join(r) << "\n";
  }
}

std::string run_replay(const std::string& recorded_file,
                       const std::string& out_path) {
  CsvFile csv = read_csv(recorded_file);
  const ConfigEcho& e = csv.echo;
  if (csv.command == "sweep-k") {
    SweepRequest req;
    req.problem = echo_get(e, "problem");
    req.digits = std::stoi(echo_get(e, "digits"));
    req.q = std::stoi(echo_get(e, "q"));
    req.T = echo_get(e, "T");
    req.k_list = split(echo_get(e, "k_list"));
    req.u0 = split(echo_get(e, "u0"));
    req.reference.q = std::stoi(echo_get(e, "ref_q"));
    req.reference.digits = std::stoi(echo_get(e, "ref_digits"));
    req.reference.dt = echo_get(e, "ref_dt");
    req.saturation = echo_get(e, "saturation");
    req.workers = std::stoi(echo_get(e, "workers"));
    req.out = out_path;
    run_sweep(req);
  } else if (csv.command == "pair-converge") {
    PairRequest req;
    req.problem = echo_get(e, "problem");
    req.digits = std::stoi(echo_get(e, "digits"));
    req.q_low = std::stoi(echo_get(e, "q_low"));
    req.q_high = std::stoi(echo_get(e, "q_high"));
    req.dt = echo_get(e, "dt");
    req.T_max = echo_get(e, "T_max");
    req.u0 = split(echo_get(e, "u0"));
    req.tol = echo_get(e, "tol");
    req.sample_dt = echo_get(e, "sample_dt");
    req.out = out_path;
    run_pair_converge(req);
  } else if (csv.command == "stability") {
    StabilityRequest req;
    req.problem = echo_get(e, "problem");
    req.digits = std::stoi(echo_get(e, "digits"));
    req.q = std::stoi(echo_get(e, "q"));
    req.dt = echo_get(e, "dt");
    req.u0 = split(echo_get(e, "u0"));
    req.T_list = split(echo_get(e, "T_list"));
    req.dual_q = std::stoi(echo_get(e, "dual_q"));
    req.dual_dt = echo_get(e, "dual_dt");
    req.z_T = split(echo_get(e, "z_T"));
    req.p = std::stoi(echo_get(e, "p"));
    req.workers = std::stoi(echo_get(e, "workers"));
    req.out = out_path;
    run_stability(req);
  } else if (csv.command == "quad-table") {
    QuadTableRequest req;
    req.family = echo_get(e, "family");
    req.n = std::stoi(echo_get(e, "n"));
    req.digits = std::stoi(echo_get(e, "digits"));
    req.out = out_path;
    run_quad_table(req, std::cout);
  } else if (csv.command == "predict") {
    PredictRequest req;
    const std::string model = echo_get(e, "model");
    req.model_file = (model == "reported-constants") ? "" : model;
    req.digits = std::stoi(echo_get(e, "digits"));
    req.q = std::stoi(echo_get(e, "q"));
    req.eps = echo_get(e, "eps");
    const std::string dt = echo_get(e, "dt");
    req.dt = (dt == "optimal") ? "" : dt;
    const std::string T = echo_get(e, "T");
    req.T = (T == "-") ? "" : T;
    const std::string target = echo_get(e, "target_eps");
    req.target_eps = (target == "-") ? "" : target;
    req.data_err = echo_get(e, "data_err");
    req.out = out_path;
    run_predict(req);
  } else {
    throw ConfigError("replay does not support command '" + csv.command + "'");
  }
  return csv.command;
}

}  // namespace cgode::harness
