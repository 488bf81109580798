#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include "cgode/harness.hpp"

using namespace cgode;
namespace h = cgode::harness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "cgode_harness_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("default pair tolerance is max(1e-16, 10^(2-digits))") {
  CHECK(h::default_pair_tolerance(8) == "1e-6");
  CHECK(h::default_pair_tolerance(16) == "1e-14");
  CHECK(h::default_pair_tolerance(18) == "1e-16");
  CHECK(h::default_pair_tolerance(64) == "1e-16");
}

TEST_CASE("solve honors parameter overrides and the previous-poly guess") {
  h::SolveRequest req;
  req.digits = 20;
  req.q = 2;
  req.dt = "0.05";
  req.T = "1";
  req.param_overrides = {"r=20"};
  h::SolveOutcome base = h::run_solve(req);

  // r = 20 changes the dynamics (r = 28 default would differ immediately).
  h::SolveRequest plain = req;
  plain.param_overrides.clear();
  CHECK(h::run_solve(plain).final_state != base.final_state);

  // The guess mode changes Newton costs, not the converged solution (to
  // working precision).
  h::SolveRequest prev = req;
  prev.guess_previous = true;
  h::SolveOutcome fast = h::run_solve(prev);
  PrecisionContext ctx = make_context(20);
  for (int c = 0; c < 3; ++c) {
    BigScalar a = parse_decimal(base.final_state[static_cast<std::size_t>(c)], ctx);
    BigScalar b = parse_decimal(fast.final_state[static_cast<std::size_t>(c)], ctx);
    CHECK(abs(a - b) <= ctx.parse("1e-15"));
  }
  CHECK(fast.stats.newton_iterations <= base.stats.newton_iterations);

  CHECK_THROWS_AS([&] {
    h::SolveRequest bad = req;
    bad.param_overrides = {"rho=1"};
    h::run_solve(bad);
  }(), ConfigError);
}

TEST_CASE("csv write/read round-trip") {
  TempDir dir;
  const std::string path = dir.file("table.csv");
  h::ConfigEcho echo{{"q", "2"}, {"digits", "16"}, {"T", "30"}};
  h::write_csv(path, "sweep-k", echo, {"k", "error"},
               {{"0.1", "3.4e-2"}, {"0.05", "2.1e-3"}}, {"fit-left: none"});
  h::CsvFile csv = h::read_csv(path);
  CHECK(csv.command == "sweep-k");
  CHECK(csv.columns == std::vector<std::string>{"k", "error"});
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[1][0] == "0.05");
  CHECK(h::echo_to_string(csv.echo) == "q=2 digits=16 T=30");
}

TEST_CASE("run_solve writes a loadable trajectory and is deterministic") {
  TempDir dir;
  h::SolveRequest req;
  req.digits = 24;
  req.q = 3;
  req.dt = "0.01";
  req.T = "0.5";
  req.out = dir.file("a.traj");

  h::SolveOutcome o1 = h::run_solve(req);
  CHECK(o1.total_steps == 50);
  req.out = dir.file("b.traj");
  h::SolveOutcome o2 = h::run_solve(req);
  CHECK(o1.final_state == o2.final_state);
  CHECK(slurp(dir.file("a.traj")) == slurp(dir.file("b.traj")));

  PrecisionContext ctx = make_context(24);
  Trajectory traj = Trajectory::load(dir.file("a.traj"), ctx);
  CHECK(traj.intervals() == 50);
  CHECK(traj.info().name == "lorenz");

  // T = 0 is rejected.
  h::SolveRequest bad = req;
  bad.T = "0";
  CHECK_THROWS_AS(h::run_solve(bad), DomainError);
}

TEST_CASE("checkpoint + resume reproduces the uninterrupted run bit-identically") {
  TempDir dir;
  h::SolveRequest req;
  req.digits = 16;
  req.q = 2;
  req.dt = "0.01";
  req.T = "1";
  req.out = dir.file("full.traj");
  req.checkpoint_every = 40;
  req.checkpoint_path = dir.file("ck.txt");
  h::SolveOutcome full = h::run_solve(req);

  h::Checkpoint ck = h::read_checkpoint(dir.file("ck.txt"));
  CHECK(ck.step == 80);  // last checkpoint before the end

  h::SolveRequest resume = req;
  resume.resume_from = dir.file("ck.txt");
  resume.out = dir.file("tail.traj");
  resume.checkpoint_every = 0;
  h::SolveOutcome tail = h::run_solve(resume);
  CHECK(tail.final_state == full.final_state);

  // Config mismatch is refused.
  h::SolveRequest wrong = resume;
  wrong.dt = "0.02";
  CHECK_THROWS_AS(h::run_solve(wrong), ConfigError);
}

TEST_CASE("pair-converge: identical orders never diverge; ordering holds") {
  TempDir dir;
  h::PairRequest req;
  req.digits = 16;
  req.q_low = 2;
  req.q_high = 2;
  req.dt = "0.02";
  req.T_max = "2";
  req.out = dir.file("pair_same.csv");
  h::PairOutcome same = h::run_pair_converge(req);
  CHECK(same.degenerate_equal_orders);
  CHECK(!same.report.t_div.has_value());

  // Distinct orders at a coarse step diverge quickly under a tight tol.
  h::PairRequest diff = req;
  diff.q_low = 1;
  diff.q_high = 3;
  diff.T_max = "5";
  diff.tol = "1e-10";
  diff.out = dir.file("pair_diff.csv");
  h::PairOutcome out = h::run_pair_converge(diff);
  REQUIRE(out.report.t_div.has_value());
  CHECK(out.report.t_div->to_double() > 0.0);
  CHECK(out.report.t_div->to_double() < 5.0);

  // q_low > q_high is a config error.
  h::PairRequest bad = diff;
  bad.q_low = 4;
  CHECK_THROWS_AS(h::run_pair_converge(bad), ConfigError);
}

TEST_CASE("pair-converge matches stored-trajectory divergence_time") {
  // The streaming scan and the Trajectory-based operation agree on t_div.
  h::PairRequest req;
  req.digits = 16;
  req.q_low = 1;
  req.q_high = 3;
  req.dt = "0.02";
  req.T_max = "5";
  req.tol = "1e-8";
  req.sample_dt = "0.25";
  h::PairOutcome streamed = h::run_pair_converge(req);

  PrecisionContext ctx = make_context(16);
  LorenzSystem sys(LorenzParams::standard(ctx));
  Vector u0(ctx, {1, 0, 0});
  SolverConfig c1 = SolverConfig::make(ctx, 1, ctx.parse("0.02"));
  SolverConfig c3 = SolverConfig::make(ctx, 3, ctx.parse("0.02"));
  Trajectory t1 = integrate(sys, u0, BigScalar(ctx, 5), c1);
  Trajectory t3 = integrate(sys, u0, BigScalar(ctx, 5), c3);
  DivergenceReport direct =
      divergence_time(t1, t3, ctx.parse("1e-8"), ctx.parse("0.25"));

  REQUIRE(streamed.report.t_div.has_value());
  REQUIRE(direct.t_div.has_value());
  CHECK(streamed.report.t_div->str_exact() == direct.t_div->str_exact());
}

TEST_CASE("sweep-k: reference validation, fits, cache reuse") {
  TempDir dir;
  h::SweepRequest req;
  req.digits = 10;
  req.q = 1;
  req.T = "2";
  req.k_list = {"0.2", "0.1", "0.05", "0.025", "0.0125", "0.00625"};
  req.reference.q = 4;
  req.reference.digits = 32;
  req.reference.dt = "0.01";
  req.cache_dir = dir.file("cache");
  req.out = dir.file("sweep.csv");
  h::SweepOutcome out = h::run_sweep(req);
  REQUIRE(out.rows.size() == 6);
  // Rows come back in ascending k order.
  PrecisionContext ctx10 = make_context(10);
  CHECK(parse_decimal(out.rows.front().first, ctx10) <
        parse_decimal(out.rows.back().first, ctx10));
  // On [0, 2] discretization dominates everywhere: expect a right fit with
  // slope near 2 and possibly no left branch.
  REQUIRE(out.right_fit.has_value());
  CHECK(out.right_fit->slope.to_double() == doctest::Approx(2.0).epsilon(0.2));

  // Cache: a second run must not recompute the reference (file mtime equal).
  auto cache_files = fs::directory_iterator(dir.file("cache"));
  int n_cache = 0;
  fs::path ref_file;
  for (const auto& e : cache_files) {
    ++n_cache;
    ref_file = e.path();
  }
  CHECK(n_cache == 1);
  auto stamp = fs::last_write_time(ref_file);
  req.out = dir.file("sweep2.csv");
  h::run_sweep(req);
  CHECK(fs::last_write_time(ref_file) == stamp);
  CHECK(slurp(dir.file("sweep.csv")) == slurp(dir.file("sweep2.csv")));

  // Non-dominating reference is refused.
  h::SweepRequest bad = req;
  bad.reference.q = 1;
  CHECK_THROWS_AS(h::run_sweep(bad), ConfigError);
  h::SweepRequest bad2 = req;
  bad2.reference.digits = 10;
  CHECK_THROWS_AS(h::run_sweep(bad2), ConfigError);
}

TEST_CASE("stability: factors CSV and rate fit on a short horizon") {
  TempDir dir;
  h::StabilityRequest req;
  req.digits = 32;
  req.q = 4;
  req.dt = "0.01";
  req.T_list = {"1", "2", "3"};
  req.out = dir.file("stab.csv");
  h::StabilityOutcome out = h::run_stability(req);
  REQUIRE(out.rows.size() == 3);
  for (const auto& r : out.rows) CHECK(r.error.empty());
  REQUIRE(out.rate_fit.has_value());

  h::CsvFile csv = h::read_csv(dir.file("stab.csv"));
  CHECK(csv.columns.size() == 9);
  REQUIRE(csv.rows.size() == 3);
  // Mantissa/exponent split: mantissa parses as decimal in [1, 10).
  PrecisionContext ctx = make_context(32);
  BigScalar m = parse_decimal(csv.rows[0][1], ctx);
  CHECK(m >= BigScalar(ctx, 1));
  CHECK(m < BigScalar(ctx, 10));
}

TEST_CASE("calibrate + predict round-trip through files") {
  TempDir dir;
  // Build two synthetic sweep CSVs straight from the reported-constants
  // model, then calibrate on them and check the constants come back.
  PrecisionContext ctx = make_context(64);
  ErrorModel truth = ErrorModel::reported_constants(ctx);
  const BigScalar eps = pow10(-16, ctx);
  const BigScalar T(ctx, 40);

  std::vector<std::string> files;
  for (int q : {2, 3}) {
    std::vector<std::vector<std::string>> rows;
    BigScalar k_star = optimal_timestep(q, eps);
    for (double f : {1e-3, 3e-3, 1e-2, 3e-2, 30.0, 100.0, 300.0, 1000.0}) {
      std::ostringstream fs_;
      fs_ << f;
      BigScalar k = k_star * ctx.parse(fs_.str());
      BigScalar e = eval_model(truth, BigScalar(ctx, 0), q, k, eps, T);
      rows.push_back({k.str_exact(), e.str_exact()});
    }
    std::string path = dir.file("sweep_q" + std::to_string(q) + ".csv");
    h::write_csv(path, "sweep-k",
                 {{"problem", "lorenz"},
                  {"digits", "16"},
                  {"q", std::to_string(q)},
                  {"T", "40"},
                  {"k_list", "synthetic"},
                  {"u0", "1,0,0"},
                  {"ref_q", "9"},
                  {"ref_digits", "64"},
                  {"ref_dt", "0.001"},
                  {"saturation", "1"},
                  {"workers", "1"}},
                 {"k", "error"}, rows);
    files.push_back(path);
  }

  h::CalibrateRequest creq;
  creq.sweep_files = files;
  creq.gamma = "0.388";
  creq.out = dir.file("model.txt");
  h::CalibrateOutcome cal = h::run_calibrate(creq);
  CHECK(abs(cal.model.c2(2) / truth.c2(2) - BigScalar(ctx, 1)) <
        ctx.parse("1e-4"));
  CHECK(abs(cal.model.c3(3) / truth.c3(3) - BigScalar(ctx, 1)) <
        ctx.parse("1e-4"));

  // predict with the calibrated model and with the reported constants.
  h::PredictRequest preq;
  preq.model_file = dir.file("model.txt");
  preq.q = 2;
  preq.eps = "1e-16";
  preq.T = "40";
  h::PredictOutcome pred = h::run_predict(preq);
  CHECK(!pred.predicted_error.empty());

  h::PredictRequest deep;
  deep.q = 100;
  deep.eps = "1e-420";
  deep.target_eps = "0.001";
  h::PredictOutcome pp = h::run_predict(deep);
  PrecisionContext pctx = make_context(64);
  BigScalar k = parse_decimal(pp.optimal_dt, pctx);
  CHECK(k > pctx.parse("0.007"));
  CHECK(k < pctx.parse("0.009"));
  CHECK(parse_decimal(pp.horizon, pctx).cmp(1050) == 0);
}

TEST_CASE("quad-table emission and replay determinism") {
  TempDir dir;
  h::QuadTableRequest req;
  req.family = "legendre";
  req.n = 4;
  req.digits = 32;
  req.out = dir.file("quad.csv");
  h::run_quad_table(req, std::cout);

  const std::string replayed = dir.file("quad_replay.csv");
  CHECK(h::run_replay(dir.file("quad.csv"), replayed) == "quad-table");
  CHECK(slurp(dir.file("quad.csv")) == slurp(replayed));
}

TEST_CASE("replay reproduces a sweep bit-identically") {
  TempDir dir;
  h::SweepRequest req;
  req.digits = 10;
  req.q = 1;
  req.T = "1";
  req.k_list = {"0.1", "0.05", "0.025"};
  req.reference.q = 4;
  req.reference.digits = 24;
  req.reference.dt = "0.01";
  req.cache_dir = dir.file("cache");
  req.out = dir.file("s.csv");
  h::run_sweep(req);
  // Replay re-reads the echo from the file; cache_dir defaults inside the
  // replayed request, so run it from the temp dir's perspective by pointing
  // the default cache at an absolute location via the recorded config.
  const std::string out2 = dir.file("s_replay.csv");
  h::run_replay(dir.file("s.csv"), out2);
  CHECK(slurp(dir.file("s.csv")) == slurp(out2));
}

TEST_CASE("cgode CLI end-to-end: exit codes and predict output") {
  const std::string cli = CGODE_CLI_PATH;
  TempDir dir;

  // Formula identities through the real binary.
  std::string cmd = cli + " predict -q 100 --eps 1e-420 > " +
                    dir.file("pred.txt") + " 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  std::string pred = slurp(dir.file("pred.txt"));
  CHECK(pred.find("horizon: 1.05") != std::string::npos);

  // Config failure exit code.
  std::string bad = cli + " solve -q 0 --dt 0.1 --tmax 1 2> /dev/null";
  int rc = std::system(bad.c_str());
  CHECK(WEXITSTATUS(rc) == h::kConfigFailure);

  // IO failure exit code.
  std::string io = cli + " replay /nonexistent.csv --out " +
                   dir.file("x.csv") + " 2> /dev/null";
  rc = std::system(io.c_str());
  CHECK(WEXITSTATUS(rc) == h::kIoFailure);

  // quad-table to stdout.
  std::string quad = cli + " quad-table -n 2 --digits 16 > " +
                     dir.file("quad.txt");
  CHECK(std::system(quad.c_str()) == 0);
  std::string qt = slurp(dir.file("quad.txt"));
  CHECK(qt.find("2.113248654051871e-1") != std::string::npos);
}
