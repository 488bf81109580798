// cgode: arbitrary-precision continuous-Galerkin ODE toolkit CLI.

#include <CLI11.hpp>

#include <iostream>

#include "cgode/harness.hpp"

namespace h = cgode::harness;

namespace {

void print_fit(const char* label, const std::optional<cgode::LineFit>& fit,
               const std::string& note) {
  if (fit) {
    std::cout << label << ": slope=" << fit->slope.str(8)
              << " intercept=" << fit->intercept.str(8)
              << " rms=" << fit->rms_residual.str(6) << " n=" << fit->n_points
              << "\n";
  } else {
    std::cout << label << ": " << note << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arbitrary-precision cG(q) ODE toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value defaults file");

  h::SolveRequest solve_req;
  h::PairRequest pair_req;
  h::SweepRequest sweep_req;
  h::StabilityRequest stab_req;
  h::CalibrateRequest cal_req;
  h::PredictRequest pred_req;
  h::QuadTableRequest quad_req;
  std::string replay_in, replay_out;

  auto add_common = [](CLI::App* cmd, std::string& problem, int& digits,
                       std::vector<std::string>& u0) {
    cmd->add_option("--problem", problem, "problem name")
        ->default_str("lorenz");
    cmd->add_option("--digits", digits, "significant decimal digits");
    cmd->add_option("--u0", u0, "initial state components (decimal strings)")
        ->delimiter(',');
  };

  auto* solve = app.add_subcommand("solve", "integrate and persist a trajectory");
  add_common(solve, solve_req.problem, solve_req.digits, solve_req.u0);
  solve->add_option("-q,--order", solve_req.q, "polynomial degree q")->required();
  solve->add_option("--dt", solve_req.dt, "time step")->required();
  solve->add_option("--tmax", solve_req.T, "final time T")->required();
  solve->add_option("--tol", solve_req.residual_tol,
                    "discrete residual tolerance (relative)");
  solve->add_option("--out", solve_req.out, "trajectory output path");
  solve->add_option("--checkpoint-every", solve_req.checkpoint_every,
                    "steps between checkpoints (0 = off)");
  solve->add_option("--checkpoint", solve_req.checkpoint_path,
                    "checkpoint file path");
  solve->add_option("--resume", solve_req.resume_from,
                    "resume from checkpoint file");
  solve->add_flag("--no-store", [&](std::int64_t) {
    solve_req.store_trajectory = false;
  }, "do not keep the trajectory in memory (implies no --out)");
  solve->add_option("--param", solve_req.param_overrides,
                    "problem parameter override key=value (repeatable)");
  solve->add_flag("--guess-previous", solve_req.guess_previous,
                  "seed Newton with the previous interval's polynomial");
  solve->add_flag("--progress", solve_req.progress, "report progress to stderr");
  solve->add_flag("--unattended", [&](std::int64_t) {
    solve_req.progress = true;
    if (solve_req.checkpoint_every == 0) solve_req.checkpoint_every = 100000;
  }, "long-run mode: progress + default checkpoint cadence");

  auto* pair = app.add_subcommand("pair-converge",
                                  "divergence time of a low/high order pair");
  add_common(pair, pair_req.problem, pair_req.digits, pair_req.u0);
  pair->add_option("--q-low", pair_req.q_low, "lower order")->required();
  pair->add_option("--q-high", pair_req.q_high, "higher order")->required();
  pair->add_option("--dt", pair_req.dt, "shared time step")->required();
  pair->add_option("--tmax", pair_req.T_max, "scan horizon")->required();
  pair->add_option("--tol", pair_req.tol,
                   "agreement tolerance (default max(1e-16, 10^(2-digits)))");
  pair->add_option("--sample-dt", pair_req.sample_dt, "gap sampling interval");
  pair->add_option("--out", pair_req.out, "CSV output path");

  auto* sweep = app.add_subcommand("sweep-k",
                                   "final-time error versus step size");
  add_common(sweep, sweep_req.problem, sweep_req.digits, sweep_req.u0);
  sweep->add_option("-q,--order", sweep_req.q, "polynomial degree q")->required();
  sweep->add_option("--tmax", sweep_req.T, "final time T")->required();
  sweep->add_option("--k-list", sweep_req.k_list, "step sizes")
      ->delimiter(',')
      ->required();
  sweep->add_option("--ref-q", sweep_req.reference.q, "reference order (0 = q+3)");
  sweep->add_option("--ref-digits", sweep_req.reference.digits,
                    "reference digits (0 = 2*digits)");
  sweep->add_option("--ref-dt", sweep_req.reference.dt,
                    "reference step (default k_min/2)");
  sweep->add_option("--cache-dir", sweep_req.cache_dir,
                    "reference cache directory");
  sweep->add_option("--saturation", sweep_req.saturation,
                    "errors above this are excluded from slope fits");
  sweep->add_option("--workers", sweep_req.workers, "concurrent solves");
  sweep->add_option("--out", sweep_req.out, "CSV output path");

  auto* stab = app.add_subcommand("stability",
                                  "dual solves and stability factor growth");
  add_common(stab, stab_req.problem, stab_req.digits, stab_req.u0);
  stab->add_option("-q,--order", stab_req.q, "primal degree");
  stab->add_option("--dt", stab_req.dt, "primal step");
  stab->add_option("--primal", stab_req.primal_file,
                   "use a stored primal trajectory");
  stab->add_option("--T-list", stab_req.T_list, "dual horizons")
      ->delimiter(',')
      ->required();
  stab->add_option("--dual-q", stab_req.dual_q, "dual degree (0 = auto)");
  stab->add_option("--dual-dt", stab_req.dual_dt, "dual step (default primal)");
  stab->add_option("--zt", stab_req.z_T, "terminal dual condition")
      ->delimiter(',');
  stab->add_option("-p", stab_req.p, "derivative order p in S_G");
  stab->add_flag(
      "--no-fit", [&](std::int64_t) { stab_req.fit = false; },
      "suppress the growth-rate fit");
  stab->add_option("--extrapolate", stab_req.extrapolate_T,
                   "extrapolate log10 S_C to this horizon");
  stab->add_option("--workers", stab_req.workers, "concurrent dual solves");
  stab->add_option("--out", stab_req.out, "CSV output path");

  auto* cal = app.add_subcommand("calibrate",
                                 "fit model constants from sweep tables");
  cal->add_option("sweeps", cal_req.sweep_files, "sweep-k CSV files")
      ->required();
  cal->add_option("--gamma", cal_req.gamma, "growth exponent per time unit");
  cal->add_option("--c1", cal_req.c1, "data-error constant (default 0.5)");
  cal->add_option("--digits", cal_req.digits, "working digits");
  cal->add_option("--out", cal_req.out, "model file path");

  auto* pred = app.add_subcommand("predict",
                                  "optimal step, expected error, horizons");
  pred->add_option("--model", pred_req.model_file,
                   "model file (default: reported constants)");
  pred->add_option("--digits", pred_req.digits, "working digits");
  pred->add_option("-q,--order", pred_req.q, "polynomial degree q")->required();
  pred->add_option("--eps", pred_req.eps, "machine epsilon, e.g. 1e-16")
      ->required();
  pred->add_option("--dt", pred_req.dt, "step (default: optimal)");
  pred->add_option("--tmax", pred_req.T, "horizon for the error prediction");
  pred->add_option("--target-eps", pred_req.target_eps,
                   "accuracy target for T_eps");
  pred->add_option("--data-err", pred_req.data_err, "initial data error");
  pred->add_option("--out", pred_req.out, "report output path");

  auto* quad = app.add_subcommand("quad-table", "emit quadrature nodes/weights");
  quad->add_option("--family", quad_req.family, "legendre|lobatto");
  quad->add_option("-n", quad_req.n, "point count")->required();
  quad->add_option("--digits", quad_req.digits, "working digits");
  quad->add_option("--out", quad_req.out, "CSV output path");

  auto* replay = app.add_subcommand("replay",
                                    "re-run the command recorded in a file");
  replay->add_option("file", replay_in, "recorded output file")->required();
  replay->add_option("--out", replay_out, "output path for the re-run")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      if (!solve_req.store_trajectory) solve_req.out.clear();
      h::SolveOutcome out = h::run_solve(solve_req);
      std::cout << "steps: " << out.total_steps << "\n";
      std::cout << "newton: total=" << out.stats.newton_iterations
                << " max_per_step=" << out.stats.max_newton_iterations << "\n";
      std::cout << "final:";
      for (const auto& c : out.final_state) std::cout << " " << c;
      std::cout << "\n";
      if (!out.trajectory_path.empty()) {
        std::cout << "trajectory: " << out.trajectory_path << "\n";
      }
    } else if (pair->parsed()) {
      h::PairOutcome out = h::run_pair_converge(pair_req);
      std::cout << "t_div: "
                << (out.report.t_div ? out.report.t_div->str(12)
                                     : std::string("never"))
                << "\n";
      std::cout << "max_gap_before: " << out.report.max_gap_before.str(6)
                << "\n";
      std::cout << "tol: " << out.report.tolerance.str(6) << "\n";
    } else if (sweep->parsed()) {
      h::SweepOutcome out = h::run_sweep(sweep_req);
      for (const auto& [k, e] : out.rows) {
        std::cout << k << "," << e << "\n";
      }
      print_fit("fit-left", out.left_fit, out.left_fit_note);
      print_fit("fit-right", out.right_fit, out.right_fit_note);
    } else if (stab->parsed()) {
      h::StabilityOutcome out = h::run_stability(stab_req);
      for (const auto& r : out.rows) {
        if (!r.error.empty()) {
          std::cout << "T=" << r.T << " failed: " << r.error << "\n";
        } else {
          std::cout << "T=" << r.T << " S_D=" << r.S_D << " S_G=" << r.S_G
                    << " S_C=" << r.S_C << " S_C2=" << r.S_C2 << "\n";
        }
      }
      if (out.rate_fit) {
        std::cout << "rate: " << out.rate_fit->slope.str(8)
                  << " decades/time-unit (intercept "
                  << out.rate_fit->intercept.str(8) << ")\n";
      }
      if (!out.extrapolated_log10_SC.empty()) {
        std::cout << "extrapolated log10 S_C(" << stab_req.extrapolate_T
                  << ") = " << out.extrapolated_log10_SC << "\n";
      }
    } else if (cal->parsed()) {
      h::CalibrateOutcome out = h::run_calibrate(cal_req);
      std::cout << "gamma: " << out.model.gamma().str(8) << "\n";
      std::cout << "c1: " << out.model.c1().str(8) << "\n";
      std::cout << "beta: " << out.model.beta().str(8) << "\n";
      for (const auto& [q, c2] : out.model.c2_map()) {
        std::cout << "q=" << q << " c2=" << c2.str(8)
                  << " c3=" << out.model.c3(q).str(8)
                  << " alpha=" << out.model.alpha(q).str(8) << "\n";
      }
      if (!out.model_path.empty()) {
        std::cout << "model: " << out.model_path << "\n";
      }
    } else if (pred->parsed()) {
      h::PredictOutcome out = h::run_predict(pred_req);
      std::cout << "optimal_dt: " << out.optimal_dt << "\n";
      if (!out.predicted_error.empty()) {
        std::cout << "predicted_error: " << out.predicted_error << "\n";
      }
      std::cout << "horizon: " << out.horizon << "\n";
      if (!out.horizon_target.empty()) {
        std::cout << "horizon_target: " << out.horizon_target;
        if (!out.horizon_target_prefactor.empty()) {
          std::cout << " (model prefactor " << out.horizon_target_prefactor
                    << " substituted for 0.002)";
        }
        std::cout << "\n";
      }
    } else if (quad->parsed()) {
      h::run_quad_table(quad_req, std::cout);
    } else if (replay->parsed()) {
      const std::string cmd = h::run_replay(replay_in, replay_out);
      std::cout << "replayed " << cmd << " -> " << replay_out << "\n";
    }
  } catch (const cgode::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return h::kConfigFailure;
  } catch (const cgode::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return h::kConfigFailure;
  } catch (const cgode::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return h::kConfigFailure;
  } catch (const cgode::CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return h::kCalibrationFailure;
  } catch (const cgode::ConvergenceError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return h::kSolverFailure;
  } catch (const cgode::SingularMatrixError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return h::kSolverFailure;
  } catch (const cgode::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return h::kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return h::kUnexpected;
  }
  return h::kOk;
}
